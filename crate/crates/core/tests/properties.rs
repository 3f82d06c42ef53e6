//! Randomized invariants of the discrete energy, the solvers and the diagnostics.

use atfield::continuation::extrapolate;
use atfield::criticality::{classify_v_mid, flux_constant, Branch};
use atfield::elliptic::{solve_u_1d, solve_v_1d};
use atfield::energy::{at_energy, ms_energy_1d, Parameters, PhaseField1D, PiecewiseAffine1D};
use atfield::io::{parse_state_csv, state_csv};
use atfield::measures::{mass_in_window, surface_densities};
use atfield::mesh::{Grid1D, NodalField1D};
use atfield::variations::{outer_first, Direction1D};
use proptest::prelude::*;

/// A random admissible state: interior values free, boundary values fixed.
fn state_strategy() -> impl Strategy<Value = PhaseField1D> {
    (4usize..48, 0.5f64..3.0, 0.02f64..0.5, -1.0f64..1.0, -1.0f64..1.0).prop_flat_map(|(n, length, eps, g0, g1)| {
        (
            proptest::collection::vec(-2.0f64..2.0, n - 1),
            proptest::collection::vec(0.0f64..1.0, n - 1),
            0.0f64..1.0,
        )
            .prop_map(move |(ui, vi, eta_frac)| {
                let grid = Grid1D::new(length, n).unwrap();
                let mut u = vec![g0];
                u.extend(ui);
                u.push(g1);
                let mut v = vec![1.0];
                v.extend(vi);
                v.push(1.0);
                let params = Parameters::new(eps, eps * eps * eta_frac.max(1e-3)).unwrap();
                PhaseField1D::new(NodalField1D::new(grid, u).unwrap(), NodalField1D::new(grid, v).unwrap(), params, (g0, g1))
                    .unwrap()
            })
    })
}

fn interior_vec(n_nodes: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0f64..1.0, n_nodes - 2).prop_map(|mut v| {
        v.insert(0, 0.0);
        v.push(0.0);
        v
    })
}

fn direction(grid: Grid1D, phi: Vec<f64>, psi: Vec<f64>) -> Direction1D {
    Direction1D::new(NodalField1D::new(grid, phi).unwrap(), NodalField1D::new(grid, psi).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grid_nodes_are_uniform(length in 0.1f64..10.0, n in 4usize..500) {
        let g = Grid1D::new(length, n).unwrap();
        let x = g.nodes();
        prop_assert_eq!(x[0], 0.0);
        prop_assert_eq!(x[n], length);
        prop_assert!(x.windows(2).all(|w| w[1] > w[0]));
        prop_assert!((g.h() * n as f64 - length).abs() <= 4.0 * f64::EPSILON * length);
    }

    #[test]
    fn cell_gradient_of_affine_is_its_slope(n in 4usize..200, b in -5.0f64..5.0, m in -5.0f64..5.0) {
        let g = Grid1D::new(2.0, n).unwrap();
        let f = NodalField1D::from_fn(g, |x| b + m * x).unwrap();
        for d in f.cell_gradient() {
            prop_assert!((d - m).abs() <= 1e-11 * (1.0 + b.abs() + m.abs()) * n as f64);
        }
        let c = NodalField1D::constant(g, b).unwrap();
        prop_assert!(c.cell_gradient().iter().all(|&d| d == 0.0));
    }

    #[test]
    fn energy_is_nonnegative_and_satisfies_young(s in state_strategy()) {
        let e = at_energy(&s);
        prop_assert!(e.total >= 0.0);
        prop_assert!(e.modica_mortola <= e.surface() * (1.0 + 1e-12) + 1e-14);
        let gap = (e.grad_surface - e.potential_surface).abs();
        prop_assert!(gap <= e.equipartition_residual * (1.0 + 1e-12) + 1e-14);
    }

    #[test]
    fn energy_is_reflection_invariant(s in state_strategy()) {
        let (g0, g1) = s.boundary();
        let a = g0 + g1;
        let r = s.reflected(a).unwrap();
        prop_assert_eq!(r.boundary(), (a - g1, a - g0));
        let (e, er) = (at_energy(&s).total, at_energy(&r).total);
        prop_assert!((e - er).abs() <= 1e-12 * e.max(1.0));
    }

    #[test]
    fn u_solve_has_exact_flux_and_bounds(s in state_strategy()) {
        let t = solve_u_1d(&s).unwrap();
        let (c, dev) = flux_constant(&t);
        prop_assert!(dev <= 1e-8 * c.abs().max(1e-12) || dev <= 1e-12);
        let (g0, g1) = s.boundary();
        let bound = g0.abs().max(g1.abs()) + 1e-10;
        prop_assert!(t.u().values().iter().all(|x| x.abs() <= bound));
        prop_assert!(at_energy(&t).total <= at_energy(&s).total + 1e-12);
    }

    #[test]
    fn v_solve_obeys_the_maximum_principle(s in state_strategy()) {
        let t = solve_v_1d(&s).unwrap();
        prop_assert!(t.v().values().iter().all(|&x| (-1e-10..=1.0 + 1e-10).contains(&x)));
        prop_assert!(at_energy(&t).total <= at_energy(&s).total + 1e-12);
    }

    #[test]
    fn w_gradient_is_the_chain_rule(s in state_strategy()) {
        let d = surface_densities(&s);
        let vbar = s.v().cell_average();
        let dv = s.v().cell_gradient();
        for i in 0..vbar.len() {
            prop_assert_eq!(d.w_gradient[i], (1.0 - vbar[i]) * dv[i].abs());
        }
    }

    #[test]
    fn window_mass_is_additive_and_monotone(
        n in 4usize..100,
        dens in proptest::collection::vec(0.0f64..3.0, 100),
        a in 0.0f64..1.0,
        b in 0.0f64..1.0,
        c in 0.0f64..1.0,
    ) {
        let g = Grid1D::new(2.0, n).unwrap();
        let dens = &dens[..n];
        let mut p = [a * 2.0, b * 2.0, c * 2.0];
        p.sort_by(f64::total_cmp);
        let m = |lo: f64, hi: f64| mass_in_window(&g, dens, 0.5 * (lo + hi), 0.5 * (hi - lo)).unwrap();
        let (left, right, whole) = (m(p[0], p[1]), m(p[1], p[2]), m(p[0], p[2]));
        prop_assert!((left + right - whole).abs() <= 1e-12 * (1.0 + whole));
        prop_assert!(whole + 1e-15 >= left && whole + 1e-15 >= right);
        let total = m(0.0, 2.0);
        prop_assert!((total - g.integrate(dens)).abs() <= 1e-12 * (1.0 + total));
    }

    #[test]
    fn doubling_cstar_never_swaps_affine_and_jump(v in 0.0f64..1.0, eps in 1e-4f64..0.3, cstar in 0.05f64..4.0) {
        let before = classify_v_mid(v, eps, cstar);
        let after = classify_v_mid(v, eps, 2.0 * cstar);
        prop_assert!(!(before == Branch::Jump && after == Branch::Affine));
        prop_assert!(!(before == Branch::Affine && after == Branch::Jump));
        // with disjoint thresholds a classified state stays classified
        if after == Branch::Indeterminate && 2.0 * cstar * eps < 0.25 {
            prop_assert_ne!(before, Branch::Affine);
            prop_assert_ne!(before, Branch::Jump);
        }
    }

    #[test]
    fn state_csv_round_trips_bit_for_bit(s in state_strategy()) {
        let back = parse_state_csv(&state_csv(&s)).unwrap();
        prop_assert_eq!(back.u().values(), s.u().values());
        prop_assert_eq!(back.v().values(), s.v().values());
        prop_assert_eq!(back.params(), s.params());
        prop_assert_eq!(back.boundary(), s.boundary());
        prop_assert_eq!(at_energy(&back), at_energy(&s));
    }

    #[test]
    fn extrapolation_recovers_synthetic_limits(limit in -2.0f64..2.0, slope in -3.0f64..3.0, half in any::<bool>()) {
        prop_assume!(slope.abs() > 1e-3);
        let p = if half { 0.5 } else { 1.0 };
        let pairs: Vec<(f64, f64)> = [0.08, 0.04, 0.02, 0.01].iter().map(|&e: &f64| (e, limit + slope * e.powf(p))).collect();
        let fit = extrapolate(&pairs).unwrap();
        prop_assert_eq!(fit.exponent, p);
        prop_assert!((fit.limit - limit).abs() <= 1e-9);
        prop_assert!(fit.residual <= 1e-9);
    }

    #[test]
    fn ms_jump_beats_affine_iff_a_squared_exceeds_length(a in 0.05f64..3.0, length in 0.2f64..4.0) {
        let aff = ms_energy_1d(&PiecewiseAffine1D::affine(a, length).unwrap());
        let jump = ms_energy_1d(&PiecewiseAffine1D::centered_jump(a, length).unwrap());
        prop_assert!((aff - a * a / length).abs() <= 1e-12 * aff.max(1.0));
        prop_assert_eq!(aff < jump, a * a < length);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn outer_first_is_linear(
        (s, p1, q1, p2, q2) in state_strategy().prop_flat_map(|s| {
            let n = s.grid().n_nodes();
            (Just(s), interior_vec(n), interior_vec(n), interior_vec(n), interior_vec(n))
        }),
        alpha in -3.0f64..3.0,
    ) {
        let g = *s.grid();
        let d1 = direction(g, p1.clone(), q1.clone());
        let d2 = direction(g, p2.clone(), q2.clone());
        let sum = direction(
            g,
            p1.iter().zip(&p2).map(|(a, b)| alpha * a + b).collect(),
            q1.iter().zip(&q2).map(|(a, b)| alpha * a + b).collect(),
        );
        let (f1, f2, fs) = (outer_first(&s, &d1).unwrap(), outer_first(&s, &d2).unwrap(), outer_first(&s, &sum).unwrap());
        let scale = 1.0 + f1.abs() * alpha.abs() + f2.abs();
        prop_assert!((fs - (alpha * f1 + f2)).abs() <= 1e-10 * scale);
    }
}
