//! Surface-energy densities and their concentration.

use serde::{Deserialize, Serialize};

use crate::energy::{Cells1D, Cells2D, PhaseField1D, PhaseField2D};
use crate::error::{contract, Result};
use crate::mesh::Grid1D;

/// Half-width multiplier for the concentration window `[L/2 - K eps, L/2 + K eps]`.
pub const DIRAC_WINDOW_K: f64 = 10.0;
/// Mass fraction inside the window that counts as concentration.
pub const DIRAC_FRACTION: f64 = 0.9;

/// Per-cell surface densities of a 1D state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceDensities {
    /// `eps v'^2`.
    pub gradient: Vec<f64>,
    /// `(1 - v)^2 / (4 eps)`.
    pub potential: Vec<f64>,
    /// `|w'| = (1 - v) |v'|` with `w = Phi(v)`.
    pub w_gradient: Vec<f64>,
}

impl SurfaceDensities {
    /// `eps v'^2 + (1 - v)^2 / (4 eps)` per cell.
    pub fn surface(&self) -> Vec<f64> {
        self.gradient.iter().zip(&self.potential).map(|(a, b)| a + b).collect()
    }
}

pub fn surface_densities(state: &PhaseField1D) -> SurfaceDensities {
    let c = Cells1D::new(state.grid().h(), state.u().values(), state.v().values(), state.params());
    let eps = state.eps();
    SurfaceDensities {
        gradient: c.dv.iter().map(|d| eps * d * d).collect(),
        potential: c.potential.clone(),
        w_gradient: c.vbar.iter().zip(&c.dv).map(|(vb, d)| (1.0 - vb) * d.abs()).collect(),
    }
}

/// `int` of a per-cell density over the closed window `[center - hw, center + hw]`,
/// partial cells weighted by their overlap.
pub fn mass_in_window(grid: &Grid1D, density: &[f64], center: f64, half_width: f64) -> Result<f64> {
    if density.len() != grid.n_cells() {
        return contract(format!("density has {} cells, grid has {}", density.len(), grid.n_cells()));
    }
    if !(half_width >= 0.0) {
        return contract("window half-width must be non-negative");
    }
    let (lo, hi) = (center - half_width, center + half_width);
    let tol = 1e-12 * grid.length();
    if lo < -tol || hi > grid.length() + tol {
        return contract(format!("window [{lo}, {hi}] leaves [0, {}]", grid.length()));
    }
    Ok(overlap_mass(grid, density, lo, hi))
}

fn overlap_mass(grid: &Grid1D, density: &[f64], lo: f64, hi: f64) -> f64 {
    let h = grid.h();
    let first = ((lo / h).floor().max(0.0) as usize).min(grid.n_cells());
    let last = ((hi / h).ceil().max(0.0) as usize).min(grid.n_cells());
    (first..last)
        .map(|i| {
            let (a, b) = (grid.node(i), grid.node(i + 1));
            let overlap = (b.min(hi) - a.max(lo)).max(0.0);
            overlap * density[i]
        })
        .sum()
}

/// Surface masses outside the window `[L/2 - hw, L/2 + hw]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FarField {
    pub exclusion_half_width: f64,
    /// Mass of `eps v'^2`.
    pub gradient: f64,
    /// Mass of `(1 - v)^2 / (4 eps)`.
    pub potential: f64,
    pub surface: f64,
}

/// Surface energy outside the exclusion window about `L/2`. The excluded
/// part is subtracted from the full cell sums, so that window mass plus far
/// field reproduces the energy terms.
pub fn far_field_report(state: &PhaseField1D, exclusion_half_width: f64) -> Result<FarField> {
    let grid = state.grid();
    let d = surface_densities(state);
    let c = 0.5 * grid.length();
    let excluded_g = mass_in_window(grid, &d.gradient, c, exclusion_half_width)?;
    let excluded_p = mass_in_window(grid, &d.potential, c, exclusion_half_width)?;
    let gradient = grid.integrate(&d.gradient) - excluded_g;
    let potential = grid.integrate(&d.potential) - excluded_p;
    Ok(FarField { exclusion_half_width, gradient, potential, surface: gradient + potential })
}

/// Concentration of `eps v'^2` at the midpoint.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Concentration {
    pub window_mass: f64,
    pub total_mass: f64,
    pub fraction: f64,
    pub concentrated: bool,
}

/// Mass of `eps v'^2` in `[L/2 - K eps, L/2 + K eps]` and whether it holds at
/// least [`DIRAC_FRACTION`] of the total. The window is clipped to the domain.
pub fn dirac_concentration(state: &PhaseField1D) -> Concentration {
    let grid = state.grid();
    let d = surface_densities(state);
    let c = 0.5 * grid.length();
    let hw = (DIRAC_WINDOW_K * state.eps()).min(c);
    let window_mass = overlap_mass(grid, &d.gradient, c - hw, c + hw);
    let total_mass = grid.integrate(&d.gradient);
    let fraction = if total_mass > 0.0 { window_mass / total_mass } else { 0.0 };
    Concentration { window_mass, total_mass, fraction, concentrated: total_mass > 0.0 && fraction >= DIRAC_FRACTION }
}

/// Per-cell `eps grad v (x) grad v` of a 2D state.
pub fn varifold_moment_2d(state: &PhaseField2D) -> Vec<[[f64; 2]; 2]> {
    let c = Cells2D::new(state.grid(), state.u().values(), state.v().values(), state.params());
    let eps = state.eps();
    c.v_outer.iter().map(|m| [[eps * m[0][0], eps * m[0][1]], [eps * m[1][0], eps * m[1][1]]]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{at_energy, at_energy_2d, Parameters};
    use crate::mesh::{Grid2D, NodalField1D, NodalField2D};
    use approx::assert_relative_eq;

    fn profile_state(eps: f64, n: usize) -> PhaseField1D {
        let grid = Grid1D::new(2.0, n).unwrap();
        let p = Parameters::new(eps, eps * eps).unwrap();
        let v = NodalField1D::from_fn(grid, |x| {
            let raw = 1.0 - (-(x - 1.0).abs() / (2.0 * eps)).exp();
            // force the boundary value used by admissible pairs
            if x == 0.0 || x == 2.0 {
                1.0
            } else {
                raw
            }
        })
        .unwrap();
        PhaseField1D::new(NodalField1D::constant(grid, 0.0).unwrap(), v, p, (0.0, 0.0)).unwrap()
    }

    #[test]
    fn unit_v_has_no_surface_density() {
        let grid = Grid1D::new(2.0, 10).unwrap();
        let p = Parameters::new(0.1, 0.01).unwrap();
        let s = PhaseField1D::with_linear_u(NodalField1D::constant(grid, 1.0).unwrap(), p, (0.0, 1.0)).unwrap();
        let d = surface_densities(&s);
        assert!(d.gradient.iter().chain(&d.potential).chain(&d.w_gradient).all(|&x| x == 0.0));
        assert_eq!(far_field_report(&s, 0.25).unwrap().surface, 0.0);
        assert!(!dirac_concentration(&s).concentrated);
    }

    #[test]
    fn profile_window_mass_is_one_half() {
        let s = profile_state(0.01, 8000);
        let d = surface_densities(&s);
        let m = mass_in_window(s.grid(), &d.gradient, 1.0, 0.1).unwrap();
        assert!((m - 0.5 * (1.0 - (-10.0f64).exp())).abs() < 2e-3, "{m}");
        let full = mass_in_window(s.grid(), &d.gradient, 1.0, 1.0).unwrap();
        assert_relative_eq!(full, at_energy(&s).grad_surface, max_relative = 1e-12);
        assert!(dirac_concentration(&s).concentrated);
        let w: f64 = s.grid().integrate(&d.w_gradient);
        assert!((w - 1.0).abs() < 1e-2, "{w}");
    }

    #[test]
    fn window_mass_is_additive() {
        let s = profile_state(0.05, 400);
        let d = surface_densities(&s).gradient;
        let g = s.grid();
        let left = mass_in_window(g, &d, 0.6, 0.3).unwrap();
        let right = mass_in_window(g, &d, 1.2, 0.3).unwrap();
        let both = mass_in_window(g, &d, 0.9, 0.6).unwrap();
        assert_relative_eq!(left + right, both, max_relative = 1e-13);
        assert!(mass_in_window(g, &d, 1.9, 0.2).is_err());
    }

    #[test]
    fn x_only_profile_gives_rank_one_moment() {
        let grid = Grid2D::new(1.0, 1.0, 16, 16).unwrap();
        let p = Parameters::new(0.1, 0.01).unwrap();
        let g = NodalField2D::from_fn(grid, |x, _| x).unwrap();
        let v = NodalField2D::from_fn(grid, |x, y| {
            if grid_boundary(x, y) {
                1.0
            } else {
                1.0 - 0.5 * (std::f64::consts::PI * x).sin()
            }
        })
        .unwrap();
        let s = PhaseField2D::from_extension(g, p).unwrap().with_v(v).unwrap();
        let m = varifold_moment_2d(&s);
        // rows away from the top and bottom edges see no y-variation
        for j in 1..grid.ny() - 1 {
            for i in 0..grid.nx() {
                let c = m[grid.cell_index(i, j)];
                assert_eq!((c[0][1], c[1][0], c[1][1]), (0.0, 0.0, 0.0));
            }
        }
        let tr: f64 = m.iter().map(|a| a[0][0] + a[1][1]).sum::<f64>() * grid.cell_area();
        assert_relative_eq!(tr, at_energy_2d(&s).grad_surface, max_relative = 1e-12);
    }

    fn grid_boundary(x: f64, y: f64) -> bool {
        x == 0.0 || y == 0.0 || (x - 1.0).abs() < 1e-12 || (y - 1.0).abs() < 1e-12
    }
}
