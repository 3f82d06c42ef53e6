//! File formats: the two-block state CSV, JSON reports and gnuplot data.
//!
//! Floats in CSV and `.dat` files are written with 17 significant digits,
//! enough to reload every value bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::criticality::{discrepancy_values, flux_values};
use crate::energy::{Parameters, PhaseField1D};
use crate::error::{Error, Result};
use crate::measures::surface_densities;
use crate::mesh::{Grid1D, NodalField1D};

const MAGIC: &str = "# atfield-state-1d";
const NODE_HEADER: &str = "x,u,v";
const CELL_HEADER: &str = "x,flux,discrepancy,eps_gradsq_density,potential_density,w_density";

/// A float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// The state CSV: metadata comments, a node block and a cell block.
pub fn state_csv(state: &PhaseField1D) -> String {
    let grid = state.grid();
    let (g0, g1) = state.boundary();
    let mut s = String::new();
    writeln!(s, "{MAGIC}").unwrap();
    for (k, v) in [("length", grid.length()), ("eps", state.eps()), ("eta", state.eta()), ("g0", g0), ("g1", g1)] {
        writeln!(s, "# {k} = {}", fmt_f64(v)).unwrap();
    }
    writeln!(s, "# block = nodes").unwrap();
    writeln!(s, "{NODE_HEADER}").unwrap();
    for (i, (u, v)) in state.u().values().iter().zip(state.v().values()).enumerate() {
        writeln!(s, "{},{},{}", fmt_f64(grid.node(i)), fmt_f64(*u), fmt_f64(*v)).unwrap();
    }
    writeln!(s, "# block = cells").unwrap();
    writeln!(s, "{CELL_HEADER}").unwrap();
    let flux = flux_values(state);
    let disc = discrepancy_values(state);
    let dens = surface_densities(state);
    for i in 0..grid.n_cells() {
        let row = [grid.midpoint(i), flux[i], disc[i], dens.gradient[i], dens.potential[i], dens.w_gradient[i]];
        let cols: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        writeln!(s, "{}", cols.join(",")).unwrap();
    }
    s
}

pub fn write_state_csv(path: &Path, state: &PhaseField1D) -> Result<()> {
    fs::write(path, state_csv(state))?;
    Ok(())
}

fn parse_err<T>(line: usize, msg: impl std::fmt::Display) -> Result<T> {
    Err(Error::Parse(format!("state CSV line {line}: {msg}")))
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.trim().parse::<f64>().or_else(|e| parse_err(line, format!("bad number {tok:?}: {e}")))
}

/// Parse a state CSV. Only the node block is read back; the cell block is
/// derived data and is checked for its row count.
pub fn parse_state_csv(text: &str) -> Result<PhaseField1D> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
    match lines.next() {
        Some((_, l)) if l == MAGIC => {}
        _ => return parse_err(1, format!("missing {MAGIC:?} header")),
    }
    let mut meta = std::collections::BTreeMap::new();
    let mut block = "";
    let mut nodes: Vec<[f64; 3]> = Vec::new();
    let mut cells = 0usize;
    for (ln, line) in lines {
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let Some((k, v)) = rest.split_once('=') else {
                return parse_err(ln, "comment lines must read `# key = value`");
            };
            let (k, v) = (k.trim(), v.trim());
            if k == "block" {
                block = match v {
                    "nodes" => "nodes",
                    "cells" => "cells",
                    other => return parse_err(ln, format!("unknown block {other:?}")),
                };
            } else {
                meta.insert(k.to_string(), parse_f64(v, ln)?);
            }
            continue;
        }
        match block {
            "nodes" if line == NODE_HEADER => {}
            "cells" if line == CELL_HEADER => {}
            "nodes" => {
                let toks: Vec<&str> = line.split(',').collect();
                if toks.len() != 3 {
                    return parse_err(ln, "node rows have 3 columns");
                }
                nodes.push([parse_f64(toks[0], ln)?, parse_f64(toks[1], ln)?, parse_f64(toks[2], ln)?]);
            }
            "cells" => {
                if line.split(',').count() != 6 {
                    return parse_err(ln, "cell rows have 6 columns");
                }
                cells += 1;
            }
            _ => return parse_err(ln, "data before the first block marker"),
        }
    }
    let get = |k: &str| meta.get(k).copied().ok_or_else(|| Error::Parse(format!("state CSV lacks `{k}`")));
    let (length, eps, eta, g0, g1) = (get("length")?, get("eps")?, get("eta")?, get("g0")?, get("g1")?);
    if nodes.len() < 2 {
        return Err(Error::Parse("state CSV needs at least two nodes".into()));
    }
    let grid = Grid1D::new(length, nodes.len() - 1)?;
    if cells != 0 && cells != grid.n_cells() {
        return Err(Error::Parse(format!("cell block has {cells} rows for {} cells", grid.n_cells())));
    }
    for (i, row) in nodes.iter().enumerate() {
        if (row[0] - grid.node(i)).abs() > 1e-12 * length.max(1.0) {
            return Err(Error::Parse(format!("node {i} at x = {} is off the uniform grid", row[0])));
        }
    }
    let u = NodalField1D::new(grid, nodes.iter().map(|r| r[1]).collect())?;
    let v = NodalField1D::new(grid, nodes.iter().map(|r| r[2]).collect())?;
    PhaseField1D::new(u, v, Parameters::new(eps, eta)?, (g0, g1))
}

pub fn read_state_csv(path: &Path) -> Result<PhaseField1D> {
    parse_state_csv(&fs::read_to_string(path)?)
}

/// Pretty-printed JSON.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Whitespace-separated columns with a commented header line.
pub fn dat_table(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = format!("# {}\n", header.join(" "));
    for r in rows {
        let cols: Vec<String> = r.iter().map(|&x| fmt_f64(x)).collect();
        s.push_str(&cols.join(" "));
        s.push('\n');
    }
    s
}

/// Node profile `x u v w` of a state for plotting.
pub fn profile_dat(state: &PhaseField1D) -> String {
    let w = crate::energy::w_field(state);
    let rows: Vec<Vec<f64>> = (0..state.grid().n_nodes())
        .map(|i| vec![state.grid().node(i), state.u().values()[i], state.v().values()[i], w.values()[i]])
        .collect();
    dat_table(&["x", "u", "v", "w"], &rows)
}

/// A gnuplot script plotting the sweep table and every profile file.
pub fn gnuplot_script(sweep_dat: &str, profiles: &[(f64, String)]) -> String {
    let mut s = String::from("set terminal pngcairo size 1200,500\nset key left top\n");
    writeln!(s, "set output 'sweep.png'\nset multiplot layout 1,2").unwrap();
    writeln!(s, "set logscale x\nset xlabel 'eps'").unwrap();
    writeln!(s, "plot '{sweep_dat}' using 1:3 with linespoints title 'energy', \\").unwrap();
    writeln!(s, "     '{sweep_dat}' using 1:4 with linespoints title 'c'").unwrap();
    writeln!(s, "unset logscale x\nset xlabel 'x'").unwrap();
    let plots: Vec<String> =
        profiles.iter().map(|(eps, f)| format!("'{f}' using 1:3 with lines title 'v, eps = {eps}'")).collect();
    if plots.is_empty() {
        s.push_str("plot 1 notitle\n");
    } else {
        writeln!(s, "plot {}", plots.join(", \\\n     ")).unwrap();
    }
    s.push_str("unset multiplot\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criticality::report;

    fn sample_state() -> PhaseField1D {
        let grid = Grid1D::new(2.0, 12).unwrap();
        let v = NodalField1D::from_fn(grid, |x| 1.0 - 0.3 * (std::f64::consts::PI * x / 2.0).sin().powi(2) / 3.0).unwrap();
        let u = NodalField1D::from_fn(grid, |x| x / 2.0 + 0.01 * (std::f64::consts::PI * x).sin()).unwrap();
        PhaseField1D::new(u, v, Parameters::new(0.1, 0.01).unwrap(), (0.0, 1.0)).unwrap()
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let s = sample_state();
        let back = parse_state_csv(&state_csv(&s)).unwrap();
        assert_eq!(back.u().values(), s.u().values());
        assert_eq!(back.v().values(), s.v().values());
        assert_eq!(back.params(), s.params());
        assert_eq!(report(&back, 1.0).unwrap(), report(&s, 1.0).unwrap());
    }

    #[test]
    fn malformed_csv_is_rejected() {
        assert!(parse_state_csv("x,u,v\n").is_err());
        let text = state_csv(&sample_state()).replace("# eps", "# epsilon");
        assert!(parse_state_csv(&text).is_err());
    }

    #[test]
    fn dat_rows() {
        let t = dat_table(&["a", "b"], &[vec![1.0, 2.0]]);
        assert_eq!(t.lines().count(), 2);
        assert!(t.starts_with("# a b\n"));
    }
}
