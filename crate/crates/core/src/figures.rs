//! Plot-ready tables for the figures: separation probability curves, test
//! count staircases, Monte Carlo means and histograms, and the two-qubit
//! strategy curves.

use std::fmt::Write as _;

use crate::error::Result;
use crate::montecarlo::{ensemble_stats_multi, EnsembleStats, ProtocolTrace};
use crate::separation::{sep_prob_mes_limited, sep_prob_mes_mub, sep_prob_mes_rank, sep_prob_mub, tests_required};
use crate::spectra::SchmidtSpectrum;
use crate::twoqubit::{SweepRow, SWEEP_HEADER};

/// A CSV table with pre-formatted cells. Floats use Rust's shortest
/// round-trip formatting.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// CSV text preceded by a `#` comment line.
    pub fn to_csv(&self, header: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {header}");
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

/// Provenance line written at the top of every output file.
pub fn header_line(command: &str, seed: u64) -> String {
    format!("hdecert {} cmd={} seed={}", env!("CARGO_PKG_VERSION"), command, seed)
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn int(x: impl Into<u64>) -> String {
    x.into().to_string()
}

fn us(x: usize) -> String {
    x.to_string()
}

/// Separation probabilities of the 2-design and two-test strategies for the
/// maximally entangled state as functions of `E`.
pub fn fig1(d: usize, points: usize) -> Result<Table> {
    let mut t = Table::new(["d", "r", "E", "P_opt", "P_mub"]);
    let u = SchmidtSpectrum::uniform(d)?;
    for r in 1..d {
        let e_max = (d - r) as f64 / d as f64;
        for i in 0..points {
            let e = e_max * i as f64 / points as f64;
            t.push(vec![
                us(d),
                us(r),
                num(e),
                num(sep_prob_mes_limited(d, r, e)?),
                num(sep_prob_mub(&u, r, e)?),
            ]);
        }
    }
    Ok(t)
}

/// Test counts `N` for the 2-design and two-test strategies.
pub fn fig2(delta: f64, d_max: usize, rs: &[usize]) -> Result<Table> {
    let mut t = Table::new(["d", "r", "E", "strategy", "P", "N"]);
    for &r in rs {
        for d in (r + 1).max(2)..=d_max {
            for (name, p) in [("opt", sep_prob_mes_rank(d, r)?), ("mub", sep_prob_mes_mub(d, r)?)] {
                t.push(vec![
                    us(d),
                    us(r),
                    num(0.0),
                    name.to_string(),
                    num(p),
                    int(tests_required(p, delta)?),
                ]);
            }
        }
    }
    Ok(t)
}

/// Ensembles for each `d`, sharing samples across `rs`.
pub fn ensembles(dims: &[usize], rs: &[usize], samples: usize, seed: u64) -> Result<Vec<EnsembleStats>> {
    let mut out = Vec::new();
    for &d in dims {
        let valid: Vec<usize> = rs.iter().copied().filter(|&r| r < d).collect();
        if !valid.is_empty() {
            out.extend(ensemble_stats_multi(d, &valid, samples, seed)?);
        }
    }
    Ok(out)
}

/// Ensemble means of the three bounds and their ratios to `(r+1)/(d+1)`.
pub fn fig3(stats: &[EnsembleStats]) -> Table {
    let mut t = Table::new([
        "d", "r", "samples", "mean_lb", "mean_h", "mean_ub", "ratio_lb", "ratio_h", "ratio_ub",
    ]);
    for s in stats {
        let (p, _) = s.bracket();
        t.push(vec![
            us(s.d_a),
            us(s.r),
            us(s.samples),
            num(s.mean_psep_lb),
            num(s.mean_psep_h),
            num(s.mean_plc_ub),
            num(s.mean_psep_lb / p),
            num(s.mean_psep_h / p),
            num(s.mean_plc_ub / p),
        ]);
    }
    t
}

/// Histogram densities of the three bounds.
pub fn fig4(stats: &[EnsembleStats]) -> Table {
    let mut t = Table::new(["d", "r", "quantity", "bin_lo", "bin_hi", "bin_center", "density"]);
    for s in stats {
        for (name, h) in [
            ("psep_lb", &s.hist_psep_lb),
            ("psep_h", &s.hist_psep_h),
            ("plc_ub", &s.hist_plc_ub),
        ] {
            let edges = h.edges();
            for (i, (center, density)) in h.centers().into_iter().zip(h.densities()).enumerate() {
                t.push(vec![
                    us(s.d_a),
                    us(s.r),
                    name.to_string(),
                    num(edges[i]),
                    num(edges[i + 1]),
                    num(center),
                    num(density),
                ]);
            }
        }
    }
    t
}

/// Two-qubit strategy curves on a uniform θ grid over `(0, π/4]`.
pub fn fig5(points: usize) -> Result<Table> {
    let mut t = Table::new(SWEEP_HEADER);
    for i in 1..=points {
        let theta = std::f64::consts::FRAC_PI_4 * i as f64 / points as f64;
        let row = SweepRow::at(theta)?;
        t.push(row.values().iter().map(|&v| num(v)).collect());
    }
    Ok(t)
}

/// One row per simulated round.
pub fn sim(trace: &ProtocolTrace) -> Table {
    let mut t = Table::new(["round", "outcome"]);
    for (i, o) in trace.outcomes.iter().enumerate() {
        t.push(vec![us(i + 1), o.to_string()]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig2_spot_values() {
        let t = fig2(0.01, 10, &[1]).unwrap();
        let row = t
            .rows
            .iter()
            .find(|r| r[0] == "9" && r[3] == "opt")
            .unwrap();
        assert_eq!(row[4], "0.2");
        assert_eq!(row[5], "3");
        let row = t.rows.iter().find(|r| r[0] == "4" && r[3] == "mub").unwrap();
        assert_eq!(row[5], "10");
    }

    #[test]
    fn csv_layout() {
        let t = fig1(4, 5).unwrap();
        assert_eq!(t.rows.len(), 15);
        let csv = t.to_csv(&header_line("fig fig1", 7));
        let mut lines = csv.lines();
        assert!(lines.next().unwrap().starts_with("# hdecert "));
        assert_eq!(lines.next().unwrap(), "d,r,E,P_opt,P_mub");
        assert_eq!(lines.next().unwrap(), "4,1,0,0.4,0.625");
    }

    #[test]
    fn fig5_rows() {
        let t = fig5(8).unwrap();
        assert_eq!(t.rows.len(), 8);
        let last = &t.rows[7];
        assert_eq!(last[6].parse::<f64>().unwrap(), 2.0 / 3.0);
    }
}
