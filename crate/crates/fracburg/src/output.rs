//! CSV and JSON result files.
//!
//! Every float is written with 17 significant digits, which is enough for a
//! bit-exact `f64` round trip, so downstream plotting or re-analysis sees
//! exactly the numbers the solver produced. The module provides the plain
//! CSV writer/reader, the standard result tables (per-sample norms,
//! time-averaged structure functions, layer spectrum), and the JSON run
//! manifest echoing the configuration and all derived constants.

use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::diagnostics::{RangePartition, RunSummary};
use crate::error::{Error, Result};
use crate::scaling::{averaged_structure, AnalyzedRun, FitResult};
use crate::spectral::{norm, NormRequest};
use crate::stepper::SolverRun;

/// Formats a float with 17 significant digits (round-trip safe for `f64`).
pub fn format_g17(v: f64) -> String {
    format!("{v:.16e}")
}

/// A header plus homogeneous numeric rows, ready for CSV serialization.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv_string(&self) -> String {
        let mut text = self.header.join(",");
        text.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| format_g17(v)).collect();
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        text
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        w.write_all(self.to_csv_string().as_bytes())?;
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Snapshot(format!("{}: empty CSV", path.display())))?
            .split(',')
            .map(|s| s.to_string())
            .collect::<Vec<_>>();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let row: Vec<f64> = line
                .split(',')
                .map(|cell| {
                    cell.parse::<f64>().map_err(|_| {
                        Error::Snapshot(format!(
                            "{}: line {}: bad float `{cell}`",
                            path.display(),
                            i + 2
                        ))
                    })
                })
                .collect::<Result<_>>()?;
            if row.len() != header.len() {
                return Err(Error::Snapshot(format!(
                    "{}: line {}: {} cells, header has {}",
                    path.display(),
                    i + 2,
                    row.len(),
                    header.len()
                )));
            }
            rows.push(row);
        }
        Ok(Self { header, rows })
    }
}

/// Per-sample norm time series of one run.
///
/// Columns: time, the requested norms in order, the sup of `u_x`, the
/// accumulated dissipation integral, and the pointwise budget defect.
pub fn norms_table(run: &SolverRun, reqs: &[NormRequest]) -> Result<Table> {
    let mut header = vec!["t".to_string()];
    header.extend(reqs.iter().map(|r| r.label()));
    header.extend(["max_ux", "dissipation_integral", "budget_defect"].map(String::from));
    let e0 = run.initial_field().hs_norm_sqr(0.0);
    let mut table = Table { header, rows: Vec::new() };
    for r in &run.records {
        let mut row = vec![r.t];
        for req in reqs {
            row.push(norm(&r.field, req)?);
        }
        row.push(r.max_ux);
        row.push(r.dissipation_integral);
        row.push(r.field.hs_norm_sqr(0.0) - e0 + 2.0 * run.config.nu * r.dissipation_integral);
        table.rows.push(row);
    }
    Ok(table)
}

/// Time-averaged structure functions (one column per exponent) and the
/// flatness at each requested lattice shift.
pub fn structure_table(a: &AnalyzedRun<'_>, ps: &[f64], shifts: &[f64]) -> Result<Table> {
    let mut header = vec!["ell".to_string()];
    header.extend(ps.iter().map(|p| format!("s{p}")));
    header.push("flatness".into());
    let columns: Vec<Vec<f64>> = ps
        .iter()
        .map(|&p| averaged_structure(a, p, shifts))
        .collect::<Result<_>>()?;
    let s2 = averaged_structure(a, 2.0, shifts)?;
    let s4 = averaged_structure(a, 4.0, shifts)?;
    let mut table = Table { header, rows: Vec::new() };
    for (i, &ell) in shifts.iter().enumerate() {
        let mut row = vec![ell];
        for col in &columns {
            row.push(col[i]);
        }
        row.push(if s2[i] > 0.0 { s4[i] / (s2[i] * s2[i]) } else { f64::NAN });
        table.rows.push(row);
    }
    Ok(table)
}

/// Time-averaged layer spectrum `{E(k)}` for `k` in `[k_lo, k_hi]`.
pub fn spectrum_table(a: &AnalyzedRun<'_>, m: f64, k_lo: usize, k_hi: usize) -> Result<Table> {
    use crate::diagnostics::{energy_spectrum, window_average_vec};
    if k_lo == 0 || k_hi < k_lo {
        return Err(Error::BadNormRequest {
            reason: format!("empty wavenumber range [{k_lo}, {k_hi}]"),
        });
    }
    let ks: Vec<usize> = (k_lo..=k_hi).collect();
    let values = window_average_vec(a.run, a.window.t1, a.window.t2, |r| {
        ks.iter().map(|&k| energy_spectrum(&r.field, k, m)).collect()
    })?;
    let mut table = Table::new(&["k", "energy"]);
    for (&k, &e) in ks.iter().zip(&values) {
        table.push(vec![k as f64, e]);
    }
    Ok(table)
}

/// One fitted exponent in the manifest and `fits.csv`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitRow {
    pub target: String,
    pub slope: f64,
    /// Predicted exponent, when the theory makes a prediction for this target.
    pub theoretical: Option<f64>,
    pub intercept: f64,
    pub r2: f64,
    pub n_points: usize,
}

impl FitRow {
    pub fn new(target: impl Into<String>, fit: &FitResult, theoretical: Option<f64>) -> Self {
        Self {
            target: target.into(),
            slope: fit.slope,
            theoretical,
            intercept: fit.intercept,
            r2: fit.r2,
            n_points: fit.n_points,
        }
    }
}

/// Writes the fit summary as CSV (string target column plus numeric cells).
pub fn write_fits_csv(path: &Path, fits: &[FitRow]) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "target,slope,theoretical,r2,n_points")?;
    for f in fits {
        writeln!(
            w,
            "{},{},{},{},{}",
            f.target,
            format_g17(f.slope),
            f.theoretical.map(format_g17).unwrap_or_default(),
            format_g17(f.r2),
            f.n_points
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Constants derived from one run, echoed into the manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub d: f64,
    pub l1_inv: f64,
    pub w1inf: f64,
    pub c_tilde: f64,
    pub t1: f64,
    pub t2: f64,
    pub beta: f64,
    pub k_margin: f64,
    pub c1: f64,
    pub c2: f64,
    pub nu0: f64,
    pub dissipation_residual: f64,
    pub max_principle_ratio: f64,
}

impl DerivedConstants {
    pub fn new(summary: &RunSummary, partition: &RangePartition) -> Self {
        Self {
            d: summary.d.d,
            l1_inv: summary.d.l1_inv,
            w1inf: summary.d.w1inf,
            c_tilde: summary.window.c_tilde,
            t1: summary.window.t1,
            t2: summary.window.t2,
            beta: partition.beta,
            k_margin: partition.k,
            c1: partition.c1,
            c2: partition.c2,
            nu0: partition.nu0,
            dissipation_residual: summary.dissipation_residual,
            max_principle_ratio: summary.max_principle_ratio,
        }
    }
}

/// Per-viscosity entry of the manifest. The windowed norm moments are kept
/// here so cross-viscosity fits can be recomputed from the output directory
/// alone, without re-integrating.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunEntry {
    pub nu: f64,
    pub constants: DerivedConstants,
    /// `(norm label, kappa-moment time average over [T1, T2])` pairs.
    #[serde(default)]
    pub moments: Vec<(String, f64)>,
    /// True when the self-similar window was not covered by the run and the
    /// averages fell back to the full simulated interval.
    #[serde(default)]
    pub window_fallback: bool,
}

/// Top-level JSON manifest of a run or sweep directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub wall_seconds: f64,
    pub config: RunConfig,
    /// One entry per completed viscosity, in sweep order.
    pub runs: Vec<RunEntry>,
    #[serde(default)]
    pub skipped: Vec<(f64, String)>,
    #[serde(default)]
    pub fits: Vec<FitRow>,
}

impl Manifest {
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Snapshot(format!("manifest serialization: {e}")))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Snapshot(format!("{}: {e}", path.display())))
    }
}
