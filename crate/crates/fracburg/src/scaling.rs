//! Viscosity sweeps and log-log scaling-exponent regression.
//!
//! The theoretical small-viscosity exponents are expressed through
//! `beta = 1/(alpha - 1)`: time-averaged Sobolev norms grow like negative
//! powers of `nu`, structure functions follow distinct power laws in the
//! dissipative range `J1` and the inertial-type range `J2`, the flatness
//! decays like `1/ell` on `J2`, and the layer-averaged spectrum obeys
//! `E(k) ~ k^{-2}`. This module provides the predicted exponents, a plain
//! least-squares log-log fit with an `R^2` quality figure, the per-run
//! observable averaging needed to measure the exponents, and a deterministic
//! sweep driver over a list of viscosities.

use crate::diagnostics::{
    energy_spectrum, lattice_index, log_lattice_shifts, structure_sum, time_window,
    window_average_vec, window_moment, RangePartition, TimeWindow,
};
use crate::error::{Error, Result};
use crate::flux::FluxSpec;
use crate::spectral::{norm, NormRequest, SpectralField};
use crate::stepper::{integrate, MonitorConfig, SolverRun, StepperConfig};

/// The two increment ranges of the partition `J1` (dissipative) and `J2`
/// (inertial-type).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RangeId {
    Dissipative,
    Inertial,
}

/// A quantity whose power-law exponent is predicted by the theory.
#[derive(Debug, Clone, Copy)]
pub enum ScalingTarget {
    /// Time-averaged `W^{m,p}` norm against `nu`.
    WmpVsNu { m: u32, p: f64 },
    /// Time-averaged `H^s` norm against `nu` (requires `s >= 1/2`).
    HsVsNu { s: f64 },
    /// Time-averaged `S_p(ell)` against `ell` within one range.
    StructureVsEll { p: f64, range: RangeId },
    /// Time-averaged `S_p` at a shift tracking the dissipation scale,
    /// against `nu` (requires `p >= 1`).
    StructureVsNu { p: f64 },
    /// Layer-averaged spectrum against `k` on the inertial-type range.
    SpectrumVsK,
    /// Flatness against `ell` on the inertial-type range.
    FlatnessVsEll,
}

/// Predicted log-log slope for a scaling target at dissipation exponent
/// `beta = 1/(alpha - 1)`.
pub fn theoretical_exponent(target: &ScalingTarget, beta: f64) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::UnsupportedTarget(format!("beta = {beta} out of range")));
    }
    match *target {
        ScalingTarget::WmpVsNu { m, p } => {
            if !(p >= 1.0) {
                return Err(Error::UnsupportedTarget(format!("W^{{{m},{p}}}: p must be >= 1")));
            }
            let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
            Ok(-beta * (m as f64 - inv_p).max(0.0))
        }
        ScalingTarget::HsVsNu { s } => {
            if s < 0.5 {
                return Err(Error::UnsupportedTarget(format!(
                    "H^{s}: no nontrivial nu-scaling predicted below s = 1/2"
                )));
            }
            Ok(-beta * (s - 0.5))
        }
        ScalingTarget::StructureVsEll { p, range } => {
            if !(p > 0.0) || !p.is_finite() {
                return Err(Error::UnsupportedTarget(format!("S_{p}: p must be finite and positive")));
            }
            Ok(match range {
                RangeId::Dissipative => p,
                RangeId::Inertial => p.min(1.0),
            })
        }
        ScalingTarget::StructureVsNu { p } => {
            if !(p >= 1.0) || !p.is_finite() {
                return Err(Error::UnsupportedTarget(format!("S_{p} vs nu: p must be finite and >= 1")));
            }
            Ok(-beta * (p - 1.0))
        }
        ScalingTarget::SpectrumVsK => Ok(-2.0),
        ScalingTarget::FlatnessVsEll => Ok(-1.0),
    }
}

/// Least-squares power-law fit in log-log coordinates.
#[derive(Debug, Clone, Copy)]
pub struct FitResult {
    /// Fitted exponent (slope in log-log coordinates).
    pub slope: f64,
    /// `log` of the fitted prefactor.
    pub intercept: f64,
    /// Coefficient of determination of the log-log regression.
    pub r2: f64,
    pub n_points: usize,
}

/// Fits `y ~ C x^slope` by least squares on `(log x, log y)`.
///
/// Requires at least 3 samples with strictly increasing abscissae and
/// positive values on both axes.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    if xs.len() != ys.len() || xs.len() < 3 || xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::FitUnderdetermined);
    }
    let mut lx = Vec::with_capacity(xs.len());
    let mut ly = Vec::with_capacity(ys.len());
    for (&x, &y) in xs.iter().zip(ys) {
        if !(x > 0.0) || !(y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(Error::LogDomain { x, y });
        }
        lx.push(x.ln());
        ly.push(y.ln());
    }
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|&v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(&a, &b)| (a - mx) * (b - my)).sum();
    let syy: f64 = ly.iter().map(|&v| (v - my) * (v - my)).sum();
    if sxx == 0.0 {
        return Err(Error::FitUnderdetermined);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(FitResult { slope, intercept: my - slope * mx, r2, n_points: lx.len() })
}

/// A completed run paired with its self-similar averaging window.
#[derive(Debug)]
pub struct AnalyzedRun<'a> {
    pub run: &'a SolverRun,
    pub window: TimeWindow,
}

impl<'a> AnalyzedRun<'a> {
    /// Derives the window from the run's own initial data and flux.
    pub fn new(run: &'a SolverRun) -> Result<Self> {
        Ok(Self { window: time_window(run)?, run })
    }

    /// Uses an externally chosen window (for sensitivity studies and tests).
    pub fn with_window(run: &'a SolverRun, t1: f64, t2: f64) -> Self {
        Self { run, window: TimeWindow { t1, t2, c_tilde: f64::NAN } }
    }
}

/// Fits the `nu`-dependence of a windowed `kappa`-moment of an arbitrary
/// scalar observable across a sweep of runs. Runs must be ordered by
/// strictly increasing viscosity.
pub fn nu_scaling<F>(runs: &[AnalyzedRun<'_>], kappa: f64, mut eval: F) -> Result<FitResult>
where
    F: FnMut(&SpectralField) -> Result<f64>,
{
    let mut nus = Vec::with_capacity(runs.len());
    let mut values = Vec::with_capacity(runs.len());
    for a in runs {
        nus.push(a.run.config.nu);
        values.push(window_moment(a.run, a.window.t1, a.window.t2, kappa, |r| {
            eval(&r.field)
        })?);
    }
    fit_loglog(&nus, &values)
}

/// Fits the `nu`-dependence of a time-averaged Sobolev norm. The customary
/// moment is `kappa = 2` (root-mean-square in time).
pub fn norm_scaling(runs: &[AnalyzedRun<'_>], req: &NormRequest, kappa: f64) -> Result<FitResult> {
    req.validate()?;
    nu_scaling(runs, kappa, |f| norm(f, req))
}

/// Time-averaged structure functions `{S_p(ell)}` at every requested lattice
/// shift, sharing one inverse transform per stored sample.
pub fn averaged_structure(
    a: &AnalyzedRun<'_>,
    p: f64,
    shifts: &[f64],
) -> Result<Vec<f64>> {
    let grid = a.run.grid;
    let indices: Vec<usize> = shifts
        .iter()
        .map(|&ell| lattice_index(ell, grid))
        .collect::<Result<_>>()?;
    window_average_vec(a.run, a.window.t1, a.window.t2, |r| {
        let samples = r.field.to_samples();
        Ok(indices.iter().map(|&j| structure_sum(&samples, p, j)).collect())
    })
}

/// Upper bound on the lattice shifts entering one power-law fit; keeps the
/// per-fit cost bounded on fine grids without biasing the log-log slope.
const MAX_FIT_SHIFTS: usize = 24;

/// Fits `{S_p(ell)} ~ ell^xi` over (log-spaced) lattice shifts in `(lo, hi]`.
pub fn structure_scaling(a: &AnalyzedRun<'_>, p: f64, lo: f64, hi: f64) -> Result<FitResult> {
    let shifts = log_lattice_shifts(a.run.grid, lo, hi, MAX_FIT_SHIFTS);
    let values = averaged_structure(a, p, &shifts)?;
    fit_loglog(&shifts, &values)
}

/// Fits the flatness `{S_4} / {S_2}^2 ~ ell^xi` over the lattice shifts in
/// `(lo, hi]`. The flatness of the time averages is used, matching the
/// averaged structure functions entering the other fits.
pub fn flatness_scaling(a: &AnalyzedRun<'_>, lo: f64, hi: f64) -> Result<FitResult> {
    let shifts = log_lattice_shifts(a.run.grid, lo, hi, MAX_FIT_SHIFTS);
    let s2 = averaged_structure(a, 2.0, &shifts)?;
    let s4 = averaged_structure(a, 4.0, &shifts)?;
    let values: Vec<f64> = s2
        .iter()
        .zip(&s4)
        .map(|(&a2, &a4)| {
            if a2 <= f64::EPSILON * f64::EPSILON {
                return Err(Error::DegenerateFlatness);
            }
            Ok(a4 / (a2 * a2))
        })
        .collect::<Result<_>>()?;
    fit_loglog(&shifts, &values)
}

/// Fits the time-averaged layer spectrum `{E(k)} ~ k^xi` for
/// `k in [k_lo, k_hi]` with band ratio `m`.
pub fn spectrum_scaling(
    a: &AnalyzedRun<'_>,
    m: f64,
    k_lo: usize,
    k_hi: usize,
) -> Result<FitResult> {
    if k_lo == 0 || k_hi < k_lo {
        return Err(Error::BadNormRequest {
            reason: format!("empty wavenumber range [{k_lo}, {k_hi}]"),
        });
    }
    let ks: Vec<usize> = (k_lo..=k_hi).collect();
    let values = window_average_vec(a.run, a.window.t1, a.window.t2, |r| {
        ks.iter().map(|&k| energy_spectrum(&r.field, k, m)).collect()
    })?;
    let xs: Vec<f64> = ks.iter().map(|&k| k as f64).collect();
    fit_loglog(&xs, &values)
}

/// Outcome of one viscosity in a sweep.
#[derive(Debug)]
pub enum SweepOutcome {
    Completed(Box<SolverRun>),
    /// The run could not be performed (most commonly the grid under-resolves
    /// the dissipation scale at this viscosity); the sweep continues.
    Skipped { nu: f64, reason: String },
}

impl SweepOutcome {
    pub fn run(&self) -> Option<&SolverRun> {
        match self {
            SweepOutcome::Completed(run) => Some(run),
            SweepOutcome::Skipped { .. } => None,
        }
    }
}

/// Integrates the same initial datum at each viscosity in `nus` (in the
/// given order). Failures at individual viscosities are recorded as
/// [`SweepOutcome::Skipped`] and do not abort the sweep, so partial results
/// survive a bad configuration point.
pub fn run_sweep(
    u0: &SpectralField,
    base: &StepperConfig,
    flux: &FluxSpec,
    nus: &[f64],
    monitors: &MonitorConfig,
) -> Vec<SweepOutcome> {
    nus.iter()
        .map(|&nu| {
            let cfg = StepperConfig { nu, ..base.clone() };
            match integrate(u0, &cfg, flux, monitors) {
                Ok(run) => SweepOutcome::Completed(Box::new(run)),
                Err(e) => SweepOutcome::Skipped { nu, reason: e.to_string() },
            }
        })
        .collect()
}

/// Inertial-range structure-function slopes recomputed for several margin
/// constants `K`, to expose how sensitive a fitted exponent is to the
/// placement of the range partition.
pub fn k_sensitivity(
    a: &AnalyzedRun<'_>,
    p: f64,
    ks: &[f64],
) -> Vec<(f64, Result<FitResult>)> {
    let beta = a.run.config.beta();
    let nu = a.run.config.nu;
    ks.iter()
        .map(|&k| {
            let fit = RangePartition::new(k, beta).and_then(|part| {
                let (lo, hi) = part.j2(nu);
                structure_scaling(a, p, lo, hi)
            });
            (k, fit)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use crate::stepper::{SampleRecord, Scheme};
    use approx::assert_abs_diff_eq;

    #[test]
    fn predicted_exponents() {
        let beta = 2.0; // alpha = 3/2
        let e = |t: &ScalingTarget| theoretical_exponent(t, beta).unwrap();
        // Lipschitz seminorm blows up at the full rate, L^p norms stay O(1)
        assert_abs_diff_eq!(e(&ScalingTarget::WmpVsNu { m: 1, p: f64::INFINITY }), -beta);
        assert_abs_diff_eq!(e(&ScalingTarget::WmpVsNu { m: 1, p: 1.0 }), 0.0);
        assert_abs_diff_eq!(e(&ScalingTarget::WmpVsNu { m: 0, p: 4.0 }), 0.0);
        assert_abs_diff_eq!(e(&ScalingTarget::WmpVsNu { m: 2, p: 2.0 }), -3.0);
        assert_abs_diff_eq!(e(&ScalingTarget::HsVsNu { s: 1.0 }), -beta / 2.0);
        assert_abs_diff_eq!(e(&ScalingTarget::HsVsNu { s: 0.5 }), 0.0);
        // saturation of the inertial-range exponent at 1 is the signature
        // of an increment field dominated by isolated cliffs
        let j2 = RangeId::Inertial;
        assert_abs_diff_eq!(e(&ScalingTarget::StructureVsEll { p: 3.0, range: j2 }), 1.0);
        assert_abs_diff_eq!(e(&ScalingTarget::StructureVsEll { p: 0.5, range: j2 }), 0.5);
        let j1 = RangeId::Dissipative;
        assert_abs_diff_eq!(e(&ScalingTarget::StructureVsEll { p: 3.0, range: j1 }), 3.0);
        assert_abs_diff_eq!(e(&ScalingTarget::StructureVsNu { p: 3.0 }), -2.0 * beta);
        assert_abs_diff_eq!(e(&ScalingTarget::SpectrumVsK), -2.0);
        assert_abs_diff_eq!(e(&ScalingTarget::FlatnessVsEll), -1.0);
        assert!(theoretical_exponent(&ScalingTarget::HsVsNu { s: 0.3 }, beta).is_err());
        assert!(theoretical_exponent(&ScalingTarget::WmpVsNu { m: 1, p: 0.5 }, beta).is_err());
        assert!(theoretical_exponent(&ScalingTarget::SpectrumVsK, -1.0).is_err());
    }

    #[test]
    fn loglog_fit_recovers_exact_power_law() {
        let xs: Vec<f64> = (1..=8).map(|i| 1.5f64.powi(i)).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| 3.5 * x.powf(-1.7)).collect();
        let fit = fit_loglog(&xs, &ys).unwrap();
        assert_abs_diff_eq!(fit.slope, -1.7, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.intercept, 3.5f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(fit.r2, 1.0, epsilon = 1e-12);
        assert_eq!(fit.n_points, 8);
    }

    #[test]
    fn loglog_fit_rejects_bad_input() {
        assert!(matches!(fit_loglog(&[1.0, 2.0], &[1.0, 2.0]), Err(Error::FitUnderdetermined)));
        assert!(matches!(
            fit_loglog(&[1.0, 3.0, 2.0], &[1.0, 1.0, 1.0]),
            Err(Error::FitUnderdetermined)
        ));
        assert!(matches!(
            fit_loglog(&[1.0, 2.0, 3.0], &[1.0, -1.0, 1.0]),
            Err(Error::LogDomain { .. })
        ));
    }

    /// A frozen-in-time "run" whose only record is the given field, valid on
    /// the window [0, 1]; time averaging then reduces to a pointwise
    /// evaluation, for which closed-form oracles exist.
    fn frozen_run(field: SpectralField) -> SolverRun {
        let grid = field.grid();
        let cfg = StepperConfig {
            nu: 0.1,
            alpha: 2.0,
            dt_cfl: 0.4,
            dt_max: 0.1,
            scheme: Scheme::Etdrk4,
            t_end: 1.0,
        };
        let record = |t: f64, f: &SpectralField| SampleRecord {
            t,
            field: f.clone(),
            dissipation_integral: 0.0,
            max_ux: 0.0,
            step_count: 0,
            dt_last: 0.0,
        };
        SolverRun {
            config: cfg,
            flux_name: "frozen".into(),
            sigma: 1.0,
            grid,
            records: vec![record(0.0, &field), record(1.0, &field)],
            underresolved: false,
        }
    }

    #[test]
    fn structure_slope_of_smooth_field_is_two() {
        // S_2(ell) = 2 sin^2(pi ell) ~ 2 pi^2 ell^2 for small ell
        let grid = Grid::new(1 << 10).unwrap();
        let field = SpectralField::from_modes(grid, &[(1, 1.0, 0.0)]).unwrap();
        let run = frozen_run(field);
        let a = AnalyzedRun::with_window(&run, 0.0, 1.0);
        let dx = grid.dx();
        let fit = structure_scaling(&a, 2.0, 0.5 * dx, 16.5 * dx).unwrap();
        assert_abs_diff_eq!(fit.slope, 2.0, epsilon = 2e-3);
        assert!(fit.r2 > 0.9999);
        // flatness of a smooth field is locally constant, slope ~ 0
        let flat = flatness_scaling(&a, 0.5 * dx, 16.5 * dx).unwrap();
        assert!(flat.slope.abs() < 1e-2, "slope = {}", flat.slope);
    }

    #[test]
    fn spectrum_slope_of_synthetic_power_law() {
        // |u_n| = n^{-1} gives a k^{-2} layer spectrum up to band-averaging
        // corrections that vanish with k
        let grid = Grid::new(1 << 9).unwrap();
        let modes: Vec<(usize, f64, f64)> =
            (1..=170).map(|k| (k, 1.0 / k as f64, 0.0)).collect();
        let field = SpectralField::from_modes(grid, &modes).unwrap();
        let run = frozen_run(field);
        let a = AnalyzedRun::with_window(&run, 0.0, 1.0);
        let fit = spectrum_scaling(&a, 2.0, 8, 64).unwrap();
        assert_abs_diff_eq!(fit.slope, -2.0, epsilon = 0.1);
        assert!(fit.r2 > 0.99);
        assert!(spectrum_scaling(&a, 2.0, 5, 4).is_err());
    }

    #[test]
    fn nu_scaling_of_synthetic_sweep() {
        // three frozen runs with amplitudes nu^{-1/2} make the L2 norm scale
        // exactly like nu^{-1/2}
        let grid = Grid::new(64).unwrap();
        let nus: [f64; 3] = [0.01, 0.02, 0.04];
        let runs: Vec<SolverRun> = nus
            .iter()
            .map(|&nu| {
                let amp = nu.powf(-0.5);
                let field = SpectralField::from_modes(grid, &[(1, amp, 0.0)]).unwrap();
                let mut run = frozen_run(field);
                run.config.nu = nu;
                run
            })
            .collect();
        let analyzed: Vec<AnalyzedRun<'_>> =
            runs.iter().map(|r| AnalyzedRun::with_window(r, 0.0, 1.0)).collect();
        let fit = norm_scaling(&analyzed, &NormRequest::hs(0.0), 2.0).unwrap();
        assert_abs_diff_eq!(fit.slope, -0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.r2, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn sweep_skips_underresolved_viscosities() {
        let grid = Grid::new(64).unwrap();
        let u0 = SpectralField::from_modes(grid, &[(1, 1.0, 0.0)]).unwrap();
        let base = StepperConfig {
            nu: f64::NAN, // replaced per sweep point
            alpha: 2.0,
            dt_cfl: 0.4,
            dt_max: 1e-2,
            scheme: Scheme::Etdrk4,
            t_end: 0.1,
        };
        let monitors = MonitorConfig { n_samples: 4, ..MonitorConfig::default() };
        // dx = 1/64, so nu = 1e-4 under-resolves (0.5 * nu^1 < dx) while
        // nu = 0.1 is comfortable
        let outcomes = run_sweep(
            &u0,
            &base,
            &FluxSpec::burgers(),
            &[1e-4, 0.1],
            &monitors,
        );
        assert_eq!(outcomes.len(), 2);
        assert!(outcomes[0].run().is_none());
        assert!(matches!(&outcomes[0], SweepOutcome::Skipped { nu, .. } if *nu == 1e-4));
        assert!(outcomes[1].run().is_some());
    }

    #[test]
    fn k_sensitivity_reports_all_margins() {
        // the J2 upper bound for K = 8 is ~1.2e-5, so only a very fine grid
        // gives every margin at least 3 lattice points to fit over
        let grid = Grid::new(1 << 19).unwrap();
        let field = SpectralField::from_modes(grid, &[(1, 1.0, 0.0)]).unwrap();
        let mut run = frozen_run(field);
        run.config.nu = 1e-6;
        let a = AnalyzedRun::with_window(&run, 0.0, 1.0);
        let out = k_sensitivity(&a, 2.0, &[2.0, 4.0, 8.0]);
        assert_eq!(out.len(), 3);
        for (k, fit) in &out {
            let fit = fit.as_ref().unwrap_or_else(|e| panic!("K = {k}: {e}"));
            // smooth-field slope on any resolved range is ~2
            assert_abs_diff_eq!(fit.slope, 2.0, epsilon = 0.05);
        }
    }

    #[test]
    fn analyzed_run_propagates_window_errors() {
        // the frozen run only covers [0, 1], far short of T2 = 2D/sigma
        // for this datum, so the self-derived window must be rejected
        let grid = Grid::new(128).unwrap();
        let u0 = SpectralField::from_modes(grid, &[(1, 0.05, 0.0)]).unwrap();
        let run = frozen_run(u0);
        assert!(matches!(AnalyzedRun::new(&run), Err(Error::WindowNotCovered { .. })));
    }
}
