//! Decaying-turbulence diagnostics for a completed solver run.
//!
//! The quantities here mirror the a-priori structure of the small-viscosity
//! analysis: the intrinsic time/amplitude scale `D` of the initial data, the
//! self-similar averaging window `[T1, T2]`, the viscosity-dependent range
//! partition `J1`/`J2` in increment space, structure functions and flatness
//! at lattice shifts, the layer-averaged energy spectrum, and the global
//! dissipation (energy budget) identity used as an integration check.

use crate::error::{Error, Result};
use crate::spectral::{norm, Grid, NormRequest, SpectralField};
use crate::stepper::{SampleRecord, SolverRun};

/// Intrinsic scale of the initial datum: `D = max(|u0|_1^{-1}, |u0|_{1,inf})`.
///
/// Both ingredients are kept so callers can report them separately.
#[derive(Debug, Clone, Copy)]
pub struct DQuantity {
    /// The combined scale `D`.
    pub d: f64,
    /// `1 / |u0|_{L^1}`.
    pub l1_inv: f64,
    /// `|u0|_{W^{1,inf}}` (sup of `|u0'|`).
    pub w1inf: f64,
}

/// Computes the scale `D` of an initial datum.
///
/// Fails with [`Error::DegenerateInitialData`] when the field is (numerically)
/// identically zero, since `|u0|_1^{-1}` is then undefined.
pub fn compute_d(u0: &SpectralField) -> Result<DQuantity> {
    let l1 = norm(u0, &NormRequest::lp(1.0))?;
    if l1 <= f64::EPSILON {
        return Err(Error::DegenerateInitialData);
    }
    let w1inf = norm(u0, &NormRequest::wmp(1, f64::INFINITY))?;
    let d = (1.0 / l1).max(w1inf);
    Ok(DQuantity { d, l1_inv: 1.0 / l1, w1inf })
}

/// Viscosity-dependent partition of increment space.
///
/// For a margin constant `K > 1` the inertial-type range is
/// `J2 = (c1 * nu^beta, c2]` and the dissipative range is
/// `J1 = (0, c1 * nu^beta]`, with `c1 = K^{-2}/4`, `c2 = K^{-4}/20`, and the
/// partition is meaningful for `nu <= nu0 = (K^{-2}/6)^{1/beta}`.
#[derive(Debug, Clone, Copy)]
pub struct RangePartition {
    pub k: f64,
    pub beta: f64,
    pub c1: f64,
    pub c2: f64,
    pub nu0: f64,
}

impl RangePartition {
    pub fn new(k: f64, beta: f64) -> Result<Self> {
        if !(k > 1.0) || !k.is_finite() {
            return Err(Error::Config {
                key: "ranges.k".into(),
                reason: format!("margin constant must be finite and > 1, got {k}"),
            });
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::Config {
                key: "ranges.beta".into(),
                reason: format!("beta must be finite and positive, got {beta}"),
            });
        }
        let c1 = k.powi(-2) / 4.0;
        let c2 = k.powi(-4) / 20.0;
        let nu0 = (k.powi(-2) / 6.0).powf(1.0 / beta);
        Ok(Self { k, beta, c1, c2, nu0 })
    }

    /// Dissipative range `(0, c1 * nu^beta]`.
    pub fn j1(&self, nu: f64) -> (f64, f64) {
        (0.0, self.c1 * nu.powf(self.beta))
    }

    /// Inertial-type range `(c1 * nu^beta, c2]`.
    pub fn j2(&self, nu: f64) -> (f64, f64) {
        (self.c1 * nu.powf(self.beta), self.c2)
    }
}

/// Self-similar averaging window `[T1, T2]` together with the empirical
/// dissipation constant used to place it.
#[derive(Debug, Clone, Copy)]
pub struct TimeWindow {
    pub t1: f64,
    pub t2: f64,
    /// Constant in the bound `|u(t)|_{alpha/2}^2 <= c_tilde / nu`.
    pub c_tilde: f64,
}

/// Empirical dissipation constant of a run: the observed maximum of
/// `nu * |u(t)|_{alpha/2}^2` over all samples, with a 20% safety margin.
pub fn c_tilde(run: &SolverRun) -> f64 {
    let s = run.config.alpha / 2.0;
    let max = run
        .records
        .iter()
        .map(|r| run.config.nu * r.field.hs_norm_sqr(s))
        .fold(0.0, f64::max);
    1.2 * max
}

/// Places the averaging window from pre-computed constants:
/// `T1 = 1 / (4 D^2 c_tilde)` and `T2 = max(1.5 T1, 2 D / sigma)`.
pub fn time_window_from(d: f64, c_tilde: f64, sigma: f64, t_end: f64) -> Result<TimeWindow> {
    let t1 = 0.25 / (d * d * c_tilde);
    let t2 = (1.5 * t1).max(2.0 * d / sigma);
    if t2 > t_end * (1.0 + 1e-12) {
        return Err(Error::WindowNotCovered { t1, t2, t_end });
    }
    Ok(TimeWindow { t1, t2, c_tilde })
}

/// Places the averaging window for a completed run.
pub fn time_window(run: &SolverRun) -> Result<TimeWindow> {
    let d = compute_d(run.initial_field())?;
    time_window_from(d.d, c_tilde(run), run.sigma, run.t_end())
}

/// Maps a shift to its lattice index, rejecting off-lattice shifts.
pub(crate) fn lattice_index(ell: f64, grid: Grid) -> Result<usize> {
    let dx = grid.dx();
    let j = (ell / dx).round();
    if j < 1.0 || j > grid.n() as f64 || (j * dx - ell).abs() > 1e-9 {
        return Err(Error::LatticeShift { ell, dx });
    }
    Ok(j as usize)
}

/// All lattice shifts `j * dx` lying in the half-open interval `(lo, hi]`.
pub fn lattice_shifts(grid: Grid, lo: f64, hi: f64) -> Vec<f64> {
    let dx = grid.dx();
    let j_lo = (lo / dx).floor() as i64 + 1;
    let j_hi = (hi / dx + 1e-12).floor() as i64;
    (j_lo.max(1)..=j_hi.min(grid.n() as i64))
        .map(|j| j as f64 * dx)
        .collect()
}

/// At most `max_points` approximately log-spaced lattice shifts in
/// `(lo, hi]`. When the interval holds no more than `max_points` lattice
/// multiples they are all returned; otherwise a log-uniform subset is
/// selected so power-law fits weight every decade equally rather than the
/// (linearly dense) top end.
pub fn log_lattice_shifts(grid: Grid, lo: f64, hi: f64, max_points: usize) -> Vec<f64> {
    let dx = grid.dx();
    let j_lo = ((lo / dx).floor() as i64 + 1).max(1);
    let j_hi = ((hi / dx + 1e-12).floor() as i64).min(grid.n() as i64);
    if j_hi < j_lo || max_points == 0 {
        return Vec::new();
    }
    let count = (j_hi - j_lo + 1) as usize;
    if count <= max_points {
        return (j_lo..=j_hi).map(|j| j as f64 * dx).collect();
    }
    let (a, b) = ((j_lo as f64).ln(), (j_hi as f64).ln());
    let mut js: Vec<i64> = (0..max_points)
        .map(|i| {
            let t = i as f64 / (max_points - 1) as f64;
            (a + (b - a) * t).exp().round() as i64
        })
        .collect();
    js.dedup();
    js.into_iter().map(|j| j as f64 * dx).collect()
}

/// Structure function `S_p(ell) = int |u(x + ell) - u(x)|^p dx` at a single
/// lattice shift, evaluated by the (spectrally accurate) rectangle rule.
pub fn structure_function(field: &SpectralField, p: f64, ell: f64) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::BadNormRequest {
            reason: format!("structure-function exponent must be finite and positive, got {p}"),
        });
    }
    let grid = field.grid();
    let j = lattice_index(ell, grid)?;
    Ok(structure_sum(&field.to_samples(), p, j))
}

/// Rectangle-rule structure function at lattice index `j`, for callers that
/// already hold the grid samples.
pub(crate) fn structure_sum(samples: &[f64], p: f64, j: usize) -> f64 {
    let n = samples.len();
    let sum: f64 = (0..n)
        .map(|i| (samples[(i + j) % n] - samples[i]).abs().powf(p))
        .sum();
    sum / n as f64
}

/// Flatness `F(ell) = S_4(ell) / S_2(ell)^2` at a single lattice shift.
pub fn flatness(field: &SpectralField, ell: f64) -> Result<f64> {
    let s2 = structure_function(field, 2.0, ell)?;
    if s2 <= f64::EPSILON * f64::EPSILON {
        return Err(Error::DegenerateFlatness);
    }
    let s4 = structure_function(field, 4.0, ell)?;
    Ok(s4 / (s2 * s2))
}

/// Layer-averaged energy spectrum
/// `E(k) = (sum over modes with |n| in [k/M, M k] of |u_n|^2) / #modes`,
/// counting both signs of each wavenumber.
pub fn energy_spectrum(field: &SpectralField, k: usize, m: f64) -> Result<f64> {
    if k == 0 || !(m >= 1.0) || !m.is_finite() {
        return Err(Error::BadNormRequest {
            reason: format!("spectrum band needs k >= 1 and finite M >= 1, got k = {k}, M = {m}"),
        });
    }
    let grid = field.grid();
    let lo = ((k as f64 / m).ceil() as usize).max(1);
    let hi = ((k as f64 * m).floor() as usize).min(grid.n() / 2);
    if lo > hi {
        return Err(Error::BadNormRequest {
            reason: format!("spectrum band [{lo}, {hi}] for k = {k} is empty on an n = {} grid", grid.n()),
        });
    }
    let mut energy = 0.0;
    let mut count = 0.0;
    for n_abs in lo..=hi {
        // mode_weight is 2 for paired +/- modes and 1 at Nyquist, which is
        // exactly the both-signs mode count of the one-sided storage
        let w = grid.mode_weight(n_abs);
        energy += w * field.coeffs()[n_abs].norm_sqr();
        count += w;
    }
    Ok(energy / count)
}

/// Time average `(t2 - t1)^{-1} int_{t1}^{t2} g(u(t)) dt` of a scalar
/// observable over the stored samples of a run.
///
/// The integrand is treated as piecewise linear between sample times, with
/// linear interpolation at the window boundaries, so the result is exact for
/// observables that vary linearly between samples.
pub fn window_average<F>(run: &SolverRun, t1: f64, t2: f64, mut eval: F) -> Result<f64>
where
    F: FnMut(&SampleRecord) -> Result<f64>,
{
    let v = window_average_vec(run, t1, t2, |r| Ok(vec![eval(r)?]))?;
    Ok(v[0])
}

/// Vector-valued variant of [`window_average`]: every component of the
/// observable is averaged over the same window in a single pass, so
/// per-record work (such as the inverse transform to grid samples) can be
/// shared between components.
pub fn window_average_vec<F>(run: &SolverRun, t1: f64, t2: f64, mut eval: F) -> Result<Vec<f64>>
where
    F: FnMut(&SampleRecord) -> Result<Vec<f64>>,
{
    let t_end = run.t_end();
    if !(t2 > t1) || t1 < -1e-12 || t2 > t_end * (1.0 + 1e-12) {
        return Err(Error::WindowNotCovered { t1, t2, t_end });
    }
    // samples overlapping the window, padded by one on each side for the
    // boundary interpolation
    let records = &run.records;
    let first = records.partition_point(|r| r.t < t1).saturating_sub(1);
    let last = records.partition_point(|r| r.t < t2).min(records.len() - 1);
    let mut ts = Vec::with_capacity(last - first + 1);
    let mut gs: Vec<Vec<f64>> = Vec::with_capacity(last - first + 1);
    for r in &records[first..=last] {
        ts.push(r.t);
        gs.push(eval(r)?);
    }
    let dim = gs[0].len();
    let value_at = |t: f64| -> Vec<f64> {
        if ts.len() == 1 {
            return gs[0].clone();
        }
        let i = ts.partition_point(|&s| s < t).clamp(1, ts.len() - 1);
        let (ta, tb) = (ts[i - 1], ts[i]);
        let w = if tb > ta { (t - ta) / (tb - ta) } else { 0.0 };
        (0..dim)
            .map(|c| gs[i - 1][c] * (1.0 - w) + gs[i][c] * w)
            .collect()
    };
    let mut integral = vec![0.0; dim];
    let mut t_prev = t1;
    let mut g_prev = value_at(t1);
    for (&t, g) in ts.iter().zip(&gs) {
        if t <= t1 || t >= t2 {
            continue;
        }
        for c in 0..dim {
            integral[c] += 0.5 * (g_prev[c] + g[c]) * (t - t_prev);
        }
        t_prev = t;
        g_prev = g.clone();
    }
    let g_end = value_at(t2);
    for c in 0..dim {
        integral[c] += 0.5 * (g_prev[c] + g_end[c]) * (t2 - t_prev);
        integral[c] /= t2 - t1;
    }
    Ok(integral)
}

/// `kappa`-moment time average `({ g^kappa })^{1/kappa}` over `[t1, t2]`.
pub fn window_moment<F>(run: &SolverRun, t1: f64, t2: f64, kappa: f64, mut eval: F) -> Result<f64>
where
    F: FnMut(&SampleRecord) -> Result<f64>,
{
    if kappa == 0.0 || !kappa.is_finite() {
        return Err(Error::BadNormRequest {
            reason: format!("moment order must be finite and nonzero, got {kappa}"),
        });
    }
    let avg = window_average(run, t1, t2, |r| Ok(eval(r)?.powf(kappa)))?;
    Ok(avg.powf(1.0 / kappa))
}

/// Maximum relative defect of the energy budget
/// `|u(t)|_2^2 - |u(0)|_2^2 + 2 nu int_0^t |u|_{alpha/2}^2 = 0`
/// over all stored samples, using the per-step accumulated dissipation
/// integral carried by each [`SampleRecord`].
pub fn dissipation_residual(run: &SolverRun) -> f64 {
    let e0 = run.initial_field().hs_norm_sqr(0.0);
    let scale = if e0 > 0.0 { e0 } else { 1.0 };
    run.records
        .iter()
        .map(|r| {
            (r.field.hs_norm_sqr(0.0) - e0 + 2.0 * run.config.nu * r.dissipation_integral).abs()
        })
        .fold(0.0, f64::max)
        / scale
}

/// Ratio `max_t |u(t)|_inf / |u(0)|_inf`; the maximum principle forces this
/// to stay at or below 1 for the exact flow.
pub fn max_principle_ratio(run: &SolverRun) -> f64 {
    let sup = |f: &SpectralField| {
        f.to_samples()
            .iter()
            .fold(0.0f64, |acc, &v| acc.max(v.abs()))
    };
    let m0 = sup(run.initial_field());
    if m0 == 0.0 {
        return 0.0;
    }
    run.records.iter().map(|r| sup(&r.field)).fold(0.0, f64::max) / m0
}

/// Per-run a-priori summary: intrinsic scale, averaging window, and the two
/// global integration checks.
#[derive(Debug, Clone, Copy)]
pub struct RunSummary {
    pub d: DQuantity,
    pub window: TimeWindow,
    pub dissipation_residual: f64,
    pub max_principle_ratio: f64,
}

/// Computes the full a-priori summary of a completed run.
pub fn summarize(run: &SolverRun) -> Result<RunSummary> {
    let d = compute_d(run.initial_field())?;
    let window = time_window_from(d.d, c_tilde(run), run.sigma, run.t_end())?;
    Ok(RunSummary {
        d,
        window,
        dissipation_residual: dissipation_residual(run),
        max_principle_ratio: max_principle_ratio(run),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::FluxSpec;
    use crate::stepper::{integrate, MonitorConfig, Scheme, StepperConfig};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn sine_field(n: usize) -> SpectralField {
        SpectralField::from_modes(Grid::new(n).unwrap(), &[(1, 1.0, 0.0)]).unwrap()
    }

    #[test]
    fn d_of_unit_sine_is_two_pi() {
        // |sin(2 pi x)|_1 = 2/pi so the L1 part is pi/2, while the
        // Lipschitz part is 2 pi and wins; the rectangle rule converges at
        // second order across the kinks of |sin|, hence the fine grid
        let d = compute_d(&sine_field(1 << 12)).unwrap();
        assert_abs_diff_eq!(d.l1_inv, PI / 2.0, epsilon = 1e-6);
        assert_abs_diff_eq!(d.w1inf, 2.0 * PI, epsilon = 1e-9);
        assert_abs_diff_eq!(d.d, 2.0 * PI, epsilon = 1e-9);
    }

    #[test]
    fn d_of_small_sine_is_l1_dominated() {
        // for 0.1 sin(2 pi x) the roles flip: 1/|u|_1 = 5 pi > 0.2 pi
        let u = sine_field(1 << 12).scaled(0.1);
        let d = compute_d(&u).unwrap();
        assert_abs_diff_eq!(d.d, 5.0 * PI, epsilon = 1e-5);
    }

    #[test]
    fn d_rejects_zero_data() {
        let zero = SpectralField::zeros(Grid::new(64).unwrap());
        assert!(matches!(compute_d(&zero), Err(Error::DegenerateInitialData)));
    }

    #[test]
    fn range_partition_constants() {
        let p = RangePartition::new(4.0, 2.0).unwrap();
        assert_abs_diff_eq!(p.c1, 1.0 / 64.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.c2, 1.0 / 5120.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.nu0, (1.0f64 / 96.0).sqrt(), epsilon = 1e-15);
        // at nu = nu0 the ranges are adjacent and nonempty:
        // c1 nu0^beta = 1/6144 < c2 = 1/5120
        let (j2_lo, j2_hi) = p.j2(p.nu0);
        assert!(j2_lo < j2_hi);
        assert_abs_diff_eq!(p.j1(p.nu0).1, j2_lo, epsilon = 1e-18);
        // ranges widen as nu decreases
        assert!(p.j2(p.nu0 / 10.0).0 < j2_lo);
        assert!(RangePartition::new(1.0, 2.0).is_err());
        assert!(RangePartition::new(4.0, -1.0).is_err());
    }

    #[test]
    fn time_window_oracle() {
        // D = 2, c_tilde = 1, sigma = 1:
        // T1 = 1/(4 * 4 * 1) = 0.0625, T2 = max(0.09375, 4) = 4
        let w = time_window_from(2.0, 1.0, 1.0, 5.0).unwrap();
        assert_abs_diff_eq!(w.t1, 0.0625, epsilon = 1e-15);
        assert_abs_diff_eq!(w.t2, 4.0, epsilon = 1e-15);
        assert!(matches!(
            time_window_from(2.0, 1.0, 1.0, 3.0),
            Err(Error::WindowNotCovered { .. })
        ));
    }

    #[test]
    fn s2_of_sine_matches_closed_form() {
        // S_2(ell) = int (sin 2pi(x+ell) - sin 2pi x)^2 dx = 2 sin^2(pi ell)
        let u = sine_field(128);
        let dx = u.grid().dx();
        for j in [1usize, 5, 17, 64, 100] {
            let ell = j as f64 * dx;
            let s2 = structure_function(&u, 2.0, ell).unwrap();
            assert_abs_diff_eq!(s2, 2.0 * (PI * ell).sin().powi(2), epsilon = 1e-12);
        }
    }

    #[test]
    fn sp_of_sine_at_half_period() {
        // the shift by 1/2 gives |2 sin 2pi x|, so S_1 = 4/pi and S_4 = 6,
        // hence F = 6 / 2^2 = 3/2
        let u = sine_field(1 << 12);
        assert_abs_diff_eq!(
            structure_function(&u, 1.0, 0.5).unwrap(),
            4.0 / PI,
            epsilon = 1e-6
        );
        assert_abs_diff_eq!(structure_function(&u, 4.0, 0.5).unwrap(), 6.0, epsilon = 1e-9);
        assert_abs_diff_eq!(flatness(&u, 0.5).unwrap(), 1.5, epsilon = 1e-9);
    }

    #[test]
    fn off_lattice_shift_rejected() {
        let u = sine_field(64);
        let dx = u.grid().dx();
        assert!(matches!(
            structure_function(&u, 2.0, 1.3 * dx),
            Err(Error::LatticeShift { .. })
        ));
        assert!(structure_function(&u, 2.0, 2.0 * dx).is_ok());
        assert!(structure_function(&u, -1.0, dx).is_err());
    }

    #[test]
    fn flatness_degenerate_on_zero_field() {
        let zero = SpectralField::zeros(Grid::new(64).unwrap());
        let dx = zero.grid().dx();
        assert!(matches!(flatness(&zero, dx), Err(Error::DegenerateFlatness)));
    }

    #[test]
    fn lattice_shift_enumeration() {
        let grid = Grid::new(64).unwrap();
        let dx = grid.dx();
        let shifts = lattice_shifts(grid, 2.0 * dx, 5.0 * dx);
        assert_eq!(shifts.len(), 3);
        assert_abs_diff_eq!(shifts[0], 3.0 * dx, epsilon = 1e-15);
        assert_abs_diff_eq!(shifts[2], 5.0 * dx, epsilon = 1e-15);
        assert!(lattice_shifts(grid, 0.0, 0.5 * dx).is_empty());
    }

    #[test]
    fn spectrum_of_unit_sine() {
        // band for k = 1, M = 2 is |n| in {1, 2}, i.e. 4 signed modes;
        // only |u_{+-1}|^2 = 1/4 contribute, so E(1) = (1/2) / 4 = 1/8
        let u = sine_field(64);
        assert_abs_diff_eq!(energy_spectrum(&u, 1, 2.0).unwrap(), 0.125, epsilon = 1e-15);
    }

    #[test]
    fn spectrum_band_counting() {
        // sin(2 pi x) + 0.5 sin(8 pi x): band for k = 4, M = 2 is
        // |n| in [2, 8], 14 signed modes, carrying only |u_{+-4}|^2 = 1/16
        let grid = Grid::new(64).unwrap();
        let u = SpectralField::from_modes(grid, &[(1, 1.0, 0.0), (4, 0.5, 0.0)]).unwrap();
        let e = energy_spectrum(&u, 4, 2.0).unwrap();
        assert_abs_diff_eq!(e, 2.0 * 0.0625 / 14.0, epsilon = 1e-15);
        assert!(energy_spectrum(&u, 0, 2.0).is_err());
        assert!(energy_spectrum(&u, 1, 0.5).is_err());
        // band entirely above Nyquist
        assert!(energy_spectrum(&u, 200, 2.0).is_err());
    }

    fn heat_run(t_end: f64) -> SolverRun {
        let cfg = StepperConfig {
            nu: 0.05,
            alpha: 2.0,
            dt_cfl: 0.4,
            dt_max: 1e-3,
            scheme: Scheme::Etdrk4,
            t_end,
        };
        let monitors = MonitorConfig { n_samples: 40, ..MonitorConfig::default() };
        integrate(&sine_field(128), &cfg, &FluxSpec::zero(), &monitors).unwrap()
    }

    #[test]
    fn window_average_linear_observable_is_exact() {
        let run = heat_run(1.0);
        // g(t) = t is integrated exactly by the piecewise-linear rule,
        // including the interpolated window boundaries
        let avg = window_average(&run, 0.13, 0.81, |r| Ok(r.t)).unwrap();
        assert_abs_diff_eq!(avg, 0.5 * (0.13 + 0.81), epsilon = 1e-12);
        let m = window_moment(&run, 0.1, 0.9, 2.0, |_| Ok(3.0)).unwrap();
        assert_abs_diff_eq!(m, 3.0, epsilon = 1e-12);
        assert!(window_average(&run, 0.5, 1.5, |r| Ok(r.t)).is_err());
        assert!(window_moment(&run, 0.1, 0.9, 0.0, |r| Ok(r.t)).is_err());
    }

    #[test]
    fn heat_flow_budget_closes() {
        // for the pure fractional heat flow the budget identity is exact up
        // to trapezoid error in the accumulated dissipation integral, which
        // is O((2 lambda dt)^2 / 12) ~ 1e-6 relative at this step size
        let run = heat_run(0.5);
        let resid = dissipation_residual(&run);
        assert!(resid < 1e-5, "residual = {resid}");
        assert!(max_principle_ratio(&run) <= 1.0 + 1e-12);
    }

    #[test]
    fn disjoint_unit_bands_recover_parseval() {
        // with M = 1 every band holds exactly the two signed modes +-k, so
        // summing 2 E(k) over all k recovers the full L2 energy; the field
        // is kept clear of the Nyquist mode, which a band counts once
        use rand::{Rng as _, SeedableRng as _};
        let grid = Grid::new(256).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let modes: Vec<(usize, f64, f64)> = (1..60)
            .map(|k| (k, rng.gen_range(-1.0..1.0), rng.gen_range(0.0..6.28)))
            .collect();
        let u = SpectralField::from_modes(grid, &modes).unwrap();
        let total: f64 = (1..=grid.n() / 2 - 1)
            .map(|k| 2.0 * energy_spectrum(&u, k, 1.0).unwrap())
            .sum();
        assert_abs_diff_eq!(total, u.hs_norm_sqr(0.0), epsilon = 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn structure_function_bounded_by_sup_norm(
            seed in 0u64..200,
            j in 1usize..32,
            p_times_two in 1u32..9,
        ) {
            // |u(x + ell) - u(x)| <= 2 |u|_inf pointwise, so S_p <= (2 |u|_inf)^p
            use rand::{Rng as _, SeedableRng as _};
            let grid = Grid::new(64).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let modes: Vec<(usize, f64, f64)> = (1..8)
                .map(|k| (k, rng.gen_range(-1.0..1.0), rng.gen_range(0.0..6.28)))
                .collect();
            let u = SpectralField::from_modes(grid, &modes).unwrap();
            let p = p_times_two as f64 / 2.0;
            let sup = u
                .to_samples()
                .iter()
                .fold(0.0f64, |m, &v| m.max(v.abs()));
            let ell = j as f64 * grid.dx();
            let sp = structure_function(&u, p, ell).unwrap();
            proptest::prop_assert!(sp <= (2.0 * sup).powf(p) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn structure_function_monotone_at_smallest_shifts() {
        // increments of a dissipative-scale-resolved field grow with the
        // shift at the bottom of the lattice: S_p(dx) <= S_p(2 dx)
        let u0 = sine_field(256);
        let cfg = StepperConfig {
            nu: 0.05,
            alpha: 2.0,
            dt_cfl: 0.4,
            dt_max: 1e-3,
            scheme: Scheme::Etdrk4,
            t_end: 10.0,
        };
        let monitors = MonitorConfig { n_samples: 20, ..MonitorConfig::default() };
        let run = integrate(&u0, &cfg, &FluxSpec::burgers(), &monitors).unwrap();
        let dx = run.grid.dx();
        for rec in &run.records {
            for p in [2.0, 3.0, 4.0] {
                let near = structure_function(&rec.field, p, dx).unwrap();
                let far = structure_function(&rec.field, p, 2.0 * dx).unwrap();
                assert!(
                    near <= far * (1.0 + 1e-12),
                    "S_{p}({dx}) = {near} > S_{p}({}) = {far} at t = {}",
                    2.0 * dx,
                    rec.t
                );
            }
        }
    }

    #[test]
    fn summary_of_burgers_run() {
        let u0 = sine_field(256);
        let cfg = StepperConfig {
            nu: 0.05,
            alpha: 2.0,
            dt_cfl: 0.4,
            dt_max: 1e-3,
            scheme: Scheme::Etdrk4,
            t_end: 14.0,
        };
        let monitors = MonitorConfig { n_samples: 100, ..MonitorConfig::default() };
        let run = integrate(&u0, &cfg, &FluxSpec::burgers(), &monitors).unwrap();
        let s = summarize(&run).unwrap();
        assert_abs_diff_eq!(s.d.d, 2.0 * PI, epsilon = 1e-9);
        // T2 = 2 D / sigma = 4 pi for this datum
        assert_abs_diff_eq!(s.window.t2, 4.0 * PI, epsilon = 1e-9);
        assert!(s.window.t1 > 0.0 && s.window.t1 < s.window.t2);
        assert!(s.dissipation_residual < 1e-4, "residual = {}", s.dissipation_residual);
        assert!(s.max_principle_ratio <= 1.05, "ratio = {}", s.max_principle_ratio);
    }
}
