//! TOML run configuration.
//!
//! A single file describes one simulation (grid, equation, initial data,
//! stepper, monitoring) and optionally a viscosity sweep and the analysis
//! parameters used by the scaling fits. Unknown keys are rejected so typos
//! fail loudly, and every physically constrained value is validated with the
//! offending key named in the error.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::FluxSpec;
use crate::spectral::{Grid, SpectralField};
use crate::stepper::{MonitorConfig, Scheme, StepperConfig};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSection,
    pub equation: EquationSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub stepper: StepperSection,
    #[serde(default)]
    pub monitor: MonitorSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub analysis: AnalysisSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationSection {
    pub alpha: f64,
    pub nu: f64,
    #[serde(default = "default_flux")]
    pub flux: String,
}

fn default_flux() -> String {
    "burgers".into()
}

/// Initial datum as a list of `(wavenumber, amplitude, phase)` sine modes:
/// `u0(x) = sum_i amp_i * sin(2 pi k_i x + phase_i)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub modes: Vec<(usize, f64, f64)>,
}

impl Default for InitialSection {
    fn default() -> Self {
        // two-mode datum with an O(1) Lipschitz seminorm and no special
        // symmetry, so cliffs form at generic locations
        Self { modes: vec![(1, 1.0, 0.0), (2, 0.6, 1.0)] }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepperSection {
    pub scheme: String,
    pub dt_cfl: f64,
    pub dt_max: f64,
    pub t_end: f64,
}

impl Default for StepperSection {
    fn default() -> Self {
        Self { scheme: "etdrk4".into(), dt_cfl: 0.4, dt_max: 1e-3, t_end: 30.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonitorSection {
    pub n_samples: usize,
    pub c_res: f64,
    pub allow_underresolved: bool,
}

impl Default for MonitorSection {
    fn default() -> Self {
        let m = MonitorConfig::default();
        Self {
            n_samples: m.n_samples,
            c_res: m.c_res,
            allow_underresolved: m.allow_underresolved,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Viscosities in strictly increasing order.
    pub nus: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    /// Margin constant `K` of the range partition.
    pub k_margin: f64,
    /// Band ratio `M` of the layer-averaged spectrum.
    pub band_ratio: f64,
    /// Moment order of the time averages entering the norm fits.
    pub kappa: f64,
    /// Optional override `[lo, hi]` for the shift window of the inertial
    /// structure/flatness fits, replacing the formal `J2` range when the
    /// latter is unresolved at the configured grid.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shift_window: Option<[f64; 2]>,
    /// Optional override `[k_lo, k_hi]` for the spectrum fit range.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum_range: Option<[usize; 2]>,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            k_margin: 4.0,
            band_ratio: 2.0,
            kappa: 2.0,
            shift_window: None,
            spectrum_range: None,
        }
    }
}

fn bad(key: &str, reason: impl Into<String>) -> Error {
    Error::Config { key: key.into(), reason: reason.into() }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text)
            .map_err(|e| bad("<root>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serialization cannot fail")
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.n < 8 || self.grid.n % 2 != 0 {
            return Err(bad("grid.n", format!("must be an even integer >= 8, got {}", self.grid.n)));
        }
        let alpha = self.equation.alpha;
        if !(alpha > 1.0 && alpha <= 2.0) {
            return Err(bad("equation.alpha", format!("must lie in (1, 2], got {alpha}")));
        }
        if !(self.equation.nu > 0.0) || !self.equation.nu.is_finite() {
            return Err(bad("equation.nu", format!("must be finite and positive, got {}", self.equation.nu)));
        }
        FluxSpec::by_name(&self.equation.flux)
            .map_err(|_| bad("equation.flux", format!("unknown flux `{}`", self.equation.flux)))?;
        self.parse_scheme()?;
        if !(self.stepper.dt_cfl > 0.0 && self.stepper.dt_cfl <= 1.0) {
            return Err(bad("stepper.dt_cfl", format!("must lie in (0, 1], got {}", self.stepper.dt_cfl)));
        }
        if !(self.stepper.dt_max > 0.0) || !self.stepper.dt_max.is_finite() {
            return Err(bad("stepper.dt_max", format!("must be finite and positive, got {}", self.stepper.dt_max)));
        }
        if !(self.stepper.t_end >= 0.0) || !self.stepper.t_end.is_finite() {
            return Err(bad("stepper.t_end", format!("must be finite and nonnegative, got {}", self.stepper.t_end)));
        }
        if self.monitor.n_samples == 0 {
            return Err(bad("monitor.n_samples", "must be positive"));
        }
        if !(self.monitor.c_res > 0.0) {
            return Err(bad("monitor.c_res", format!("must be positive, got {}", self.monitor.c_res)));
        }
        if self.initial.modes.is_empty() {
            return Err(bad("initial.modes", "at least one mode is required"));
        }
        for &(k, amp, phase) in &self.initial.modes {
            if k == 0 || k >= self.grid.n / 2 {
                return Err(bad("initial.modes", format!("wavenumber {k} outside (0, n/2)")));
            }
            if !amp.is_finite() || !phase.is_finite() {
                return Err(bad("initial.modes", format!("non-finite entry for wavenumber {k}")));
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.nus.len() < 3 {
                return Err(bad("sweep.nus", "a sweep needs at least 3 viscosities"));
            }
            if sweep.nus.windows(2).any(|w| w[1] <= w[0]) || sweep.nus.iter().any(|&v| !(v > 0.0)) {
                return Err(bad("sweep.nus", "viscosities must be positive and strictly increasing"));
            }
        }
        let a = &self.analysis;
        if !(a.k_margin > 1.0) {
            return Err(bad("analysis.k_margin", format!("must be > 1, got {}", a.k_margin)));
        }
        if !(a.band_ratio >= 1.0) {
            return Err(bad("analysis.band_ratio", format!("must be >= 1, got {}", a.band_ratio)));
        }
        if a.kappa == 0.0 || !a.kappa.is_finite() {
            return Err(bad("analysis.kappa", format!("must be finite and nonzero, got {}", a.kappa)));
        }
        if let Some([lo, hi]) = a.shift_window {
            if !(lo >= 0.0 && hi > lo && hi <= 1.0) {
                return Err(bad("analysis.shift_window", format!("need 0 <= lo < hi <= 1, got [{lo}, {hi}]")));
            }
        }
        if let Some([k_lo, k_hi]) = a.spectrum_range {
            if k_lo == 0 || k_hi < k_lo {
                return Err(bad("analysis.spectrum_range", format!("need 1 <= k_lo <= k_hi, got [{k_lo}, {k_hi}]")));
            }
        }
        Ok(())
    }

    fn parse_scheme(&self) -> Result<Scheme> {
        match self.stepper.scheme.as_str() {
            "etdrk4" => Ok(Scheme::Etdrk4),
            "etdrk2" => Ok(Scheme::Etdrk2),
            other => Err(bad("stepper.scheme", format!("unknown scheme `{other}` (expected `etdrk4` or `etdrk2`)"))),
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.n)
    }

    pub fn initial_field(&self) -> Result<SpectralField> {
        SpectralField::from_modes(self.grid()?, &self.initial.modes)
    }

    pub fn flux(&self) -> Result<FluxSpec> {
        FluxSpec::by_name(&self.equation.flux)
    }

    pub fn stepper_config(&self) -> Result<StepperConfig> {
        let cfg = StepperConfig {
            nu: self.equation.nu,
            alpha: self.equation.alpha,
            dt_cfl: self.stepper.dt_cfl,
            dt_max: self.stepper.dt_max,
            scheme: self.parse_scheme()?,
            t_end: self.stepper.t_end,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn monitor_config(&self) -> MonitorConfig {
        MonitorConfig {
            n_samples: self.monitor.n_samples,
            c_res: self.monitor.c_res,
            allow_underresolved: self.monitor.allow_underresolved,
        }
    }
}
