//! The flux nonlinearity: hypothesis validation and the dealiased
//! evaluation of `-(f(u))_x`.
//!
//! The dynamics requires a strongly convex flux, `f''(y) >= sigma > 0`,
//! whose first derivative grows slower than quadratically,
//! `|f'(y)| <= C (1 + |y|)^h` with `h < 2`. Both hypotheses are checked
//! by dense sampling on a validation interval `[-R, R]`; the supplied
//! derivatives are cross-checked against central differences rather than
//! replaced by them.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spectral::SpectralField;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A flux `f` together with its derivatives and the hypothesis metadata.
#[derive(Clone)]
pub struct FluxSpec {
    name: String,
    eval: ScalarFn,
    deriv: ScalarFn,
    deriv2: ScalarFn,
    /// Convexity floor sigma.
    sigma: f64,
    /// Claimed growth exponent of `f'`, in `[1, 2)`.
    growth_h1: f64,
    /// Sampling radius R for the hypothesis checks.
    validation_radius: f64,
    /// Test-mode fluxes (linear transport, zero flux) skip validation.
    test_mode: bool,
}

impl std::fmt::Debug for FluxSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FluxSpec")
            .field("name", &self.name)
            .field("sigma", &self.sigma)
            .field("growth_h1", &self.growth_h1)
            .field("validation_radius", &self.validation_radius)
            .field("test_mode", &self.test_mode)
            .finish()
    }
}

/// Outcome of [`validate`].
#[derive(Debug, Clone, Copy)]
pub struct ValidationReport {
    /// Minimum sampled `f''`.
    pub sigma_observed: f64,
    /// Log-log slope of `|f'(y)|` over the top half-decade of the radius.
    pub h1_fit: f64,
    pub pass: bool,
}

impl FluxSpec {
    pub fn new(
        name: impl Into<String>,
        eval: ScalarFn,
        deriv: ScalarFn,
        deriv2: ScalarFn,
        sigma: f64,
        growth_h1: f64,
        validation_radius: f64,
    ) -> Self {
        Self {
            name: name.into(),
            eval,
            deriv,
            deriv2,
            sigma,
            growth_h1,
            validation_radius,
            test_mode: false,
        }
    }

    /// Classical Burgers flux `f(y) = y^2 / 2`.
    pub fn burgers() -> Self {
        Self::new(
            "burgers",
            Arc::new(|y| 0.5 * y * y),
            Arc::new(|y| y),
            Arc::new(|_| 1.0),
            1.0,
            1.0,
            20.0,
        )
    }

    /// `f(y) = y^2/2 + eps y^4`. Valid only while the quartic term keeps
    /// `h1 < 2` on the sampled radius, which bounds `eps` from above.
    pub fn burgers_quartic_mix(eps: f64, radius: f64) -> Self {
        Self::new(
            "burgers_quartic_mix",
            Arc::new(move |y| 0.5 * y * y + eps * y.powi(4)),
            Arc::new(move |y| y + 4.0 * eps * y.powi(3)),
            Arc::new(move |y| 1.0 + 12.0 * eps * y * y),
            1.0,
            1.0,
            radius,
        )
    }

    /// Test-only flux: convex everywhere but with exponential growth, so
    /// validation must reject it.
    pub fn cosh_capped(radius: f64) -> Self {
        Self::new(
            "cosh_capped",
            Arc::new(f64::cosh),
            Arc::new(f64::sinh),
            Arc::new(f64::cosh),
            1.0,
            1.0,
            radius,
        )
    }

    /// Linear transport `f(y) = c y` (test mode; not convex).
    pub fn linear_transport(c: f64) -> Self {
        let mut spec = Self::new(
            "linear_transport",
            Arc::new(move |y| c * y),
            Arc::new(move |_| c),
            Arc::new(|_| 0.0),
            0.0,
            1.0,
            1.0,
        );
        spec.test_mode = true;
        spec
    }

    /// Zero flux (test mode): the dynamics reduces to the heat semigroup.
    pub fn zero() -> Self {
        let mut spec = Self::new(
            "zero",
            Arc::new(|_| 0.0),
            Arc::new(|_| 0.0),
            Arc::new(|_| 0.0),
            0.0,
            1.0,
            1.0,
        );
        spec.test_mode = true;
        spec
    }

    /// Look up one of the built-in fluxes by config name.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "burgers" => Ok(Self::burgers()),
            // eps chosen so the growth fit stays below 2 on the default radius
            "burgers_quartic_mix" => Ok(Self::burgers_quartic_mix(1e-4, 20.0)),
            "cosh_capped" => Ok(Self::cosh_capped(5.0)),
            "linear_transport" => Ok(Self::linear_transport(1.0)),
            "zero" => Ok(Self::zero()),
            other => Err(Error::Config {
                key: "flux".into(),
                reason: format!("unknown flux `{other}`"),
            }),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn growth_h1(&self) -> f64 {
        self.growth_h1
    }

    pub fn validation_radius(&self) -> f64 {
        self.validation_radius
    }

    pub fn is_test_mode(&self) -> bool {
        self.test_mode
    }

    pub fn eval(&self, y: f64) -> f64 {
        (self.eval)(y)
    }

    pub fn deriv(&self, y: f64) -> f64 {
        (self.deriv)(y)
    }

    pub fn deriv2(&self, y: f64) -> f64 {
        (self.deriv2)(y)
    }

    /// Widen the sampling radius, e.g. to `10 * D` once the reachable
    /// range of the solution is known.
    pub fn with_validation_radius(mut self, radius: f64) -> Self {
        self.validation_radius = radius;
        self
    }
}

/// Checks the convexity and growth hypotheses by dense sampling on
/// `[-R, R]`, and cross-checks the supplied derivatives against central
/// differences.
pub fn validate(spec: &FluxSpec, n_samples: usize) -> Result<ValidationReport> {
    assert!(n_samples >= 100, "validation needs at least 100 samples");
    let radius = spec.validation_radius;
    assert!(radius > 0.0, "validation radius must be positive");

    let mut sigma_observed = f64::INFINITY;
    for i in 0..n_samples {
        let y = -radius + 2.0 * radius * i as f64 / (n_samples - 1) as f64;
        let f2 = spec.deriv2(y);
        if f2 < spec.sigma * (1.0 - 1e-6) {
            return Err(Error::Convexity { y, observed: f2, sigma: spec.sigma });
        }
        sigma_observed = sigma_observed.min(f2);

        // derivative cross-check by central differences
        let h = 1e-5 * y.abs().max(1.0);
        let fd1 = (spec.eval(y + h) - spec.eval(y - h)) / (2.0 * h);
        let scale = spec.deriv(y).abs().max(1.0);
        if (fd1 - spec.deriv(y)).abs() / scale > 1e-6 {
            return Err(Error::DerivativeMismatch { y, supplied: spec.deriv(y), estimated: fd1 });
        }
    }

    // growth of |f'| over the top half-decade of the sampled radius,
    // where the dominant power already shows
    let lo = (radius / 10.0f64.sqrt()).max(1e-6);
    let points: Vec<(f64, f64)> = (0..50)
        .map(|i| {
            let y = lo * (radius / lo).powf(i as f64 / 49.0);
            (y, spec.deriv(y).abs().max(1e-300))
        })
        .collect();
    let h1_fit = loglog_slope(&points);
    if h1_fit >= 2.0 {
        return Err(Error::Growth { h1_fit });
    }

    Ok(ValidationReport {
        sigma_observed,
        h1_fit,
        pass: sigma_observed >= spec.sigma * (1.0 - 1e-6) && h1_fit < 2.0,
    })
}

fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Dealiased nonlinear term `-(f(u))_x`: transform to physical space,
/// apply `f` pointwise, transform back, differentiate spectrally,
/// dealias, negate. The zero mode is exactly zero since differentiation
/// kills the mean.
pub fn nonlinear_term(u: &SpectralField, spec: &FluxSpec) -> Result<SpectralField> {
    let samples = u.to_samples();
    let mut flux_samples = Vec::with_capacity(samples.len());
    for v in &samples {
        let fv = spec.eval(*v);
        if !fv.is_finite() {
            return Err(Error::NonFinite { t: u.time_tag().unwrap_or(f64::NAN) });
        }
        flux_samples.push(fv);
    }
    let flux_hat = SpectralField::from_samples(&flux_samples)?;
    Ok(flux_hat.derivative(1).dealias().scaled(-1.0))
}
