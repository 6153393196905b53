//! Intensity functions λ and their analytic companions.
//!
//! Every built-in model is evaluated in log space: [`IntensityModel::log_lambda`]
//! and the logarithmic derivative λ′/λ stay finite far outside the range where
//! λ itself is representable, which is what the solvers consume.

mod normal;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{DesignError, Result};

/// Analytic properties of an intensity, declared per model.
///
/// (A1) positivity and smoothness is implied by constructing a model at all.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Properties {
    /// λ′ > 0 on ℝ.
    pub a2: bool,
    /// λ is unimodal with a finite mode.
    pub a2_prime: bool,
    /// u″ = (1/λ)″ is injective on ℝ.
    pub a3: bool,
    /// u″ is injective on each side of the mode.
    pub a3_prime: bool,
    /// λ′/λ is non-increasing.
    pub a4: bool,
    /// 1/λ grows faster than x².
    pub a5: bool,
}

/// A user supplied intensity.
///
/// Only `log_lambda`, `dlog_lambda` (λ′/λ) and `u_second` are required; the
/// remaining quantities are derived from them.
pub trait Intensity: Send + Sync + fmt::Debug {
    fn log_lambda(&self, x: f64) -> f64;
    fn dlog_lambda(&self, x: f64) -> f64;
    fn u_second(&self, x: f64) -> f64;
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// An [`Intensity`] built from closures for λ, λ′ and u″.
#[derive(Clone)]
pub struct FnIntensity {
    lambda: ScalarFn,
    lambda_prime: ScalarFn,
    u_second: ScalarFn,
}

impl FnIntensity {
    pub fn new(
        lambda: impl Fn(f64) -> f64 + Send + Sync + 'static,
        lambda_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
        u_second: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            lambda: Arc::new(lambda),
            lambda_prime: Arc::new(lambda_prime),
            u_second: Arc::new(u_second),
        }
    }
}

impl fmt::Debug for FnIntensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FnIntensity")
    }
}

impl Intensity for FnIntensity {
    fn log_lambda(&self, x: f64) -> f64 {
        (self.lambda)(x).ln()
    }

    fn dlog_lambda(&self, x: f64) -> f64 {
        (self.lambda_prime)(x) / (self.lambda)(x)
    }

    fn u_second(&self, x: f64) -> f64 {
        (self.u_second)(x)
    }
}

#[derive(Clone, Debug)]
enum Kind {
    Logit,
    Probit,
    Exponential,
    Custom(Arc<dyn Intensity>),
}

/// An intensity function together with its mode and declared properties.
#[derive(Clone, Debug)]
pub struct IntensityModel {
    name: String,
    mode: f64,
    properties: Properties,
    kind: Kind,
}

const UNIMODAL: Properties = Properties {
    a2: false,
    a2_prime: true,
    a3: false,
    a3_prime: true,
    a4: true,
    a5: true,
};

impl IntensityModel {
    /// λ(x) = eˣ/(1 + eˣ)².
    pub fn logit() -> Self {
        Self {
            name: "logit".into(),
            mode: 0.0,
            properties: UNIMODAL,
            kind: Kind::Logit,
        }
    }

    /// λ(x) = φ(x)²/(Φ(x)(1 − Φ(x))).
    pub fn probit() -> Self {
        Self {
            name: "probit".into(),
            mode: 0.0,
            properties: UNIMODAL,
            kind: Kind::Probit,
        }
    }

    /// λ(x) = eˣ, the Poisson-type intensity.
    pub fn exponential() -> Self {
        Self {
            name: "exponential".into(),
            mode: f64::INFINITY,
            properties: Properties {
                a2: true,
                a2_prime: false,
                a3: true,
                a3_prime: false,
                a4: true,
                a5: false,
            },
            kind: Kind::Exponential,
        }
    }

    /// A user-defined intensity. `mode` is `+∞` for strictly increasing and
    /// `−∞` for strictly decreasing intensities.
    pub fn custom(
        name: impl Into<String>,
        mode: f64,
        properties: Properties,
        intensity: Arc<dyn Intensity>,
    ) -> Result<Self> {
        if mode.is_nan() {
            return Err(DesignError::Domain("mode must not be NaN".into()));
        }
        Ok(Self {
            name: name.into(),
            mode,
            properties,
            kind: Kind::Custom(intensity),
        })
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "logit" => Ok(Self::logit()),
            "probit" => Ok(Self::probit()),
            "exponential" | "exp" | "poisson" => Ok(Self::exponential()),
            _ => Err(DesignError::UnknownModel(name.to_string())),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn mode(&self) -> f64 {
        self.mode
    }

    pub fn properties(&self) -> Properties {
        self.properties
    }

    /// Symmetric about the mode, λ(c + x) = λ(c − x).
    pub fn is_symmetric(&self) -> bool {
        matches!(self.kind, Kind::Logit | Kind::Probit)
    }

    pub fn lambda(&self, x: f64) -> Result<f64> {
        check(x)?;
        Ok(self.log_lambda_unchecked(x).exp())
    }

    pub fn log_lambda(&self, x: f64) -> Result<f64> {
        check(x)?;
        Ok(self.log_lambda_unchecked(x))
    }

    pub fn lambda_prime(&self, x: f64) -> Result<f64> {
        check(x)?;
        Ok(self.log_lambda_unchecked(x).exp() * self.dlog_lambda_unchecked(x))
    }

    /// λ′(x)/λ(x).
    pub fn dlog_lambda(&self, x: f64) -> Result<f64> {
        check(x)?;
        Ok(self.dlog_lambda_unchecked(x))
    }

    /// Second derivative of u = 1/λ.
    pub fn u_second(&self, x: f64) -> Result<f64> {
        check(x)?;
        Ok(match &self.kind {
            Kind::Logit => 2.0 * x.cosh(),
            Kind::Probit => {
                let (g, dg) = probit_dlog(x);
                (g * g - dg) * (-probit_log_lambda(x)).exp()
            }
            Kind::Exponential => (-x).exp(),
            Kind::Custom(c) => c.u_second(x),
        })
    }

    pub(crate) fn log_lambda_unchecked(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Logit => {
                let a = x.abs();
                -a - 2.0 * (-a).exp().ln_1p()
            }
            Kind::Probit => probit_log_lambda(x),
            Kind::Exponential => x,
            Kind::Custom(c) => c.log_lambda(x),
        }
    }

    pub(crate) fn dlog_lambda_unchecked(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Logit => -(0.5 * x).tanh(),
            Kind::Probit => probit_dlog(x).0,
            Kind::Exponential => 1.0,
            Kind::Custom(c) => c.dlog_lambda(x),
        }
    }
}

fn check(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(DesignError::Domain(format!("intensity argument {x} is not finite")))
    }
}

fn probit_log_lambda(x: f64) -> f64 {
    2.0 * normal::log_pdf(x) - normal::log_cdf_product(x)
}

/// (λ′/λ, (λ′/λ)′) for the probit intensity.
fn probit_dlog(x: f64) -> (f64, f64) {
    let (a, b) = normal::hazards(x);
    let g = -2.0 * x - a + b;
    let dg = -2.0 + a * (x + a) + b * (b - x);
    (g, dg)
}

/// q(x₁) = λ(β₀ + β₁x₁) for a canonical parameter pair.
#[derive(Clone, Debug)]
pub struct ShiftedIntensity {
    model: IntensityModel,
    beta0: f64,
    beta1: f64,
}

impl ShiftedIntensity {
    pub fn new(model: IntensityModel, beta0: f64, beta1: f64) -> Result<Self> {
        if !beta0.is_finite() || !beta1.is_finite() {
            return Err(DesignError::Domain(format!(
                "parameters ({beta0}, {beta1}) must be finite"
            )));
        }
        if beta1 < 0.0 {
            return Err(DesignError::Contract(format!(
                "beta1 = {beta1} is negative; canonicalize the parameters first"
            )));
        }
        Ok(Self {
            model,
            beta0,
            beta1,
        })
    }

    pub fn model(&self) -> &IntensityModel {
        &self.model
    }

    pub fn beta0(&self) -> f64 {
        self.beta0
    }

    pub fn beta1(&self) -> f64 {
        self.beta1
    }

    /// Mode of q, c_q = (c_λ − β₀)/β₁. `None` when β₁ = 0.
    pub fn mode(&self) -> Option<f64> {
        if self.beta1 == 0.0 {
            return None;
        }
        let c = self.model.mode;
        if c.is_infinite() {
            Some(c)
        } else {
            Some((c - self.beta0) / self.beta1)
        }
    }

    /// (q(x₁), q′(x₁)).
    pub fn q_bundle(&self, x1: f64) -> Result<(f64, f64)> {
        if !(-1.0..=1.0).contains(&x1) {
            return Err(DesignError::Domain(format!("x1 = {x1} outside [-1, 1]")));
        }
        let z = self.beta0 + self.beta1 * x1;
        let q = self.model.lambda(z)?;
        let dq = if self.beta1 == 0.0 {
            0.0
        } else {
            self.beta1 * self.model.lambda_prime(z)?
        };
        Ok((q, dq))
    }

    #[inline]
    pub fn q(&self, x1: f64) -> f64 {
        self.log_q(x1).exp()
    }

    #[inline]
    pub fn log_q(&self, x1: f64) -> f64 {
        self.model
            .log_lambda_unchecked(self.beta0 + self.beta1 * x1)
    }

    /// q′(x₁)/q(x₁).
    #[inline]
    pub fn dlog_q(&self, x1: f64) -> f64 {
        if self.beta1 == 0.0 {
            return 0.0;
        }
        self.beta1 * self.model.dlog_lambda_unchecked(self.beta0 + self.beta1 * x1)
    }
}
