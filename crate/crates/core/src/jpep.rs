//! J-PEP Bayes factors under the independence Jeffreys baseline.
//!
//! With the reference model nested in `M_l`, `X* = X`, `n* = n` and
//! `δ = n`, the Bayes factor of `M_l` against the reference reduces to a
//! one-dimensional integral over `φ ∈ (0, π/2)`:
//!
//! ```text
//! BF = 2 Γ(n-d_l) / Γ((n-d_l)/2)^2
//!      ∫ sin^(n-d_0-1) φ cos^(n-d_l-1) φ (n + sin²φ)^((n-d_l)/2)
//!        / (n RSS_l/RSS_0 + sin²φ)^((n-d_0)/2) dφ
//! ```
//!
//! Everything here is evaluated in log space. The Jeffreys normalising
//! constants `c_0`, `c_l` are improper and never represented; the public
//! Bayes-factor functions are free of them, and [`log_power_marginal`] is
//! documented as being defined only up to `log c_l`.

use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use nalgebra::{DMatrix, DVector};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::quadrature::{log_quad, QuadratureGrid};
use crate::regression::{log_det_gram, rss_from_design};

/// Tolerance on `rss_l <= rss_0` that absorbs rounding in nested fits.
const NESTING_RTOL: f64 = 1e-9;

/// Sufficient statistics for the J-PEP Bayes factor of `M_l` against `M_0`.
///
/// `n` doubles as the imaginary sample size and the power parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfInputs {
    n: usize,
    d0: usize,
    dl: usize,
    rss0: f64,
    rssl: f64,
}

impl BfInputs {
    pub fn new(n: usize, d0: usize, dl: usize, rss0: f64, rssl: f64) -> Result<Self> {
        if d0 == 0 || dl == 0 {
            return Err(Error::Domain("model dimensions must be positive".into()));
        }
        if d0 > dl {
            return Err(Error::Domain(format!(
                "reference dimension d0 = {d0} exceeds model dimension dl = {dl}"
            )));
        }
        if n < dl + 2 {
            return Err(Error::InsufficientData {
                n,
                required: dl + 2,
            });
        }
        if !rss0.is_finite() || !rssl.is_finite() || rss0 < 0.0 || rssl < 0.0 {
            return Err(Error::Domain(format!(
                "residual sums of squares must be finite and nonnegative (rss0 = {rss0}, rssl = {rssl})"
            )));
        }
        if rss0 == 0.0 || rssl == 0.0 {
            return Err(Error::DegenerateData(
                "zero residual sum of squares (saturated fit)".into(),
            ));
        }
        if rssl > rss0 * (1.0 + NESTING_RTOL) {
            return Err(Error::Domain(format!(
                "rssl = {rssl} exceeds rss0 = {rss0}; the reference must be nested in the model"
            )));
        }
        Ok(BfInputs {
            n,
            d0,
            dl,
            rss0,
            rssl,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d0(&self) -> usize {
        self.d0
    }

    pub fn dl(&self) -> usize {
        self.dl
    }

    pub fn rss0(&self) -> f64 {
        self.rss0
    }

    pub fn rssl(&self) -> f64 {
        self.rssl
    }

    pub fn rss_ratio(&self) -> f64 {
        self.rssl / self.rss0
    }

    /// φ-independent part of the log integrand.
    fn log_offset(&self) -> f64 {
        let n = self.n as f64;
        let hl = 0.5 * (self.n - self.dl) as f64;
        let h0 = 0.5 * (self.n - self.d0) as f64;
        hl * n.ln() - h0 * (n.ln() + self.rss_ratio().ln())
    }

    /// φ-dependent part; `log_offset + log_shape` is the full log integrand.
    fn log_shape(&self, phi: f64) -> f64 {
        let n = self.n as f64;
        let (s, c) = phi.sin_cos();
        let s2 = s * s;
        let a = (self.n - self.d0 - 1) as f64;
        let b = (self.n - self.dl - 1) as f64;
        let hl = 0.5 * (self.n - self.dl) as f64;
        let h0 = 0.5 * (self.n - self.d0) as f64;
        a * s.ln() + b * c.ln() + hl * (s2 / n).ln_1p() - h0 * (s2 / (n * self.rss_ratio())).ln_1p()
    }
}

fn check_phi(phi: f64) -> Result<()> {
    if phi > 0.0 && phi < FRAC_PI_2 {
        Ok(())
    } else {
        Err(Error::Domain(format!("φ = {phi} outside (0, π/2)")))
    }
}

/// Log of the J-PEP integrand at `phi`:
/// `(n-d0-1) ln sin φ + (n-dl-1) ln cos φ + (n-dl)/2 ln(n + sin²φ) - (n-d0)/2 ln(n r + sin²φ)`
/// with `r = rssl / rss0`.
pub fn log_integrand(phi: f64, inp: &BfInputs) -> Result<f64> {
    check_phi(phi)?;
    Ok(inp.log_offset() + inp.log_shape(phi))
}

/// `ln 2 + lnΓ(m) - 2 lnΓ(m/2)` with `m = n - dl`.
fn log_prefactor(inp: &BfInputs) -> f64 {
    let m = (inp.n - inp.dl) as f64;
    LN_2 + ln_gamma(m) - 2.0 * ln_gamma(0.5 * m)
}

/// Exact log Bayes factor of `M_l` against the reference `M_0` by quadrature.
pub fn log_bf_jpep(inp: &BfInputs, grid: &QuadratureGrid) -> Result<f64> {
    let integral = log_quad(|phi| Ok(inp.log_shape(phi)), grid)?;
    Ok(log_prefactor(inp) + inp.log_offset() + integral)
}

/// Large-n approximation
/// `½ ln n + n ln 2 - (dl-d0)/2 ln n - n/2 ln(rssl/rss0)`.
///
/// The `½ ln n + n ln 2` term does not vanish for `M_l = M_0`; it is common
/// to every model and cancels in comparisons between models.
pub fn log_bf_jpep_asymptotic(inp: &BfInputs) -> f64 {
    let n = inp.n as f64;
    0.5 * n.ln() + n * LN_2
        - 0.5 * (inp.dl - inp.d0) as f64 * n.ln()
        - 0.5 * n * inp.rss_ratio().ln()
}

/// Asymptotic log Bayes factor with the model-independent constant removed,
/// so that the reference model scores exactly 0.
pub fn log_bf_jpep_asymptotic_anchored(inp: &BfInputs) -> f64 {
    let n = inp.n as f64;
    -0.5 * (inp.dl - inp.d0) as f64 * n.ln() - 0.5 * n * inp.rss_ratio().ln()
}

/// Log marginal likelihood of imaginary data `ystar` under the Jeffreys
/// baseline with the likelihood raised to `1/δ`, up to the additive
/// constant `log c_l`:
/// `(dl-n*)/2 ln π - ½ ln|X*ᵀX*| + lnΓ((n*-dl)/2) - (n*-dl)/2 ln RSS*`.
///
/// `δ` cancels analytically and is therefore not a parameter.
pub fn log_power_marginal(ystar: &DVector<f64>, xstar: &DMatrix<f64>) -> Result<f64> {
    let (nstar, dl) = xstar.shape();
    if ystar.len() != nstar {
        return Err(Error::Domain(format!(
            "ystar has {} entries, X* has {nstar} rows",
            ystar.len()
        )));
    }
    if nstar <= dl {
        return Err(Error::InsufficientData {
            n: nstar,
            required: dl + 1,
        });
    }
    let fit = rss_from_design(xstar, ystar, ModelSpec::NULL)?;
    if fit.rss == 0.0 {
        return Err(Error::DegenerateData(
            "RSS* = 0; log marginal undefined".into(),
        ));
    }
    let h = 0.5 * (nstar - dl) as f64;
    Ok(-h * PI.ln() - 0.5 * log_det_gram(xstar)? + ln_gamma(h) - h * fit.rss.ln())
}

/// A point at which to evaluate the conditional J-PEP prior of `(β_l, σ_l²)`
/// given the reference parameters `(β_0, σ_0²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorPoint {
    pub beta_l: DVector<f64>,
    pub var_l: f64,
    pub beta_0: DVector<f64>,
    pub var_0: f64,
    pub delta: f64,
    pub xstar: DMatrix<f64>,
}

/// Log density of the variance part of the conditional prior:
/// `σ_l²/σ_0²` follows a beta-prime(m/2, m/2) law with `m = n* - dl`.
pub fn log_conditional_variance_density(var_l: f64, var_0: f64, m: usize) -> Result<f64> {
    if !(var_l > 0.0) || !(var_0 > 0.0) {
        return Err(Error::Domain("variances must be strictly positive".into()));
    }
    if m == 0 {
        return Err(Error::InsufficientData { n: 0, required: 1 });
    }
    let h = 0.5 * m as f64;
    Ok(
        ln_gamma(m as f64) - 2.0 * ln_gamma(h) - h * var_0.ln() + (h - 1.0) * var_l.ln()
            - m as f64 * (var_l / var_0).ln_1p(),
    )
}

/// Log of the conditional J-PEP prior density
/// `π(β_l, σ_l² | β_0, σ_0²)`: the variance factor times
/// `N(β_l; β̃_0, δ(σ_l² + σ_0²)(X*ᵀX*)⁻¹)`, where `β̃_0` is `β_0` padded with
/// zeros to length `d_l`.
pub fn log_conditional_jpep_density(pt: &PriorPoint) -> Result<f64> {
    let (nstar, dl) = pt.xstar.shape();
    if pt.beta_l.len() != dl {
        return Err(Error::Domain(format!(
            "beta_l has length {}, X* has {dl} columns",
            pt.beta_l.len()
        )));
    }
    if pt.beta_0.len() > dl {
        return Err(Error::Domain("beta_0 is longer than beta_l".into()));
    }
    if !(pt.delta > 0.0) {
        return Err(Error::Domain("delta must be strictly positive".into()));
    }
    if nstar <= dl {
        return Err(Error::InsufficientData {
            n: nstar,
            required: dl + 1,
        });
    }
    let var_part = log_conditional_variance_density(pt.var_l, pt.var_0, nstar - dl)?;

    let mut diff = pt.beta_l.clone();
    for (i, b) in pt.beta_0.iter().enumerate() {
        diff[i] -= b;
    }
    let scale = pt.delta * (pt.var_l + pt.var_0);
    let log_det = log_det_gram(&pt.xstar)?;
    let quad = (&pt.xstar * diff).norm_squared();
    let normal = -0.5 * dl as f64 * (2.0 * PI * scale).ln() + 0.5 * log_det - 0.5 * quad / scale;
    Ok(var_part + normal)
}
