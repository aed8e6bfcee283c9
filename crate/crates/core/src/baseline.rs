//! Comparator scores: BIC and Zellner's g-prior Bayes factor.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::regression::ModelFit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    JpepExact,
    JpepAsymptotic,
    Bic,
    Gprior,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::JpepExact,
        Method::JpepAsymptotic,
        Method::Bic,
        Method::Gprior,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::JpepExact => "jpep_exact",
            Method::JpepAsymptotic => "jpep_asymptotic",
            Method::Bic => "bic",
            Method::Gprior => "gprior",
        }
    }

    /// Whether the score is a log Bayes factor against the reference model
    /// (as opposed to a raw information criterion).
    pub fn is_bayes_factor(self) -> bool {
        !matches!(self, Method::Bic)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown method '{s}'")))
    }
}

/// A log-scale model score tagged with its method.
///
/// `value` is a log Bayes factor against the reference model for BF methods
/// and the raw criterion for BIC. A saturated fit (zero RSS) carries
/// unbounded evidence and is stored as `+inf` (BF methods) or `-inf` (BIC).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogScore {
    pub method: Method,
    pub value: f64,
    pub model: ModelSpec,
}

impl LogScore {
    /// Log of the unnormalised posterior weight under a flat model prior.
    pub fn log_evidence(&self) -> f64 {
        if self.method.is_bayes_factor() {
            self.value
        } else {
            -0.5 * self.value
        }
    }
}

fn check_positive_rss(fit: &ModelFit) -> Result<()> {
    if fit.rss > 0.0 && fit.rss.is_finite() {
        Ok(())
    } else {
        Err(Error::DegenerateData(format!(
            "residual sum of squares {} is not positive",
            fit.rss
        )))
    }
}

/// `n ln(rss) + d ln(n)`; constants shared by all models are dropped.
pub fn bic_score(fit: &ModelFit) -> Result<f64> {
    check_positive_rss(fit)?;
    let n = fit.n as f64;
    Ok(n * fit.rss.ln() + fit.d as f64 * n.ln())
}

/// Log Bayes factor of `M_l` against the nested reference `M_0` under
/// Zellner's g-prior:
/// `(n-dl)/2 ln(1+g) - (n-d0)/2 ln(1 + g rssl/rss0)`.
pub fn log_bf_gprior(fit0: &ModelFit, fitl: &ModelFit, g: f64) -> Result<f64> {
    if !(g > 0.0) || !g.is_finite() {
        return Err(Error::Domain(format!(
            "g must be positive and finite, got {g}"
        )));
    }
    if fit0.n != fitl.n {
        return Err(Error::Domain(format!(
            "fits use different sample sizes ({} vs {})",
            fit0.n, fitl.n
        )));
    }
    if fitl.d < fit0.d {
        return Err(Error::Domain(format!(
            "model dimension {} is below the reference dimension {}",
            fitl.d, fit0.d
        )));
    }
    if fitl.d > fit0.n {
        return Err(Error::InsufficientData {
            n: fit0.n,
            required: fitl.d,
        });
    }
    check_positive_rss(fit0)?;
    check_positive_rss(fitl)?;
    let n = fit0.n as f64;
    let ratio = fitl.rss / fit0.rss;
    Ok(0.5 * (n - fitl.d as f64) * g.ln_1p() - 0.5 * (n - fit0.d as f64) * (g * ratio).ln_1p())
}
