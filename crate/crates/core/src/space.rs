//! Exhaustive model-space enumeration, scoring and posterior summaries.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::beta::ln_beta;

use crate::baseline::{bic_score, log_bf_gprior, LogScore, Method};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::jpep::{log_bf_jpep, log_bf_jpep_asymptotic_anchored, BfInputs};
use crate::model::ModelSpec;
use crate::quadrature::QuadratureGrid;
use crate::regression::{fit_rss, ModelFit};

/// Exhaustive enumeration is refused beyond this many covariates unless the
/// model size is capped.
pub const ENUMERATION_CAP: usize = 25;

/// All subsets of `{1..p}` in ascending bitmask order, optionally restricted
/// to at most `max_dim` covariates.
pub fn enumerate_models(p: usize, max_dim: Option<usize>) -> Result<Vec<ModelSpec>> {
    match max_dim {
        None if p > ENUMERATION_CAP => Err(Error::Capacity {
            p,
            cap: ENUMERATION_CAP,
        }),
        None => Ok((0..1u64 << p).map(ModelSpec::from_mask).collect()),
        Some(k) if p <= ENUMERATION_CAP => Ok((0..1u64 << p)
            .filter(|m| m.count_ones() as usize <= k)
            .map(ModelSpec::from_mask)
            .collect()),
        Some(k) => {
            if p > crate::model::MAX_COVARIATES {
                return Err(Error::Capacity {
                    p,
                    cap: crate::model::MAX_COVARIATES,
                });
            }
            let count: f64 = (0..=k.min(p)).map(|j| binomial(p, j)).sum();
            if count > (1u64 << ENUMERATION_CAP) as f64 {
                return Err(Error::Capacity {
                    p,
                    cap: ENUMERATION_CAP,
                });
            }
            let mut out = Vec::with_capacity(count as usize);
            subsets_up_to(p, k, 0, 0, &mut out);
            out.sort_unstable();
            Ok(out.into_iter().map(ModelSpec::from_mask).collect())
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn subsets_up_to(p: usize, k: usize, start: usize, mask: u64, out: &mut Vec<u64>) {
    out.push(mask);
    if mask.count_ones() as usize == k {
        return;
    }
    for j in start..p {
        subsets_up_to(p, k, j + 1, mask | 1 << j, out);
    }
}

/// Prior over the model space.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ModelPrior {
    #[default]
    Uniform,
    /// Beta-binomial on the model size with hyperparameters `(a, b)`.
    BetaBinomial { a: f64, b: f64 },
}

impl ModelPrior {
    /// Log prior mass of a model of `k` covariates out of `p`, up to a constant.
    pub fn log_mass(&self, k: usize, p: usize) -> f64 {
        match *self {
            ModelPrior::Uniform => 0.0,
            ModelPrior::BetaBinomial { a, b } => {
                ln_beta(a + k as f64, b + (p - k) as f64) - ln_beta(a, b)
            }
        }
    }
}

impl fmt::Display for ModelPrior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelPrior::Uniform => f.write_str("uniform"),
            ModelPrior::BetaBinomial { a, b } => write!(f, "beta-binomial:{a},{b}"),
        }
    }
}

impl FromStr for ModelPrior {
    type Err = Error;

    /// `uniform` or `beta-binomial:a,b`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "uniform" {
            return Ok(ModelPrior::Uniform);
        }
        let bad = || {
            Error::Config(format!(
                "unknown model prior '{s}' (expected uniform or beta-binomial:a,b)"
            ))
        };
        let rest = s.strip_prefix("beta-binomial:").ok_or_else(bad)?;
        let (a, b) = rest.split_once(',').ok_or_else(bad)?;
        let a: f64 = a.trim().parse().map_err(|_| bad())?;
        let b: f64 = b.trim().parse().map_err(|_| bad())?;
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::Config(
                "beta-binomial hyperparameters must be positive".into(),
            ));
        }
        Ok(ModelPrior::BetaBinomial { a, b })
    }
}

/// Settings shared by all scoring methods.
#[derive(Debug, Clone, Default)]
pub struct ScoreParams {
    /// g-prior scale; `None` means unit information, `g = n`.
    pub g: Option<f64>,
    pub grid: QuadratureGrid,
}

/// A model dropped from scoring, with the reason.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Excluded {
    pub model: ModelSpec,
    pub reason: String,
}

/// Least-squares fits for an enumerated model list.
#[derive(Debug, Clone)]
pub struct FitTable {
    pub p: usize,
    pub reference: ModelFit,
    /// Successful fits, in enumeration order.
    pub fits: Vec<(ModelSpec, ModelFit)>,
    pub excluded: Vec<Excluded>,
}

/// Fits every model; singular or underdetermined designs are excluded, not fatal.
pub fn fit_all(dataset: &Dataset, models: &[ModelSpec]) -> Result<FitTable> {
    let reference = fit_rss(dataset, ModelSpec::NULL)?;
    let results: Vec<(ModelSpec, Result<ModelFit>)> = models
        .par_iter()
        .map(|&m| (m, fit_rss(dataset, m)))
        .collect();
    let mut fits = Vec::with_capacity(results.len());
    let mut excluded = Vec::new();
    for (m, r) in results {
        match r {
            Ok(f) => fits.push((m, f)),
            Err(e @ (Error::SingularDesign { .. } | Error::InsufficientData { .. })) => excluded
                .push(Excluded {
                    model: m,
                    reason: e.to_string(),
                }),
            Err(e) => return Err(e),
        }
    }
    Ok(FitTable {
        p: dataset.p(),
        reference,
        fits,
        excluded,
    })
}

/// Scores for one method over a model list.
#[derive(Debug, Clone)]
pub struct ScoredModels {
    pub method: Method,
    pub p: usize,
    /// One score per scored model, in enumeration order.
    pub scores: Vec<LogScore>,
    /// Fit statistics aligned with `scores`.
    pub fits: Vec<ModelFit>,
    pub excluded: Vec<Excluded>,
    /// Models whose fit is exact (zero RSS); their evidence is unbounded.
    pub saturated: Vec<ModelSpec>,
}

fn score_one(
    method: Method,
    reference: &ModelFit,
    model: ModelSpec,
    fit: &ModelFit,
    params: &ScoreParams,
) -> Result<f64> {
    if fit.rss == 0.0 {
        return Ok(match method {
            Method::Bic => f64::NEG_INFINITY,
            _ => f64::INFINITY,
        });
    }
    if model.is_null() && method.is_bayes_factor() {
        return Ok(0.0);
    }
    match method {
        Method::JpepExact => {
            let inp = BfInputs::new(fit.n, reference.d, fit.d, reference.rss, fit.rss)?;
            log_bf_jpep(&inp, &params.grid)
        }
        Method::JpepAsymptotic => {
            let inp = BfInputs::new(fit.n, reference.d, fit.d, reference.rss, fit.rss)?;
            Ok(log_bf_jpep_asymptotic_anchored(&inp))
        }
        Method::Bic => bic_score(fit),
        Method::Gprior => log_bf_gprior(reference, fit, params.g.unwrap_or(fit.n as f64)),
    }
}

/// Scores every fitted model with `method`, preserving enumeration order.
pub fn score_fits(table: &FitTable, method: Method, params: &ScoreParams) -> Result<ScoredModels> {
    let results: Vec<Result<f64>> = table
        .fits
        .par_iter()
        .map(|(m, f)| score_one(method, &table.reference, *m, f, params))
        .collect();
    let mut out = ScoredModels {
        method,
        p: table.p,
        scores: Vec::with_capacity(results.len()),
        fits: Vec::with_capacity(results.len()),
        excluded: table.excluded.clone(),
        saturated: Vec::new(),
    };
    for ((model, fit), r) in table.fits.iter().zip(results) {
        match r {
            Ok(value) => {
                if fit.rss == 0.0 {
                    out.saturated.push(*model);
                }
                out.scores.push(LogScore {
                    method,
                    value,
                    model: *model,
                });
                out.fits.push(*fit);
            }
            Err(e @ (Error::InsufficientData { .. } | Error::Domain(_))) => {
                out.excluded.push(Excluded {
                    model: *model,
                    reason: e.to_string(),
                })
            }
            Err(e) => return Err(e),
        }
    }
    out.excluded.sort_by_key(|e| e.model.mask());
    Ok(out)
}

/// Enumerates (optionally capped) models, fits them and scores them.
pub fn score_all(
    dataset: &Dataset,
    method: Method,
    params: &ScoreParams,
    max_dim: Option<usize>,
) -> Result<ScoredModels> {
    let models = enumerate_models(dataset.p(), max_dim)?;
    let table = fit_all(dataset, &models)?;
    score_fits(&table, method, params)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PosteriorSummary {
    pub method: Method,
    /// Posterior probability per scored model, in the order of the input scores.
    pub probs: Vec<(ModelSpec, f64)>,
    /// `inclusion[j]` is the posterior probability that covariate `j + 1` is in the model.
    pub inclusion: Vec<f64>,
    pub map_model: ModelSpec,
}

impl PosteriorSummary {
    pub fn prob_of(&self, model: ModelSpec) -> f64 {
        self.probs
            .iter()
            .find(|(m, _)| *m == model)
            .map_or(0.0, |(_, p)| *p)
    }
}

/// Normalised posterior model probabilities, inclusion probabilities and
/// the MAP model. BIC scores enter as `exp(-BIC/2)`.
///
/// When some models have unbounded evidence (exact fits) the posterior is
/// their normalised prior mass.
pub fn posterior_probs(
    scores: &[LogScore],
    p: usize,
    prior: ModelPrior,
) -> Result<PosteriorSummary> {
    let first = scores.first().ok_or(Error::EmptyScores)?;
    let method = first.method;
    if scores.iter().any(|s| s.method != method) {
        return Err(Error::Config("scores from mixed methods".into()));
    }
    if let Some(s) = scores.iter().find(|s| s.model.max_index() > p) {
        return Err(Error::InvalidModel(format!(
            "model {} exceeds p = {p}",
            s.model
        )));
    }
    let log_prior: Vec<f64> = scores
        .iter()
        .map(|s| prior.log_mass(s.model.size(), p))
        .collect();
    let evidence: Vec<f64> = scores.iter().map(LogScore::log_evidence).collect();
    if evidence.iter().any(|v| v.is_nan()) {
        return Err(Error::Domain("NaN score".into()));
    }
    let unbounded = evidence.contains(&f64::INFINITY);
    let log_w: Vec<f64> = evidence
        .iter()
        .zip(&log_prior)
        .map(|(&e, &lp)| match (unbounded, e == f64::INFINITY) {
            (true, true) => lp,
            (true, false) => f64::NEG_INFINITY,
            (false, _) => e + lp,
        })
        .collect();
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::Domain(
            "every model has zero posterior weight".into(),
        ));
    }
    let raw: Vec<f64> = log_w.iter().map(|w| (w - max).exp()).collect();
    let total: f64 = raw.iter().sum();
    let probs: Vec<(ModelSpec, f64)> = scores
        .iter()
        .zip(&raw)
        .map(|(s, r)| (s.model, r / total))
        .collect();

    let mut inclusion = vec![0.0; p];
    for (m, pr) in &probs {
        for j in m.indices() {
            inclusion[j - 1] += pr;
        }
    }

    let map_idx = (0..scores.len())
        .max_by(|&a, &b| {
            log_w[a]
                .partial_cmp(&log_w[b])
                .unwrap_or(Ordering::Equal)
                // on ties the more parsimonious model must compare as greater
                .then_with(|| scores[b].model.parsimony_cmp(scores[a].model))
        })
        .expect("scores are non-empty");

    Ok(PosteriorSummary {
        method,
        probs,
        inclusion,
        map_model: scores[map_idx].model,
    })
}
