//! Seeded simulation study and consistency scans.
//!
//! Each `(n, replicate)` cell draws its data from its own counter-based
//! stream ([`cell_stream`]), so any cell can be regenerated in isolation and
//! results do not depend on scheduling. Within a cell the covariates are
//! drawn row-major (`n × p` normals) followed by `n` noise normals.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::baseline::Method;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::jpep::{log_bf_jpep, BfInputs};
use crate::model::ModelSpec;
use crate::quadrature::QuadratureGrid;
use crate::regression::fit_rss;
use crate::rng::{cell_stream, CounterRng};
use crate::space::{
    enumerate_models, fit_all, posterior_probs, score_fits, ModelPrior, ScoreParams,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Data-generating process: standard normal covariates and
/// `y = Σ coef_j x_j + ε`, `ε ~ N(0, noise_sd²)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Generator {
    pub coefficients: Vec<f64>,
    pub noise_sd: f64,
}

impl Generator {
    /// Ten covariates, effects 0.3, 0.5 and 1 on X3, X4, X5, noise sd 2.5.
    pub fn standard() -> Self {
        Generator {
            coefficients: vec![0.0, 0.0, 0.3, 0.5, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            noise_sd: 2.5,
        }
    }

    pub fn p(&self) -> usize {
        self.coefficients.len()
    }

    /// Covariates with nonzero coefficients.
    pub fn true_model(&self) -> ModelSpec {
        ModelSpec::from_mask(
            self.coefficients
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0.0)
                .fold(0u64, |m, (j, _)| m | 1 << j),
        )
    }
}

/// Draws one dataset from `rng`. Fully determined by the stream state.
pub fn generate_dataset(
    n: usize,
    coefficients: &[f64],
    noise_sd: f64,
    rng: &mut CounterRng,
) -> Result<Dataset> {
    let p = coefficients.len();
    let mut x = DMatrix::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            x[(i, j)] = rng.next_normal();
        }
    }
    let mut y = DVector::zeros(n);
    for i in 0..n {
        let signal: f64 = (0..p).map(|j| coefficients[j] * x[(i, j)]).sum();
        y[i] = signal + noise_sd * rng.next_normal();
    }
    let names = (1..=p).map(|j| format!("x{j}")).collect();
    Dataset::new(y, x, names)
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub generator: Generator,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub model_prior: ModelPrior,
    pub params: ScoreParams,
}

impl SimConfig {
    /// 100 replications over n = 30, 50, 100, 500, 1000.
    pub fn full_scale(seed: u64) -> Self {
        SimConfig {
            n_grid: vec![30, 50, 100, 500, 1000],
            replications: 100,
            generator: Generator::standard(),
            seed,
            methods: vec![Method::JpepExact, Method::Bic, Method::Gprior],
            model_prior: ModelPrior::Uniform,
            params: ScoreParams::default(),
        }
    }

    /// 25 replications over n = 30, 50, 100, 500.
    pub fn desk_scale(seed: u64) -> Self {
        SimConfig {
            n_grid: vec![30, 50, 100, 500],
            replications: 25,
            ..SimConfig::full_scale(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.replications == 0 || self.methods.is_empty() {
            return Err(Error::Config(
                "simulation needs at least one n, one replication and one method".into(),
            ));
        }
        if self.generator.p() == 0 {
            return Err(Error::Config("generator has no covariates".into()));
        }
        if !(self.generator.noise_sd > 0.0) {
            return Err(Error::Config("noise_sd must be positive".into()));
        }
        if let Some(&n) = self.n_grid.iter().find(|&&n| n < 3) {
            return Err(Error::Config(format!("sample size {n} is too small")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimRecord {
    pub n: usize,
    pub replicate: usize,
    pub method: Method,
    pub true_model_posterior: f64,
    pub inclusion: Vec<f64>,
    pub map_hit: bool,
    pub map_size: usize,
}

fn run_cell(config: &SimConfig, n: usize, replicate: usize) -> Result<Vec<SimRecord>> {
    let g = &config.generator;
    let mut rng = CounterRng::new(config.seed, cell_stream(n, replicate));
    let data = generate_dataset(n, &g.coefficients, g.noise_sd, &mut rng)?;
    let models = enumerate_models(g.p(), None)?;
    let table = fit_all(&data, &models)?;
    let truth = g.true_model();
    config
        .methods
        .iter()
        .map(|&method| {
            let scored = score_fits(&table, method, &config.params)?;
            let post = posterior_probs(&scored.scores, g.p(), config.model_prior)?;
            Ok(SimRecord {
                n,
                replicate,
                method,
                true_model_posterior: post.prob_of(truth),
                inclusion: post.inclusion,
                map_hit: post.map_model == truth,
                map_size: post.map_model.size(),
            })
        })
        .collect()
}

/// Runs every `(n, replicate, method)` cell. Records are ordered by n, then
/// replicate, then method as listed in the config.
pub fn run_simulation(config: &SimConfig) -> Result<Vec<SimRecord>> {
    config.validate()?;
    let cells: Vec<(usize, usize)> = config
        .n_grid
        .iter()
        .flat_map(|&n| (0..config.replications).map(move |r| (n, r)))
        .collect();
    let per_cell: Vec<Result<Vec<SimRecord>>> = cells
        .par_iter()
        .map(|&(n, r)| run_cell(config, n, r))
        .collect();
    let mut out = Vec::with_capacity(cells.len() * config.methods.len());
    for r in per_cell {
        out.extend(r?);
    }
    Ok(out)
}

/// Long-format CSV: `method,n,replicate,true_model_posterior,map_hit,map_size,incl_1..incl_p`.
pub fn write_records_csv<W: Write>(records: &[SimRecord], out: W) -> Result<()> {
    let p = records.first().map_or(0, |r| r.inclusion.len());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "method".to_string(),
        "n".into(),
        "replicate".into(),
        "true_model_posterior".into(),
        "map_hit".into(),
        "map_size".into(),
    ];
    header.extend((1..=p).map(|j| format!("incl_{j}")));
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![
            r.method.to_string(),
            r.n.to_string(),
            r.replicate.to_string(),
            r.true_model_posterior.to_string(),
            r.map_hit.to_string(),
            r.map_size.to_string(),
        ];
        row.extend(r.inclusion.iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}

/// Sample quantile with linear interpolation between order statistics.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

impl Quartiles {
    pub fn of(values: &[f64]) -> Self {
        Quartiles {
            q1: quantile(values, 0.25),
            median: quantile(values, 0.5),
            q3: quantile(values, 0.75),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub method: Method,
    pub n: usize,
    pub replications: usize,
    pub true_model_posterior: Quartiles,
    pub map_hit_rate: f64,
    pub map_size: Quartiles,
    pub inclusion: Vec<Quartiles>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimSummary {
    pub schema_version: u32,
    pub seed: u64,
    pub true_model: ModelSpec,
    pub cells: Vec<CellSummary>,
}

impl SimSummary {
    pub fn cell(&self, method: Method, n: usize) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.method == method && c.n == n)
    }
}

/// Per `(method, n)` quartiles of the true-model posterior, MAP size and
/// inclusion probabilities.
pub fn summarize(config: &SimConfig, records: &[SimRecord]) -> SimSummary {
    let p = config.generator.p();
    let mut cells = Vec::new();
    for &method in &config.methods {
        for &n in &config.n_grid {
            let rs: Vec<&SimRecord> = records
                .iter()
                .filter(|r| r.method == method && r.n == n)
                .collect();
            if rs.is_empty() {
                continue;
            }
            let tp: Vec<f64> = rs.iter().map(|r| r.true_model_posterior).collect();
            let sizes: Vec<f64> = rs.iter().map(|r| r.map_size as f64).collect();
            let hits = rs.iter().filter(|r| r.map_hit).count();
            let inclusion = (0..p)
                .map(|j| Quartiles::of(&rs.iter().map(|r| r.inclusion[j]).collect::<Vec<_>>()))
                .collect();
            cells.push(CellSummary {
                method,
                n,
                replications: rs.len(),
                true_model_posterior: Quartiles::of(&tp),
                map_hit_rate: hits as f64 / rs.len() as f64,
                map_size: Quartiles::of(&sizes),
                inclusion,
            });
        }
    }
    SimSummary {
        schema_version: SCHEMA_VERSION,
        seed: config.seed,
        true_model: config.generator.true_model(),
        cells,
    }
}

/// Log J-PEP Bayes factor of `rival` against `true_model` along `n_grid`,
/// with data drawn from `generator` (whose support must be `true_model`).
///
/// Each n uses stream `cell_stream(n, 0)` of `seed`.
pub fn consistency_scan(
    true_model: ModelSpec,
    rival: ModelSpec,
    n_grid: &[usize],
    seed: u64,
    generator: &Generator,
    grid: &QuadratureGrid,
) -> Result<Vec<(usize, f64)>> {
    if rival == true_model {
        return Err(Error::Config(
            "rival must differ from the true model".into(),
        ));
    }
    if generator.true_model() != true_model {
        return Err(Error::Config(format!(
            "generator support {} differs from the true model {true_model}",
            generator.true_model()
        )));
    }
    if rival.max_index() > generator.p() {
        return Err(Error::InvalidModel(format!(
            "rival {rival} references covariates beyond p = {}",
            generator.p()
        )));
    }
    n_grid
        .iter()
        .map(|&n| {
            let mut rng = CounterRng::new(seed, cell_stream(n, 0));
            let data = generate_dataset(n, &generator.coefficients, generator.noise_sd, &mut rng)?;
            let reference = fit_rss(&data, ModelSpec::NULL)?;
            let log_bf = |m: ModelSpec| -> Result<f64> {
                if m.is_null() {
                    return Ok(0.0);
                }
                let fit = fit_rss(&data, m)?;
                let inp = BfInputs::new(n, reference.d, fit.d, reference.rss, fit.rss)?;
                log_bf_jpep(&inp, grid)
            };
            Ok((n, log_bf(rival)? - log_bf(true_model)?))
        })
        .collect()
}
