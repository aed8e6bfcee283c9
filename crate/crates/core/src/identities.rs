//! Built-in analytic identity checks, run against a given quadrature grid.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::jpep::{log_bf_jpep, log_conditional_variance_density, log_power_marginal, BfInputs};
use crate::model::ModelSpec;
use crate::quadrature::{log_quad, log_sum_exp, QuadratureGrid};
use crate::regression::{log_det_gram, rss_from_design};

pub const BETA_TOL: f64 = 1e-10;
pub const SELF_COMPARISON_TOL: f64 = 1e-8;
pub const SIGMA_MARGINAL_TOL: f64 = 1e-6;
pub const DELTA_QUADRATURE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    fn new(name: &'static str, error: f64, tolerance: f64) -> Self {
        CheckResult {
            name,
            error,
            tolerance,
            passed: error <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub checks: Vec<CheckResult>,
}

impl IdentityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// `log[B((a+1)/2, (b+1)/2) / 2] = log ∫₀^{π/2} sin^a cos^b`.
pub fn log_half_beta(a: u32, b: u32) -> f64 {
    let x = 0.5 * (a as f64 + 1.0);
    let y = 0.5 * (b as f64 + 1.0);
    ln_gamma(x) + ln_gamma(y) - ln_gamma(x + y) - std::f64::consts::LN_2
}

/// Max |log error| of the grid against `∫ sin^a cos^b` for `0 <= a, b <= 40`.
pub fn beta_oracle_error(grid: &QuadratureGrid) -> f64 {
    let mut worst: f64 = 0.0;
    for a in 0..=40u32 {
        for b in 0..=40u32 {
            let got = log_quad(
                |t| Ok(a as f64 * t.sin().ln() + b as f64 * t.cos().ln()),
                grid,
            );
            let err = match got {
                Ok(v) => (v - log_half_beta(a, b)).abs(),
                Err(_) => f64::INFINITY,
            };
            worst = worst.max(if err.is_nan() { f64::INFINITY } else { err });
        }
    }
    worst
}

/// Max |log BF| when a model is compared with itself.
pub fn self_comparison_error(grid: &QuadratureGrid) -> f64 {
    let mut worst: f64 = 0.0;
    for &n in &[10usize, 50, 200, 1000, 5000] {
        for &d in &[1usize, 3] {
            let inp = BfInputs::new(n, d, d, 2.5, 2.5).expect("valid inputs");
            let err = log_bf_jpep(&inp, grid).map_or(f64::INFINITY, f64::abs);
            worst = worst.max(err);
        }
    }
    worst
}

/// Max |∫ density - 1| of the variance factor of the conditional prior,
/// integrated over `σ_l² = σ_0² tan²θ`.
pub fn sigma_marginal_error(grid: &QuadratureGrid) -> f64 {
    let mut worst: f64 = 0.0;
    for &m in &[1usize, 2, 5, 10, 50] {
        for &var_0 in &[0.3, 1.0, 7.0] {
            let r = log_quad(
                |t| {
                    let tan = t.tan();
                    let var_l = var_0 * tan * tan;
                    // d var_l / dθ = 2 var_0 tanθ / cos²θ
                    let jac = (2.0 * var_0 * tan).ln() - 2.0 * t.cos().ln();
                    Ok(log_conditional_variance_density(var_l, var_0, m)? + jac)
                },
                grid,
            );
            let err = r.map_or(f64::INFINITY, |v| v.exp_m1().abs());
            worst = worst.max(if err.is_nan() { f64::INFINITY } else { err });
        }
    }
    worst
}

/// Power marginal by explicit integration over `log σ²` of the β-integrated
/// power likelihood `∫ N(y*; X*β, δσ²I) dβ`, with prior `1/σ²`.
fn power_marginal_by_quadrature(ystar: &DVector<f64>, xstar: &DMatrix<f64>, delta: f64) -> f64 {
    let (n, d) = xstar.shape();
    let rss = rss_from_design(xstar, ystar, ModelSpec::NULL)
        .expect("full rank")
        .rss;
    let log_det = log_det_gram(xstar).expect("full rank");
    let h = 0.5 * (n - d) as f64;
    let centre = (rss / delta).ln();
    let grid = QuadratureGrid::composite_gauss_legendre(centre - 40.0, centre + 40.0, 80, 32)
        .expect("valid grid");
    let vals: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(grid.log_weights())
        .map(|(&t, &lw)| {
            let s2 = t.exp();
            // dσ²/σ² = dt
            -h * (2.0 * std::f64::consts::PI * delta * s2).ln()
                - 0.5 * log_det
                - rss / (2.0 * delta * s2)
                + lw
        })
        .collect();
    log_sum_exp(&vals).expect("finite integrand")
}

fn delta_fixture() -> (DVector<f64>, DMatrix<f64>) {
    let n = 12;
    let x = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => 1.0,
        1 => (i as f64 * 0.37).sin(),
        _ => ((i * i) % 7) as f64 / 3.0,
    });
    let y = DVector::from_fn(n, |i, _| 0.5 + (i as f64 * 1.3).cos() + 0.1 * i as f64);
    (y, x)
}

/// `|log_power_marginal - quadrature(δ)|` maximised over δ ∈ {1, n*}.
pub fn delta_independence_error() -> f64 {
    let (y, x) = delta_fixture();
    let closed = log_power_marginal(&y, &x).expect("fixture is well posed");
    [1.0, y.len() as f64]
        .iter()
        .map(|&delta| (closed - power_marginal_by_quadrature(&y, &x, delta)).abs())
        .fold(0.0, f64::max)
}

pub fn run_identity_suite(grid: &QuadratureGrid) -> IdentityReport {
    IdentityReport {
        checks: vec![
            CheckResult::new("beta_integral_oracle", beta_oracle_error(grid), BETA_TOL),
            CheckResult::new(
                "self_comparison_bf_one",
                self_comparison_error(grid),
                SELF_COMPARISON_TOL,
            ),
            CheckResult::new(
                "sigma_marginal_normalization",
                sigma_marginal_error(grid),
                SIGMA_MARGINAL_TOL,
            ),
            CheckResult::new(
                "delta_independence",
                delta_independence_error(),
                DELTA_QUADRATURE_TOL,
            ),
        ],
    }
}
