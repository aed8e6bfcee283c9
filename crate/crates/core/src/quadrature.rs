//! Fixed composite Gauss–Legendre grids and log-space integration.
//!
//! Integrands are supplied as log-densities and combined with log-sum-exp,
//! so integrands whose raw values overflow a double can still be handled.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

pub const DEFAULT_PANELS: usize = 8;
pub const DEFAULT_NODES_PER_PANEL: usize = 64;

/// Nodes and log-weights of a composite rule on an open interval.
///
/// Gauss–Legendre nodes never touch the panel endpoints, so every node lies
/// strictly inside the interval.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    nodes: Vec<f64>,
    log_weights: Vec<f64>,
    panels: usize,
}

/// Gauss–Legendre nodes and weights on [-1, 1], ascending.
///
/// Newton iteration on the three-term recurrence for `P_m`, started from the
/// Tricomi approximation.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(m, z);
        dp = if d != 0.0 { d } else { dp };
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[m - 1 - i] = z;
        w[i] = wi;
        w[m - 1 - i] = wi;
    }
    if m % 2 == 1 {
        x[m / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(m: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

impl QuadratureGrid {
    /// Composite Gauss–Legendre rule with `panels` equal panels on `(a, b)`.
    pub fn composite_gauss_legendre(
        a: f64,
        b: f64,
        panels: usize,
        nodes_per_panel: usize,
    ) -> Result<Self> {
        if panels == 0 || nodes_per_panel == 0 {
            return Err(Error::Config(
                "quadrature needs at least one panel and one node".into(),
            ));
        }
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::Config(format!("bad quadrature interval ({a}, {b})")));
        }
        let (gx, gw) = gauss_legendre(nodes_per_panel);
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * nodes_per_panel);
        let mut log_weights = Vec::with_capacity(panels * nodes_per_panel);
        for k in 0..panels {
            let lo = a + k as f64 * h;
            let mid = lo + 0.5 * h;
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(mid + 0.5 * h * x);
                log_weights.push((0.5 * h * w).ln());
            }
        }
        Ok(QuadratureGrid {
            nodes,
            log_weights,
            panels,
        })
    }

    /// Grid on `(0, π/2)`, the range of the angular variable in the J-PEP integral.
    pub fn quarter_circle(panels: usize, nodes_per_panel: usize) -> Result<Self> {
        Self::composite_gauss_legendre(0.0, FRAC_PI_2, panels, nodes_per_panel)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

impl Default for QuadratureGrid {
    /// 8 panels of 64 nodes on `(0, π/2)`.
    fn default() -> Self {
        QuadratureGrid::quarter_circle(DEFAULT_PANELS, DEFAULT_NODES_PER_PANEL)
            .expect("default grid parameters are valid")
    }
}

/// `log ∫ exp(f)` over the grid via log-sum-exp of `f(node) + log_weight`.
///
/// `f` may return `-inf` at some nodes; it must not return NaN or `+inf`.
pub fn log_quad<F>(f: F, grid: &QuadratureGrid) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut vals = Vec::with_capacity(grid.len());
    for (&x, &lw) in grid.nodes.iter().zip(&grid.log_weights) {
        let v = f(x)?;
        if v.is_nan() || v == f64::INFINITY {
            return Err(Error::Domain(format!("integrand is {v} at node {x}")));
        }
        vals.push(v + lw);
    }
    log_sum_exp(&vals).ok_or(Error::QuadratureUnderflow)
}

/// `log Σ exp(v_i)`; `None` when every term is `-inf` or the slice is empty.
pub fn log_sum_exp(vals: &[f64]) -> Option<f64> {
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return None;
    }
    let s: f64 = vals.iter().map(|v| (v - max).exp()).sum();
    Some(max + s.ln())
}
