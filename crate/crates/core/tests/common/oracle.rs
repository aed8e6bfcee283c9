//! Independent reference computations used by the test suites.
//!
//! Nothing here calls into the library's quadrature or Bayes-factor code.
#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, LN_2, PI};

/// Double-double accumulator (Knuth two-sum).
#[derive(Clone, Copy, Default)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    pub fn add(&mut self, x: f64) {
        let s = self.hi + x;
        let bb = s - self.hi;
        let err = (self.hi - (s - bb)) + (x - bb);
        let lo = self.lo + err;
        let hi = s + lo;
        self.lo = lo - (hi - s);
        self.hi = hi;
    }

    pub fn value(&self) -> f64 {
        self.hi + self.lo
    }
}

/// `ln Γ(m / 2)` for a positive integer `m`, from exact factorial products
/// accumulated in double-double.
pub fn ln_gamma_half_integer(m: u64) -> f64 {
    let mut acc = DoubleDouble::default();
    if m.is_multiple_of(2) {
        // Γ(k) = (k-1)!
        for j in 1..m / 2 {
            acc.add((j as f64).ln());
        }
    } else {
        // Γ(k + 1/2) = √π Π_{j=1..k} (j - 1/2)
        acc.add(0.5 * PI.ln());
        for j in 1..=(m - 1) / 2 {
            acc.add((j as f64 - 0.5).ln());
        }
    }
    acc.value()
}

/// Full J-PEP log integrand, coded directly from its closed form.
pub fn log_integrand(phi: f64, n: u64, d0: u64, dl: u64, ratio: f64) -> f64 {
    let nf = n as f64;
    let s = phi.sin();
    let c = phi.cos();
    (n - d0 - 1) as f64 * s.ln()
        + (n - dl - 1) as f64 * c.ln()
        + 0.5 * (n - dl) as f64 * (nf + s * s).ln()
        - 0.5 * (n - d0) as f64 * (nf * ratio + s * s).ln()
}

/// Log-space trapezoid rule on `(0, π/2)` with `panels` panels, endpoint
/// terms dropped (the integrand vanishes there). Returns the estimate with
/// `panels` and with `panels / 2` (even nodes only).
pub fn log_trapezoid<F: Fn(f64) -> f64>(f: F, panels: usize) -> (f64, f64) {
    assert!(panels.is_multiple_of(2));
    let h = FRAC_PI_2 / panels as f64;
    let vals: Vec<f64> = (1..panels).map(|i| f(i as f64 * h)).collect();
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut fine = DoubleDouble::default();
    let mut coarse = DoubleDouble::default();
    for (k, v) in vals.iter().enumerate() {
        let e = (v - max).exp();
        fine.add(e);
        if (k + 1) % 2 == 0 {
            coarse.add(e);
        }
    }
    (
        max + (fine.value() * h).ln(),
        max + (coarse.value() * 2.0 * h).ln(),
    )
}

/// Oracle log Bayes factor: exact Gamma prefactor plus a 2^20-panel trapezoid.
/// Also returns the fine/coarse disagreement of the trapezoid.
pub fn log_bf_trapezoid(n: u64, d0: u64, dl: u64, ratio: f64) -> (f64, f64) {
    let m = n - dl;
    let prefactor = LN_2 + ln_gamma_half_integer(2 * m) - 2.0 * ln_gamma_half_integer(m);
    let (fine, coarse) = log_trapezoid(|t| log_integrand(t, n, d0, dl, ratio), 1 << 20);
    (prefactor + fine, (fine - coarse).abs())
}
