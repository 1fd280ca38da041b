//! Memory kernels and their product-integration (fractional Adams) weights.
//!
//! Every weight depends on the step pair `(j, k+1)` only through the lag
//! `k - j`, apart from the first corrector weight, so [`AdamsWeights`] stores
//! one table per grid and serves any row in O(1) per entry.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;

/// Distance from 1 or 2 below which the power-law weights are refused.
pub const POWER_LAW_SINGULAR_EPS: f64 = 1e-6;

/// `K(t) = t^(delta-1) / Gamma(delta)`, `delta` in `(1/2, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractionalKernel {
    delta: f64,
}

impl FractionalKernel {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.5 && delta <= 1.0) {
            return Err(Error::invalid("delta", format!("must lie in (1/2, 1], got {delta}")));
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t < 0.0 || (t == 0.0 && self.delta < 1.0) {
            return Err(Error::KernelDomain { t });
        }
        if self.delta == 1.0 {
            return Ok(1.0);
        }
        Ok(t.powf(self.delta - 1.0) / gamma(self.delta))
    }

    /// `∫_0^t K = t^delta / Gamma(delta + 1)`.
    pub fn integral(&self, t: f64) -> f64 {
        t.powf(self.delta) / gamma(self.delta + 1.0)
    }
}

/// `phi(t) = rho1 / (rho2 + t)^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawKernel {
    pub rho1: f64,
    pub rho2: f64,
    pub p: f64,
}

impl PowerLawKernel {
    pub fn new(rho1: f64, rho2: f64, p: f64) -> Result<Self> {
        let k = Self { rho1, rho2, p };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho1.is_finite() && self.rho1 >= 0.0) {
            return Err(Error::invalid("rho1", format!("must be >= 0, got {}", self.rho1)));
        }
        if !(self.rho2.is_finite() && self.rho2 > 0.0) {
            return Err(Error::invalid("rho2", format!("must be > 0, got {}", self.rho2)));
        }
        if !(self.p.is_finite() && self.p >= 0.0) {
            return Err(Error::invalid("p", format!("must be >= 0, got {}", self.p)));
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        self.rho1 / (self.rho2 + t).powf(self.p)
    }

    /// `∫_0^t phi`.
    pub fn integral(&self, t: f64) -> f64 {
        if (self.p - 1.0).abs() < 1e-12 {
            self.rho1 * ((self.rho2 + t) / self.rho2).ln()
        } else {
            let q = 1.0 - self.p;
            self.rho1 * ((self.rho2 + t).powf(q) - self.rho2.powf(q)) / q
        }
    }

    fn check_weights(&self) -> Result<()> {
        if (self.p - 1.0).abs() < POWER_LAW_SINGULAR_EPS || (self.p - 2.0).abs() < POWER_LAW_SINGULAR_EPS {
            return Err(Error::SingularWeights { p: self.p });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kernel {
    Fractional(FractionalKernel),
    PowerLaw(PowerLawKernel),
}

/// One explicit row of weights for the step `t_k -> t_{k+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightRow {
    /// Corrector weights `a_{j,k+1}`, `j = 0..=k+1`.
    pub a: Vec<f64>,
    /// Predictor weights `b_{j,k+1}`, `j = 0..=k`.
    pub b: Vec<f64>,
}

/// Fractional-kernel weights for step `k -> k+1`.
pub fn adams_weights_fractional(kernel: &FractionalKernel, dt: f64, k: usize) -> WeightRow {
    let f = FractionalFormulas::new(kernel.delta, dt);
    build_row(k, |k| f.first(k), |m| f.interior(m), f.diag(), |m| f.predictor(m))
}

/// Power-law-kernel weights for step `k -> k+1`.
pub fn adams_weights_powerlaw(kernel: &PowerLawKernel, dt: f64, k: usize) -> Result<WeightRow> {
    kernel.check_weights()?;
    let f = PowerLawFormulas::new(*kernel, dt);
    Ok(build_row(k, |k| f.first(k), |m| f.interior(m), f.diag(), |m| f.predictor(m)))
}

fn build_row(
    k: usize,
    first: impl Fn(usize) -> f64,
    interior: impl Fn(usize) -> f64,
    diag: f64,
    predictor: impl Fn(usize) -> f64,
) -> WeightRow {
    let mut a = Vec::with_capacity(k + 2);
    a.push(first(k));
    for j in 1..=k {
        a.push(interior(k - j));
    }
    a.push(diag);
    let b = (0..=k).map(|j| predictor(k - j)).collect();
    WeightRow { a, b }
}

struct FractionalFormulas {
    delta: f64,
    c_corr: f64,
    c_pred: f64,
}

impl FractionalFormulas {
    fn new(delta: f64, dt: f64) -> Self {
        let h = dt.powf(delta);
        Self {
            delta,
            c_corr: h / gamma(delta + 2.0),
            c_pred: h / gamma(delta + 1.0),
        }
    }

    fn first(&self, k: usize) -> f64 {
        let (kf, d) = (k as f64, self.delta);
        self.c_corr * (kf.powf(d + 1.0) - (kf - d) * (kf + 1.0).powf(d))
    }

    fn interior(&self, m: usize) -> f64 {
        let (mf, e) = (m as f64, self.delta + 1.0);
        self.c_corr * ((mf + 2.0).powf(e) + mf.powf(e) - 2.0 * (mf + 1.0).powf(e))
    }

    fn diag(&self) -> f64 {
        self.c_corr
    }

    fn predictor(&self, m: usize) -> f64 {
        let mf = m as f64;
        self.c_pred * ((mf + 1.0).powf(self.delta) - mf.powf(self.delta))
    }
}

struct PowerLawFormulas {
    k: PowerLawKernel,
    dt: f64,
    den: f64,
}

impl PowerLawFormulas {
    fn new(k: PowerLawKernel, dt: f64) -> Self {
        Self {
            k,
            dt,
            den: dt * (1.0 - k.p) * (2.0 - k.p),
        }
    }

    fn w(&self, x: f64) -> f64 {
        self.k.rho2 + x * self.dt
    }

    fn first(&self, k: usize) -> f64 {
        let (p, kf) = (self.k.p, k as f64);
        let hi = self.w(kf + 1.0);
        self.k.rho1 * (self.dt * (2.0 - p) * hi.powf(1.0 - p) - hi.powf(2.0 - p) + self.w(kf).powf(2.0 - p))
            / self.den
    }

    fn interior(&self, m: usize) -> f64 {
        let (e, mf) = (2.0 - self.k.p, m as f64);
        self.k.rho1
            * (self.w(mf).powf(e) - 2.0 * self.w(mf + 1.0).powf(e) + self.w(mf + 2.0).powf(e))
            / self.den
    }

    fn diag(&self) -> f64 {
        let p = self.k.p;
        let r2 = self.k.rho2;
        self.k.rho1
            * ((self.w(1.0).powf(2.0 - p) - r2.powf(2.0 - p)) - self.dt * (2.0 - p) * r2.powf(1.0 - p))
            / self.den
    }

    fn predictor(&self, m: usize) -> f64 {
        let (q, mf) = (1.0 - self.k.p, m as f64);
        self.k.rho1 * (self.w(mf + 1.0).powf(q) - self.w(mf).powf(q)) / q
    }
}

/// Lag-indexed weight table for a fixed kernel and grid.
#[derive(Debug, Clone)]
pub struct AdamsWeights {
    steps: usize,
    /// `a_{0,k+1}` indexed by `k`.
    first: Vec<f64>,
    /// `a_{j,k+1}` for `1 <= j <= k`, indexed by `k - j`.
    interior: Vec<f64>,
    diag: f64,
    /// `b_{j,k+1}` indexed by `k - j`.
    predictor: Vec<f64>,
    /// `predictor` reversed, so row `k` is the contiguous tail `[N-1-k..N]`.
    predictor_rev: Vec<f64>,
    /// `interior` reversed, same trick.
    interior_rev: Vec<f64>,
}

impl AdamsWeights {
    pub fn new(kernel: &Kernel, grid: &TimeGrid) -> Result<Self> {
        let n = grid.steps();
        let dt = grid.dt();
        match kernel {
            Kernel::Fractional(fk) => {
                let f = FractionalFormulas::new(fk.delta, dt);
                Ok(Self::tabulate(n, |k| f.first(k), |m| f.interior(m), f.diag(), |m| f.predictor(m)))
            }
            Kernel::PowerLaw(pk) => {
                pk.check_weights()?;
                let f = PowerLawFormulas::new(*pk, dt);
                Ok(Self::tabulate(n, |k| f.first(k), |m| f.interior(m), f.diag(), |m| f.predictor(m)))
            }
        }
    }

    fn tabulate(
        n: usize,
        first: impl Fn(usize) -> f64,
        interior: impl Fn(usize) -> f64,
        diag: f64,
        predictor: impl Fn(usize) -> f64,
    ) -> Self {
        let first: Vec<f64> = (0..n).map(first).collect();
        let interior: Vec<f64> = (0..n).map(interior).collect();
        let predictor: Vec<f64> = (0..n).map(predictor).collect();
        let predictor_rev = predictor.iter().rev().copied().collect();
        let interior_rev = interior.iter().rev().copied().collect();
        Self {
            steps: n,
            first,
            interior,
            diag,
            predictor,
            predictor_rev,
            interior_rev,
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// `a_{j,k+1}` for `0 <= j <= k+1 <= N`.
    pub fn corrector(&self, j: usize, k: usize) -> f64 {
        debug_assert!(j <= k + 1 && k < self.steps);
        if j == 0 {
            self.first[k]
        } else if j == k + 1 {
            self.diag
        } else {
            self.interior[k - j]
        }
    }

    /// `b_{j,k+1}` for `0 <= j <= k < N`.
    pub fn predictor(&self, j: usize, k: usize) -> f64 {
        debug_assert!(j <= k && k < self.steps);
        self.predictor[k - j]
    }

    pub fn row(&self, k: usize) -> WeightRow {
        build_row(k, |k| self.first[k], |m| self.interior[m], self.diag, |m| self.predictor[m])
    }

    /// `b_{0..=k, k+1}` in `j` order, as a contiguous slice.
    pub(crate) fn predictor_row(&self, k: usize) -> &[f64] {
        &self.predictor_rev[self.steps - 1 - k..]
    }

    /// `a_{1..=k, k+1}` in `j` order, as a contiguous slice.
    pub(crate) fn interior_row(&self, k: usize) -> &[f64] {
        &self.interior_rev[self.steps - k..]
    }

    pub(crate) fn first(&self, k: usize) -> f64 {
        self.first[k]
    }

    pub(crate) fn diag(&self) -> f64 {
        self.diag
    }
}
