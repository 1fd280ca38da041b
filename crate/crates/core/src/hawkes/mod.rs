//! Power-law Hawkes intensity with a mean-reverting convolution drift:
//!
//! `λ(t) = λ* + ∫_0^t φ(t-r)(a0 + a1 λ_r) dr + Σ_{t_j < t} φ(t - t_j)`.
//!
//! On a grid the drift integrand is held at its left node value over each
//! cell and the kernel is integrated exactly over the cell, so the drift at
//! node `i` is `Σ_{k<i} (a0 + a1 λ_k) ∫_{t_k}^{t_{k+1}} φ(t_i - r) dr`.

mod calibrate;
mod likelihood;
pub(crate) mod simulate;

pub use calibrate::{calibrate, Calibration, CalibrationOptions, ParamBounds, SelectedModel, StartOutcome};
pub use likelihood::log_likelihood;
pub use simulate::{simulate, simulate_with_rng};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{dot, TimeGrid};
use crate::kernels::PowerLawKernel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HawkesParams {
    pub lambda_star: f64,
    pub a0: f64,
    pub a1: f64,
    #[serde(flatten)]
    pub kernel: PowerLawKernel,
}

impl HawkesParams {
    /// Estimates for the Sichuan M >= 5.0 catalog, 2008-2023.
    pub fn sichuan() -> Self {
        Self {
            lambda_star: 6.310_822,
            a0: 2.233_946,
            a1: -2.167_217,
            kernel: PowerLawKernel {
                rho1: 1.079_113,
                rho2: 0.001,
                p: 0.556_834,
            },
        }
    }

    /// Homogeneous Poisson process with rate `lambda_star`.
    pub fn poisson(lambda_star: f64) -> Self {
        Self {
            lambda_star,
            a0: 0.0,
            a1: 0.0,
            kernel: PowerLawKernel {
                rho1: 0.0,
                rho2: 1.0,
                p: 0.5,
            },
        }
    }

    /// `λ* = 0` is accepted so that empty processes can be simulated.
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_star.is_finite() && self.lambda_star >= 0.0) {
            return Err(Error::invalid("lambda_star", format!("must be >= 0, got {}", self.lambda_star)));
        }
        if !(self.a0.is_finite() && self.a0 >= 0.0) {
            return Err(Error::invalid("a0", format!("must be >= 0, got {}", self.a0)));
        }
        if !self.a1.is_finite() {
            return Err(Error::invalid("a1", "must be finite"));
        }
        self.kernel.validate()
    }
}

impl Default for HawkesParams {
    fn default() -> Self {
        Self::sichuan()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventCatalog {
    times: Vec<f64>,
    horizon: f64,
    magnitudes: Option<Vec<f64>>,
}

impl EventCatalog {
    pub fn new(times: Vec<f64>, horizon: f64, magnitudes: Option<Vec<f64>>) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidCatalog(format!("horizon must be positive, got {horizon}")));
        }
        if let Some(m) = &magnitudes {
            if m.len() != times.len() {
                return Err(Error::InvalidCatalog(format!(
                    "{} magnitudes for {} events",
                    m.len(),
                    times.len()
                )));
            }
        }
        if let Some(&t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0 && **t <= horizon)) {
            return Err(Error::InvalidCatalog(format!("event time {t} outside [0, {horizon}]")));
        }
        if let Some(w) = times.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidCatalog(format!(
                "event times must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Self {
            times,
            horizon,
            magnitudes,
        })
    }

    pub fn empty(horizon: f64) -> Result<Self> {
        Self::new(Vec::new(), horizon, None)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn magnitudes(&self) -> Option<&[f64]> {
        self.magnitudes.as_deref()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Events with `t <= cutoff`, same horizon.
    pub fn truncated(&self, cutoff: f64) -> Self {
        let n = self.times.partition_point(|&t| t <= cutoff);
        Self {
            times: self.times[..n].to_vec(),
            horizon: self.horizon,
            magnitudes: self.magnitudes.as_ref().map(|m| m[..n].to_vec()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntensityPath {
    pub grid: TimeGrid,
    pub lambda: Vec<f64>,
    /// Grid points where the raw recursion went negative and was set to 0.
    pub clamped: usize,
}

/// Cell integrals `w_m = ∫_{(m-1)Δ}^{mΔ} φ`, `m = 1..=N`, stored reversed so
/// that the drift convolution at node `i` is one contiguous dot product.
pub(crate) struct LagTable {
    steps: usize,
    rev: Vec<f64>,
}

impl LagTable {
    pub(crate) fn new(kernel: &PowerLawKernel, grid: &TimeGrid) -> Self {
        let n = grid.steps();
        let mut cum: Vec<f64> = (0..=n).map(|m| kernel.integral(grid.time(m))).collect();
        for m in (1..=n).rev() {
            cum[m] -= cum[m - 1];
        }
        // rev[N - m] = w_m; rev[N] is unused.
        let mut rev: Vec<f64> = cum[1..].iter().rev().copied().collect();
        rev.push(0.0);
        Self { steps: n, rev }
    }

    /// `Σ_{k<i} w_{i-k} g_k`.
    pub(crate) fn drift_sum(&self, i: usize, g: &[f64]) -> f64 {
        dot(&self.rev[self.steps - i..self.steps], &g[..i])
    }
}

/// Drift `Σ_k g_k ∫_{[t_k, t_{k+1}) ∩ [0, t)} φ(t - r) dr` at an off-grid time.
pub(crate) fn drift_at(kernel: &PowerLawKernel, grid: &TimeGrid, g: &[f64], t: f64) -> f64 {
    let mut s = 0.0;
    let mut upper = kernel.integral(t);
    for (k, gk) in g.iter().enumerate() {
        if grid.time(k) >= t {
            break;
        }
        let lo = (t - grid.time(k + 1)).max(0.0);
        let lower = kernel.integral(lo);
        s += gk * (upper - lower);
        upper = lower;
    }
    s
}

/// Incremental form of the grid recursion, shared by evaluation and simulation.
pub(crate) struct IntensityStepper<'a> {
    params: HawkesParams,
    grid: TimeGrid,
    lags: &'a LagTable,
    lambda: Vec<f64>,
    drift: Vec<f64>,
    excitation: Vec<f64>,
    clamped: usize,
}

impl<'a> IntensityStepper<'a> {
    pub(crate) fn new(params: HawkesParams, grid: TimeGrid, lags: &'a LagTable) -> Self {
        Self {
            params,
            grid,
            lags,
            lambda: Vec::with_capacity(grid.len()),
            drift: Vec::with_capacity(grid.len()),
            excitation: Vec::with_capacity(grid.len()),
            clamped: 0,
        }
    }

    /// Computes `λ_i` for the next node; `events` must hold every event
    /// strictly before `t_i` (later ones are ignored).
    pub(crate) fn advance(&mut self, events: &[f64]) -> f64 {
        let i = self.lambda.len();
        let t = self.grid.time(i);
        let p = &self.params;
        let mut raw = p.lambda_star;
        let mut exc = 0.0;
        if i > 0 && p.kernel.rho1 != 0.0 {
            raw += self.lags.drift_sum(i, &self.drift);
            for &tj in events.iter().take_while(|&&tj| tj < t) {
                exc += p.kernel.eval(t - tj);
            }
        }
        raw += exc;
        let lam = if raw < 0.0 {
            self.clamped += 1;
            0.0
        } else {
            raw
        };
        self.lambda.push(lam);
        self.drift.push(p.a0 + p.a1 * lam);
        self.excitation.push(exc);
        lam
    }

    /// `a0 + a1 λ_k` at the nodes visited so far.
    pub(crate) fn drift_terms(&self) -> &[f64] {
        &self.drift
    }

    /// Jump part `Σ_{t_j < t_k} φ(t_k - t_j)` at the nodes visited so far.
    pub(crate) fn excitation(&self) -> &[f64] {
        &self.excitation
    }

    pub(crate) fn finish(self) -> IntensityPath {
        IntensityPath {
            grid: self.grid,
            lambda: self.lambda,
            clamped: self.clamped,
        }
    }
}

pub fn intensity_on_grid(params: &HawkesParams, catalog: &EventCatalog, grid: &TimeGrid) -> Result<IntensityPath> {
    params.validate()?;
    let lags = LagTable::new(&params.kernel, grid);
    Ok(run_recursion(params, catalog.times(), grid, &lags).finish())
}

pub(crate) fn run_recursion<'a>(
    params: &HawkesParams,
    events: &[f64],
    grid: &TimeGrid,
    lags: &'a LagTable,
) -> IntensityStepper<'a> {
    let mut stepper = IntensityStepper::new(*params, *grid, lags);
    for _ in 0..grid.len() {
        stepper.advance(events);
    }
    stepper
}
