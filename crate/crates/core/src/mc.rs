//! Monte Carlo simulation of variance, claims and controlled wealth.
//!
//! Paths run on a calendar grid `t_k = kΔ`. Path `i` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` on stream `i`, so results do not depend
//! on thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{ClaimParams, MarketParams, PdCoefficients, VanillaCoefficients};
use crate::error::{Error, Result};
use crate::grid::{interp_linear, TimeGrid};
use crate::hawkes::simulate::poisson_count;
use crate::hawkes::{HawkesParams, IntensityStepper, LagTable};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub paths: usize,
    pub grid: TimeGrid,
    pub seed: u64,
    /// Keep per-path terminal wealth in the bundle.
    pub keep_paths: bool,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.paths == 0 {
            return Err(Error::invalid("paths", "must be >= 1"));
        }
        Ok(())
    }
}

/// Strategy on a time-to-maturity grid: `αX/√v` and the deductible.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategySeries {
    pub grid: TimeGrid,
    pub weight: Vec<f64>,
    pub deductible: Vec<f64>,
}

impl StrategySeries {
    pub fn new(grid: TimeGrid, weight: Vec<f64>, deductible: Vec<f64>) -> Result<Self> {
        if weight.len() != grid.len() || deductible.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "strategy series of lengths {} and {} on a grid of {} points",
                weight.len(),
                deductible.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, weight, deductible })
    }

    pub fn from_pd(c: &PdCoefficients) -> Self {
        Self {
            grid: c.grid,
            weight: c.trading_weight.clone(),
            deductible: c.deductible.clone(),
        }
    }

    pub fn from_vanilla(c: &VanillaCoefficients) -> Self {
        Self {
            grid: c.grid,
            weight: c.trading_weight.clone(),
            deductible: c.deductible.clone(),
        }
    }

    pub fn scale_weight(mut self, factor: f64) -> Self {
        self.weight.iter_mut().for_each(|w| *w *= factor);
        self
    }

    pub fn with_deductible(mut self, d: f64) -> Self {
        self.deductible.iter_mut().for_each(|x| *x = d);
        self
    }

    fn at(&self, tau: f64) -> (f64, f64) {
        let dt = self.grid.dt();
        (interp_linear(&self.weight, dt, tau), interp_linear(&self.deductible, dt, tau))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariancePath {
    /// `v_k`, signed; only the square root sees the clamp.
    pub v: Vec<f64>,
    /// Stock shocks `ΔW₁`, `len = steps`.
    pub dw1: Vec<f64>,
    /// Steps at which `v_k < 0` was clamped inside the square root.
    pub clamped: usize,
}

/// Cell-averaged kernel weights `k_m = (1/Δ)∫_{(m-1)Δ}^{mΔ} K`.
#[derive(Debug, Clone)]
pub struct VarianceScheme {
    market: MarketParams,
    grid: TimeGrid,
    /// `rev[N - m] = k_m`, so a step's weights form one contiguous slice.
    rev: Vec<f64>,
}

impl VarianceScheme {
    pub fn new(market: &MarketParams, grid: &TimeGrid) -> Result<Self> {
        market.validate()?;
        let kernel = market.kernel()?;
        let n = grid.steps();
        let dt = grid.dt();
        let mut rev = vec![0.0; n + 1];
        for m in 1..=n {
            rev[n - m] = (kernel.integral(grid.time(m)) - kernel.integral(grid.time(m - 1))) / dt;
        }
        Ok(Self {
            market: *market,
            grid: *grid,
            rev,
        })
    }

    /// `v_k = v0 + Σ_{j<k} k_{k-j} [κ(φ - v_j)Δ + σ√(v_j⁺) ΔB_j]`,
    /// `ΔB = ρΔW₁ + √(1-ρ²)ΔW₂`.
    pub fn simulate<R: Rng + ?Sized>(&self, rng: &mut R) -> VariancePath {
        let m = &self.market;
        let n = self.grid.steps();
        let sq = self.grid.dt().sqrt();
        let dt = self.grid.dt();
        let rho_perp = (1.0 - m.rho * m.rho).max(0.0).sqrt();
        let mut v = Vec::with_capacity(n + 1);
        let mut dw1 = Vec::with_capacity(n);
        let mut incr = Vec::with_capacity(n);
        let mut clamped = 0;
        v.push(m.v0);
        for k in 0..n {
            let z1: f64 = StandardNormal.sample(rng);
            let z2: f64 = StandardNormal.sample(rng);
            let w1 = sq * z1;
            let db = m.rho * w1 + rho_perp * sq * z2;
            let vk = v[k];
            if vk < 0.0 {
                clamped += 1;
            }
            incr.push(m.kappa * (m.phi - vk) * dt + m.sigma * vk.max(0.0).sqrt() * db);
            dw1.push(w1);
            let next = m.v0 + crate::grid::dot(&self.rev[n - k - 1..n], &incr);
            v.push(next);
        }
        VariancePath { v, dw1, clamped }
    }
}

pub fn simulate_variance<R: Rng + ?Sized>(market: &MarketParams, grid: &TimeGrid, rng: &mut R) -> Result<VariancePath> {
    Ok(VarianceScheme::new(market, grid)?.simulate(rng))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathBundle {
    pub paths: usize,
    pub mean: f64,
    /// Population variance (divisor `n`).
    pub variance: f64,
    /// Sample standard deviation over `√n`; `None` for a single path.
    pub std_error: Option<f64>,
    pub negative_wealth: usize,
    /// Fraction of variance steps that hit the clamp.
    pub clamp_fraction: f64,
    pub mean_events: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terminal: Option<Vec<f64>>,
}

struct PathOutcome {
    terminal: f64,
    clamped: usize,
    events: usize,
}

/// Terminal wealth under a fixed strategy.
///
/// Per step, with `w, d` read at `τ = T - t_k`:
/// `X_{k+1} = e^{ΥΔ}X_k + (θΔ/2)(w_k v_k + w_{k+1} v_{k+1}) + w_k√(v_k⁺)ΔW₁
///  - λ_k(1+θ̃)E[(Y-d_k)^+]Δ - Σ_{events in cell} min(Y, d_k)`.
pub fn simulate_wealth(
    market: &MarketParams,
    claims: &ClaimParams,
    hawkes: &HawkesParams,
    strategy: &StrategySeries,
    config: &SimConfig,
) -> Result<PathBundle> {
    config.validate()?;
    claims.validate()?;
    hawkes.validate()?;
    let grid = config.grid;
    let (a, b) = (grid.horizon(), strategy.grid.horizon());
    if (a - b).abs() > 1e-12 * a.max(b) {
        return Err(Error::GridMismatch(format!(
            "simulation horizon {a} differs from strategy horizon {b}"
        )));
    }
    let scheme = VarianceScheme::new(market, &grid)?;
    let lags = LagTable::new(&hawkes.kernel, &grid);
    let n = grid.steps();
    let dt = grid.dt();
    let horizon = grid.horizon();
    let (w, d): (Vec<f64>, Vec<f64>) = (0..=n).map(|k| strategy.at(horizon - grid.time(k))).unzip();
    let premium: Vec<f64> = d
        .iter()
        .map(|&dk| (1.0 + claims.theta_tilde) * claims.expected_indemnity(dk) * dt)
        .collect();
    let bond = (market.upsilon * dt).exp();
    let claim_size = Exp::new(claims.mu).map_err(|e| Error::invalid("mu", e.to_string()))?;

    let run = |path: usize| -> PathOutcome {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(path as u64);
        let vp = scheme.simulate(&mut rng);
        let mut stepper = IntensityStepper::new(*hawkes, grid, &lags);
        let mut events: Vec<f64> = Vec::new();
        let mut x = market.x0;
        for k in 0..n {
            let lam = stepper.advance(&events);
            let (vk, vk1) = (vp.v[k], vp.v[k + 1]);
            x = bond * x + 0.5 * market.theta * dt * (w[k] * vk + w[k + 1] * vk1)
                + w[k] * vk.max(0.0).sqrt() * vp.dw1[k]
                - lam * premium[k];
            let count = poisson_count(lam * dt, &mut rng);
            if count > 0 {
                let t0 = grid.time(k);
                let start = events.len();
                for _ in 0..count {
                    events.push(t0 + dt * rng.random::<f64>());
                    let y: f64 = claim_size.sample(&mut rng);
                    x -= y.min(d[k]);
                }
                events[start..].sort_by(f64::total_cmp);
            }
        }
        PathOutcome {
            terminal: x,
            clamped: vp.clamped,
            events: events.len(),
        }
    };

    let outcomes: Vec<PathOutcome> = (0..config.paths).into_par_iter().map(run).collect();
    let terminal: Vec<f64> = outcomes.iter().map(|o| o.terminal).collect();
    let (mean, variance, std_error) = moments(&terminal);
    let clamped: usize = outcomes.iter().map(|o| o.clamped).sum();
    let events: usize = outcomes.iter().map(|o| o.events).sum();
    Ok(PathBundle {
        paths: config.paths,
        mean,
        variance,
        std_error,
        negative_wealth: terminal.iter().filter(|&&x| x < 0.0).count(),
        clamp_fraction: clamped as f64 / (config.paths * n) as f64,
        mean_events: events as f64 / config.paths as f64,
        terminal: config.keep_paths.then_some(terminal),
    })
}

/// Mean, population variance and standard error (sample std over `√n`).
fn moments(xs: &[f64]) -> (f64, f64, Option<f64>) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    let se = (xs.len() > 1).then(|| (ss / (n - 1.0)).sqrt() / n.sqrt());
    (mean, ss / n, se)
}

/// `mean - (γ/2) variance`.
pub fn estimate_objective(bundle: &PathBundle, gamma: f64) -> f64 {
    bundle.mean - 0.5 * gamma * bundle.variance
}
