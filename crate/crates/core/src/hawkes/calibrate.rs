//! Multi-start Nelder-Mead maximum likelihood.
//!
//! Search coordinates: `[ln λ*, ln ρ1, ln ρ2, p, ln a0, a1]`.

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::likelihood::{check_span, log_likelihood_with};
use super::{EventCatalog, HawkesParams, LagTable};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::kernels::PowerLawKernel;

/// Cost assigned outside the bounds or where the likelihood is `-inf`.
const PENALTY: f64 = 1e12;
const DIM: usize = 6;

/// Hard box on the natural scale, inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParamBounds {
    pub lambda_star: (f64, f64),
    pub rho1: (f64, f64),
    pub rho2: (f64, f64),
    pub p: (f64, f64),
    pub a0: (f64, f64),
    pub a1: (f64, f64),
}

impl Default for ParamBounds {
    fn default() -> Self {
        Self {
            lambda_star: (1e-6, 1e4),
            rho1: (1e-8, 1e2),
            rho2: (1e-3, 1.0),
            p: (0.05, 3.0),
            a0: (1e-8, 1e2),
            a1: (-10.0, 10.0),
        }
    }
}

impl ParamBounds {
    fn transformed(&self) -> [(f64, f64); DIM] {
        let ln = |(a, b): (f64, f64)| (a.ln(), b.ln());
        [
            ln(self.lambda_star),
            ln(self.rho1),
            ln(self.rho2),
            self.p,
            ln(self.a0),
            self.a1,
        ]
    }

    fn validate(&self) -> Result<()> {
        for (name, (lo, hi), positive) in [
            ("bounds.lambda_star", self.lambda_star, true),
            ("bounds.rho1", self.rho1, true),
            ("bounds.rho2", self.rho2, true),
            ("bounds.p", self.p, false),
            ("bounds.a0", self.a0, true),
            ("bounds.a1", self.a1, false),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi && (!positive || lo > 0.0)) {
                return Err(Error::invalid(name, format!("need finite lo < hi (positive for log-scale), got ({lo}, {hi})")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CalibrationOptions {
    pub starts: usize,
    /// Starts run on a grid with `N / coarse_factor` steps; the best one is
    /// then polished on the full grid. `1` disables the coarse stage.
    pub coarse_factor: usize,
    pub max_iters: u64,
    /// Simplex restarts from each start's optimum.
    pub restarts: usize,
    pub sd_tolerance: f64,
    pub seed: u64,
    pub bounds: ParamBounds,
    /// Likelihood-ratio test level for keeping the Hawkes fit over the
    /// constant-rate fit (5 extra parameters); `0` always keeps the Hawkes fit.
    pub selection_level: f64,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            starts: 8,
            coarse_factor: 4,
            max_iters: 1000,
            restarts: 1,
            sd_tolerance: 1e-7,
            seed: 20_080_512,
            bounds: ParamBounds::default(),
            selection_level: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StartOutcome {
    pub start: HawkesParams,
    pub params: HawkesParams,
    pub log_likelihood: f64,
    pub iterations: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectedModel {
    Hawkes,
    ConstantRate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    /// Selected parameters: the best Hawkes fit, or the baseline when the
    /// likelihood-ratio test does not reject it.
    pub params: HawkesParams,
    pub log_likelihood: f64,
    pub selected: SelectedModel,
    /// Best start, regardless of selection.
    pub hawkes_fit: HawkesParams,
    pub hawkes_log_likelihood: f64,
    /// Closed-form constant-rate fit `λ = k/T`.
    pub baseline: HawkesParams,
    pub baseline_log_likelihood: f64,
    /// Log-likelihood gain required to select the Hawkes fit.
    pub selection_threshold: f64,
    /// Whether the best start beat the baseline at all.
    pub improved: bool,
    pub event_count: usize,
    pub starts: Vec<StartOutcome>,
}

struct NegLogLik<'a> {
    events: &'a [f64],
    grid: TimeGrid,
    bounds: [(f64, f64); DIM],
}

impl NegLogLik<'_> {
    fn eval(&self, z: &[f64]) -> f64 {
        if z.iter().zip(&self.bounds).any(|(v, (lo, hi))| !(v >= lo && v <= hi)) {
            return PENALTY;
        }
        let params = decode(z);
        let lags = LagTable::new(&params.kernel, &self.grid);
        let ll = log_likelihood_with(&params, self.events, &self.grid, &lags);
        if ll.is_finite() {
            -ll
        } else {
            PENALTY
        }
    }
}

impl CostFunction for NegLogLik<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, z: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        Ok(self.eval(z))
    }
}

fn decode(z: &[f64]) -> HawkesParams {
    HawkesParams {
        lambda_star: z[0].exp(),
        a0: z[4].exp(),
        a1: z[5],
        kernel: PowerLawKernel {
            rho1: z[1].exp(),
            rho2: z[2].exp(),
            p: z[3],
        },
    }
}

fn encode(p: &HawkesParams) -> [f64; DIM] {
    [
        p.lambda_star.ln(),
        p.kernel.rho1.ln(),
        p.kernel.rho2.ln(),
        p.kernel.p,
        p.a0.ln(),
        p.a1,
    ]
}

/// Half the upper `level` quantile of chi-square with 5 degrees of freedom.
fn selection_threshold(level: f64) -> Result<f64> {
    if level == 0.0 {
        return Ok(0.0);
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid("selection_level", format!("must lie in [0, 1), got {level}")));
    }
    let chi2 = ChiSquared::new((DIM - 1) as f64).expect("positive dof");
    Ok(0.5 * chi2.inverse_cdf(1.0 - level))
}

fn to_log_likelihood(cost: f64) -> f64 {
    if cost >= PENALTY {
        f64::NEG_INFINITY
    } else {
        -cost
    }
}

fn best_outcome(outcomes: &[StartOutcome]) -> &StartOutcome {
    outcomes
        .iter()
        .fold(None::<&StartOutcome>, |acc, o| match acc {
            Some(b) if b.log_likelihood >= o.log_likelihood => Some(b),
            _ => Some(o),
        })
        .expect("at least one start")
}

/// Latin-hypercube starts inside a data-scaled box, clipped to the hard bounds.
fn latin_starts(n: usize, rate: f64, bounds: &[(f64, f64); DIM], seed: u64) -> Vec<[f64; DIM]> {
    let rate = rate.max(1e-3);
    let boxes: [(f64, f64); DIM] = [
        ((0.3 * rate).ln(), (1.5 * rate).ln()),
        (1e-3f64.ln(), 3f64.ln()),
        (1e-3f64.ln(), 0.0),
        (0.2, 1.5),
        (1e-2f64.ln(), 5f64.ln()),
        (-3.0, 0.5),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![[0.0; DIM]; n];
    for d in 0..DIM {
        let lo = boxes[d].0.max(bounds[d].0);
        let hi = boxes[d].1.min(bounds[d].1).max(lo);
        let mut strata: Vec<usize> = (0..n).collect();
        strata.shuffle(&mut rng);
        for (i, s) in strata.into_iter().enumerate() {
            let u = (s as f64 + rng.random::<f64>()) / n as f64;
            out[i][d] = lo + u * (hi - lo);
        }
    }
    out
}

fn initial_simplex(x0: &[f64; DIM], bounds: &[(f64, f64); DIM]) -> Vec<Vec<f64>> {
    const STEP: [f64; DIM] = [0.3, 1.0, 1.0, 0.15, 1.0, 0.5];
    let mut simplex = vec![x0.to_vec()];
    for d in 0..DIM {
        let mut v = x0.to_vec();
        v[d] += STEP[d];
        if v[d] > bounds[d].1 {
            v[d] = x0[d] - STEP[d];
        }
        simplex.push(v);
    }
    simplex
}

fn run_start(cost: &NegLogLik, x0: &[f64; DIM], opts: &CalibrationOptions) -> Result<(Vec<f64>, f64, u64)> {
    let mut best = x0.to_vec();
    let mut best_cost = cost.eval(&best);
    let mut iterations = 0;
    for _ in 0..=opts.restarts {
        let start: [f64; DIM] = best.clone().try_into().expect("dimension");
        let solver = NelderMead::new(initial_simplex(&start, &cost.bounds))
            .with_sd_tolerance(opts.sd_tolerance)
            .map_err(|e| Error::Optimizer(e.to_string()))?;
        let problem = NegLogLik {
            events: cost.events,
            grid: cost.grid,
            bounds: cost.bounds,
        };
        let res = Executor::new(problem, solver)
            .configure(|s| s.max_iters(opts.max_iters))
            .run()
            .map_err(|e| Error::Optimizer(e.to_string()))?;
        let state = res.state();
        iterations += state.get_iter();
        if let Some(p) = state.get_best_param() {
            let c = state.get_best_cost();
            if c < best_cost {
                best = p.clone();
                best_cost = c;
            }
        }
    }
    Ok((best, best_cost, iterations))
}

pub fn calibrate(catalog: &EventCatalog, grid: &TimeGrid, opts: &CalibrationOptions) -> Result<Calibration> {
    if catalog.is_empty() {
        return Err(Error::EmptyCatalog);
    }
    if opts.starts == 0 {
        return Err(Error::invalid("starts", "need at least one start"));
    }
    opts.bounds.validate()?;
    check_span(catalog, grid)?;

    let k = catalog.len();
    let horizon = catalog.horizon();
    let rate = k as f64 / horizon;
    let baseline = HawkesParams::poisson(rate);
    let baseline_ll = k as f64 * rate.ln() - k as f64;

    let bounds = opts.bounds.transformed();
    let cost = NegLogLik {
        events: catalog.times(),
        grid: *grid,
        bounds,
    };
    let coarse_steps = grid.steps() / opts.coarse_factor.max(1);
    let coarse = if opts.coarse_factor > 1 && coarse_steps >= 64 {
        TimeGrid::new(horizon, coarse_steps)?
    } else {
        *grid
    };
    let coarse_cost = NegLogLik {
        events: catalog.times(),
        grid: coarse,
        bounds,
    };
    let mut starts = latin_starts(opts.starts, rate, &bounds, opts.seed);
    for x0 in &mut starts {
        // a1 = 0 keeps every intensity >= λ* > 0.
        if coarse_cost.eval(x0) >= PENALTY {
            x0[5] = 0.0f64.clamp(bounds[5].0, bounds[5].1);
        }
    }
    let results: Vec<Result<StartOutcome>> = starts
        .par_iter()
        .map(|x0| {
            let (z, c, iterations) = run_start(&coarse_cost, x0, opts)?;
            Ok(StartOutcome {
                start: decode(x0),
                params: decode(&z),
                log_likelihood: to_log_likelihood(c),
                iterations,
            })
        })
        .collect();
    let mut outcomes = results.into_iter().collect::<Result<Vec<_>>>()?;
    if coarse.steps() != grid.steps() {
        // Coarse-grid likelihoods are not comparable with full-grid ones.
        for o in &mut outcomes {
            o.log_likelihood = to_log_likelihood(cost.eval(&encode(&o.params)));
        }
        let seed_params = best_outcome(&outcomes).params;
        let (z, c, iterations) = run_start(&cost, &encode(&seed_params), opts)?;
        outcomes.push(StartOutcome {
            start: seed_params,
            params: decode(&z),
            log_likelihood: to_log_likelihood(c),
            iterations,
        });
    }
    let best = best_outcome(&outcomes);
    let improved = best.log_likelihood > baseline_ll;
    let threshold = selection_threshold(opts.selection_level)?;
    let selected = if improved && best.log_likelihood - baseline_ll > threshold {
        SelectedModel::Hawkes
    } else {
        SelectedModel::ConstantRate
    };
    let (params, log_likelihood) = match selected {
        SelectedModel::Hawkes => (best.params, best.log_likelihood),
        SelectedModel::ConstantRate => (baseline, baseline_ll),
    };
    Ok(Calibration {
        params,
        log_likelihood,
        selected,
        hawkes_fit: best.params,
        hawkes_log_likelihood: best.log_likelihood,
        baseline,
        baseline_log_likelihood: baseline_ll,
        selection_threshold: threshold,
        improved,
        event_count: k,
        starts: outcomes,
    })
}
