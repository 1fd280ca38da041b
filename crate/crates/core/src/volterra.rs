//! Predictor-corrector (fractional Adams) solver for
//! `x(t) = ∫_0^t k(t - s) f(s, x(s)) ds` on a uniform grid.

use crate::error::{Error, Result};
use crate::grid::{dot, TimeGrid};
use crate::kernels::{AdamsWeights, Kernel};

/// Vector field `f(t, x, out)` of fixed dimension.
pub struct VolterraProblem<F> {
    pub kernel: Kernel,
    pub dim: usize,
    pub rhs: F,
}

/// Component-major samples on a grid.
#[derive(Debug, Clone)]
pub struct GridSolution {
    grid: TimeGrid,
    values: Vec<Vec<f64>>,
}

impl GridSolution {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn component(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    pub fn into_components(self) -> Vec<Vec<f64>> {
        self.values
    }
}

pub fn solve<F>(problem: &VolterraProblem<F>, grid: &TimeGrid) -> Result<GridSolution>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let weights = AdamsWeights::new(&problem.kernel, grid)?;
    solve_with_weights(&weights, grid, problem.dim, &problem.rhs)
}

/// Same as [`solve`] with a prebuilt weight table (must match `grid`).
pub fn solve_with_weights<F>(weights: &AdamsWeights, grid: &TimeGrid, dim: usize, rhs: &F) -> Result<GridSolution>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    if weights.steps() != grid.steps() {
        return Err(Error::GridMismatch(format!(
            "weights built for {} steps, grid has {}",
            weights.steps(),
            grid.steps()
        )));
    }
    let n = grid.steps();
    let mut x: Vec<Vec<f64>> = vec![vec![0.0; n + 1]; dim];
    // f at accepted nodes, component-major so rows are contiguous.
    let mut f: Vec<Vec<f64>> = vec![vec![0.0; n + 1]; dim];
    let mut state = vec![0.0; dim];
    let mut out = vec![0.0; dim];

    rhs(0.0, &state, &mut out);
    check_finite(&out, 0)?;
    for i in 0..dim {
        f[i][0] = out[i];
    }

    for k in 0..n {
        let t1 = grid.time(k + 1);
        let b = weights.predictor_row(k);
        for i in 0..dim {
            state[i] = dot(b, &f[i][..=k]);
        }
        rhs(t1, &state, &mut out);
        check_finite(&out, k + 1)?;

        let a_int = weights.interior_row(k);
        let (a0, diag) = (weights.first(k), weights.diag());
        for i in 0..dim {
            let history = a0 * f[i][0] + dot(a_int, &f[i][1..=k]);
            state[i] = history + diag * out[i];
            x[i][k + 1] = state[i];
        }
        rhs(t1, &state, &mut out);
        check_finite(&out, k + 1)?;
        for i in 0..dim {
            f[i][k + 1] = out[i];
        }
    }
    Ok(GridSolution { grid: *grid, values: x })
}

fn check_finite(v: &[f64], step: usize) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { step })
    }
}

/// `∫_0^{t_k} k(t_k - s) g(s) ds` by product trapezoid on the samples `g_0..=g_k`.
pub fn convolve_tail(samples: &[f64], weights: &AdamsWeights, k: usize) -> Result<f64> {
    if k > weights.steps() || samples.len() <= k {
        return Err(Error::IndexOutOfRange {
            index: k,
            len: samples.len().min(weights.steps() + 1),
        });
    }
    if k == 0 {
        return Ok(0.0);
    }
    let m = k - 1;
    Ok(weights.first(m) * samples[0] + dot(weights.interior_row(m), &samples[1..k]) + weights.diag() * samples[k])
}
