use super::{drift_at, run_recursion, EventCatalog, HawkesParams, LagTable};
use crate::error::{Error, Result};
use crate::grid::{trapezoid, TimeGrid};

/// `Σ_j ln λ(t_j-) - ∫_0^T λ`.
///
/// The compensator splits into the continuous part `λ* + drift`, integrated
/// by composite trapezoid on `grid`, and the jump part, integrated exactly as
/// `Σ_j Φ(T - t_j)` with `Φ` the kernel antiderivative. Returns `-inf` when
/// some event-time intensity is not strictly positive.
pub fn log_likelihood(params: &HawkesParams, catalog: &EventCatalog, grid: &TimeGrid) -> Result<f64> {
    params.validate()?;
    check_span(catalog, grid)?;
    let lags = LagTable::new(&params.kernel, grid);
    Ok(log_likelihood_with(params, catalog.times(), grid, &lags))
}

pub(crate) fn check_span(catalog: &EventCatalog, grid: &TimeGrid) -> Result<()> {
    let (a, b) = (catalog.horizon(), grid.horizon());
    if (a - b).abs() > 1e-12 * a.max(b) {
        return Err(Error::GridMismatch(format!(
            "catalog horizon {a} differs from grid horizon {b}"
        )));
    }
    Ok(())
}

pub(crate) fn log_likelihood_with(params: &HawkesParams, events: &[f64], grid: &TimeGrid, lags: &LagTable) -> f64 {
    let stepper = run_recursion(params, events, grid, lags);
    let k = params.kernel;
    if k.rho1 == 0.0 {
        let lam = params.lambda_star;
        let path = stepper.finish();
        let compensator = trapezoid(&path.lambda, grid.dt());
        if events.is_empty() {
            return -compensator;
        }
        if !(lam > 0.0) {
            return f64::NEG_INFINITY;
        }
        return events.len() as f64 * lam.ln() - compensator;
    }

    let g = stepper.drift_terms().to_vec();
    let continuous: Vec<f64> = {
        let exc = stepper.excitation().to_vec();
        let path = stepper.finish();
        path.lambda.iter().zip(&exc).map(|(l, e)| l - e).collect()
    };
    let horizon = grid.horizon();
    let jump_mass: f64 = events.iter().map(|&tj| k.integral(horizon - tj)).sum();
    let compensator = trapezoid(&continuous, grid.dt()) + jump_mass;

    let mut log_sum = 0.0;
    for (j, &tj) in events.iter().enumerate() {
        let mut lam = params.lambda_star + drift_at(&k, grid, &g, tj);
        for &tp in &events[..j] {
            lam += k.eval(tj - tp);
        }
        if !(lam > 0.0) {
            return f64::NEG_INFINITY;
        }
        log_sum += lam.ln();
    }
    log_sum - compensator
}
