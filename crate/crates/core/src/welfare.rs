//! Certainty-equivalent welfare loss of running the vanilla strategy in the
//! path-dependent world.

use rayon::prelude::*;
use serde::Serialize;

use crate::equilibrium::pd::{dn_integrals, PdCoefficients};
use crate::equilibrium::vanilla::vanilla_deductible;
use crate::equilibrium::{claim_rhs, solve_pd, solve_vanilla, ClaimParams, MarketParams, VanillaCoefficients};
use crate::error::{Error, Result};
use crate::grid::{interp_linear, trapezoid, TimeGrid};
use crate::hawkes::HawkesParams;
use crate::kernels::{AdamsWeights, Kernel};
use crate::volterra::solve_with_weights;

/// Coefficients of the value and mean functions under the frozen vanilla
/// strategy, indexed by time to maturity.
#[derive(Debug, Clone, Serialize)]
pub struct SuboptimalCoefficients {
    pub grid: TimeGrid,
    /// Frozen vanilla `Ĥ(τ)`.
    pub h_hat: Vec<f64>,
    pub growth: Vec<f64>,
    pub bbar: Vec<f64>,
    pub hbar: Vec<f64>,
    pub cbar: Vec<f64>,
    pub mbar: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d_int: Vec<f64>,
    pub n_int: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WelfareResult {
    /// Fraction of today's bond-grown wealth forfeited.
    pub loss: f64,
    /// `v0 ∫(B - 𝖡)`.
    pub component_b: f64,
    /// `λ* ∫(C - 𝖢)`.
    pub component_c: f64,
    /// `D(0) - 𝖣(0)`.
    pub component_d: f64,
}

/// Right-hand sides of the `(𝖡̄, 𝖧̄)` system with vanilla `Ĥ` frozen in.
fn bh_rhs(m: &MarketParams, bbar: f64, hbar: f64, h_hat: f64) -> (f64, f64) {
    let (k, th, s, r, g) = (m.kappa, m.theta, m.sigma, m.rho, m.gamma);
    let w = th - g * s * r * h_hat;
    let b = -k * bbar - 0.5 * g * s * s * hbar * hbar - s * r * w * hbar
        + (th * th - g * g * s * s * r * r * h_hat * h_hat) / (2.0 * g);
    let h = -k * hbar + th * w / g;
    (b, h)
}

pub fn solve_suboptimal(
    market: &MarketParams,
    claims: &ClaimParams,
    hawkes: &HawkesParams,
    vanilla: &VanillaCoefficients,
    grid: &TimeGrid,
) -> Result<SuboptimalCoefficients> {
    market.validate()?;
    claims.validate()?;
    hawkes.validate()?;
    if vanilla.grid != *grid {
        return Err(Error::GridMismatch("vanilla coefficients live on a different grid".into()));
    }
    let dt = grid.dt();
    let h_hat = vanilla.h.clone();

    let frac = AdamsWeights::new(&Kernel::Fractional(market.kernel()?), grid)?;
    let m = *market;
    let hh = h_hat.as_slice();
    let rhs = |tau: f64, x: &[f64], out: &mut [f64]| {
        let (b, h) = bh_rhs(&m, x[0], x[1], interp_linear(hh, dt, tau));
        out[0] = b;
        out[1] = h;
    };
    let mut comps = solve_with_weights(&frac, grid, 2, &rhs)?.into_components();
    let hbar = comps.pop().expect("two components");
    let bbar = comps.pop().expect("two components");

    let cl = *claims;
    let a1 = hawkes.a1;
    let claim = |tau: f64, c: f64, mm: f64| {
        let d = vanilla_deductible(&m, &cl, tau);
        claim_rhs(&cl, m.gamma, a1, m.growth(tau), c, mm, d)
    };
    let (cbar, mbar) = if hawkes.kernel.rho1 == 0.0 {
        (vec![0.0; grid.len()], vec![0.0; grid.len()])
    } else {
        let pl = AdamsWeights::new(&Kernel::PowerLaw(hawkes.kernel), grid)?;
        let rhs = |tau: f64, x: &[f64], out: &mut [f64]| {
            let (g1, g2) = claim(tau, x[0], x[1]);
            out[0] = g1;
            out[1] = g2;
        };
        let mut comps = solve_with_weights(&pl, grid, 2, &rhs)?.into_components();
        let mbar = comps.pop().expect("two components");
        (comps.pop().expect("two components"), mbar)
    };

    let mut b = Vec::with_capacity(grid.len());
    let mut c = Vec::with_capacity(grid.len());
    for (i, tau) in grid.times().enumerate() {
        b.push(bh_rhs(&m, bbar[i], hbar[i], h_hat[i]).0);
        c.push(claim(tau, cbar[i], mbar[i]).0);
    }
    let (d_int, n_int) = dn_integrals(&bbar, &hbar, &cbar, &mbar, market, hawkes, grid);
    Ok(SuboptimalCoefficients {
        grid: *grid,
        growth: grid.times().map(|tau| market.growth(tau)).collect(),
        h_hat,
        bbar,
        hbar,
        cbar,
        mbar,
        b,
        c,
        d_int,
        n_int,
    })
}

impl SuboptimalCoefficients {
    /// `𝖥(0) = e^{ΥT}x0 + v0∫𝖡 + λ*∫𝖢 + 𝖣(0)`.
    pub fn value_function(&self, x0: f64, v0: f64, lambda_star: f64) -> f64 {
        let dt = self.grid.dt();
        let last = self.grid.steps();
        self.growth[last] * x0 + v0 * trapezoid(&self.b, dt) + lambda_star * trapezoid(&self.c, dt) + self.d_int[last]
    }
}

pub fn welfare_loss(pd: &PdCoefficients, sub: &SuboptimalCoefficients, market: &MarketParams, lambda_star: f64) -> Result<WelfareResult> {
    if pd.grid != sub.grid {
        return Err(Error::GridMismatch("optimal and suboptimal coefficients differ in grid".into()));
    }
    let dt = pd.grid.dt();
    let last = pd.grid.steps();
    let diff = |x: &[f64], y: &[f64]| -> Vec<f64> { x.iter().zip(y).map(|(a, b)| a - b).collect() };
    let component_b = market.v0 * trapezoid(&diff(&pd.b, &sub.b), dt);
    let component_c = lambda_star * trapezoid(&diff(&pd.c, &sub.c), dt);
    let component_d = pd.d_int[last] - sub.d_int[last];
    let loss = (component_b + component_c + component_d) / (pd.growth[last] * market.x0);
    Ok(WelfareResult {
        loss,
        component_b,
        component_c,
        component_d,
    })
}

/// Optimal and suboptimal solves followed by `welfare_loss`.
pub fn evaluate(market: &MarketParams, claims: &ClaimParams, hawkes: &HawkesParams, grid: &TimeGrid) -> Result<WelfareResult> {
    let pd = solve_pd(market, claims, hawkes, grid)?;
    let va = solve_vanilla(market, claims, hawkes.lambda_star, grid)?;
    let sub = solve_suboptimal(market, claims, hawkes, &va, grid)?;
    welfare_loss(&pd, &sub, market, hawkes.lambda_star)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub delta: f64,
    pub p: f64,
    pub gamma: f64,
    pub loss: f64,
    pub component_b: f64,
    pub component_c: f64,
    pub component_d: f64,
}

/// Loss over the product `deltas × ps × gammas`, in that nesting order.
pub fn sweep(
    market: &MarketParams,
    claims: &ClaimParams,
    hawkes: &HawkesParams,
    grid: &TimeGrid,
    deltas: &[f64],
    ps: &[f64],
    gammas: &[f64],
) -> Result<Vec<SweepRow>> {
    let points: Vec<(f64, f64, f64)> = deltas
        .iter()
        .flat_map(|&d| ps.iter().flat_map(move |&p| gammas.iter().map(move |&g| (d, p, g))))
        .collect();
    points
        .into_par_iter()
        .map(|(delta, p, gamma)| {
            let m = MarketParams { delta, gamma, ..*market };
            let mut h = *hawkes;
            h.kernel.p = p;
            let r = evaluate(&m, claims, &h, grid)?;
            Ok(SweepRow {
                delta,
                p,
                gamma,
                loss: r.loss,
                component_b: r.component_b,
                component_c: r.component_c,
                component_d: r.component_d,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::pd::solve_bh;

    fn grid() -> TimeGrid {
        TimeGrid::new(5.0, 512).unwrap()
    }

    #[test]
    fn barred_arrays_start_at_zero() {
        let (m, c, h, g) = (MarketParams::default(), ClaimParams::default(), HawkesParams::sichuan(), grid());
        let va = solve_vanilla(&m, &c, h.lambda_star, &g).unwrap();
        let s = solve_suboptimal(&m, &c, &h, &va, &g).unwrap();
        for v in [&s.bbar, &s.hbar, &s.cbar, &s.mbar, &s.d_int, &s.n_int] {
            assert_eq!(v[0], 0.0);
        }
    }

    #[test]
    fn zero_theta_gives_zero_h() {
        let m = MarketParams {
            theta: 0.0,
            ..Default::default()
        };
        let (c, h, g) = (ClaimParams::default(), HawkesParams::sichuan(), grid());
        let va = solve_vanilla(&m, &c, h.lambda_star, &g).unwrap();
        let s = solve_suboptimal(&m, &c, &h, &va, &g).unwrap();
        assert!(s.hbar.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn nothing_to_optimize() {
        let m = MarketParams {
            theta: 0.0,
            ..Default::default()
        };
        let c = ClaimParams { mu: 4.0, theta_tilde: 0.0 };
        let mut h = HawkesParams::sichuan();
        h.lambda_star = 0.0;
        let r = evaluate(&m, &c, &h, &grid()).unwrap();
        assert!(r.loss.abs() < 1e-12, "{r:?}");
    }

    #[test]
    fn rough_suboptimal_h_differs() {
        let (m, c, h, g) = (MarketParams::default(), ClaimParams::default(), HawkesParams::sichuan(), grid());
        let va = solve_vanilla(&m, &c, h.lambda_star, &g).unwrap();
        let s = solve_suboptimal(&m, &c, &h, &va, &g).unwrap();
        let (_, hbar) = solve_bh(&m, &g).unwrap();
        assert!(s.hbar[1..].iter().zip(&hbar[1..]).all(|(a, b)| a != b));
    }

    #[test]
    fn degenerate_world_has_no_loss_on_short_horizon() {
        let m = MarketParams {
            delta: 1.0,
            ..Default::default()
        };
        let h = HawkesParams::poisson(6.310_822);
        let r = evaluate(&m, &ClaimParams::default(), &h, &TimeGrid::new(1.0, 1024).unwrap()).unwrap();
        assert!(r.loss.abs() < 1e-6, "{r:?}");
    }

    /// `B̄, H̄, 𝖡̄, 𝖧̄` are all homogeneous of degree -1 in γ.
    #[test]
    fn variance_component_scales_inversely_with_gamma() {
        let g = TimeGrid::new(3.0, 256).unwrap();
        let at = |gamma| {
            let m = MarketParams {
                gamma,
                ..Default::default()
            };
            evaluate(&m, &ClaimParams::default(), &HawkesParams::sichuan(), &g).unwrap().component_b
        };
        let (x, y) = (at(0.5), at(1.5));
        assert!((0.5 * x / (1.5 * y) - 1.0).abs() < 1e-9, "{x} {y}");
    }

    #[test]
    fn sweep_order() {
        let rows = sweep(
            &MarketParams::default(),
            &ClaimParams::default(),
            &HawkesParams::sichuan(),
            &TimeGrid::new(1.0, 64).unwrap(),
            &[0.7, 0.8],
            &[0.0],
            &[0.5, 1.0],
        )
        .unwrap();
        let keys: Vec<(f64, f64)> = rows.iter().map(|r| (r.delta, r.gamma)).collect();
        assert_eq!(keys, vec![(0.7, 0.5), (0.7, 1.0), (0.8, 0.5), (0.8, 1.0)]);
    }
}
