//! Path-dependent equilibrium: rough variance kernel for `(B̄, H̄)` and
//! power-law Hawkes kernel for `(C̄, M̄)`.

use serde::Serialize;

use super::{claim_rhs, ClaimParams, MarketParams};
use crate::error::Result;
use crate::grid::{cumulative_trapezoid, trapezoid, TimeGrid};
use crate::hawkes::HawkesParams;
use crate::kernels::{AdamsWeights, Kernel};
use crate::volterra::solve_with_weights;

#[derive(Debug, Clone, Serialize)]
pub struct PdCoefficients {
    /// Time-to-maturity grid.
    pub grid: TimeGrid,
    /// `A(τ) = E(τ) = e^{Υτ}`.
    pub growth: Vec<f64>,
    pub bbar: Vec<f64>,
    pub hbar: Vec<f64>,
    pub cbar: Vec<f64>,
    pub mbar: Vec<f64>,
    /// Pointwise integrands recovered from the convolved right-hand sides.
    pub b: Vec<f64>,
    pub h: Vec<f64>,
    pub c: Vec<f64>,
    pub m: Vec<f64>,
    /// `D` and `N` as functions of `τ`; `D(t) = d_int[T - t]`.
    pub d_int: Vec<f64>,
    pub n_int: Vec<f64>,
    /// `α* X* / √v`.
    pub trading_weight: Vec<f64>,
    pub deductible: Vec<f64>,
}

/// `L(B̄, H̄) = -κB̄ - θσρH̄ - (γσ²(1-ρ²)/2)H̄² + θ²/(2γ)` and
/// `R(H̄) = -(κ+θσρ)H̄ + θ²/γ`.
fn bh_rhs(m: &MarketParams, bbar: f64, hbar: f64) -> (f64, f64) {
    let (k, th, s, r, g) = (m.kappa, m.theta, m.sigma, m.rho, m.gamma);
    let l = -k * bbar - th * s * r * hbar - 0.5 * g * s * s * (1.0 - r * r) * hbar * hbar + th * th / (2.0 * g);
    let rr = -m.h_rate() * hbar + th * th / g;
    (l, rr)
}

/// `(B̄, H̄)` on the `τ` grid.
pub fn solve_bh(market: &MarketParams, grid: &TimeGrid) -> Result<(Vec<f64>, Vec<f64>)> {
    market.validate()?;
    let kernel = Kernel::Fractional(market.kernel()?);
    let weights = AdamsWeights::new(&kernel, grid)?;
    let m = *market;
    let rhs = move |_tau: f64, x: &[f64], out: &mut [f64]| {
        let (l, r) = bh_rhs(&m, x[0], x[1]);
        out[0] = l;
        out[1] = r;
    };
    let mut comps = solve_with_weights(&weights, grid, 2, &rhs)?.into_components();
    let hbar = comps.pop().expect("two components");
    let bbar = comps.pop().expect("two components");
    Ok((bbar, hbar))
}

/// `d*(τ) = max(θ̃/(γe^{Υτ}) + M̄(τ)/e^{Υτ}, 0)`.
pub fn deductible(market: &MarketParams, claims: &ClaimParams, mbar: f64, tau: f64) -> f64 {
    let e = market.growth(tau);
    (claims.theta_tilde / (market.gamma * e) + mbar / e).max(0.0)
}

/// `(θ - γσρH̄(τ)) / (γe^{Υτ})`.
pub fn trading_weight(market: &MarketParams, hbar: f64, tau: f64) -> f64 {
    (market.theta - market.gamma * market.sigma * market.rho * hbar) / (market.gamma * market.growth(tau))
}

/// `(C̄, M̄)` on the `τ` grid; zero when the Hawkes kernel is switched off.
pub fn solve_cm(
    market: &MarketParams,
    claims: &ClaimParams,
    hawkes: &HawkesParams,
    grid: &TimeGrid,
) -> Result<(Vec<f64>, Vec<f64>)> {
    market.validate()?;
    claims.validate()?;
    hawkes.validate()?;
    if hawkes.kernel.rho1 == 0.0 {
        return Ok((vec![0.0; grid.len()], vec![0.0; grid.len()]));
    }
    let weights = AdamsWeights::new(&Kernel::PowerLaw(hawkes.kernel), grid)?;
    let (m, cl, a1) = (*market, *claims, hawkes.a1);
    let rhs = move |tau: f64, x: &[f64], out: &mut [f64]| {
        let d = deductible(&m, &cl, x[1], tau);
        let (g1, g2) = claim_rhs(&cl, m.gamma, a1, m.growth(tau), x[0], x[1], d);
        out[0] = g1;
        out[1] = g2;
    };
    let mut comps = solve_with_weights(&weights, grid, 2, &rhs)?.into_components();
    let mbar = comps.pop().expect("two components");
    let cbar = comps.pop().expect("two components");
    Ok((cbar, mbar))
}

/// Pointwise `(B, H, C, M)`: the algebraic right-hand sides evaluated on the
/// solved barred coefficients.
pub struct Pointwise {
    pub b: Vec<f64>,
    pub h: Vec<f64>,
    pub c: Vec<f64>,
    pub m: Vec<f64>,
}

pub fn pointwise_coefficients(
    bbar: &[f64],
    hbar: &[f64],
    cbar: &[f64],
    mbar: &[f64],
    market: &MarketParams,
    claims: &ClaimParams,
    hawkes: &HawkesParams,
    grid: &TimeGrid,
) -> Pointwise {
    let n = grid.len();
    let mut out = Pointwise {
        b: Vec::with_capacity(n),
        h: Vec::with_capacity(n),
        c: Vec::with_capacity(n),
        m: Vec::with_capacity(n),
    };
    for (i, tau) in grid.times().enumerate() {
        let (l, r) = bh_rhs(market, bbar[i], hbar[i]);
        let d = deductible(market, claims, mbar[i], tau);
        let (g1, g2) = claim_rhs(claims, market.gamma, hawkes.a1, market.growth(tau), cbar[i], mbar[i], d);
        out.b.push(l);
        out.h.push(r);
        out.c.push(g1);
        out.m.push(g2);
    }
    out
}

/// `D(τ) = ∫_0^τ (κφB̄ + a0C̄)` and `N(τ) = ∫_0^τ (κφH̄ + a0M̄)`, composite trapezoid.
pub fn dn_integrals(
    bbar: &[f64],
    hbar: &[f64],
    cbar: &[f64],
    mbar: &[f64],
    market: &MarketParams,
    hawkes: &HawkesParams,
    grid: &TimeGrid,
) -> (Vec<f64>, Vec<f64>) {
    let kp = market.kappa * market.phi;
    let d: Vec<f64> = bbar.iter().zip(cbar).map(|(b, c)| kp * b + hawkes.a0 * c).collect();
    let n: Vec<f64> = hbar.iter().zip(mbar).map(|(h, m)| kp * h + hawkes.a0 * m).collect();
    (cumulative_trapezoid(&d, grid.dt()), cumulative_trapezoid(&n, grid.dt()))
}

pub fn solve_pd(
    market: &MarketParams,
    claims: &ClaimParams,
    hawkes: &HawkesParams,
    grid: &TimeGrid,
) -> Result<PdCoefficients> {
    let (bbar, hbar) = solve_bh(market, grid)?;
    let (cbar, mbar) = solve_cm(market, claims, hawkes, grid)?;
    let pw = pointwise_coefficients(&bbar, &hbar, &cbar, &mbar, market, claims, hawkes, grid);
    let (d_int, n_int) = dn_integrals(&bbar, &hbar, &cbar, &mbar, market, hawkes, grid);
    let growth = grid.times().map(|tau| market.growth(tau)).collect();
    let trading_weight = grid
        .times()
        .zip(&hbar)
        .map(|(tau, &h)| trading_weight(market, h, tau))
        .collect();
    let deductible = grid
        .times()
        .zip(&mbar)
        .map(|(tau, &m)| deductible(market, claims, m, tau))
        .collect();
    Ok(PdCoefficients {
        grid: *grid,
        growth,
        bbar,
        hbar,
        cbar,
        mbar,
        b: pw.b,
        h: pw.h,
        c: pw.c,
        m: pw.m,
        d_int,
        n_int,
        trading_weight,
        deductible,
    })
}

impl PdCoefficients {
    /// `F(0) = e^{ΥT}x0 + v0∫_0^T B + λ*∫_0^T C + D(0)`.
    pub fn value_function(&self, x0: f64, v0: f64, lambda_star: f64) -> f64 {
        let dt = self.grid.dt();
        let last = self.grid.steps();
        self.growth[last] * x0 + v0 * trapezoid(&self.b, dt) + lambda_star * trapezoid(&self.c, dt) + self.d_int[last]
    }

    /// `g(0) = E[X_T]` under the equilibrium: `e^{ΥT}x0 + v0∫H + λ*∫M + N(0)`.
    pub fn expected_terminal_wealth(&self, x0: f64, v0: f64, lambda_star: f64) -> f64 {
        let dt = self.grid.dt();
        let last = self.grid.steps();
        self.growth[last] * x0 + v0 * trapezoid(&self.h, dt) + lambda_star * trapezoid(&self.m, dt) + self.n_int[last]
    }
}
