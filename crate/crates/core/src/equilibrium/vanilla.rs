//! Vanilla benchmark: classical Heston variance and constant claim intensity.

use serde::Serialize;

use super::{ClaimParams, MarketParams};
use crate::error::Result;
use crate::grid::{cumulative_trapezoid, TimeGrid};

#[derive(Debug, Clone, Serialize)]
pub struct VanillaCoefficients {
    /// Time-to-maturity grid.
    pub grid: TimeGrid,
    pub lambda_star: f64,
    pub growth: Vec<f64>,
    pub b: Vec<f64>,
    pub h: Vec<f64>,
    /// `D` and `N` as functions of `τ`.
    pub d_int: Vec<f64>,
    pub n_int: Vec<f64>,
    pub trading_weight: Vec<f64>,
    pub deductible: Vec<f64>,
}

/// `H(τ) = (θ²/γ)(1 - e^{-cτ})/c`, `c = κ + θσρ`; `(θ²/γ)τ` when `c = 0`.
pub fn vanilla_h(market: &MarketParams, tau: f64) -> f64 {
    let scale = market.theta * market.theta / market.gamma;
    let c = market.h_rate();
    if c == 0.0 {
        return scale * tau;
    }
    scale * (-(-c * tau).exp_m1()) / c
}

/// `-θσρH - (γσ²(1-ρ²)/2)H² + θ²/(2γ)`, the forcing of `dB/dτ = -κB + f`.
fn b_forcing(m: &MarketParams, h: f64) -> f64 {
    let (th, s, r, g) = (m.theta, m.sigma, m.rho, m.gamma);
    -th * s * r * h - 0.5 * g * s * s * (1.0 - r * r) * h * h + th * th / (2.0 * g)
}

/// `θ̃ / (γ e^{Υτ})`, clamped at zero.
pub fn vanilla_deductible(market: &MarketParams, claims: &ClaimParams, tau: f64) -> f64 {
    (claims.theta_tilde / (market.gamma * market.growth(tau))).max(0.0)
}

/// `(α̃X̃/√v, d̃*)` on the `τ` grid.
pub fn vanilla_strategies(h: &[f64], market: &MarketParams, claims: &ClaimParams, grid: &TimeGrid) -> (Vec<f64>, Vec<f64>) {
    let weight = grid
        .times()
        .zip(h)
        .map(|(tau, &hv)| super::pd::trading_weight(market, hv, tau))
        .collect();
    let ded = grid.times().map(|tau| vanilla_deductible(market, claims, tau)).collect();
    (weight, ded)
}

pub fn solve_vanilla(market: &MarketParams, claims: &ClaimParams, lambda_star: f64, grid: &TimeGrid) -> Result<VanillaCoefficients> {
    market.validate()?;
    claims.validate()?;
    let dt = grid.dt();
    let h: Vec<f64> = grid.times().map(|tau| vanilla_h(market, tau)).collect();

    // Implicit trapezoid for the linear part keeps B stable for any κΔ.
    let mut b = Vec::with_capacity(grid.len());
    b.push(0.0);
    let (lo, hi) = (1.0 - 0.5 * market.kappa * dt, 1.0 + 0.5 * market.kappa * dt);
    for i in 0..grid.steps() {
        let f = b_forcing(market, h[i]) + b_forcing(market, h[i + 1]);
        b.push((b[i] * lo + 0.5 * dt * f) / hi);
    }

    let (mu, tt, g) = (claims.mu, claims.theta_tilde, market.gamma);
    let kp = market.kappa * market.phi;
    let mut d_rate = Vec::with_capacity(grid.len());
    let mut n_rate = Vec::with_capacity(grid.len());
    for (i, tau) in grid.times().enumerate() {
        let e = market.growth(tau);
        let x = (-mu * tt / (g * e)).exp();
        d_rate.push(
            kp * b[i] - lambda_star / mu * e - g * lambda_star / (mu * mu) * e * e * (1.0 - x),
        );
        n_rate.push(kp * h[i] - lambda_star / mu * e - tt * lambda_star / mu * e * x);
    }
    let d_int = cumulative_trapezoid(&d_rate, dt);
    let n_int = cumulative_trapezoid(&n_rate, dt);
    let growth = grid.times().map(|tau| market.growth(tau)).collect();
    let (trading_weight, deductible) = vanilla_strategies(&h, market, claims, grid);
    Ok(VanillaCoefficients {
        grid: *grid,
        lambda_star,
        growth,
        b,
        h,
        d_int,
        n_int,
        trading_weight,
        deductible,
    })
}

impl VanillaCoefficients {
    /// `F(0) = e^{ΥT}x0 + B(T)v0 + D(T)`.
    pub fn value_function(&self, x0: f64, v0: f64) -> f64 {
        let last = self.grid.steps();
        self.growth[last] * x0 + self.b[last] * v0 + self.d_int[last]
    }

    /// `g(0) = E[X_T] = e^{ΥT}x0 + H(T)v0 + N(T)`.
    pub fn expected_terminal_wealth(&self, x0: f64, v0: f64) -> f64 {
        let last = self.grid.steps();
        self.growth[last] * x0 + self.h[last] * v0 + self.n_int[last]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn base() -> VanillaCoefficients {
        solve_vanilla(&MarketParams::default(), &ClaimParams::default(), 6.310_822, &TimeGrid::new(10.0, 1024).unwrap()).unwrap()
    }

    #[test]
    fn terminal_conditions() {
        let v = base();
        assert_eq!((v.b[0], v.h[0], v.d_int[0], v.n_int[0]), (0.0, 0.0, 0.0, 0.0));
        assert_eq!(v.growth[0], 1.0);
        assert_eq!(v.trading_weight[0], 5.0);
        assert_eq!(v.deductible[0], 0.2);
    }

    #[test]
    fn deductible_today() {
        let v = base();
        let today = *v.deductible.last().unwrap();
        assert_relative_eq!(today, 0.2 * (-0.2f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(today, 0.163_746_150_615_596_2, max_relative = 1e-12);
        // Increasing in calendar time means decreasing in τ.
        assert!(v.deductible.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn zero_theta_kills_b_and_h() {
        let m = MarketParams {
            theta: 0.0,
            ..Default::default()
        };
        let v = solve_vanilla(&m, &ClaimParams::default(), 1.0, &TimeGrid::new(5.0, 100).unwrap()).unwrap();
        assert!(v.b.iter().chain(&v.h).all(|&x| x == 0.0));
    }

    #[test]
    fn h_closed_form_value() {
        // c = -0.8725, θ²/γ = 25.
        let h = vanilla_h(&MarketParams::default(), 10.0);
        assert_relative_eq!(h, 25.0 * ((8.725f64).exp() - 1.0) / 0.8725, max_relative = 1e-14);
    }

    #[test]
    fn h_limit_at_zero_rate() {
        let m = MarketParams {
            kappa: 0.0,
            rho: 0.0,
            ..Default::default()
        };
        assert_eq!(vanilla_h(&m, 2.0), 50.0);
    }

    /// Classical RK4 on `dH/dτ = -cH + θ²/γ`, checked relative to `|H|`.
    #[test]
    fn h_matches_rk4() {
        let m = MarketParams::default();
        let (c, f) = (m.h_rate(), m.theta * m.theta / m.gamma);
        let rhs = |h: f64| -c * h + f;
        let n = 20_000;
        let dt = 10.0 / n as f64;
        let mut h = 0.0;
        for i in 1..=n {
            let k1 = rhs(h);
            let k2 = rhs(h + 0.5 * dt * k1);
            let k3 = rhs(h + 0.5 * dt * k2);
            let k4 = rhs(h + dt * k3);
            h += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if i % 2000 == 0 {
                let exact = vanilla_h(&m, i as f64 * dt);
                assert_relative_eq!(h, exact, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn b_second_order() {
        let m = MarketParams::default();
        let cl = ClaimParams::default();
        let b_at = |n| *solve_vanilla(&m, &cl, 0.0, &TimeGrid::new(3.0, n).unwrap()).unwrap().b.last().unwrap();
        let (c, f, ff) = (b_at(100), b_at(200), b_at(400));
        let ratio = (c - f) / (f - ff);
        assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn no_claims_no_premium() {
        let v = solve_vanilla(&MarketParams::default(), &ClaimParams::default(), 0.0, &TimeGrid::new(1.0, 10).unwrap()).unwrap();
        let kp = 0.173 * 0.170;
        let expect: Vec<f64> = v.h.iter().map(|h| kp * h).collect();
        assert_relative_eq!(v.n_int[10], cumulative_trapezoid(&expect, 0.1)[10], max_relative = 1e-14);
    }
}
