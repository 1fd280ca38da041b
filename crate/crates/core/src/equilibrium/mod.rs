//! Time-consistent mean-variance equilibrium: market and claim parameters,
//! the exponential-claim moments, and the path-dependent and vanilla solvers.
//!
//! All coefficient arrays are indexed by time to maturity `τ = T - t`, so
//! index 0 is the terminal date and index `N` is today.

pub mod pd;
pub mod vanilla;

pub use pd::{solve_pd, PdCoefficients};
pub use vanilla::{solve_vanilla, VanillaCoefficients};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::FractionalKernel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MarketParams {
    /// Risk-free rate Υ.
    pub upsilon: f64,
    /// Risk-premium slope θ.
    pub theta: f64,
    pub kappa: f64,
    /// Long-run variance.
    pub phi: f64,
    /// Vol-of-vol.
    pub sigma: f64,
    pub rho: f64,
    /// Risk aversion γ.
    pub gamma: f64,
    pub v0: f64,
    pub x0: f64,
    /// Roughness δ of the fractional kernel.
    pub delta: f64,
}

impl Default for MarketParams {
    fn default() -> Self {
        Self {
            upsilon: 0.02,
            theta: 5.0,
            kappa: 0.173,
            phi: 0.170,
            sigma: 0.340,
            rho: -0.615,
            gamma: 1.0,
            v0: 0.018,
            x0: 1.0,
            delta: 0.6,
        }
    }
}

impl MarketParams {
    /// `σ = 0` and `κ = 0` are accepted (deterministic-variance limits).
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("upsilon", self.upsilon),
            ("theta", self.theta),
            ("kappa", self.kappa),
            ("phi", self.phi),
            ("sigma", self.sigma),
            ("rho", self.rho),
            ("gamma", self.gamma),
            ("v0", self.v0),
            ("x0", self.x0),
            ("delta", self.delta),
        ];
        if let Some((name, v)) = finite.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::invalid(name, format!("must be finite, got {v}")));
        }
        if self.gamma <= 0.0 {
            return Err(Error::invalid("gamma", format!("must be > 0, got {}", self.gamma)));
        }
        if self.sigma < 0.0 {
            return Err(Error::invalid("sigma", format!("must be >= 0, got {}", self.sigma)));
        }
        if self.kappa < 0.0 {
            return Err(Error::invalid("kappa", format!("must be >= 0, got {}", self.kappa)));
        }
        if self.rho.abs() > 1.0 {
            return Err(Error::invalid("rho", format!("must lie in [-1, 1], got {}", self.rho)));
        }
        if self.v0 < 0.0 {
            return Err(Error::invalid("v0", format!("must be >= 0, got {}", self.v0)));
        }
        FractionalKernel::new(self.delta).map(|_| ())
    }

    pub fn kernel(&self) -> Result<FractionalKernel> {
        FractionalKernel::new(self.delta)
    }

    /// `A(τ) = E(τ) = e^{Υτ}`.
    pub fn growth(&self, tau: f64) -> f64 {
        (self.upsilon * tau).exp()
    }

    /// `κ + θσρ`, the linear rate of the `H` equation.
    pub fn h_rate(&self) -> f64 {
        self.kappa + self.theta * self.sigma * self.rho
    }
}

/// Exponential claim sizes with rate μ and premium loading θ̃.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClaimParams {
    pub mu: f64,
    pub theta_tilde: f64,
}

impl Default for ClaimParams {
    fn default() -> Self {
        Self {
            mu: 4.0,
            theta_tilde: 0.2,
        }
    }
}

impl ClaimParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(Error::invalid("mu", format!("must be > 0, got {}", self.mu)));
        }
        if !(self.theta_tilde.is_finite() && self.theta_tilde >= 0.0) {
            return Err(Error::invalid("theta_tilde", format!("must be >= 0, got {}", self.theta_tilde)));
        }
        Ok(())
    }

    /// `E[(Y - d)^+] = e^{-μd}/μ`, the expected indemnity under deductible `d`.
    pub fn expected_indemnity(&self, d: f64) -> f64 {
        (-self.mu * d).exp() / self.mu
    }

    /// `E[min(Y, d)] = (1 - e^{-μd})/μ`, the expected retention.
    pub fn expected_retention(&self, d: f64) -> f64 {
        -(-self.mu * d).exp_m1() / self.mu
    }

    /// `E[min(Y, d)^2] = 2/μ² - e^{-μd}(2d/μ + 2/μ²)`.
    pub fn expected_retention_sq(&self, d: f64) -> f64 {
        let x = self.mu * d;
        // 1 - e^{-x}(1 + x), cancellation-free for small x.
        let core = -(-x).exp_m1() - x * (-x).exp();
        2.0 * core / (self.mu * self.mu)
    }
}

/// Right-hand sides `(g1, g2)` of the claim system at deductible `d >= 0`:
///
/// `g1 = (a1+1)C̄ + (γM̄ - 1)E m1 - (γE²/2) m2 - (1+θ̃)E m0 - (γ/2)M̄²`,
/// `g2 = (a1+1)M̄ - (1+θ̃)E m0 - E m1`,
///
/// with `m0 = E[(Y-d)^+]`, `m1 = E[min(Y,d)]`, `m2 = E[min(Y,d)²]`.
pub(crate) fn claim_rhs(claims: &ClaimParams, gamma: f64, a1: f64, e: f64, c: f64, m: f64, d: f64) -> (f64, f64) {
    let m0 = claims.expected_indemnity(d);
    let m1 = claims.expected_retention(d);
    let m2 = claims.expected_retention_sq(d);
    let load = (1.0 + claims.theta_tilde) * e * m0;
    let g1 = (a1 + 1.0) * c + (gamma * m - 1.0) * e * m1 - 0.5 * gamma * e * e * m2 - load - 0.5 * gamma * m * m;
    let g2 = (a1 + 1.0) * m - load - e * m1;
    (g1, g2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn table_two_defaults() {
        let m = MarketParams::default();
        m.validate().unwrap();
        assert_relative_eq!(m.h_rate(), -0.8725, max_relative = 1e-14);
    }

    #[test]
    fn moments_limits() {
        let c = ClaimParams::default();
        assert_eq!(c.expected_retention(0.0), 0.0);
        assert_eq!(c.expected_retention_sq(0.0), 0.0);
        assert_relative_eq!(c.expected_indemnity(0.0), 0.25);
        assert_relative_eq!(c.expected_retention(1e3), 0.25);
        assert_relative_eq!(c.expected_retention_sq(1e3), 2.0 / 16.0);
    }

    #[test]
    fn moments_match_quadrature() {
        let c = ClaimParams { mu: 2.5, theta_tilde: 0.0 };
        let d = 0.37;
        let n = 200_000;
        let h = 40.0 / n as f64;
        let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let y = (i as f64 + 0.5) * h;
            let w = c.mu * (-c.mu * y).exp() * h;
            m0 += w * (y - d).max(0.0);
            m1 += w * y.min(d);
            m2 += w * y.min(d).powi(2);
        }
        assert_relative_eq!(c.expected_indemnity(d), m0, max_relative = 1e-6);
        assert_relative_eq!(c.expected_retention(d), m1, max_relative = 1e-6);
        assert_relative_eq!(c.expected_retention_sq(d), m2, max_relative = 1e-6);
    }

    #[test]
    fn invalid_params_rejected() {
        let mut m = MarketParams::default();
        m.gamma = 0.0;
        assert!(m.validate().is_err());
        let mut m = MarketParams::default();
        m.rho = -1.5;
        assert!(m.validate().is_err());
        let mut m = MarketParams::default();
        m.delta = 0.4;
        assert!(m.validate().is_err());
        assert!(ClaimParams { mu: 0.0, theta_tilde: 0.2 }.validate().is_err());
    }

    proptest! {
        /// At the interior deductible `d = θ̃/(γE) + M̄/E >= 0` the general
        /// form collapses to the closed exponential-claim expressions.
        #[test]
        fn claim_rhs_matches_closed_form(
            mu in 0.5f64..8.0,
            tt in 0.0f64..1.0,
            gamma in 0.2f64..3.0,
            a1 in -3.0f64..1.0,
            e in 1.0f64..1.5,
            c in -2.0f64..2.0,
            m in -0.5f64..0.5,
        ) {
            let claims = ClaimParams { mu, theta_tilde: tt };
            let d = tt / (gamma * e) + m / e;
            prop_assume!(d >= 0.0);
            let (g1, g2) = claim_rhs(&claims, gamma, a1, e, c, m, d);
            let x = (-mu * d).exp();
            let g1_closed = (a1 + 1.0) * c + gamma * e / mu * m - 0.5 * gamma * m * m
                + gamma * e * e / (mu * mu) * x - e / mu - gamma * e * e / (mu * mu);
            let g2_closed = (a1 + 1.0) * m - tt * e / mu * x - e / mu;
            prop_assert!((g1 - g1_closed).abs() <= 1e-10 * (1.0 + g1_closed.abs()));
            prop_assert!((g2 - g2_closed).abs() <= 1e-10 * (1.0 + g2_closed.abs()));
        }
    }
}
