//! Column documentation written next to every CSV artifact.

use serde_json::{json, Value};

pub fn columns() -> Value {
    json!({
        "pd.csv": {
            "row_order": "calendar time, t = 0 first",
            "t": "calendar time in years",
            "tau": "time to maturity T - t",
            "Bbar": "convolved variance coefficient of the value function",
            "Hbar": "convolved variance coefficient of the mean function",
            "Cbar": "convolved intensity coefficient of the value function",
            "Mbar": "convolved intensity coefficient of the mean function",
            "B": "pointwise variance coefficient of the value function",
            "C": "pointwise intensity coefficient of the value function",
            "D": "integral of kappa*phi*Bbar + a0*Cbar from t to T",
            "N": "integral of kappa*phi*Hbar + a0*Mbar from t to T",
            "trading_weight": "alpha* X* / sqrt(v)",
            "deductible": "d*(t) >= 0"
        },
        "vanilla.csv": {
            "row_order": "calendar time, t = 0 first",
            "t": "calendar time in years",
            "tau": "time to maturity T - t",
            "B": "variance coefficient of the value function",
            "H": "variance coefficient of the mean function (closed form)",
            "D": "claim and drift integral of the value function",
            "N": "claim and drift integral of the mean function",
            "trading_weight": "alpha X / sqrt(v)",
            "deductible": "theta_tilde / (gamma e^{Upsilon (T - t)})"
        },
        "strategies.csv": {
            "row_order": "calendar time, t = 0 first",
            "t": "calendar time in years",
            "tau": "time to maturity T - t",
            "weight_pd": "path-dependent alpha* X* / sqrt(v)",
            "weight_vanilla": "vanilla alpha X / sqrt(v)",
            "deductible_pd": "path-dependent deductible",
            "deductible_vanilla": "vanilla deductible"
        },
        "sweep.csv": {
            "delta": "roughness of the variance kernel",
            "p": "power-law exponent of the Hawkes kernel",
            "gamma": "risk aversion",
            "loss": "welfare loss as a fraction of e^{Upsilon T} x0",
            "component_B": "v0 * integral of (B - B_sub)",
            "component_C": "lambda* * integral of (C - C_sub)",
            "component_D": "D(0) - D_sub(0)"
        },
        "intensity.csv": {
            "t": "calendar time in years",
            "lambda": "fitted intensity at the grid nodes"
        },
        "catalog.csv": {
            "t_years": "event time in years since the window start",
            "magnitude": "event magnitude"
        },
        "terminal.csv": {
            "x_T": "terminal wealth of each simulated path"
        }
    })
}
