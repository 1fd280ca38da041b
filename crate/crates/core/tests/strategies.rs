use roughcat::catalog::{read_normalized, write_normalized};
use roughcat::equilibrium::{solve_pd, solve_vanilla, ClaimParams, MarketParams};
use roughcat::hawkes::{EventCatalog, HawkesParams};
use roughcat::mc::{estimate_objective, simulate_wealth, SimConfig, StrategySeries};
use roughcat::TimeGrid;
use proptest::prelude::*;

fn vanilla_world() -> (MarketParams, ClaimParams, HawkesParams) {
    let mut h = HawkesParams::sichuan();
    h.kernel.rho1 = 0.0;
    (MarketParams { delta: 1.0, ..Default::default() }, ClaimParams::default(), h)
}

fn sim(horizon: f64, paths: usize, steps: usize, seed: u64) -> SimConfig {
    SimConfig { paths, grid: TimeGrid::new(horizon, steps).unwrap(), seed, keep_paths: false }
}

#[test]
fn heston_mean_matches_vanilla_mean_function() {
    let (m, c, h) = vanilla_world();
    let grid = TimeGrid::new(2.0, 2048).unwrap();
    let va = solve_vanilla(&m, &c, h.lambda_star, &grid).unwrap();
    let g0 = va.expected_terminal_wealth(m.x0, m.v0);
    let b = simulate_wealth(&m, &c, &h, &StrategySeries::from_vanilla(&va), &sim(2.0, 10_000, 256, 3)).unwrap();
    let se = b.std_error.unwrap();
    assert!((b.mean - g0).abs() <= 3.0 * se, "mean {} g0 {g0} se {se}", b.mean);
}

#[test]
fn full_insurance_lowers_expected_wealth() {
    let (m, c, h) = vanilla_world();
    let grid = TimeGrid::new(2.0, 512).unwrap();
    let va = solve_vanilla(&m, &c, h.lambda_star, &grid).unwrap();
    let cfg = sim(2.0, 4000, 128, 11);
    let base = simulate_wealth(&m, &c, &h, &StrategySeries::from_vanilla(&va), &cfg).unwrap();
    let full = simulate_wealth(&m, &c, &h, &StrategySeries::from_vanilla(&va).with_deductible(0.0), &cfg).unwrap();
    assert!(full.mean < base.mean);
    assert!(full.variance < base.variance);
}

#[test]
fn scaled_weight_lowers_objective_with_common_noise() {
    let (m, c, h) = vanilla_world();
    let grid = TimeGrid::new(1.0, 512).unwrap();
    let va = solve_vanilla(&m, &c, h.lambda_star, &grid).unwrap();
    let cfg = sim(1.0, 8000, 128, 5);
    let s = StrategySeries::from_vanilla(&va);
    let j = |s: StrategySeries| estimate_objective(&simulate_wealth(&m, &c, &h, &s, &cfg).unwrap(), m.gamma);
    let base = j(s.clone());
    assert!(j(s.clone().scale_weight(1.5)) < base);
    assert!(j(s.scale_weight(0.5)) < base);
}

#[test]
fn pd_integrals_converge_under_refinement() {
    let (m, c, h) = (MarketParams::default(), ClaimParams::default(), HawkesParams::sichuan());
    let d0 = |n: usize| {
        let pd = solve_pd(&m, &c, &h, &TimeGrid::new(2.0, n).unwrap()).unwrap();
        (pd.d_int[n], pd.n_int[n])
    };
    let reference = d0(16384);
    let mut prev = f64::INFINITY;
    for n in [256, 1024, 4096] {
        let (d, nn) = d0(n);
        let err = ((d - reference.0) / reference.0).abs().max(((nn - reference.1) / reference.1).abs());
        assert!(err < prev, "N = {n}: {err} vs {prev}");
        prev = err;
    }
    assert!(prev < 1e-3);
}

#[test]
fn rough_strategy_values_finite_on_default_grid() {
    let grid = TimeGrid::new(10.0, 1024).unwrap();
    let pd = solve_pd(&MarketParams::default(), &ClaimParams::default(), &HawkesParams::sichuan(), &grid).unwrap();
    assert!(pd.trading_weight.iter().chain(&pd.deductible).all(|x| x.is_finite()));
    assert!(pd.deductible.iter().all(|&d| d >= 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalized_catalog_roundtrips(mut times in proptest::collection::vec(0.0f64..16.0, 0..60)) {
        times.sort_by(f64::total_cmp);
        times.dedup();
        let mags: Vec<f64> = times.iter().map(|t| 5.0 + t / 8.0).collect();
        let cat = EventCatalog::new(times, 16.0, Some(mags)).unwrap();
        let mut buf = Vec::new();
        write_normalized(&cat, &mut buf).unwrap();
        let back = read_normalized(buf.as_slice(), 16.0).unwrap();
        prop_assert_eq!(back.times(), cat.times());
        prop_assert_eq!(back.magnitudes(), cat.magnitudes());
        let mut again = Vec::new();
        write_normalized(&back, &mut again).unwrap();
        prop_assert_eq!(again, buf);
    }
}
