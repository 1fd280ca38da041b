use std::path::{Path, PathBuf};
use std::process::ExitCode;

use roughcat::catalog::{self, IngestReport};
use roughcat::config::{RunConfig, StrategyKind};
use roughcat::equilibrium::{solve_pd, solve_vanilla};
use roughcat::hawkes::{self, EventCatalog, SelectedModel};
use roughcat::io::{self, write_columns};
use roughcat::mc::{estimate_objective, simulate_wealth, SimConfig, StrategySeries};
use roughcat::welfare;
use roughcat::{Error, Result, TimeGrid};
use serde_json::{json, Value};

use crate::Common;

pub enum Status {
    Success,
    NotConverged,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        match s {
            Status::Success => ExitCode::SUCCESS,
            Status::NotConverged => ExitCode::from(2),
        }
    }
}

/// 1 for input, I/O and configuration problems; 2 for numerical failures.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NonFinite { .. } | Error::Optimizer(_) | Error::SingularWeights { .. } | Error::KernelDomain { .. } => 2,
        _ => 1,
    }
}

struct Run {
    config: RunConfig,
    dir: PathBuf,
}

impl Run {
    fn start(common: &Common, command: &str) -> Result<Self> {
        let text = match &common.config {
            Some(p) => Some(std::fs::read_to_string(p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?),
            None => None,
        };
        let mut overrides = common.set.clone();
        if let Some(seed) = common.seed {
            overrides.push(format!("sim.seed={seed}"));
            overrides.push(format!("calibration.seed={seed}"));
        }
        let config = RunConfig::resolve(text.as_deref(), &overrides)?;
        let dir = common.out.clone().unwrap_or_else(|| PathBuf::from(format!("roughcat-{command}")));
        std::fs::create_dir_all(&dir)?;
        io::write_json(dir.join("config.json"), &config)?;
        io::write_json(dir.join("schema.json"), &crate::schema::columns())?;
        Ok(Self { config, dir })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn summary(&self, command: &str, body: Value) -> Result<()> {
        let doc = json!({ "command": command, "config": self.config, "result": body });
        io::write_json(self.path("summary.json"), &doc)
    }
}

fn read_any_catalog(path: &Path, config: &RunConfig) -> Result<(EventCatalog, Option<IngestReport>)> {
    if !path.exists() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("catalog {} not found", path.display()),
        )));
    }
    if catalog::is_normalized(path)? {
        let file = std::fs::File::open(path)?;
        Ok((catalog::read_normalized(file, config.catalog.horizon_years())?, None))
    } else {
        let loaded = catalog::load_catalog(path, &config.catalog)?;
        Ok((loaded.catalog, Some(loaded.report)))
    }
}

fn warn_all(report: &Option<IngestReport>) {
    if let Some(r) = report {
        for w in &r.warnings {
            eprintln!("roughcat: warning: {w}");
        }
    }
}

pub fn calibrate(catalog_path: &Path, common: &Common) -> Result<Status> {
    let run = Run::start(common, "calibrate")?;
    let cfg = &run.config;
    let (catalog, report) = read_any_catalog(catalog_path, cfg)?;
    warn_all(&report);
    let grid = TimeGrid::new(catalog.horizon(), cfg.grid.steps)?;
    let fit = hawkes::calibrate(&catalog, &grid, &cfg.calibration)?;
    io::write_json(run.path("params.json"), &fit.params)?;
    let path = hawkes::intensity_on_grid(&fit.params, &catalog, &grid)?;
    let t: Vec<f64> = grid.times().collect();
    io::write_file(run.path("intensity.csv"), |buf| write_columns(buf, &["t", "lambda"], &[&t, &path.lambda]))?;
    let k_over_t = catalog.len() as f64 / catalog.horizon();
    run.summary(
        "calibrate",
        json!({
            "events": catalog.len(),
            "horizon": catalog.horizon(),
            "constant_rate": k_over_t,
            "ingest": report,
            "calibration": fit,
        }),
    )?;
    if fit.selected == SelectedModel::ConstantRate {
        eprintln!(
            "roughcat: Hawkes fit gained {:.3} log-units over the constant rate (threshold {:.3}); constant rate selected",
            fit.hawkes_log_likelihood - fit.baseline_log_likelihood,
            fit.selection_threshold
        );
    }
    Ok(if fit.improved { Status::Success } else { Status::NotConverged })
}

pub fn solve(common: &Common) -> Result<Status> {
    let run = Run::start(common, "solve")?;
    let cfg = &run.config;
    let grid = cfg.grid.grid()?;
    let pd = solve_pd(&cfg.market, &cfg.claims, &cfg.hawkes, &grid)?;
    let va = solve_vanilla(&cfg.market, &cfg.claims, cfg.hawkes.lambda_star, &grid)?;
    io::write_file(run.path("pd.csv"), |b| io::write_pd_csv(b, &pd))?;
    io::write_file(run.path("vanilla.csv"), |b| io::write_vanilla_csv(b, &va))?;
    io::write_file(run.path("strategies.csv"), |b| io::write_strategies_csv(b, &pd, &va))?;
    let (m, lam) = (&cfg.market, cfg.hawkes.lambda_star);
    let sup = |x: &[f64], y: &[f64]| x.iter().zip(y).fold(0.0f64, |a, (p, q)| a.max((p - q).abs()));
    let n = grid.steps();
    run.summary(
        "solve",
        json!({
            "pd": {
                "value_function": pd.value_function(m.x0, m.v0, lam),
                "expected_terminal_wealth": pd.expected_terminal_wealth(m.x0, m.v0, lam),
                "trading_weight_today": pd.trading_weight[n],
                "deductible_today": pd.deductible[n],
            },
            "vanilla": {
                "value_function": va.value_function(m.x0, m.v0),
                "expected_terminal_wealth": va.expected_terminal_wealth(m.x0, m.v0),
                "trading_weight_today": va.trading_weight[n],
                "deductible_today": va.deductible[n],
            },
            "sup_gap_trading_weight": sup(&pd.trading_weight, &va.trading_weight),
            "sup_gap_deductible": sup(&pd.deductible, &va.deductible),
        }),
    )?;
    Ok(Status::Success)
}

pub fn welfare(common: &Common) -> Result<Status> {
    let run = Run::start(common, "welfare")?;
    let cfg = &run.config;
    let grid = cfg.grid.grid()?;
    let s = &cfg.sweep;
    let rows = welfare::sweep(&cfg.market, &cfg.claims, &cfg.hawkes, &grid, &s.delta, &s.p, &s.gamma)?;
    io::write_file(run.path("sweep.csv"), |b| io::write_sweep_csv(b, &rows))?;
    let min_loss = rows.iter().map(|r| r.loss).fold(f64::INFINITY, f64::min);
    run.summary("welfare", json!({ "points": rows.len(), "min_loss": min_loss, "rows": rows }))?;
    Ok(Status::Success)
}

pub fn simulate(common: &Common) -> Result<Status> {
    let run = Run::start(common, "simulate")?;
    let cfg = &run.config;
    let grid = cfg.grid.grid()?;
    let (m, lam) = (&cfg.market, cfg.hawkes.lambda_star);
    let (strategy, g0) = match cfg.sim.strategy {
        StrategyKind::Vanilla => {
            let va = solve_vanilla(m, &cfg.claims, lam, &grid)?;
            (StrategySeries::from_vanilla(&va), va.expected_terminal_wealth(m.x0, m.v0))
        }
        StrategyKind::Pd => {
            let pd = solve_pd(m, &cfg.claims, &cfg.hawkes, &grid)?;
            (StrategySeries::from_pd(&pd), pd.expected_terminal_wealth(m.x0, m.v0, lam))
        }
    };
    let sim = SimConfig {
        paths: cfg.sim.paths,
        grid: TimeGrid::new(grid.horizon(), cfg.sim.steps)?,
        seed: cfg.sim.seed,
        keep_paths: cfg.sim.keep_paths,
    };
    let bundle = simulate_wealth(m, &cfg.claims, &cfg.hawkes, &strategy, &sim)?;
    if let Some(xs) = &bundle.terminal {
        io::write_file(run.path("terminal.csv"), |b| write_columns(b, &["x_T"], &[xs]))?;
    }
    let z = bundle.std_error.map(|se| (bundle.mean - g0) / se);
    if bundle.std_error.is_none() {
        eprintln!("roughcat: warning: a single path has no standard error");
    }
    run.summary(
        "simulate",
        json!({
            "analytic_mean": g0,
            "mc_mean": bundle.mean,
            "mc_variance": bundle.variance,
            "std_error": bundle.std_error,
            "std_error_undefined": bundle.std_error.is_none(),
            "z_score": z,
            "within_3_se": z.map(|z| z.abs() <= 3.0),
            "objective": estimate_objective(&bundle, m.gamma),
            "negative_wealth_paths": bundle.negative_wealth,
            "clamp_fraction": bundle.clamp_fraction,
            "mean_events": bundle.mean_events,
        }),
    )?;
    Ok(Status::Success)
}

pub fn ingest(catalog_path: &Path, common: &Common) -> Result<Status> {
    let run = Run::start(common, "ingest")?;
    let loaded = catalog::load_catalog(catalog_path, &run.config.catalog)?;
    warn_all(&Some(loaded.report.clone()));
    io::write_file(run.path("catalog.csv"), |b| catalog::write_normalized(&loaded.catalog, b))?;
    let c = &loaded.catalog;
    run.summary(
        "ingest",
        json!({
            "events": c.len(),
            "horizon": c.horizon(),
            "constant_rate": c.len() as f64 / c.horizon(),
            "report": loaded.report,
        }),
    )?;
    Ok(Status::Success)
}
