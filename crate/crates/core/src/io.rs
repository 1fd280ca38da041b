//! CSV and JSON artifact writers. Floats are written with `{:?}`, the
//! shortest representation that round-trips.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::equilibrium::{PdCoefficients, VanillaCoefficients};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::welfare::SweepRow;

/// Column table: one header per column, all columns the same length.
pub fn write_columns<W: Write>(out: W, headers: &[&str], columns: &[&[f64]]) -> Result<()> {
    if headers.len() != columns.len() {
        return Err(Error::GridMismatch(format!("{} headers for {} columns", headers.len(), columns.len())));
    }
    let rows = columns.first().map_or(0, |c| c.len());
    if let Some(c) = columns.iter().find(|c| c.len() != rows) {
        return Err(Error::GridMismatch(format!("column of length {} among columns of length {rows}", c.len())));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(headers)?;
    let mut record = Vec::with_capacity(columns.len());
    for i in 0..rows {
        record.clear();
        record.extend(columns.iter().map(|c| format!("{:?}", c[i])));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub const PD_COLUMNS: [&str; 12] = [
    "t", "tau", "Bbar", "Hbar", "Cbar", "Mbar", "B", "C", "D", "N", "trading_weight", "deductible",
];

pub const VANILLA_COLUMNS: [&str; 8] = ["t", "tau", "B", "H", "D", "N", "trading_weight", "deductible"];

/// Calendar-time ordering: row 0 is `t = 0` (`τ = T`).
fn calendar<'a>(xs: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
    xs.iter().rev().copied()
}

/// `t_k = kΔ` and `τ_k = T - t_k`, both taken exactly from the grid.
fn time_columns(grid: &TimeGrid) -> (Vec<f64>, Vec<f64>) {
    let n = grid.steps();
    ((0..=n).map(|k| grid.time(k)).collect(), (0..=n).map(|k| grid.time(n - k)).collect())
}

pub fn write_pd_csv<W: Write>(out: W, c: &PdCoefficients) -> Result<()> {
    let (t, tau) = time_columns(&c.grid);
    let cols: Vec<Vec<f64>> = [&c.bbar, &c.hbar, &c.cbar, &c.mbar, &c.b, &c.c, &c.d_int, &c.n_int, &c.trading_weight, &c.deductible]
        .iter()
        .map(|v| calendar(v).collect())
        .collect();
    let mut all: Vec<&[f64]> = vec![&t, &tau];
    all.extend(cols.iter().map(|v| v.as_slice()));
    write_columns(out, &PD_COLUMNS, &all)
}

pub fn write_vanilla_csv<W: Write>(out: W, c: &VanillaCoefficients) -> Result<()> {
    let (t, tau) = time_columns(&c.grid);
    let cols: Vec<Vec<f64>> = [&c.b, &c.h, &c.d_int, &c.n_int, &c.trading_weight, &c.deductible]
        .iter()
        .map(|v| calendar(v).collect())
        .collect();
    let mut all: Vec<&[f64]> = vec![&t, &tau];
    all.extend(cols.iter().map(|v| v.as_slice()));
    write_columns(out, &VANILLA_COLUMNS, &all)
}

/// PD and vanilla strategies on one calendar-time table.
pub fn write_strategies_csv<W: Write>(out: W, pd: &PdCoefficients, va: &VanillaCoefficients) -> Result<()> {
    if pd.grid != va.grid {
        return Err(Error::GridMismatch("PD and vanilla coefficients differ in grid".into()));
    }
    let (t, tau) = time_columns(&pd.grid);
    let cols: Vec<Vec<f64>> = [&pd.trading_weight, &va.trading_weight, &pd.deductible, &va.deductible]
        .iter()
        .map(|v| calendar(v).collect())
        .collect();
    let mut all: Vec<&[f64]> = vec![&t, &tau];
    all.extend(cols.iter().map(|v| v.as_slice()));
    write_columns(
        out,
        &["t", "tau", "weight_pd", "weight_vanilla", "deductible_pd", "deductible_vanilla"],
        &all,
    )
}

pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let pick = |f: fn(&SweepRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let cols = [
        pick(|r| r.delta),
        pick(|r| r.p),
        pick(|r| r.gamma),
        pick(|r| r.loss),
        pick(|r| r.component_b),
        pick(|r| r.component_c),
        pick(|r| r.component_d),
    ];
    let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
    write_columns(
        out,
        &["delta", "p", "gamma", "loss", "component_B", "component_C", "component_D"],
        &refs,
    )
}

/// Pretty JSON with a trailing newline; key order follows struct order.
pub fn write_json<T: Serialize + ?Sized>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn write_file(path: impl AsRef<Path>, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{solve_pd, solve_vanilla, ClaimParams, MarketParams};
    use crate::hawkes::HawkesParams;

    #[test]
    fn floats_round_trip() {
        let xs = [0.1 + 0.2, 1e-300, -7.25, 1.0 / 3.0];
        let mut buf = Vec::new();
        write_columns(&mut buf, &["x"], &[&xs]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let back: Vec<f64> = text.lines().skip(1).map(|l| l.parse().unwrap()).collect();
        assert_eq!(back, xs);
    }

    #[test]
    fn ragged_columns_rejected() {
        assert!(write_columns(Vec::new(), &["a", "b"], &[&[1.0], &[1.0, 2.0]]).is_err());
        assert!(write_columns(Vec::new(), &["a"], &[&[1.0], &[1.0]]).is_err());
    }

    #[test]
    fn pd_table_is_calendar_ordered() {
        let g = TimeGrid::new(2.0, 8).unwrap();
        let (m, c, h) = (MarketParams::default(), ClaimParams::default(), HawkesParams::sichuan());
        let pd = solve_pd(&m, &c, &h, &g).unwrap();
        let mut buf = Vec::new();
        write_pd_csv(&mut buf, &pd).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], PD_COLUMNS.join(","));
        assert_eq!(lines.len(), 10);
        assert!(lines[1].starts_with("0.0,2.0,"));
        assert!(lines[9].starts_with("2.0,0.0,"));
        assert!(lines[9].ends_with(",5.0,0.2"));

        let va = solve_vanilla(&m, &c, h.lambda_star, &g).unwrap();
        let mut buf = Vec::new();
        write_strategies_csv(&mut buf, &pd, &va).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().last().unwrap().ends_with(",5.0,5.0,0.2,0.2"));
    }
}
