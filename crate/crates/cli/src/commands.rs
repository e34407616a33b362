use std::path::Path;

use rayon::prelude::*;

use qtm_core::analytics::steady_report_with;
use qtm_core::optimize::{maximize_over_hot_temperature, OptimizationResult};
use qtm_core::{
    critical_cold_temperature, maximize_concurrence, threshold_hot_temperature, ModelParams, SweepRecord, Temperature,
    Threshold,
};

use crate::config::{ConfigError, RunConfig};
use crate::csv::{num, record_fields, Table, RECORD_COLUMNS};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<qtm_core::Error> for CliError {
    fn from(e: qtm_core::Error) -> Self {
        match e {
            qtm_core::Error::InvalidParameter { .. } => CliError::Config(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

pub type CmdResult = Result<(), CliError>;

fn emit(table: &Table, path: Option<&Path>) -> CmdResult {
    match path {
        Some(p) => std::fs::write(p, table.as_str())
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{}", table.as_str());
            Ok(())
        }
    }
}

pub fn steady(cfg: &RunConfig, tolerance: Option<f64>, output: Option<&Path>) -> CmdResult {
    let params = cfg.params()?;
    let opts = cfg.steady_options(tolerance)?;
    let (record, rho) = steady_report_with(&params, &opts)?;
    let m = rho.matrix();
    for (label, part) in [("re", 0), ("im", 1)] {
        println!("rho.{label}");
        for i in 0..4 {
            let row: Vec<String> = (0..4)
                .map(|j| {
                    let z = m[(i, j)];
                    format!("{:>24}", num(if part == 0 { z.re } else { z.im }))
                })
                .collect();
            println!("{}", row.join(" "));
        }
    }
    let mut table = Table::new(RECORD_COLUMNS);
    table.row(record_fields(&record));
    if let Some(p) = output {
        emit(&table, Some(p))?;
    }
    print!("{}", table.as_str());
    Ok(())
}

pub fn sweep(cfg: &RunConfig, tolerance: Option<f64>, output: Option<&Path>) -> CmdResult {
    let points = cfg.sweep_points()?;
    let opts = cfg.steady_options(tolerance)?;
    let optimize = cfg.sweep.as_ref().is_some_and(|s| s.optimize);
    let mut header = RECORD_COLUMNS.to_vec();
    let rows: Vec<Vec<String>> = if optimize {
        header.push("evaluations");
        let problems = points
            .iter()
            .map(|p| cfg.problem(*p))
            .collect::<Result<Vec<_>, _>>()?;
        let results: Vec<OptimizationResult> = problems
            .par_iter()
            .map(maximize_concurrence)
            .collect::<Result<_, _>>()?;
        results
            .iter()
            .map(|r| {
                let mut f = record_fields(&r.record);
                f.push(r.evaluations.to_string());
                f
            })
            .collect()
    } else {
        let records: Vec<SweepRecord> = points
            .par_iter()
            .map(|p| steady_report_with(p, &opts).map(|(r, _)| r))
            .collect::<Result<_, _>>()?;
        records.iter().map(record_fields).collect()
    };
    let mut table = Table::new(&header);
    for r in rows {
        table.row(r);
    }
    emit(&table, output)
}

pub fn threshold(cfg: &RunConfig, output: Option<&Path>) -> CmdResult {
    let grid = cfg.threshold_grid()?;
    let search = cfg.search()?;
    let base = cfg.params()?;
    let t_h = base.temperatures().1;
    let bases: Vec<ModelParams> = grid
        .iter()
        .map(|&t_c| base.with_temperatures(Temperature::new(t_c)?, t_h))
        .collect::<Result<_, _>>()?;
    let found: Vec<Threshold> = bases
        .par_iter()
        .map(|b| threshold_hot_temperature(b, &search))
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(&["model", "energy", "u", "t_c", "threshold_t_h"]);
    for (t_c, th) in grid.iter().zip(found) {
        table.row([
            base.kind().as_str().to_string(),
            num(base.energy()),
            num(base.coulomb().unwrap_or(f64::NAN)),
            num(*t_c),
            th.value().map(num).unwrap_or_else(|| "unreachable".into()),
        ]);
    }
    if cfg.threshold.as_ref().is_some_and(|t| t.critical) {
        let crit = critical_cold_temperature(&base, &search)?;
        eprintln!("critical_t_c = {}", num(crit));
    }
    emit(&table, output)
}

pub fn optimize(cfg: &RunConfig, output: Option<&Path>) -> CmdResult {
    let base = cfg.params()?;
    let result = if cfg.optimize.over_t_h {
        maximize_over_hot_temperature(&base, &cfg.search()?)?.result
    } else {
        maximize_concurrence(&cfg.problem(base)?)?
    };
    let mut header = RECORD_COLUMNS.to_vec();
    header.extend(["evaluations", "entangled"]);
    let mut table = Table::new(&header);
    let mut fields = record_fields(&result.record);
    fields.push(result.evaluations.to_string());
    fields.push(result.entangled.to_string());
    table.row(fields);
    emit(&table, output)
}
