use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use dirac_stso::cli::{exit_code, run, table_layout, table_sweep, CliArgs, RunConfig, DIGITS_ENV, EXIT_PARTIAL_SWEEP};
use dirac_stso::Error;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = CliArgs::parse();
    match execute(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<Error>().map(exit_code).unwrap_or(1);
            ExitCode::from(code as u8)
        }
    }
}

fn execute(args: &CliArgs) -> anyhow::Result<i32> {
    let env_digits = std::env::var(DIGITS_ENV).ok();
    let cfg = RunConfig::resolve(args, env_digits.as_deref())?;

    if let Some(table) = cfg.table {
        let (rows, default_stages) = table_layout(table)?;
        let stages = cfg.stage_plan.clone().unwrap_or(default_stages);
        let report = table_sweep(table, &rows, &stages, &cfg).context("table sweep")?;
        print!("{}", report.render(cfg.output));
        let failed = report.failed_cells();
        if failed > 0 {
            eprintln!("{failed} cell(s) failed");
            return Ok(EXIT_PARTIAL_SWEEP);
        }
        return Ok(0);
    }

    let report = run(&cfg)?;
    print!("{}", report.render(cfg.output));
    if !report.converged {
        eprintln!("SCF did not converge in {} iterations", report.iterations);
        return Ok(2);
    }
    Ok(0)
}
