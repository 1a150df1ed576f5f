//! `thermo1d` — command-line front end for the coupled thermoelasticity
//! simulator.
//!
//! Exit codes: 0 success, 1 validation failure (flags, config, data),
//! 2 runtime failure (a simulation that started but could not finish).

mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use config::{parse_config, RunConfig};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use thermo1d::diagnostics::{EnergyLedger, NormHistory};
use thermo1d::experiments::{
    mms_verify_spatial, mms_verify_temporal, stability_experiment, standard_manufactured,
    viscosity_sweep,
};
use thermo1d::solver::{run, Forcing, Observer};
use thermo1d::ThermoError;

#[derive(Parser)]
#[command(name = "thermo1d", disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Path to the sectioned key=value config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides [output] dir from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Single simulation run with energy/norm CSV output.
    Run(Common),
    /// Vanishing-viscosity sweep over a comma-separated nu list.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Strictly decreasing positive viscosities, e.g. "1,0.5,0.25".
        #[arg(long = "nu-list")]
        nu_list: String,
        /// Regularize the data per branch at n = 1/nu.
        #[arg(long)]
        mollify: bool,
    },
    /// Manufactured-solution convergence study.
    Mms(Common),
    /// Perturbation-response stability experiment.
    Stability(Common),
    /// Validate the configured grid and initial data without running.
    CheckData(Common),
}

enum CliError {
    /// Bad input: flags, config text, or data validation. Exit 1.
    Validation(String),
    /// The simulation itself failed after starting. Exit 2.
    Runtime(String),
}

impl From<ThermoError> for CliError {
    fn from(e: ThermoError) -> CliError {
        match e {
            ThermoError::AbortedRun { .. }
            | ThermoError::PicardDivergence { .. }
            | ThermoError::PositivityLoss { .. } => CliError::Runtime(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    // Clap exits with 2 on usage errors; 2 is reserved here for runtime
    // failures, so map flag problems to the validation exit code instead.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            eprintln!("{e}");
            return ExitCode::from(1);
        }
        Err(e) => {
            // --help / --version output.
            print!("{e}");
            return ExitCode::from(0);
        }
    };

    let result = match &cli.command {
        Command::Run(c) => with_config(c, cmd_run),
        Command::Sweep { common, nu_list, mollify } => with_config(common, |cfg, out| {
            cmd_sweep(cfg, out, nu_list, *mollify)
        }),
        Command::Mms(c) => with_config(c, cmd_mms),
        Command::Stability(c) => with_config(c, cmd_stability),
        Command::CheckData(c) => with_config(c, cmd_check_data),
    };

    match result {
        Ok(()) => ExitCode::from(0),
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn with_config<F>(common: &Common, body: F) -> Result<(), CliError>
where
    F: FnOnce(&RunConfig, &Path) -> Result<(), CliError>,
{
    let text = std::fs::read_to_string(&common.config).map_err(|e| {
        CliError::Validation(format!("--config {}: {e}", common.config.display()))
    })?;
    let cfg = parse_config(&text).map_err(|e| CliError::Validation(e.to_string()))?;
    let out = common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&cfg.out_dir));
    body(&cfg, &out)
}

fn summary_line(label: &str, t: f64, min_theta: f64, max_resid: f64, picard: u64) {
    println!(
        "{label}: t = {:.6} min_theta = {:.6e} max|energy residual| = {:.6e} picard_iters = {picard}",
        t, min_theta, max_resid
    );
}

fn cmd_run(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let init = cfg.initial_data()?;
    let params = cfg.params();

    let mut ledger = EnergyLedger::new();
    let mut norms = NormHistory::new();
    let mut sampler = output::StrideSampler::new(cfg.every);
    let mut observers: [&mut dyn Observer; 3] = [&mut ledger, &mut norms, &mut sampler];
    let result = run(&init, &params, &Forcing::none(), &mut observers)?;

    let steps = sampler.sampled_steps();
    let energy_rows: Vec<_> = ledger
        .rows
        .iter()
        .filter(|r| steps.contains(&r.step))
        .collect();
    let norm_rows: Vec<_> = norms
        .rows
        .iter()
        .filter(|r| steps.contains(&r.step))
        .collect();
    output::write_file(out, "energy.csv", &output::energy_csv(&energy_rows))?;
    output::write_file(out, "norms.csv", &output::norms_csv(&norm_rows))?;
    if cfg.emit_fields {
        for (step, state) in sampler.samples() {
            output::write_file(out, &format!("fields_{step}.csv"), &output::fields_csv(state))?;
        }
    }

    summary_line(
        "run",
        result.final_state.t,
        sampler.min_theta,
        ledger.max_abs_residual(),
        result.total_picard_iters,
    );
    Ok(())
}

fn cmd_sweep(cfg: &RunConfig, out: &Path, nu_list: &str, mollify: bool) -> Result<(), CliError> {
    let nus: Vec<f64> = nu_list
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Validation(format!("--nu-list: `{s}` is not a number")))
        })
        .collect::<Result<_, _>>()?;
    for pair in nus.windows(2) {
        if !(pair[0] > pair[1]) {
            return Err(CliError::Validation(format!(
                "--nu-list must be strictly decreasing, got {} then {}",
                pair[0], pair[1]
            )));
        }
    }
    if nus.last().is_none_or(|v| *v <= 0.0) {
        return Err(CliError::Validation(
            "--nu-list must contain positive values".to_string(),
        ));
    }

    let init = cfg.initial_data()?;
    let report = viscosity_sweep(&init, &cfg.params(), &nus, mollify)?;

    let mut csv = String::from("nu_hi,nu_lo,dist_u,dist_v,dist_theta\n");
    for p in &report.pairs {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            output::fmt(p.nu_hi),
            output::fmt(p.nu_lo),
            output::fmt(p.dist_u),
            output::fmt(p.dist_v),
            output::fmt(p.dist_theta)
        ));
    }
    output::write_file(out, "sweep.csv", &csv)?;

    for b in &report.branches {
        match &b.error {
            Some(e) => println!("sweep nu = {:.6e}: FAILED ({e})", b.nu),
            None => println!(
                "sweep nu = {:.6e}: pairing<.,1> = {:.6e} pairing<.,x> = {:.6e}",
                b.nu, b.pairing_one, b.pairing_x
            ),
        }
    }
    Ok(())
}

fn cmd_mms(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let ms = standard_manufactured(cfg.mu, cfg.nu, cfg.a, cfg.b);
    let spatial = mms_verify_spatial(&ms, cfg.mu, cfg.nu, cfg.a, cfg.b, &[32, 64, 128, 256], cfg.t_end)?;
    let dts = [4.0 * cfg.dt, 2.0 * cfg.dt, cfg.dt];
    let temporal = mms_verify_temporal(&ms, cfg.mu, cfg.nu, cfg.a, cfg.b, 512, &dts, cfg.t_end)?;

    let mut csv =
        String::from("study,n_cells,dt,error_u_l2,error_theta_l2,order_u,order_theta\n");
    for (study, table) in [("spatial", &spatial), ("temporal", &temporal)] {
        for r in &table.rows {
            csv.push_str(&format!(
                "{study},{},{},{},{},{},{}\n",
                r.n_cells,
                output::fmt(r.dt),
                output::fmt(r.error_u_l2),
                output::fmt(r.error_theta_l2),
                output::fmt(r.observed_order_u),
                output::fmt(r.observed_order_theta)
            ));
        }
    }
    output::write_file(out, "mms.csv", &csv)?;

    let last = spatial.rows.last().expect("non-empty table");
    println!(
        "mms: spatial order u = {:.3} theta = {:.3}; temporal order u = {:.3} theta = {:.3}",
        last.observed_order_u,
        last.observed_order_theta,
        temporal.rows.last().expect("non-empty table").observed_order_u,
        temporal.rows.last().expect("non-empty table").observed_order_theta
    );
    Ok(())
}

fn cmd_stability(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let init = cfg.initial_data()?;
    let report = stability_experiment(&init, &[1e-4, 2e-4, 4e-4], &cfg.params())?;

    let mut csv =
        String::from("delta,final_dtheta_l2,final_dv_l2,sup_dv_l2,response_constant\n");
    for r in &report.rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            output::fmt(r.delta),
            output::fmt(r.final_dtheta_l2),
            output::fmt(r.final_dv_l2),
            output::fmt(r.sup_dv_l2),
            output::fmt(r.response_constant)
        ));
    }
    output::write_file(out, "stability.csv", &csv)?;
    println!("stability: slope = {:.4}", report.slope);
    Ok(())
}

fn cmd_check_data(cfg: &RunConfig, _out: &Path) -> Result<(), CliError> {
    let grid = cfg.grid().map_err(|e| CliError::Validation(e.to_string()))?;
    let init = cfg
        .initial_data()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    println!(
        "check-data: grid [{}, {}] n_cells = {} h = {:.6e}; u0 max = {:.6e} u1 max = {:.6e} theta0 min = {:.6e}",
        grid.a(),
        grid.b(),
        grid.n_cells(),
        grid.h(),
        init.u0.max_abs(),
        init.u1.max_abs(),
        init.theta0.min()
    );
    Ok(())
}
