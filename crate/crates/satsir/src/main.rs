use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use satsir::config::{load_config, RunConfig};
use satsir::equilibria::{
    backward_bifurcation_condition, basic_reproduction_number, bifurcation_scan,
    disease_free_equilibrium, dfe_stability, endemic_equilibria, find_r0_star,
    slope_di_dr0_at_one, transcritical_u2_threshold, BackwardBifurcation, EquilibriumPoint,
    Stability, U2Threshold, DEFAULT_HYPERBOLICITY_EPS,
};
use satsir::error::Error;
use satsir::numerics::rk4_integrate_forward;
use satsir::optctl::{fbs_solve, run_strategy, Strategy};
use satsir::output::{
    write_adjoint_csv, write_controls_csv, write_json_report, write_scan_csv,
    write_trajectory_csv,
};
use satsir::dynamics::state_rhs_raw;

/// SIR model with saturated incidence and treatment: simulation,
/// equilibrium/bifurcation analysis and two-control optimal control.
#[derive(Parser)]
#[command(name = "satsir", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyArg {
    None,
    Str1,
    Str2,
    Both,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::None => Strategy::None,
            StrategyArg::Str1 => Strategy::Str1,
            StrategyArg::Str2 => Strategy::Str2,
            StrategyArg::Both => Strategy::Both,
        }
    }
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output path prefix (overrides the config's out_prefix).
    #[arg(long)]
    out: Option<String>,
    /// Strategy override for optimize/efficiency.
    #[arg(long, value_enum)]
    strategy: Option<StrategyArg>,
    /// Override for the grid interval count (must be even).
    #[arg(long)]
    grid_n: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the model under the config's fixed controls; emits a
    /// trajectory CSV.
    Simulate(CommonArgs),
    /// Equilibrium and stability report (JSON): DFE, endemic points,
    /// bifurcation thresholds.
    Equilibria(CommonArgs),
    /// Bifurcation scan over the config's R0 grid; emits a branch CSV.
    Scan(CommonArgs),
    /// Solve the optimal-control problem; emits control/state/adjoint CSVs
    /// and a JSON summary.
    Optimize(CommonArgs),
    /// Efficiency analysis of the intervention strategies (JSON report).
    Efficiency(CommonArgs),
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_)
        | Error::InvalidValue { .. }
        | Error::Negative { .. }
        | Error::OddIntervalCount { .. } => 1,
        _ => 2,
    }
}

fn prepare(args: &CommonArgs) -> Result<(RunConfig, String), Error> {
    let mut config = load_config(&args.config)?;
    if let Some(n) = args.grid_n {
        config.grid.n = n;
        config.grid.validate().map_err(|e| {
            Error::Config(format!(
                "--grid-n: {e} (Simpson's 1/3 rule requires an even interval count)"
            ))
        })?;
    }
    let prefix = args
        .out
        .clone()
        .or_else(|| config.out_prefix.clone())
        .unwrap_or_else(|| "satsir".to_string());
    Ok((config, prefix))
}

fn cmd_simulate(args: &CommonArgs) -> Result<u8, Error> {
    let (config, prefix) = prepare(args)?;
    let u = config.controls.fixed_or_zero();
    let p = config.params;
    let traj = rk4_integrate_forward(
        |_, y| state_rhs_raw(y, &u, &p),
        config.initial.as_array(),
        &config.grid,
    )?;
    let path = PathBuf::from(format!("{prefix}_trajectory.csv"));
    write_trajectory_csv(&path, &traj)?;
    println!("wrote {}", path.display());
    Ok(0)
}

#[derive(Serialize)]
struct DfeSection {
    state: satsir::dynamics::SirState,
    stability: Stability,
    a11: Option<f64>,
}

#[derive(Serialize)]
struct EquilibriaReport {
    r0: f64,
    dfe: DfeSection,
    endemic: Vec<EquilibriumPoint>,
    u2_threshold: Option<U2Threshold>,
    backward_bifurcation: BackwardBifurcation,
    r0_star: Option<f64>,
    slope_di_dr0_at_one: Option<f64>,
}

fn cmd_equilibria(args: &CommonArgs) -> Result<u8, Error> {
    let (config, prefix) = prepare(args)?;
    let p = config.params;
    let u = config.controls.fixed_or_zero();
    let r0 = basic_reproduction_number(&p, &u)?;
    let dfe_state = disease_free_equilibrium(&p, u.u1)?;
    let dfe = dfe_stability(&p, &u, DEFAULT_HYPERBOLICITY_EPS)?;
    let report = EquilibriaReport {
        r0,
        dfe: DfeSection {
            state: dfe_state,
            stability: dfe.stability,
            a11: dfe.a11,
        },
        endemic: endemic_equilibria(&p, &u)?,
        u2_threshold: transcritical_u2_threshold(&p, u.u1)?,
        backward_bifurcation: backward_bifurcation_condition(&p, u.u2),
        r0_star: find_r0_star(&p, &u)?,
        slope_di_dr0_at_one: slope_di_dr0_at_one(&p, u.u2).ok(),
    };
    let path = PathBuf::from(format!("{prefix}_equilibria.json"));
    write_json_report(&path, &report)?;
    println!("wrote {}", path.display());
    Ok(0)
}

fn cmd_scan(args: &CommonArgs) -> Result<u8, Error> {
    let (config, prefix) = prepare(args)?;
    let scan = config
        .scan
        .ok_or_else(|| Error::Config("scan: config has no `scan` section".into()))?;
    let u = config.controls.fixed_or_zero();
    let samples = bifurcation_scan(&config.params, &u, &scan.grid())?;
    let path = PathBuf::from(format!("{prefix}_scan.csv"));
    write_scan_csv(&path, &samples)?;
    println!("wrote {}", path.display());
    Ok(0)
}

#[derive(Serialize)]
struct OptimizeSummary {
    strategy: Strategy,
    objective: f64,
    iterations: usize,
    converged: bool,
}

fn cmd_optimize(args: &CommonArgs) -> Result<u8, Error> {
    let (config, prefix) = prepare(args)?;
    let strategy = args
        .strategy
        .map(Strategy::from)
        .unwrap_or_else(|| config.controls.strategy_or(Strategy::Both));
    let sol = fbs_solve(
        &config.params,
        &config.weights,
        &config.initial,
        &config.grid,
        &config.oc_options,
        strategy.active_controls(),
    )?;
    write_controls_csv(&PathBuf::from(format!("{prefix}_controls.csv")), &sol)?;
    write_trajectory_csv(&PathBuf::from(format!("{prefix}_states.csv")), &sol.states)?;
    write_adjoint_csv(&PathBuf::from(format!("{prefix}_adjoints.csv")), &sol.adjoints)?;
    let summary = OptimizeSummary {
        strategy,
        objective: sol.objective,
        iterations: sol.iterations,
        converged: sol.converged,
    };
    write_json_report(&PathBuf::from(format!("{prefix}_optimize.json")), &summary)?;
    println!(
        "J = {} after {} iterations (converged: {})",
        sol.objective, sol.iterations, sol.converged
    );
    Ok(if sol.converged { 0 } else { 3 })
}

#[derive(Serialize)]
struct StrategyRow {
    strategy: Strategy,
    a_controlled: f64,
    efficiency_index: f64,
    objective: f64,
    iterations: usize,
    converged: bool,
}

#[derive(Serialize)]
struct EfficiencyReport {
    a_uncontrolled: f64,
    strategies: Vec<StrategyRow>,
}

fn cmd_efficiency(args: &CommonArgs) -> Result<u8, Error> {
    let (config, prefix) = prepare(args)?;
    let to_run: Vec<Strategy> = match args.strategy.map(Strategy::from) {
        Some(s) => vec![s],
        None => vec![Strategy::Str1, Strategy::Str2, Strategy::Both],
    };
    let mut rows = Vec::new();
    let mut a_uncontrolled = None;
    let mut all_converged = true;
    for strategy in to_run {
        let report = run_strategy(
            strategy,
            &config.params,
            &config.weights,
            &config.initial,
            &config.grid,
            &config.oc_options,
        )?;
        a_uncontrolled = Some(report.a_uncontrolled);
        all_converged &= report.solution.converged;
        println!(
            "{:?}: Ac = {:.4}, E.I. = {:.2}",
            strategy, report.a_controlled, report.efficiency
        );
        rows.push(StrategyRow {
            strategy,
            a_controlled: report.a_controlled,
            efficiency_index: report.efficiency,
            objective: report.solution.objective,
            iterations: report.solution.iterations,
            converged: report.solution.converged,
        });
    }
    let report = EfficiencyReport {
        a_uncontrolled: a_uncontrolled.unwrap_or(f64::NAN),
        strategies: rows,
    };
    let path = PathBuf::from(format!("{prefix}_efficiency.json"));
    write_json_report(&path, &report)?;
    println!("wrote {}", path.display());
    Ok(if all_converged { 0 } else { 3 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Equilibria(args) => cmd_equilibria(args),
        Command::Scan(args) => cmd_scan(args),
        Command::Optimize(args) => cmd_optimize(args),
        Command::Efficiency(args) => cmd_efficiency(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
