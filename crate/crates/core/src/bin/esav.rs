use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use esav::harness::{
    compare_schemes, convergence_study, run_scheme, run_selftest, write_comparison, write_run,
    write_study, RunConfig,
};
use esav::integrators::SchemeKind;
use esav::Error;

const OUTPUTS: &str = "\
Outputs (under the output directory):
  energy.csv    t, H_modified, H_true, drift
  errors.csv    scheme, tau, steps, l2_error, linf_error, l2_order, linf_order
                (orders blank where undefined)
  iters.csv     step, t, iterations, converged
  snapshots/    step_NNNNNNNN.txt, or .bin with a .json header
  summary.json  metadata, results, timings and any diagnostic
  plot.gp       gnuplot script for the CSV files

Exit codes: 0 success, 1 runtime failure, 2 configuration error.";

#[derive(Parser)]
#[command(name = "esav", version, about = "Energy-preserving integrators for Hamiltonian PDEs", after_help = OUTPUTS)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration.
    Run {
        config: PathBuf,
        /// Overrides `run.output_dir`.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Temporal convergence study over a list of step sizes.
    Converge {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        tau_list: Vec<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run several schemes on one configuration; `name` or `name:stages`.
    Compare {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        schemes: Vec<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the invariant checks.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn parse_scheme(spec: &str, default_stages: usize) -> Result<(SchemeKind, usize), Failure> {
    let (name, stages) = match spec.split_once(':') {
        Some((n, s)) => (
            n,
            s.parse()
                .map_err(|_| Failure::Config(format!("bad stage count in '{spec}'")))?,
        ),
        None => (spec, default_stages),
    };
    let kind = name
        .parse()
        .map_err(|e: Error| Failure::Config(e.to_string()))?;
    Ok((kind, stages))
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { config, output } => {
            let cfg = RunConfig::load(&config)?;
            let dir = output.unwrap_or_else(|| cfg.run.output_dir.clone());
            let problem = cfg.problem()?;
            let record = run_scheme(
                &problem,
                cfg.primary_scheme(),
                cfg.run.t_end,
                cfg.run.energy_every,
                &cfg.run.snapshot_times,
            )?;
            write_run(&dir, &cfg, &problem, &record)?;
            println!(
                "{}: {} steps, max modified-energy drift {:.3e}",
                record.label, record.steps_completed, record.max_energy_drift
            );
            if let Some(e) = record.final_error {
                println!("error at t = {}: L2 {:.4e}, Linf {:.4e}", e.t, e.l2, e.linf);
            }
            match record.failure {
                Some(f) => Err(Failure::Runtime(f)),
                None => Ok(()),
            }
        }
        Command::Converge {
            config,
            tau_list,
            output,
        } => {
            let cfg = RunConfig::load(&config)?;
            let dir = output.unwrap_or_else(|| cfg.run.output_dir.clone());
            let report = convergence_study(&cfg, &tau_list)?;
            write_study(&dir, &cfg, &cfg.problem()?, &report)?;
            println!(
                "{:>12} {:>12} {:>8} {:>12} {:>8}",
                "tau", "L2", "order", "Linf", "order"
            );
            let fmt = |o: Option<f64>| o.map_or(String::new(), |v| format!("{v:.4}"));
            for r in &report.errors {
                println!(
                    "{:>12.4e} {:>12.4e} {:>8} {:>12.4e} {:>8}",
                    r.tau,
                    r.l2_error,
                    fmt(r.l2_order),
                    r.linf_error,
                    fmt(r.linf_order)
                );
            }
            Ok(())
        }
        Command::Compare {
            config,
            schemes,
            output,
        } => {
            let cfg = RunConfig::load(&config)?;
            let dir = output.unwrap_or_else(|| cfg.run.output_dir.clone());
            let list = schemes
                .iter()
                .map(|s| parse_scheme(s, cfg.scheme.stages))
                .collect::<Result<Vec<_>, _>>()?;
            let records = compare_schemes(&cfg, &list)?;
            write_comparison(&dir, &cfg, &cfg.problem()?, &records)?;
            let mut failures = Vec::new();
            for r in &records {
                let err = r
                    .final_error
                    .map_or(String::from("-"), |e| format!("{:.4e}", e.l2));
                println!(
                    "{:<24} drift {:.3e}  L2 {}  max iterations {}  {:.2}s",
                    r.label,
                    r.max_energy_drift,
                    err,
                    r.max_iterations(),
                    r.cpu_seconds
                );
                if let Some(f) = &r.failure {
                    failures.push(format!("{}: {f}", r.label));
                }
            }
            if failures.is_empty() {
                Ok(())
            } else {
                Err(Failure::Runtime(failures.join("; ")))
            }
        }
        Command::Selftest { seed } => {
            let checks = run_selftest(seed)?;
            let mut failed = 0;
            for c in &checks {
                println!(
                    "{} {:<52} {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
                failed += usize::from(!c.passed);
            }
            if failed == 0 {
                Ok(())
            } else {
                Err(Failure::Runtime(format!("{failed} check(s) failed")))
            }
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
