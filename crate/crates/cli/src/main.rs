use std::path::PathBuf;
use std::process::ExitCode;

use binldp_cli::{
    allocation_record, cmd_allocate, cmd_selftest, cmd_sweep, cmd_train, Axis, CliError, SweepSpec, EXIT_OK,
    EXIT_RUNTIME,
};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "binldp", version, about = "Private quantized SGD over a multiple-access channel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the allocation, train, write per-round CSV and a JSON summary.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Repeat training along one axis and write aggregated CSVs.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        axis: Axis,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the optimal allocation for a config.
    Allocate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run quick invariant checks.
    Selftest,
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Train { config, out, seed } => {
            let s = cmd_train(&config, &out, seed)?;
            println!("final loss {} (gap {}), epsilon {}", s.final_loss, s.final_gap, s.epsilon);
            println!("levels {:?} trials {:?}", s.levels, s.trials);
            println!("wrote {}", s.csv.display());
        }
        Command::Sweep {
            config,
            out,
            axis,
            values,
            repeats,
            seed,
        } => {
            let spec = SweepSpec::new(axis, values, repeats)?;
            let (result, files) = cmd_sweep(&config, &spec, &out, seed)?;
            for p in &result.points {
                let q = p.final_loss();
                println!(
                    "{} = {}: median final loss {} [{}, {}], {} failed",
                    axis,
                    p.value,
                    q.median,
                    q.q1,
                    q.q3,
                    p.failures()
                );
            }
            println!("wrote {}", files.points.display());
        }
        Command::Allocate { config, out, seed } => {
            let a = cmd_allocate(&config, out.as_deref(), seed)?;
            print!("{}", allocation_record(&a.allocation));
            if let Some(p) = a.csv {
                println!("wrote {}", p.display());
            }
        }
        Command::Selftest => {
            let lines = cmd_selftest();
            for l in &lines {
                println!("{} {}: {}", if l.passed { "PASS" } else { "FAIL" }, l.name, l.detail);
            }
            if lines.iter().any(|l| !l.passed) {
                return Ok(EXIT_RUNTIME);
            }
        }
    }
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
