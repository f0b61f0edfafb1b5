use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use trotterlab::observables::TimeSeries;
use trotterlab_cli::report::{self, ReportOverrides};
use trotterlab_cli::{parse_config, run, write_outputs, CliError};

/// Trotterized lattice-model evolution with emulated NISQ noise.
#[derive(Parser)]
#[command(name = "trotterlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment; writes CSV series and a manifest.
    Run {
        config: PathBuf,
        /// Overrides `[output] prefix`.
        #[arg(long)]
        output: Option<String>,
    },
    /// Print the qubit Hamiltonian of the configured model.
    DumpHamiltonian { config: PathBuf },
    /// Gate counts all-to-all vs a topology.
    TranspileReport {
        config: PathBuf,
        #[arg(long)]
        topology: Option<String>,
        #[arg(long)]
        basis: Option<String>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Merge result CSVs into gnuplot-ready columns.
    Plotdata {
        /// `label=path.csv` or `path.csv` (label = file stem).
        inputs: Vec<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Per-point deviation of series A from reference B.
    Compare { a: PathBuf, b: PathBuf },
}

fn read_series(path: &std::path::Path) -> Result<TimeSeries, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    TimeSeries::from_csv(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("TROTTERLAB_THREADS") {
        let n: usize = v.parse().map_err(|_| CliError::Config(format!("TROTTERLAB_THREADS={v:?} is not a count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("TROTTERLAB_THREADS: {e}")))?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Run { config, output } => {
            let (cfg, raw) = parse_config(&config)?;
            let out = run(&cfg, &raw)?;
            let prefix = output.unwrap_or_else(|| cfg.output.prefix.clone());
            for p in write_outputs(&out, &prefix)? {
                println!("{}", p.display());
            }
        }
        Command::DumpHamiltonian { config } => {
            let (cfg, _) = parse_config(&config)?;
            print!("{}", report::dump_hamiltonian(&cfg)?);
        }
        Command::TranspileReport { config, topology, basis, steps, dt } => {
            let (cfg, _) = parse_config(&config)?;
            print!("{}", report::transpile_report(&cfg, &ReportOverrides { topology, basis, steps, dt })?);
        }
        Command::Plotdata { inputs, output } => {
            let series = inputs
                .iter()
                .map(|s| {
                    let (label, path) = match s.split_once('=') {
                        Some((l, p)) => (l.to_string(), PathBuf::from(p)),
                        None => {
                            let p = PathBuf::from(s);
                            let stem = p.file_stem().map_or("series".into(), |x| x.to_string_lossy().into_owned());
                            (stem, p)
                        }
                    };
                    Ok((label, read_series(&path)?))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            let text = report::plotdata(&series)?;
            match output {
                Some(p) => std::fs::write(p, text)?,
                None => print!("{text}"),
            }
        }
        Command::Compare { a, b } => {
            let d = report::compare(&read_series(&a)?, &read_series(&b)?)?;
            print!("{}", d.to_report());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
