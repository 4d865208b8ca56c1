use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use horofill::bootstrap::bootstrap;
use horofill::oracle::{brute_force_area, CellComplex, EdgeLoop};
use horofill::runner::{fit_records, load_config, read_csv, run_config, RunOptions, OUT_DIR_ENV};
use horofill::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "horofill", version, about = "Loop-filling experiments on flats, traces and polytope tubes")]
struct Cli {
    /// Run seed; overrides the config's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Store every partition and its loop under <out-dir>/partitions.
    #[arg(long, global = true)]
    keep_partitions: bool,
    /// Output directory.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every scenario of a JSON config; writes results.csv and one SVG per scenario.
    Run { config: PathBuf },
    /// Fit log-log exponents to a results CSV.
    Fit { csv: PathBuf },
    /// Minimal filling area of an edge loop in a small cell complex.
    Oracle { mesh_file: PathBuf, loop_file: PathBuf },
    /// Iterate the exponent recurrence.
    Bootstrap {
        #[arg(long, default_value_t = 1.0)]
        eps0: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config } => {
            let cfg = load_config(&config)?;
            let opts = RunOptions { seed: cli.seed, jobs: cli.jobs, keep_partitions: cli.keep_partitions, out_dir: cli.out_dir };
            let summary = run_config(&cfg, &opts)?;
            println!("wrote {} rows to {}", summary.records.len(), summary.csv.display());
            for f in &summary.fits {
                match (&f.fit, &f.note) {
                    (Some(fit), _) => println!("{}: slope {:.4} [{:.4}, {:.4}]", f.scenario, fit.slope, fit.band.0, fit.band.1),
                    (None, Some(n)) => println!("{}: no fit ({n})", f.scenario),
                    (None, None) => println!("{}: no fit", f.scenario),
                }
            }
            for p in &summary.plots {
                println!("plot {}", p.display());
            }
            Ok(())
        }
        Command::Fit { csv } => {
            let records = read_csv(&csv)?;
            for f in fit_records(&records) {
                match f.fit {
                    Some(fit) => {
                        println!("{}: slope {:.4} +- {:.4} (band [{:.4}, {:.4}])", f.scenario, fit.slope, 2.0 * fit.stderr, fit.band.0, fit.band.1);
                        let res: Vec<String> = fit.lengths.iter().zip(&fit.residuals).map(|(l, r)| format!("{l}:{r:+.4}")).collect();
                        println!("  residuals {}", res.join(" "));
                    }
                    None => println!("{}: no fit ({})", f.scenario, f.note.unwrap_or_default()),
                }
            }
            Ok(())
        }
        Command::Oracle { mesh_file, loop_file } => {
            let complex = CellComplex::from_file(&mesh_file)?;
            let text = std::fs::read_to_string(&loop_file).map_err(|e| Error::Io(format!("{}: {e}", loop_file.display())))?;
            let lp: EdgeLoop = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", loop_file.display())))?;
            println!("{}", brute_force_area(&complex, &lp)?);
            Ok(())
        }
        Command::Bootstrap { eps0, tol } => {
            let b = bootstrap(eps0, tol)?;
            println!("steps {}", b.steps);
            if let Some(last) = b.sequence.last() {
                println!("final {last:e}");
            }
            for (k, e) in b.sequence.iter().take(8).enumerate() {
                println!("eps[{k}] = {e}");
            }
            Ok(())
        }
    }
}
