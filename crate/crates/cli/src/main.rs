use std::path::PathBuf;
use std::process::ExitCode;

use angwalk::criteria::{self, Overrides};
use angwalk::examples::{reproduce_example, ExampleOverrides};
use angwalk::experiment::{run_experiment, ExperimentConfig};
use angwalk::plot::{emit_plot, from_csv};
use angwalk::pruitt::{pruitt_csv, pruitt_diagnostic, u_sequence, TailFunction, DEFAULT_K};
use angwalk::sphere_geom::{s_boundary, s_hull, UnitVec};
use angwalk::Error;
use clap::{Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(name = "angwalk", version, about = "Angular asymptotics of random walks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config.
    Simulate {
        config: PathBuf,
        /// Write artifacts here instead of the config's output_dir.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Reproduce a canonical example and report PASS/FAIL.
    Reproduce {
        /// One of ex-10.1, ex-10.2, ex-10.3, ex-10.4, heavytails-demo.
        name: String,
        #[arg(long)]
        steps: Option<u64>,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        dimension: Option<usize>,
    },
    /// Run acceptance criteria (all of them when none are named).
    Accept {
        ids: Vec<u32>,
        #[arg(long)]
        steps: Option<u64>,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Dyadic hazard sequence and summability diagnostic for a tail function.
    Pruitt {
        /// poly:ALPHA, log_tail or stretched_exp:BETA.
        tail: String,
        #[arg(long = "K", default_value_t = DEFAULT_K)]
        k: usize,
    },
    /// s-hull of the directions in a JSON array of vectors.
    Shull { points: PathBuf },
    /// Render a trajectory, direction or hull CSV as SVG.
    Plot {
        csv: PathBuf,
        #[arg(short = 'o', long)]
        output: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Observer { .. } | Error::InvalidState(_) => Failure::Runtime(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<bool, Failure> {
    match cli.command {
        Command::Simulate {
            config,
            output_dir,
            workers,
        } => {
            let mut cfg = ExperimentConfig::from_json(&read(&config)?)?;
            if let Some(dir) = output_dir {
                cfg.output_dir = dir;
            }
            if workers.is_some() {
                cfg.workers = workers;
                cfg.validate()?;
            }
            let out = run_experiment(&cfg)?;
            for f in &out.files {
                println!("{}", f.display());
            }
            Ok(true)
        }
        Command::Reproduce {
            name,
            steps,
            runs,
            seed,
            alpha,
            dimension,
        } => {
            let o = ExampleOverrides {
                scale: Overrides { runs, steps, seed },
                alpha,
                dimension,
            };
            let report = reproduce_example(&name, &o)?;
            print!("{}", report.to_text());
            Ok(report.passed)
        }
        Command::Accept { ids, steps, runs, seed } => {
            let ids = if ids.is_empty() { criteria::CRITERIA.to_vec() } else { ids };
            let o = Overrides { runs, steps, seed };
            let mut all = true;
            for id in ids {
                let outcome = criteria::run_criterion(id, &o)?;
                println!("{}", outcome.line());
                all &= outcome.passed;
            }
            Ok(all)
        }
        Command::Pruitt { tail, k } => {
            let tail: TailFunction = tail.parse()?;
            let u = u_sequence(&tail, k)?;
            let diag = pruitt_diagnostic(&u);
            print!("{}", pruitt_csv(&tail, &u, &diag));
            eprintln!("verdict: {}", diag.verdict.as_str());
            Ok(true)
        }
        Command::Shull { points } => {
            let raw: Vec<Vec<f64>> =
                serde_json::from_str(&read(&points)?).map_err(|e| Failure::Usage(format!("points: {e}")))?;
            let gens = raw
                .into_iter()
                .enumerate()
                .map(|(i, v)| {
                    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if !(n > 0.0 && n.is_finite()) {
                        return Err(Failure::Usage(format!("point {i} has no direction")));
                    }
                    Ok(UnitVec::new(v.iter().map(|x| x / n).collect())?)
                })
                .collect::<Result<Vec<_>, Failure>>()?;
            let h = s_hull(&gens)?;
            let mut out = json!({
                "dimension": h.dimension(),
                "full_sphere": h.is_full(),
                "origin_in_hull": h.origin_in_hull(),
            });
            if let Some(arcs) = h.arcs() {
                if h.dimension() == 2 {
                    out["arcs"] = serde_json::to_value(arcs).map_err(|e| Failure::Runtime(e.to_string()))?;
                }
            }
            if let Ok(b) = s_boundary(&h) {
                out["boundary"] = serde_json::to_value(b).map_err(|e| Failure::Runtime(e.to_string()))?;
            }
            println!("{}", serde_json::to_string_pretty(&out).map_err(|e| Failure::Runtime(e.to_string()))?);
            Ok(true)
        }
        Command::Plot { csv, output } => {
            let data = from_csv(&read(&csv)?)?;
            emit_plot(&data, &output).map_err(|e| Failure::Runtime(format!("{}: {e}", output.display())))?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
