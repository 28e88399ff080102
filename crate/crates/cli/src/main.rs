//! `vicon`: train, analyse and verify topographic mixture networks.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vicon::data::pnm::write_pgm;
use vicon::data::procedural_texture;
use vicon::experiment::{run_analyze, run_train};
use vicon::oracle::{run_suite, GradientPerturbation, ParamClass, VerifyOptions};
use vicon::{Error, ExperimentConfig};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "vicon", version, about = "Self-organising topographic mixture networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train from a config and write checkpoint, trace and analysis files.
    Train { config: PathBuf },
    /// Re-run the analyses of a saved checkpoint.
    Analyze {
        checkpoint: PathBuf,
        config: PathBuf,
        /// Write here instead of the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the optimised model against the brute-force oracles.
    Verify {
        /// Corrupt one analytic gradient component, e.g. `bias:2:1e-3`.
        #[arg(long, hide = true, value_parser = parse_perturbation)]
        perturb: Option<GradientPerturbation>,
    },
    /// Write a seeded procedural texture as a binary graymap.
    GenTexture {
        seed: u64,
        out: PathBuf,
        #[arg(long, default_value_t = 256)]
        size: usize,
        #[arg(long, default_value_t = 7.0)]
        correlation_length: f64,
    },
}

fn parse_perturbation(s: &str) -> Result<GradientPerturbation, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [class, index, delta] = parts[..] else {
        return Err("expected class:index:delta".into());
    };
    let class = match class {
        "weight" => ParamClass::Weight,
        "bias" => ParamClass::Bias,
        "reference" => ParamClass::Reference,
        other => return Err(format!("unknown parameter class `{other}`")),
    };
    Ok(GradientPerturbation {
        class,
        index: index.parse().map_err(|e| format!("index: {e}"))?,
        delta: delta.parse().map_err(|e| format!("delta: {e}"))?,
    })
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::NonFinite { .. } | Error::DegenerateResponse { .. } => EXIT_NUMERICAL,
        _ => EXIT_DATA,
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("VICON_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("VICON_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn config_base(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn run(command: Command) -> Result<u8, Error> {
    match command {
        Command::Train { config: path } => {
            let config = ExperimentConfig::load(&path)?;
            let outcome = run_train(&config, &config_base(&path), &mut |e| {
                println!("phase {} update {} objective {:.6}", e.phase + 1, e.update, e.mean_objective);
            })?;
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Analyze { checkpoint, config: path, out } => {
            let config = ExperimentConfig::load(&path)?;
            for f in run_analyze(&checkpoint, &config, &config_base(&path), out.as_deref())? {
                println!("wrote {}", f.display());
            }
        }
        Command::Verify { perturb } => {
            let started = std::time::Instant::now();
            let report = run_suite(&VerifyOptions { perturb })?;
            print!("{report}");
            println!("{:.1} s", started.elapsed().as_secs_f64());
            if !report.passed() {
                eprintln!("verification failed");
                return Ok(EXIT_NUMERICAL);
            }
        }
        Command::GenTexture { seed, out, size, correlation_length } => {
            if size == 0 || !(correlation_length > 0.0) {
                return Err(Error::Data("texture size and correlation length must be positive".into()));
            }
            write_pgm(&procedural_texture(size, size, correlation_length, seed), &out)?;
            println!("wrote {}", out.display());
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_USAGE);
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
