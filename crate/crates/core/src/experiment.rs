//! End-to-end runs driven by an [`ExperimentConfig`]: train, then write the
//! checkpoint, objective trace and every applicable analysis artifact.
//!
//! Three independent random streams derive from `run.seed`: parameter
//! initialisation, the training data and the held-out analysis data.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{
    dominance_map_2d, montage, ocularity_profile_about, reconstruct, reconstruction_stats, stripe_stats, triptych,
    Montage,
};
use crate::checkpoint;
use crate::config::{DataConfig, ExperimentConfig};
use crate::data::pnm::{load_pgm, write_pgm, write_ppm, GrayImage};
use crate::data::{procedural_texture, SampleSource, SyntheticRetinaSource, TexturePatchSource};
use crate::error::{Error, Result};
use crate::network::{NetworkParams, Sample};
use crate::topology::Topology;
use crate::trainer::{train, TraceEntry, TrainReport, TrainerState};

pub const CHECKPOINT_FILE: &str = "network.vicn";
pub const TRACE_FILE: &str = "trace.csv";
pub const CONFIG_FILE: &str = "config.cfg";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const OCULARITY_FILE: &str = "ocularity.csv";
pub const DOMINANCE_FILE: &str = "dominance.pgm";
pub const RECONSTRUCTION_FILE: &str = "reconstruction.pgm";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Stream {
    Init = 0,
    Training = 1,
    HeldOut = 2,
}

fn stream_seed(seed: u64, stream: Stream) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng.gen()
}

/// Texture image named by the config, loaded or generated.
fn texture(config: &ExperimentConfig, base: &Path) -> Result<Option<GrayImage>> {
    Ok(match &config.data {
        DataConfig::Synthetic => None,
        DataConfig::Texture { path, .. } => Some(load_pgm(ExperimentConfig::resolve(base, path))?),
        DataConfig::Procedural {
            seed,
            size,
            correlation_length,
            ..
        } => Some(procedural_texture(size.cols, size.rows, *correlation_length, *seed)),
    })
}

fn source(config: &ExperimentConfig, image: Option<&GrayImage>, seed: u64) -> Result<Box<dyn SampleSource<f64>>> {
    let spec = &config.topology;
    Ok(match (&config.data, image) {
        (DataConfig::Texture { pairing, .. } | DataConfig::Procedural { pairing, .. }, Some(img)) => Box::new(
            TexturePatchSource::new(img.clone(), spec.retina, spec.num_retinae, *pairing, seed)?,
        ),
        _ => Box::new(SyntheticRetinaSource::new(spec.retina.len(), seed)),
    })
}

/// Everything a training run produced.
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub topology: Topology<f64>,
    pub params: NetworkParams<f64>,
    pub report: TrainReport,
    pub files: Vec<PathBuf>,
}

fn output_dir(config: &ExperimentConfig, base: &Path) -> Result<PathBuf> {
    let dir = ExperimentConfig::resolve(base, &config.output_dir);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

fn write(path: PathBuf, contents: impl AsRef<[u8]>, files: &mut Vec<PathBuf>) -> Result<()> {
    std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    files.push(path);
    Ok(())
}

/// Trains as configured and writes all artifacts into the output directory.
///
/// `base` is the folder relative paths in the config are resolved against.
pub fn run_train(
    config: &ExperimentConfig,
    base: &Path,
    on_window: &mut dyn FnMut(&TraceEntry),
) -> Result<TrainOutcome> {
    let dir = output_dir(config, base)?;
    let image = texture(config, base)?;
    let mut topo = Topology::build(config.topology.clone())?;
    let mut init_rng = ChaCha8Rng::seed_from_u64(stream_seed(config.seed, Stream::Init));
    let mut params = NetworkParams::random(&topo, &config.init, &mut init_rng);
    let mut data = source(config, image.as_ref(), stream_seed(config.seed, Stream::Training))?;
    let first_step = config.schedule.phases.first().map_or(0.01, |p| p.step_size);
    let mut state = TrainerState::new(first_step, config.seed);
    let report = train(
        &mut params,
        &mut topo,
        &config.schedule,
        data.as_mut(),
        &mut state,
        config.log_interval,
        on_window,
    )?;

    let mut files = Vec::new();
    checkpoint::save(dir.join(CHECKPOINT_FILE), &topo, &params, state.updates_done as u64)?;
    files.push(dir.join(CHECKPOINT_FILE));
    let mut trace = String::from("phase,update,mean_objective\n");
    for e in &report.trace {
        let _ = writeln!(trace, "{},{},{}", e.phase + 1, e.update, e.mean_objective);
    }
    write(dir.join(TRACE_FILE), trace, &mut files)?;
    write(dir.join(CONFIG_FILE), config.serialize(), &mut files)?;
    files.extend(write_analysis(config, image.as_ref(), &topo, &params, &dir)?);
    Ok(TrainOutcome {
        topology: topo,
        params,
        report,
        files,
    })
}

/// Re-emits the analysis artifacts of a saved network.
///
/// The checkpoint must share the config's topology structure. Output goes to
/// `out` if given, otherwise to the config's output directory.
pub fn run_analyze(ckpt: &Path, config: &ExperimentConfig, base: &Path, out: Option<&Path>) -> Result<Vec<PathBuf>> {
    let saved = checkpoint::load_matching(ckpt, &config.topology)?;
    let topo = Topology::build(saved.topology)?;
    let dir = match out {
        Some(d) => {
            std::fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
            d.to_path_buf()
        }
        None => output_dir(config, base)?,
    };
    let image = texture(config, base)?;
    write_analysis(config, image.as_ref(), &topo, &saved.params, &dir)
}

/// Held-out samples for the reconstruction statistics and the triptych.
pub fn held_out_samples(config: &ExperimentConfig, image: Option<&GrayImage>) -> Result<Vec<Sample<f64>>> {
    let mut src = source(config, image, stream_seed(config.seed, Stream::HeldOut))?;
    (0..config.held_out).map(|_| src.next_sample()).collect()
}

fn write_analysis(
    config: &ExperimentConfig,
    image: Option<&GrayImage>,
    topo: &Topology<f64>,
    params: &NetworkParams<f64>,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    let mut summary = String::new();
    let spec = topo.spec();
    let floor = source(config, image, 0)?.brightness_floor();
    if spec.num_retinae == 2 {
        let profile = ocularity_profile_about(params, topo, floor)?;
        write(dir.join(OCULARITY_FILE), profile.to_csv(), &mut files)?;
        if spec.grid.is_line() {
            if let Ok(stats) = stripe_stats(&profile) {
                match stats.dominant_period {
                    Some(p) => writeln!(summary, "stripe_period = {p}"),
                    None => writeln!(summary, "stripe_period = none"),
                }
                .ok();
                let _ = writeln!(summary, "antiphase_corr = {}", stats.antiphase_corr);
                let _ = writeln!(summary, "ocularity_amplitude = {}", stats.amplitude);
            }
        } else {
            let map = dominance_map_2d(params, topo, floor)?;
            let path = dir.join(DOMINANCE_FILE);
            write_pgm(&map.to_image(), &path)?;
            files.push(path);
            let _ = writeln!(summary, "left_fraction = {}", map.left_fraction());
            match map.label_correlation_length() {
                Some(l) => writeln!(summary, "label_correlation_length = {l}"),
                None => writeln!(summary, "label_correlation_length = none"),
            }
            .ok();
        }
    }
    if !spec.grid.is_line() {
        match montage(params, topo, config.montage)? {
            Montage::Gray(img) => {
                let path = dir.join("montage.pgm");
                write_pgm(&img, &path)?;
                files.push(path);
            }
            Montage::Rgb(img) => {
                let path = dir.join("montage.ppm");
                write_ppm(&img, &path)?;
                files.push(path);
            }
        }
    }
    let samples = held_out_samples(config, image)?;
    let stats = reconstruction_stats(params, topo, &samples)?;
    let _ = writeln!(summary, "reconstruction_mse = {}", stats.mse);
    let _ = writeln!(summary, "zero_predictor_mse = {}", stats.baseline);
    let _ = writeln!(summary, "mean_max_posterior = {}", stats.mean_max_posterior);
    let rec = reconstruct(params, topo, &samples[0])?;
    let path = dir.join(RECONSTRUCTION_FILE);
    write_pgm(&triptych(topo, &samples[0], &rec.posterior, &rec.image), &path)?;
    files.push(path);
    write(dir.join(SUMMARY_FILE), summary, &mut files)?;
    Ok(files)
}
