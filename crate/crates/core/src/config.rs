//! Experiment description in flat `section.key = value` text.
//!
//! ```text
//! # 1-D stripes
//! topology.grid = 30
//! topology.retina = 30
//! topology.retinae = 2
//! topology.receptive_field = 9
//! topology.inhibition = 5
//! topology.leakage = 5
//! schedule.phase1 = 2000, 0.01, 1
//! data.source = synthetic
//! run.seed = 1
//! output.dir = runs/stripes1d
//! ```
//!
//! Extents are `N` for a line or `RxC` for a grid; a leakage width is `s` or
//! `sr x sc`. Phases are `updates, step size, leakage width` and run in order of
//! their number. Relative paths are resolved against the config file's folder.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::analysis::MontageSource;
use crate::data::Pairing;
use crate::error::{Error, Result};
use crate::network::InitScheme;
use crate::topology::{Dims, TopologySpec};
use crate::trainer::{Phase, Schedule};

#[derive(Clone, Debug, PartialEq)]
pub enum DataConfig {
    /// Featureless two-retina brightness pairs.
    Synthetic,
    /// Patches of a graymap on disk.
    Texture { path: PathBuf, pairing: Pairing },
    /// Patches of a seeded procedural texture.
    Procedural {
        seed: u64,
        size: Dims,
        correlation_length: f64,
        pairing: Pairing,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub topology: TopologySpec,
    pub schedule: Schedule,
    pub data: DataConfig,
    pub init: InitScheme,
    pub seed: u64,
    pub log_interval: usize,
    pub output_dir: PathBuf,
    pub montage: MontageSource,
    /// Held-out samples drawn for reconstruction statistics.
    pub held_out: usize,
}

fn parse_dims(s: &str) -> Option<Dims> {
    match s.split_once(['x', 'X']) {
        Some((r, c)) => Some(Dims::new(r.trim().parse().ok()?, c.trim().parse().ok()?)),
        None => Some(Dims::line(s.trim().parse().ok()?)),
    }
}

fn parse_sigma(s: &str) -> Option<(f64, f64)> {
    match s.split_once(['x', 'X']) {
        Some((r, c)) => Some((r.trim().parse().ok()?, c.trim().parse().ok()?)),
        None => {
            let v = s.trim().parse().ok()?;
            Some((v, v))
        }
    }
}

fn format_sigma((r, c): (f64, f64)) -> String {
    if r == c {
        format!("{r}")
    } else {
        format!("{r}x{c}")
    }
}

fn parse_pairing(s: &str) -> Option<Pairing> {
    match s {
        "independent" => Some(Pairing::Independent),
        "identical" => Some(Pairing::Identical),
        _ => None,
    }
}

fn pairing_name(p: Pairing) -> &'static str {
    match p {
        Pairing::Independent => "independent",
        Pairing::Identical => "identical",
    }
}

/// Key/value pairs with the line each came from; values are consumed as read.
struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.map.remove(key)
    }

    fn get<V>(&mut self, key: &str, what: &str, parse: impl Fn(&str) -> Option<V>) -> Result<Option<V>> {
        match self.take(key) {
            None => Ok(None),
            Some((line, raw)) => parse(&raw).map(Some).ok_or_else(|| Error::Config {
                line,
                message: format!("{key} = {raw}: expected {what}"),
            }),
        }
    }

    fn require<V>(&mut self, key: &str, what: &str, parse: impl Fn(&str) -> Option<V>) -> Result<V> {
        self.get(key, what, parse)?
            .ok_or_else(|| Error::ConfigValue(format!("missing {key}")))
    }
}

fn number<V: std::str::FromStr>(s: &str) -> Option<V> {
    s.parse().ok()
}

fn boolean(s: &str) -> Option<bool> {
    match s {
        "true" | "yes" | "1" => Some(true),
        "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

fn phase(s: &str) -> Option<Phase> {
    let mut parts = s.split(',').map(str::trim);
    let updates = parts.next()?.parse().ok()?;
    let step_size = parts.next()?.parse().ok()?;
    let leakage_sigma = parse_sigma(parts.next()?)?;
    parts.next().is_none().then_some(Phase {
        updates,
        step_size,
        leakage_sigma,
    })
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
                line,
                message: format!("expected `section.key = value`, found `{content}`"),
            })?;
            let key = key.trim();
            if !key.contains('.') {
                return Err(Error::Config {
                    line,
                    message: format!("key `{key}` has no section"),
                });
            }
            if map.insert(key.to_string(), (line, value.trim().to_string())).is_some() {
                return Err(Error::Config {
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
        }
        let mut e = Entries { map };

        let dims = "an extent like 9 or 3x3";
        let grid = e.require("topology.grid", dims, parse_dims)?;
        let topology = TopologySpec {
            grid,
            retina: e.get("topology.retina", dims, parse_dims)?.unwrap_or(grid),
            num_retinae: e.get("topology.retinae", "1 or 2", number)?.unwrap_or(1),
            receptive_field: e.require("topology.receptive_field", dims, parse_dims)?,
            inhibition: e.require("topology.inhibition", dims, parse_dims)?,
            leakage: e.require("topology.leakage", dims, parse_dims)?,
            leakage_sigma: e
                .get("topology.leakage_sigma", "a width like 1 or 1x0.5", parse_sigma)?
                .unwrap_or((1.0, 1.0)),
            wrap: e.get("topology.wrap", "true or false", boolean)?.unwrap_or(false),
        };

        let mut numbered: Vec<(u32, usize, String)> = Vec::new();
        let phase_keys: Vec<String> = e.map.keys().filter(|k| k.starts_with("schedule.phase")).cloned().collect();
        for key in phase_keys {
            let (line, _) = e.map[&key];
            let n: u32 = key["schedule.phase".len()..].parse().map_err(|_| Error::Config {
                line,
                message: format!("`{key}` should be schedule.phaseN"),
            })?;
            numbered.push((n, line, key));
        }
        numbered.sort();
        let mut phases = Vec::new();
        for (_, _, key) in &numbered {
            phases.push(e.require(key, "updates, step size, leakage width", phase)?);
        }
        let schedule = Schedule { phases };

        let pairing = e
            .get("data.pairing", "independent or identical", parse_pairing)?
            .unwrap_or(Pairing::Independent);
        let source = e.require("data.source", "synthetic, texture or procedural", |s| {
            ["synthetic", "texture", "procedural"].contains(&s).then(|| s.to_string())
        })?;
        let data = match source.as_str() {
            "synthetic" => DataConfig::Synthetic,
            "texture" => DataConfig::Texture {
                path: e.require("data.path", "a file path", |s| Some(PathBuf::from(s)))?,
                pairing,
            },
            _ => DataConfig::Procedural {
                seed: e.get("data.texture_seed", "an integer", number)?.unwrap_or(0),
                size: e.get("data.texture_size", dims, parse_dims)?.unwrap_or(Dims::square(256)),
                correlation_length: e.get("data.correlation_length", "a number", number)?.unwrap_or(7.0),
                pairing,
            },
        };

        let defaults = InitScheme::default();
        let init = InitScheme {
            weight_scale: e.get("init.weight_scale", "a number", number)?.unwrap_or(defaults.weight_scale),
            bias: e.get("init.bias", "a number", number)?.unwrap_or(defaults.bias),
            reference_scale: e
                .get("init.reference_scale", "a number", number)?
                .unwrap_or(defaults.reference_scale),
        };
        let montage = e
            .get("analysis.montage", "weights or references", |s| match s {
                "weights" => Some(MontageSource::Weights),
                "references" => Some(MontageSource::References),
                _ => None,
            })?
            .unwrap_or_default();
        let config = ExperimentConfig {
            topology,
            schedule,
            data,
            init,
            seed: e.get("run.seed", "an integer", number)?.unwrap_or(0),
            log_interval: e.get("run.log_interval", "an integer", number)?.unwrap_or(100),
            output_dir: e.require("output.dir", "a directory", |s| Some(PathBuf::from(s)))?,
            montage,
            held_out: e.get("analysis.held_out", "an integer", number)?.unwrap_or(200),
        };
        if let Some((key, (line, _))) = e.map.into_iter().next() {
            return Err(Error::Config {
                line,
                message: format!("unknown key `{key}`"),
            });
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    fn validate(&self) -> Result<()> {
        crate::topology::Topology::<f64>::build(self.topology.clone())?;
        self.schedule.validate()?;
        let synthetic = matches!(self.data, DataConfig::Synthetic);
        if synthetic && self.topology.num_retinae != 2 {
            return Err(Error::ConfigValue("synthetic data needs topology.retinae = 2".into()));
        }
        if self.held_out == 0 {
            return Err(Error::ConfigValue("analysis.held_out must be positive".into()));
        }
        Ok(())
    }

    /// Canonical text form; parsing it gives back an equal config.
    pub fn serialize(&self) -> String {
        let t = &self.topology;
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        put("topology.grid", t.grid.to_string());
        put("topology.retina", t.retina.to_string());
        put("topology.retinae", t.num_retinae.to_string());
        put("topology.receptive_field", t.receptive_field.to_string());
        put("topology.inhibition", t.inhibition.to_string());
        put("topology.leakage", t.leakage.to_string());
        put("topology.leakage_sigma", format_sigma(t.leakage_sigma));
        put("topology.wrap", t.wrap.to_string());
        for (i, p) in self.schedule.phases.iter().enumerate() {
            put(
                &format!("schedule.phase{}", i + 1),
                format!("{}, {}, {}", p.updates, p.step_size, format_sigma(p.leakage_sigma)),
            );
        }
        match &self.data {
            DataConfig::Synthetic => put("data.source", "synthetic".into()),
            DataConfig::Texture { path, pairing } => {
                put("data.source", "texture".into());
                put("data.path", path.display().to_string());
                put("data.pairing", pairing_name(*pairing).into());
            }
            DataConfig::Procedural {
                seed,
                size,
                correlation_length,
                pairing,
            } => {
                put("data.source", "procedural".into());
                put("data.texture_seed", seed.to_string());
                put("data.texture_size", format!("{}x{}", size.rows, size.cols));
                put("data.correlation_length", correlation_length.to_string());
                put("data.pairing", pairing_name(*pairing).into());
            }
        }
        put("init.weight_scale", self.init.weight_scale.to_string());
        put("init.bias", self.init.bias.to_string());
        put("init.reference_scale", self.init.reference_scale.to_string());
        put("run.seed", self.seed.to_string());
        put("run.log_interval", self.log_interval.to_string());
        put("output.dir", self.output_dir.display().to_string());
        put(
            "analysis.montage",
            match self.montage {
                MontageSource::Weights => "weights",
                MontageSource::References => "references",
            }
            .into(),
        );
        put("analysis.held_out", self.held_out.to_string());
        out
    }

    /// Joins a config-relative path onto the config file's folder.
    pub fn resolve(base: &Path, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            base.join(path)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const STRIPES: &str = "\
# 1-D stripes
topology.grid = 30
topology.retina = 30
topology.retinae = 2
topology.receptive_field = 9
topology.inhibition = 5
topology.leakage = 5
topology.leakage_sigma = 1
schedule.phase1 = 2000, 0.01, 1
schedule.phase2 = 2000, 0.01, 0.5   # narrower leakage
data.source = synthetic
run.seed = 3
output.dir = runs/stripes1d
";

    #[test]
    fn parses_stripe_experiment() {
        let c = ExperimentConfig::parse(STRIPES).unwrap();
        assert_eq!(c.topology, TopologySpec::stripes_1d());
        assert_eq!(c.schedule.phases.len(), 2);
        assert_eq!(c.schedule.phases[1].leakage_sigma, (0.5, 0.5));
        assert_eq!(c.data, DataConfig::Synthetic);
        assert_eq!(c.seed, 3);
        assert_eq!(c.init, InitScheme::default());
    }

    #[test]
    fn phases_run_in_numeric_order() {
        let text = STRIPES.replace("schedule.phase2", "schedule.phase10");
        let c = ExperimentConfig::parse(&format!("{text}schedule.phase9 = 5, 0.1, 2\n")).unwrap();
        let sigmas: Vec<f64> = c.schedule.phases.iter().map(|p| p.leakage_sigma.0).collect();
        assert_eq!(sigmas, vec![1.0, 2.0, 0.5]);
    }

    #[test]
    fn errors_name_the_line() {
        let err = ExperimentConfig::parse(&STRIPES.replace("topology.inhibition = 5", "topology.inhibition = five"))
            .unwrap_err();
        assert!(matches!(err, Error::Config { line: 6, .. }), "{err}");
        let err = ExperimentConfig::parse(&format!("{STRIPES}run.sede = 4\n")).unwrap_err();
        assert!(err.to_string().contains("unknown key `run.sede`"), "{err}");
        let err = ExperimentConfig::parse(&format!("{STRIPES}run.seed = 4\n")).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
        let err = ExperimentConfig::parse(&STRIPES.replace("output.dir = runs/stripes1d", "")).unwrap_err();
        assert!(err.to_string().contains("missing output.dir"), "{err}");
        let err = ExperimentConfig::parse(&STRIPES.replace("topology.leakage = 5", "topology.leakage = 4"))
            .unwrap_err();
        assert!(matches!(err, Error::Topology(_)), "{err}");
    }

    #[test]
    fn two_dimensional_round_trip() {
        let text = "\
topology.grid = 16x16
topology.receptive_field = 9x9
topology.inhibition = 5x5
topology.leakage = 3x3
topology.leakage_sigma = 1x0.5
topology.wrap = true
schedule.phase1 = 8000, 0.01, 1
data.source = procedural
data.texture_seed = 9
data.pairing = identical
analysis.montage = references
output.dir = out
";
        let c = ExperimentConfig::parse(text).unwrap();
        assert_eq!(c.topology.retina, Dims::square(16));
        assert_eq!(c.topology.leakage_sigma, (1.0, 0.5));
        assert_eq!(c.montage, MontageSource::References);
        let again = ExperimentConfig::parse(&c.serialize()).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.serialize(), c.serialize());
    }

    #[test]
    fn synthetic_data_needs_two_retinae() {
        let err = ExperimentConfig::parse(&STRIPES.replace("topology.retinae = 2", "topology.retinae = 1")).unwrap_err();
        assert!(matches!(err, Error::ConfigValue(_)));
    }

    proptest! {
        #[test]
        fn serialize_then_parse_is_identity(
            seed in any::<u64>(),
            updates in proptest::collection::vec(1usize..100_000, 0..4),
            step in 1e-6f64..1.0,
            sigma in 0.01f64..10.0,
            wrap in any::<bool>(),
            scale in 0.0f64..1.0,
        ) {
            let mut c = ExperimentConfig::parse(STRIPES).unwrap();
            c.seed = seed;
            c.topology.wrap = wrap;
            c.init.reference_scale = scale;
            c.schedule.phases = updates
                .iter()
                .map(|&u| Phase { updates: u, step_size: step, leakage_sigma: (sigma, sigma * 0.5) })
                .collect();
            c.data = DataConfig::Texture { path: PathBuf::from("tex/brodatz d1.pgm"), pairing: Pairing::Identical };
            prop_assert_eq!(ExperimentConfig::parse(&c.serialize()).unwrap(), c);
        }
    }
}
