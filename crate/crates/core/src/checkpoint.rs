//! Versioned binary snapshot of a network.
//!
//! Layout, all little-endian: magic `VICN`, `u32` version, the topology
//! (`u32` rows and cols of grid, retina, receptive field, inhibition and
//! leakage windows, `u32` retina count, two `f64` leakage widths, `u8` wrap
//! flag), `u64` update count, then every weight, every bias and every
//! reference component as `f64`, each block in neuron-major order.

use std::path::Path;

use crate::error::{Error, Result};
use crate::network::NetworkParams;
use crate::scalar::Scalar;
use crate::topology::{Dims, Topology, TopologySpec};

pub const MAGIC: &[u8; 4] = b"VICN";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub topology: TopologySpec,
    pub updates_done: u64,
    pub params: NetworkParams<f64>,
}

fn put_dims(out: &mut Vec<u8>, d: Dims) {
    out.extend_from_slice(&(d.rows as u32).to_le_bytes());
    out.extend_from_slice(&(d.cols as u32).to_le_bytes());
}

pub fn encode<T: Scalar>(topo: &Topology<T>, params: &NetworkParams<T>, updates_done: u64) -> Vec<u8> {
    let spec = topo.spec();
    let mut out = Vec::with_capacity(80 + 8 * (params.weights.len() * 2 + params.biases.len()));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for d in [spec.grid, spec.retina, spec.receptive_field, spec.inhibition, spec.leakage] {
        put_dims(&mut out, d);
    }
    out.extend_from_slice(&(spec.num_retinae as u32).to_le_bytes());
    out.extend_from_slice(&spec.leakage_sigma.0.to_le_bytes());
    out.extend_from_slice(&spec.leakage_sigma.1.to_le_bytes());
    out.push(spec.wrap as u8);
    out.extend_from_slice(&updates_done.to_le_bytes());
    for v in params.weights.iter().chain(&params.biases).chain(&params.references) {
        out.extend_from_slice(&v.as_f64().to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.at + N;
        let chunk = self
            .bytes
            .get(self.at..end)
            .ok_or_else(|| Error::Checkpoint(format!("truncated at byte {}", self.at)))?;
        self.at = end;
        Ok(chunk.try_into().expect("slice has length N"))
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take()?) as usize)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }

    fn dims(&mut self) -> Result<Dims> {
        Ok(Dims::new(self.u32()?, self.u32()?))
    }
}

pub fn decode(bytes: &[u8]) -> Result<Checkpoint> {
    let mut r = Reader { bytes, at: 0 };
    if &r.take::<4>()? != MAGIC {
        return Err(Error::Checkpoint("not a checkpoint (bad magic)".into()));
    }
    let version = r.u32()? as u32;
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let (grid, retina, receptive_field, inhibition, leakage) = (r.dims()?, r.dims()?, r.dims()?, r.dims()?, r.dims()?);
    let num_retinae = r.u32()?;
    let leakage_sigma = (r.f64()?, r.f64()?);
    let wrap = match r.take::<1>()?[0] {
        0 => false,
        1 => true,
        other => return Err(Error::Checkpoint(format!("bad wrap flag {other}"))),
    };
    let updates_done = u64::from_le_bytes(r.take()?);
    let topology = TopologySpec {
        grid,
        retina,
        num_retinae,
        receptive_field,
        inhibition,
        leakage,
        leakage_sigma,
        wrap,
    };
    let topo = Topology::<f64>::build(topology.clone())?;
    let n_w = topo.rf_offsets()[topo.neurons()];
    let expected = r.at + 8 * (2 * n_w + topo.neurons());
    if bytes.len() != expected {
        return Err(Error::Checkpoint(format!(
            "{} bytes, topology {} needs {expected}",
            bytes.len(),
            describe(&topology)
        )));
    }
    let mut read = |n: usize| (0..n).map(|_| r.f64()).collect::<Result<Vec<f64>>>();
    let weights = read(n_w)?;
    let biases = read(topo.neurons())?;
    let references = read(n_w)?;
    let params = NetworkParams::from_parts(&topo, weights, biases, references)?;
    Ok(Checkpoint {
        topology,
        updates_done,
        params,
    })
}

/// One-line summary of the structural fields of a topology.
pub fn describe(spec: &TopologySpec) -> String {
    format!(
        "grid {} retina {} x{} rf {} inhibition {} leakage {}{}",
        spec.grid,
        spec.retina,
        spec.num_retinae,
        spec.receptive_field,
        spec.inhibition,
        spec.leakage,
        if spec.wrap { " wrapped" } else { "" }
    )
}

pub fn save<T: Scalar>(path: impl AsRef<Path>, topo: &Topology<T>, params: &NetworkParams<T>, updates_done: u64) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode(topo, params, updates_done)).map_err(|e| Error::io(path, e))
}

pub fn load(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

/// Loads a checkpoint and checks it was trained on `expected`'s structure.
pub fn load_matching(path: impl AsRef<Path>, expected: &TopologySpec) -> Result<Checkpoint> {
    let ckpt = load(path)?;
    if !ckpt.topology.same_structure(expected) {
        return Err(Error::Shape(format!(
            "checkpoint has {}, config has {}",
            describe(&ckpt.topology),
            describe(expected)
        )));
    }
    Ok(ckpt)
}
