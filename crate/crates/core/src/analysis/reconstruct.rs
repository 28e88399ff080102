//! Encoding an input to its posterior field and decoding it back.

use crate::error::{Error, Result};
use crate::network::{NetworkParams, Sample};
use crate::posterior::pmd_posterior;
use crate::scalar::{norm_sq, Scalar};
use crate::topology::Topology;

#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction<T> {
    /// `sum_y Pr(y|x) x'(y)`, scattered back to input coordinates.
    pub image: Sample<T>,
    pub posterior: Vec<T>,
}

pub fn reconstruct<T: Scalar>(
    params: &NetworkParams<T>,
    topo: &Topology<T>,
    x: &Sample<T>,
) -> Result<Reconstruction<T>> {
    let state = pmd_posterior(params, topo, x)?;
    let mut image = Sample::zeros(topo.input_len());
    for (y, &p) in state.posterior.iter().enumerate() {
        for (&i, &r) in topo.receptive_field(y).iter().zip(params.reference(y)) {
            image.0[i] = image.0[i] + p * r;
        }
    }
    Ok(Reconstruction {
        image,
        posterior: state.posterior,
    })
}

/// Reconstruction quality over a set of inputs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReconstructionStats {
    /// Mean `|x - x^|^2 / d`.
    pub mse: f64,
    /// Mean `|x|^2 / d`, the error of predicting zero.
    pub baseline: f64,
    /// Mean of `max_y Pr(y|x)`.
    pub mean_max_posterior: f64,
}

pub fn reconstruction_stats<T: Scalar>(
    params: &NetworkParams<T>,
    topo: &Topology<T>,
    samples: &[Sample<T>],
) -> Result<ReconstructionStats> {
    if samples.is_empty() {
        return Err(Error::Data("no samples to reconstruct".into()));
    }
    let d = topo.input_len() as f64;
    let (mut mse, mut baseline, mut peak) = (0.0, 0.0, 0.0);
    for x in samples {
        let rec = reconstruct(params, topo, x)?;
        let err: Vec<T> = x.0.iter().zip(&rec.image.0).map(|(&a, &b)| a - b).collect();
        mse += norm_sq(&err).as_f64() / d;
        baseline += norm_sq(&x.0).as_f64() / d;
        peak += rec.posterior.iter().fold(T::zero(), |m, &p| m.max(p)).as_f64();
    }
    let n = samples.len() as f64;
    Ok(ReconstructionStats {
        mse: mse / n,
        baseline: baseline / n,
        mean_max_posterior: peak / n,
    })
}
