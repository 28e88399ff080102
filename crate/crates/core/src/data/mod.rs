//! Training data: featureless two-retina brightness pairs and natural texture patches.

pub mod pnm;
mod synthetic;
mod texture;

pub use synthetic::SyntheticRetinaSource;
pub use texture::{procedural_texture, Pairing, TexturePatchSource};

use crate::error::{Error, Result};
use crate::network::Sample;
use crate::scalar::Scalar;

/// A stream of zero-mean training vectors.
pub trait SampleSource<T> {
    fn next_sample(&mut self) -> Result<Sample<T>>;

    /// Dimension of every emitted sample.
    fn input_len(&self) -> usize;

    /// Sample value that corresponds to zero raw brightness before the
    /// zero-mean shift.
    fn brightness_floor(&self) -> f64;
}

/// Finite list of samples replayed in order.
#[derive(Clone, Debug)]
pub struct VecSource<T> {
    samples: Vec<Sample<T>>,
    next: usize,
    floor: f64,
}

impl<T: Scalar> VecSource<T> {
    pub fn new(samples: Vec<Sample<T>>) -> Self {
        VecSource {
            samples,
            next: 0,
            floor: 0.0,
        }
    }
}

impl<T: Scalar> SampleSource<T> for VecSource<T> {
    fn next_sample(&mut self) -> Result<Sample<T>> {
        let sample = self
            .samples
            .get(self.next)
            .cloned()
            .ok_or(Error::DataExhausted(self.next))?;
        self.next += 1;
        Ok(sample)
    }

    fn input_len(&self) -> usize {
        self.samples.first().map_or(0, Sample::len)
    }

    fn brightness_floor(&self) -> f64 {
        self.floor
    }
}
