use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SampleSource;
use crate::error::Result;
use crate::network::Sample;
use crate::scalar::Scalar;

/// Two featureless retinae with independent brightnesses.
///
/// Brightnesses `l, r ~ uniform(0, 1)` are normalised to `l / (l + r)` and
/// `r / (l + r)`, then shifted by `-0.5` so every component is zero mean. Each
/// retina is filled with its single value, so left + right = 0 exactly.
#[derive(Clone, Debug)]
pub struct SyntheticRetinaSource {
    retina_len: usize,
    rng: ChaCha8Rng,
}

impl SyntheticRetinaSource {
    pub fn new(retina_len: usize, seed: u64) -> Self {
        SyntheticRetinaSource {
            retina_len,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Sample for given raw brightnesses; `None` when both are zero.
    pub fn from_brightness<T: Scalar>(retina_len: usize, left: f64, right: f64) -> Option<Sample<T>> {
        let total = left + right;
        if total <= 0.0 {
            return None;
        }
        let l = left / total - 0.5;
        let (l, r) = (T::of(l), T::of(-l));
        let mut pixels = vec![l; 2 * retina_len];
        pixels[retina_len..].fill(r);
        Some(Sample(pixels))
    }

    pub fn synth_sample<T: Scalar>(&mut self) -> Sample<T> {
        loop {
            let l: f64 = self.rng.gen();
            let r: f64 = self.rng.gen();
            if let Some(s) = Self::from_brightness(self.retina_len, l, r) {
                return s;
            }
        }
    }
}

impl<T: Scalar> SampleSource<T> for SyntheticRetinaSource {
    fn next_sample(&mut self) -> Result<Sample<T>> {
        Ok(self.synth_sample())
    }

    fn input_len(&self) -> usize {
        2 * self.retina_len
    }

    fn brightness_floor(&self) -> f64 {
        -0.5
    }
}
