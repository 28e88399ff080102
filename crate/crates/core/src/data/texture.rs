use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::pnm::GrayImage;
use super::SampleSource;
use crate::error::{Error, Result};
use crate::network::Sample;
use crate::scalar::Scalar;
use crate::topology::Dims;

/// How the patch locations of the two retinae relate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pairing {
    /// Each retina samples its own random location.
    Independent,
    /// Both retinae see the same patch.
    Identical,
}

/// Random patches (or 1-D horizontal runs) cut from a gray texture.
///
/// The image's global mean stands in for the per-component training mean and
/// is subtracted from every pixel.
#[derive(Clone, Debug)]
pub struct TexturePatchSource {
    image: GrayImage,
    retina: Dims,
    num_retinae: usize,
    pairing: Pairing,
    mean: f64,
    rng: ChaCha8Rng,
}

impl TexturePatchSource {
    pub fn new(
        image: GrayImage,
        retina: Dims,
        num_retinae: usize,
        pairing: Pairing,
        seed: u64,
    ) -> Result<Self> {
        if retina.rows > image.height || retina.cols > image.width || retina.is_empty() {
            return Err(Error::Data(format!(
                "retina {retina} does not fit in a {}x{} image",
                image.height, image.width
            )));
        }
        let mean = image.mean();
        Ok(TexturePatchSource {
            image,
            retina,
            num_retinae,
            pairing,
            mean,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample built from explicit top-left corners, one per retina.
    pub fn patch_at<T: Scalar>(&self, corners: &[(usize, usize)]) -> Sample<T> {
        let mut pixels = Vec::with_capacity(self.num_retinae * self.retina.len());
        for &(r0, c0) in corners.iter().take(self.num_retinae) {
            for r in 0..self.retina.rows {
                for c in 0..self.retina.cols {
                    pixels.push(T::of(self.image.get(r0 + r, c0 + c) - self.mean));
                }
            }
        }
        Sample(pixels)
    }

    fn corner(&mut self) -> (usize, usize) {
        (
            self.rng.gen_range(0..=self.image.height - self.retina.rows),
            self.rng.gen_range(0..=self.image.width - self.retina.cols),
        )
    }

    pub fn texture_sample<T: Scalar>(&mut self) -> Sample<T> {
        let first = self.corner();
        let mut corners = vec![first];
        for _ in 1..self.num_retinae {
            corners.push(match self.pairing {
                Pairing::Independent => self.corner(),
                Pairing::Identical => first,
            });
        }
        self.patch_at(&corners)
    }
}

impl<T: Scalar> SampleSource<T> for TexturePatchSource {
    fn next_sample(&mut self) -> Result<Sample<T>> {
        Ok(self.texture_sample())
    }

    fn input_len(&self) -> usize {
        self.num_retinae * self.retina.len()
    }

    fn brightness_floor(&self) -> f64 {
        -self.mean
    }
}

fn blur_axis(src: &[f64], width: usize, height: usize, kernel: &[f64], horizontal: bool) -> Vec<f64> {
    let half = (kernel.len() / 2) as isize;
    let mut out = vec![0.0; src.len()];
    for r in 0..height {
        for c in 0..width {
            let mut acc = 0.0;
            for (k, &w) in kernel.iter().enumerate() {
                let off = k as isize - half;
                let (rr, cc) = if horizontal {
                    (r, (c as isize + off).rem_euclid(width as isize) as usize)
                } else {
                    ((r as isize + off).rem_euclid(height as isize) as usize, c)
                };
                acc += w * src[rr * width + cc];
            }
            out[r * width + c] = acc;
        }
    }
    out
}

/// Seeded band-limited noise texture in `[0, 1]`.
///
/// White noise is blurred (periodically) with a Gaussian whose standard
/// deviation is half of `correlation_length`, then affinely stretched to the
/// unit interval.
pub fn procedural_texture(width: usize, height: usize, correlation_length: f64, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<f64> = (0..width * height).map(|_| rng.gen::<f64>() - 0.5).collect();
    let sigma = (correlation_length / 2.0).max(1e-3);
    let half = (3.0 * sigma).ceil() as isize;
    let kernel: Vec<f64> = (-half..=half)
        .map(|k| (-(k * k) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let blurred = blur_axis(&noise, width, height, &kernel, true);
    let blurred = blur_axis(&blurred, width, height, &kernel, false);
    let lo = blurred.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = blurred.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    GrayImage {
        width,
        height,
        pixels: blurred.into_iter().map(|v| (v - lo) / span).collect(),
    }
}
