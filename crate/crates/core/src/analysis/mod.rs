//! Diagnostics of trained networks: ocularity, stripes, dominance maps,
//! receptive-field montages and reconstructions.

mod render;
mod reconstruct;

pub use reconstruct::{reconstruct, reconstruction_stats, Reconstruction, ReconstructionStats};
pub use render::{montage, posterior_image, triptych, Montage, MontageSource};

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::data::pnm::GrayImage;
use crate::error::{Error, Result};
use crate::network::NetworkParams;
use crate::scalar::Scalar;
use crate::topology::{Dims, Topology};

/// Per-neuron mean absolute deviation of reference components, per retina.
#[derive(Clone, Debug, PartialEq)]
pub struct OcularityProfile {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl OcularityProfile {
    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }

    /// `index,left,right` with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,left,right\n");
        for (i, (l, r)) in self.left.iter().zip(&self.right).enumerate() {
            let _ = writeln!(out, "{i},{l},{r}");
        }
        out
    }
}

/// Ocularity with deviations measured about zero, the mean of zero-mean data.
pub fn ocularity_profile<T: Scalar>(params: &NetworkParams<T>, topo: &Topology<T>) -> Result<OcularityProfile> {
    ocularity_profile_about(params, topo, 0.0)
}

/// Ocularity with deviations measured about `origin`.
///
/// Synthetic two-retina samples satisfy `left = -right` exactly, so the
/// references inherit that symmetry and deviations about zero are identical
/// for both retinae. Measuring about the value that encodes zero raw
/// brightness (the source's brightness floor) recovers the ocularity signal.
pub fn ocularity_profile_about<T: Scalar>(
    params: &NetworkParams<T>,
    topo: &Topology<T>,
    origin: f64,
) -> Result<OcularityProfile> {
    if topo.num_retinae() != 2 {
        return Err(Error::Analysis(format!(
            "ocularity needs two retinae, topology has {}",
            topo.num_retinae()
        )));
    }
    params.check(topo)?;
    let m = topo.neurons();
    let mut left = Vec::with_capacity(m);
    let mut right = Vec::with_capacity(m);
    for y in 0..m {
        let k = topo.rf_per_retina(y);
        let refs = params.reference(y);
        let mad = |vals: &[T]| vals.iter().map(|v| (v.as_f64() - origin).abs()).sum::<f64>() / k as f64;
        left.push(mad(&refs[..k]));
        right.push(mad(&refs[k..]));
    }
    Ok(OcularityProfile { left, right })
}

/// Period, phase relation and depth of a 1-D ocularity profile.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StripeStats {
    /// Neurons per cycle at the largest non-zero DFT bin of `left - right`;
    /// `None` when the difference is constant.
    pub dominant_period: Option<f64>,
    /// Pearson correlation of left and right; 0 when either is constant.
    pub antiphase_corr: f64,
    /// Mean `|left - right|`.
    pub amplitude: f64,
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        return 0.0;
    }
    (cov / (va * vb).sqrt()).clamp(-1.0, 1.0)
}

/// Magnitude of the DFT of `signal` at bins `1..=len/2`.
pub fn dft_magnitudes(signal: &[f64]) -> Vec<f64> {
    let n = signal.len();
    (1..=n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (i, v) in signal.iter().enumerate() {
                let phase = 2.0 * PI * ((k * i) % n) as f64 / n as f64;
                re += v * phase.cos();
                im -= v * phase.sin();
            }
            re.hypot(im)
        })
        .collect()
}

pub fn stripe_stats(profile: &OcularityProfile) -> Result<StripeStats> {
    let m = profile.len();
    if m < 8 || profile.right.len() != m {
        return Err(Error::Analysis(format!(
            "stripe statistics need two profiles of at least 8 neurons, got {} and {}",
            m,
            profile.right.len()
        )));
    }
    let diff: Vec<f64> = profile.left.iter().zip(&profile.right).map(|(l, r)| l - r).collect();
    let amplitude = diff.iter().map(|v| v.abs()).sum::<f64>() / m as f64;
    let mags = dft_magnitudes(&diff);
    let scale = diff.iter().map(|v| v.abs()).fold(0.0, f64::max) * m as f64;
    let (bin, peak) = mags
        .iter()
        .enumerate()
        .fold((0, 0.0), |best, (i, &v)| if v > best.1 { (i + 1, v) } else { best });
    let dominant_period = (peak > 1e-12 * scale.max(f64::MIN_POSITIVE)).then(|| m as f64 / bin as f64);
    Ok(StripeStats {
        dominant_period,
        antiphase_corr: pearson(&profile.left, &profile.right),
        amplitude,
    })
}

/// Binary ocular dominance labels on a 2-D grid; `true` means left.
#[derive(Clone, Debug, PartialEq)]
pub struct DominanceMap {
    pub grid: Dims,
    pub left: Vec<bool>,
}

impl DominanceMap {
    /// Labels each neuron by `left >= right`; exact ties go to the left.
    pub fn from_profile(profile: &OcularityProfile, grid: Dims) -> Result<Self> {
        if profile.len() != grid.len() {
            return Err(Error::Shape(format!(
                "profile of {} neurons for grid {grid}",
                profile.len()
            )));
        }
        Ok(DominanceMap {
            grid,
            left: profile.left.iter().zip(&profile.right).map(|(l, r)| l >= r).collect(),
        })
    }

    pub fn left_fraction(&self) -> f64 {
        self.left.iter().filter(|&&l| l).count() as f64 / self.left.len() as f64
    }

    /// White for left, black for right.
    pub fn to_image(&self) -> GrayImage {
        GrayImage {
            width: self.grid.cols,
            height: self.grid.rows,
            pixels: self.left.iter().map(|&l| if l { 1.0 } else { 0.0 }).collect(),
        }
    }

    /// Normalised autocorrelation of the +-1 labels at each lag, averaged
    /// over the horizontal and vertical directions. `None` for a uniform map.
    pub fn label_autocorrelation(&self, max_lag: usize) -> Option<Vec<f64>> {
        let s: Vec<f64> = self.left.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();
        let n = s.len() as f64;
        let mean = s.iter().sum::<f64>() / n;
        let var = s.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        if var == 0.0 {
            return None;
        }
        let (rows, cols) = (self.grid.rows, self.grid.cols);
        let at = |r: usize, c: usize| s[r * cols + c] - mean;
        let mut out = vec![1.0];
        for lag in 1..=max_lag {
            let (mut acc, mut count) = (0.0, 0usize);
            for r in 0..rows {
                for c in 0..cols {
                    if c + lag < cols {
                        acc += at(r, c) * at(r, c + lag);
                        count += 1;
                    }
                    if r + lag < rows {
                        acc += at(r, c) * at(r + lag, c);
                        count += 1;
                    }
                }
            }
            if count == 0 {
                break;
            }
            out.push(acc / count as f64 / var);
        }
        Some(out)
    }

    /// Lag at which the label autocorrelation first falls to `1/e`, linearly
    /// interpolated. Salt-and-pepper noise gives values below 1.
    pub fn label_correlation_length(&self) -> Option<f64> {
        let max_lag = self.grid.rows.max(self.grid.cols) / 2;
        let ac = self.label_autocorrelation(max_lag)?;
        let threshold = (-1.0f64).exp();
        for lag in 1..ac.len() {
            if ac[lag] <= threshold {
                let (a, b) = (ac[lag - 1], ac[lag]);
                return Some(lag as f64 - 1.0 + (a - threshold) / (a - b));
            }
        }
        Some((ac.len() - 1) as f64)
    }
}

/// Binary dominance map of a 2-D two-retina network.
pub fn dominance_map_2d<T: Scalar>(
    params: &NetworkParams<T>,
    topo: &Topology<T>,
    origin: f64,
) -> Result<DominanceMap> {
    let grid = topo.spec().grid;
    if grid.is_line() {
        return Err(Error::Analysis(format!("dominance map needs a 2-D grid, got {grid}")));
    }
    DominanceMap::from_profile(&ocularity_profile_about(params, topo, origin)?, grid)
}

#[cfg(test)]
mod tests;
