//! Images of receptive fields, posterior fields and reconstructions.

use crate::data::pnm::{GrayImage, RgbImage};
use crate::error::{Error, Result};
use crate::network::{NetworkParams, Sample};
use crate::scalar::Scalar;
use crate::topology::{Dims, Topology};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MontageSource {
    #[default]
    Weights,
    References,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Montage {
    Gray(GrayImage),
    Rgb(RgbImage),
}

/// Affine map of `vals` onto `[0, 1]`; a constant input maps to 0.5.
fn unit_scale(vals: &[f64]) -> impl Fn(f64) -> f64 {
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    move |v| if hi > lo { (v - lo) / (hi - lo) } else { 0.5 }
}

/// One tile per neuron showing its receptive-field vector, 1-pixel black
/// separators between and around tiles.
///
/// Each tile is scaled on its own. With two retinae the same scale covers
/// both, retina A drives blue and retina B drives red and green. Taps cut off
/// by the retina border stay black.
pub fn montage<T: Scalar>(params: &NetworkParams<T>, topo: &Topology<T>, which: MontageSource) -> Result<Montage> {
    let spec = topo.spec();
    if spec.grid.is_line() {
        return Err(Error::Analysis(format!("montage needs a 2-D grid, got {}", spec.grid)));
    }
    params.check(topo)?;
    let tile = spec.receptive_field;
    let width = spec.grid.cols * (tile.cols + 1) + 1;
    let height = spec.grid.rows * (tile.rows + 1) + 1;
    let two = spec.num_retinae == 2;
    let mut gray = GrayImage::new(width, height, 0.0);
    let mut rgb = RgbImage::new(width, height, [0.0; 3]);
    for y in 0..topo.neurons() {
        let vals: Vec<f64> = match which {
            MontageSource::Weights => params.weight(y),
            MontageSource::References => params.reference(y),
        }
        .iter()
        .map(|v| v.as_f64())
        .collect();
        let scale = unit_scale(&vals);
        let (gr, gc) = (y / spec.grid.cols, y % spec.grid.cols);
        let (r0, c0) = (gr * (tile.rows + 1) + 1, gc * (tile.cols + 1) + 1);
        let per = topo.rf_per_retina(y);
        for (k, &(tr, tc)) in topo.rf_taps(y)[..per].iter().enumerate() {
            let (r, c) = (r0 + tr, c0 + tc);
            if two {
                let a = scale(vals[k]);
                let b = scale(vals[per + k]);
                rgb.set(r, c, [b, b, a]);
            } else {
                gray.set(r, c, scale(vals[k]));
            }
        }
    }
    Ok(if two { Montage::Rgb(rgb) } else { Montage::Gray(gray) })
}

/// Posterior field on the grid, scaled so its maximum is white.
pub fn posterior_image<T: Scalar>(posterior: &[T], grid: Dims) -> GrayImage {
    let max = posterior.iter().map(|v| v.as_f64()).fold(0.0, f64::max);
    GrayImage {
        width: grid.cols,
        height: grid.rows,
        pixels: posterior
            .iter()
            .map(|v| if max > 0.0 { v.as_f64() / max } else { 0.0 })
            .collect(),
    }
}

/// Retinae stacked vertically, values mapped through `scale`.
fn sample_panel<T: Scalar>(x: &Sample<T>, topo: &Topology<T>, scale: &dyn Fn(f64) -> f64) -> GrayImage {
    let spec = topo.spec();
    let retina = spec.retina;
    let mut img = GrayImage::new(retina.cols, retina.rows * spec.num_retinae, 0.0);
    for (i, v) in x.0.iter().enumerate() {
        img.set(i / retina.cols, i % retina.cols, scale(v.as_f64()).clamp(0.0, 1.0));
    }
    img
}

/// Input, posterior field and reconstruction side by side with 1-pixel gaps.
///
/// Input and reconstruction share the input's scale so their contrast can be
/// compared directly.
pub fn triptych<T: Scalar>(topo: &Topology<T>, x: &Sample<T>, posterior: &[T], recon: &Sample<T>) -> GrayImage {
    let vals: Vec<f64> = x.0.iter().map(|v| v.as_f64()).collect();
    let scale = unit_scale(&vals);
    let panels = [
        sample_panel(x, topo, &scale),
        posterior_image(posterior, topo.spec().grid),
        sample_panel(recon, topo, &scale),
    ];
    let width = panels.iter().map(|p| p.width).sum::<usize>() + 2;
    let height = panels.iter().map(|p| p.height).max().unwrap_or(0);
    let mut out = GrayImage::new(width, height, 0.0);
    let mut c0 = 0;
    for p in &panels {
        for r in 0..p.height {
            for c in 0..p.width {
                out.set(r, c0 + c, p.get(r, c));
            }
        }
        c0 += p.width + 1;
    }
    out
}
