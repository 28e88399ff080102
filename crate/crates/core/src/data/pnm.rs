//! Graymap reading and 8-bit graymap/pixmap (P5/P6) writing.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use image::codecs::pnm::{PnmDecoder, PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PnmError {
    #[error("not a graymap: {0}")]
    NotGray(String),
    #[error("{0}")]
    Decode(#[from] ImageError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Gray image with intensities scaled to `[0, 1]`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, fill: f64) -> Self {
        GrayImage {
            width,
            height,
            pixels: vec![fill; width * height],
        }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        self.pixels[row * self.width + col] = v;
    }

    pub fn mean(&self) -> f64 {
        self.pixels.iter().sum::<f64>() / self.pixels.len().max(1) as f64
    }

    /// Nested rows, convenient for assertions.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.pixels.chunks(self.width.max(1)).map(<[f64]>::to_vec).collect()
    }
}

/// RGB image with channels in `[0, 1]`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<[f64; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, fill: [f64; 3]) -> Self {
        RgbImage {
            width,
            height,
            pixels: vec![fill; width * height],
        }
    }

    pub fn set(&mut self, row: usize, col: usize, v: [f64; 3]) {
        self.pixels[row * self.width + col] = v;
    }

    pub fn get(&self, row: usize, col: usize) -> [f64; 3] {
        self.pixels[row * self.width + col]
    }
}

/// Decodes a P2 or P5 graymap held in memory. Samples are scaled by maxval.
pub fn parse_pgm(bytes: &[u8]) -> Result<GrayImage, PnmError> {
    let decoder = PnmDecoder::new(Cursor::new(bytes))?;
    let subtype = decoder.subtype();
    if !matches!(subtype, PnmSubtype::Graymap(_)) {
        return Err(PnmError::NotGray(format!("{subtype:?}")));
    }
    let img = DynamicImage::from_decoder(decoder)?;
    let (width, height) = (img.width() as usize, img.height() as usize);
    let pixels = match img {
        DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().map(|v| v as f64 / 255.0).collect(),
        other => other.into_luma16().into_raw().into_iter().map(|v| v as f64 / 65535.0).collect(),
    };
    Ok(GrayImage { width, height, pixels })
}

pub fn load_pgm(path: impl AsRef<Path>) -> Result<GrayImage, PnmError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| PnmError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_pgm(&bytes)
}

fn quantise(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn encode(subtype: PnmSubtype, raster: &[u8], width: usize, height: usize, color: ExtendedColorType) -> Vec<u8> {
    let mut out = Vec::new();
    PnmEncoder::new(&mut out)
        .with_subtype(subtype)
        .encode(raster, width as u32, height as u32, color)
        .expect("raster length matches the image size");
    out
}

/// Encodes as binary P5 with maxval 255.
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let raster: Vec<u8> = img.pixels.iter().map(|&v| quantise(v)).collect();
    encode(PnmSubtype::Graymap(SampleEncoding::Binary), &raster, img.width, img.height, ExtendedColorType::L8)
}

/// Encodes as binary P6 with maxval 255.
pub fn encode_ppm(img: &RgbImage) -> Vec<u8> {
    let raster: Vec<u8> = img.pixels.iter().flat_map(|px| px.map(quantise)).collect();
    encode(PnmSubtype::Pixmap(SampleEncoding::Binary), &raster, img.width, img.height, ExtendedColorType::Rgb8)
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), PnmError> {
    fs::write(path, bytes).map_err(|source| PnmError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_pgm(img: &GrayImage, path: impl AsRef<Path>) -> Result<(), PnmError> {
    write_bytes(path.as_ref(), &encode_pgm(img))
}

pub fn write_ppm(img: &RgbImage, path: impl AsRef<Path>) -> Result<(), PnmError> {
    write_bytes(path.as_ref(), &encode_ppm(img))
}
