//! Single-channel float rasters and the PGM/PNG codecs used for them.
//!
//! Pixel `(x, y)` is column `x`, row `y`; storage is row-major. Integer
//! coordinates address pixel centers.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f32>,
}

impl Raster {
    pub fn new(width: usize, height: usize) -> Self {
        Raster {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {width}x{height} raster",
                data.len()
            )));
        }
        Ok(Raster {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f32) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Raster {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f32) {
        self.data[y * self.width + x] = v;
    }

    pub fn row(&self, y: usize) -> &[f32] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    /// Bilinear sample at real coordinates; `None` outside `[0, w-1] x [0, h-1]`.
    #[inline]
    pub fn bilinear(&self, x: f64, y: f64) -> Option<f32> {
        if !(x >= 0.0 && y >= 0.0 && x <= (self.width - 1) as f64 && y <= (self.height - 1) as f64)
        {
            return None;
        }
        let x0 = (x.floor() as usize).min(self.width - 1);
        let y0 = (y.floor() as usize).min(self.height - 1);
        let fx = (x - x0 as f64) as f32;
        let fy = (y - y0 as f64) as f32;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let p00 = self.get(x0, y0);
        let p10 = self.get(x1, y0);
        let p01 = self.get(x0, y1);
        let p11 = self.get(x1, y1);
        let top = p00 + fx * (p10 - p00);
        let bottom = p01 + fx * (p11 - p01);
        Some(top + fy * (bottom - top))
    }

    pub fn min_max(&self) -> (f32, f32) {
        self.data
            .iter()
            .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Quantize to 8 bits with round-to-nearest after clamping to [0, 1].
    pub fn to_u8(&self) -> Vec<u8> {
        self.data
            .iter()
            .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect()
    }
}

/// Decoded integer raster before bit-depth scaling.
#[derive(Debug, Clone)]
pub struct RawRaster {
    pub width: usize,
    pub height: usize,
    pub max_value: u32,
    pub samples: Vec<u16>,
}

impl RawRaster {
    /// Scale by the nominal full-scale value of the bit depth (255 or 65535).
    pub fn to_unit(&self) -> Result<Raster> {
        let full = match self.max_value {
            1..=255 => 255.0,
            256..=65535 => 65535.0,
            other => return Err(Error::UnsupportedBitDepth(other)),
        };
        Raster::from_vec(
            self.width,
            self.height,
            self.samples.iter().map(|&s| (s as f64 / full) as f32).collect(),
        )
    }
}

fn unreadable(path: &Path, reason: impl Into<String>) -> Error {
    Error::UnreadableRaster {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// Parse a binary (P5) PGM.
pub fn decode_pgm(bytes: &[u8], path: &Path) -> Result<RawRaster> {
    let mut pos = 0usize;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(unreadable(path, "truncated PGM header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).unwrap_or("").to_string());
    }
    // exactly one whitespace byte separates the header from the samples
    pos += 1;
    if fields[0] != "P5" {
        return Err(unreadable(path, format!("expected P5 magic, found {:?}", fields[0])));
    }
    let parse = |s: &str, what: &str| -> Result<usize> {
        s.parse::<usize>()
            .map_err(|_| unreadable(path, format!("bad {what} {s:?}")))
    };
    let width = parse(&fields[1], "width")?;
    let height = parse(&fields[2], "height")?;
    let max_value = parse(&fields[3], "maxval")? as u32;
    if max_value == 0 || max_value > 65535 {
        return Err(Error::UnsupportedBitDepth(max_value));
    }
    let n = width * height;
    let body = bytes.get(pos..).unwrap_or(&[]);
    let samples: Vec<u16> = if max_value < 256 {
        if body.len() < n {
            return Err(unreadable(path, "truncated PGM body"));
        }
        body[..n].iter().map(|&b| b as u16).collect()
    } else {
        if body.len() < 2 * n {
            return Err(unreadable(path, "truncated PGM body"));
        }
        body[..2 * n]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect()
    };
    Ok(RawRaster {
        width,
        height,
        max_value,
        samples,
    })
}

pub fn read_raw(path: &Path) -> Result<RawRaster> {
    let bytes = fs::read(path).map_err(|e| unreadable(path, e.to_string()))?;
    if bytes.starts_with(b"P5") {
        return decode_pgm(&bytes, path);
    }
    if bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
        return decode_png(&bytes, path);
    }
    Err(unreadable(path, "unsupported raster format (expected P5 PGM or PNG)"))
}

fn decode_png(bytes: &[u8], path: &Path) -> Result<RawRaster> {
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| unreadable(path, e.to_string()))?;
    let (width, height) = (img.width() as usize, img.height() as usize);
    match img {
        image::DynamicImage::ImageLuma8(buf) => Ok(RawRaster {
            width,
            height,
            max_value: 255,
            samples: buf.into_raw().into_iter().map(u16::from).collect(),
        }),
        image::DynamicImage::ImageLuma16(buf) => Ok(RawRaster {
            width,
            height,
            max_value: 65535,
            samples: buf.into_raw(),
        }),
        other => Err(unreadable(
            path,
            format!("PNG must be single-channel grayscale, found {:?}", other.color()),
        )),
    }
}

/// Read a raster and scale it to [0, 1] by bit depth.
pub fn read_raster(path: &Path) -> Result<Raster> {
    read_raw(path)?.to_unit()
}

pub fn encode_pgm8(r: &Raster) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", r.width, r.height).into_bytes();
    out.extend_from_slice(&r.to_u8());
    out
}

pub fn encode_pgm16(width: usize, height: usize, samples: &[u16]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n65535\n").into_bytes();
    for s in samples {
        out.extend_from_slice(&s.to_be_bytes());
    }
    out
}

pub fn write_pgm8(path: &Path, r: &Raster) -> Result<()> {
    write_bytes(path, &encode_pgm8(r))
}

pub(crate) fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::write_failure(path, e))?;
    f.write_all(bytes).map_err(|e| Error::write_failure(path, e))
}
