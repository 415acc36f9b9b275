//! An RGB raster with integer line drawing and PPM/PNG export.

use std::fs;
use std::io::BufWriter;
use std::path::Path;

use crate::error::{Error, Result};

use super::color::{Rgb, WHITE};

/// Row-major RGB image with the origin in the top-left corner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Image {
    pub fn new(width: usize, height: usize) -> Self {
        Image::filled(width, height, WHITE)
    }

    pub fn filled(width: usize, height: usize, color: Rgb) -> Self {
        let pixels = color.iter().copied().cycle().take(width * height * 3).collect();
        Image { width, height, pixels }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel(&self, x: usize, y: usize) -> Rgb {
        let i = 3 * (y * self.width + x);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn set(&mut self, x: usize, y: usize, c: Rgb) {
        let i = 3 * (y * self.width + x);
        self.pixels[i..i + 3].copy_from_slice(&c);
    }

    /// Sets the pixel if `(x, y)` lies inside the image.
    pub fn plot(&mut self, x: i64, y: i64, c: Rgb) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            self.set(x as usize, y as usize, c);
        }
    }

    /// The raw row-major RGB bytes.
    pub fn raw_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn raw(&self) -> &[u8] {
        &self.pixels
    }

    /// Bresenham's line from `(x0, y0)` to `(x1, y1)`, endpoints included.
    pub fn line(&mut self, (mut x0, mut y0): (i64, i64), (x1, y1): (i64, i64), c: Rgb) {
        let dx = (x1 - x0).abs();
        let dy = -(y1 - y0).abs();
        let sx = if x0 < x1 { 1 } else { -1 };
        let sy = if y0 < y1 { 1 } else { -1 };
        let mut err = dx + dy;
        loop {
            self.plot(x0, y0, c);
            if x0 == x1 && y0 == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x0 += sx;
            }
            if e2 <= dx {
                err += dx;
                y0 += sy;
            }
        }
    }

    /// A shaft from `from` to `to` with a two-stroke head at `to`.
    ///
    /// Positions are in pixels and may be fractional; they are rounded half
    /// away from zero before drawing.
    pub fn arrow(&mut self, from: (f64, f64), to: (f64, f64), c: Rgb) {
        let p0 = (from.0.round() as i64, from.1.round() as i64);
        let p1 = (to.0.round() as i64, to.1.round() as i64);
        self.line(p0, p1, c);
        let (dx, dy) = (to.0 - from.0, to.1 - from.1);
        let len = dx.hypot(dy);
        if len < 2.0 {
            return;
        }
        let head = (len / 3.0).max(2.0);
        let (ux, uy) = (dx / len, dy / len);
        let (cos, sin) = (0.866_025_403_784_438_6, 0.5);
        for s in [sin, -sin] {
            let hx = -(ux * cos - uy * s) * head;
            let hy = -(uy * cos + ux * s) * head;
            let tip = ((to.0 + hx).round() as i64, (to.1 + hy).round() as i64);
            self.line(p1, tip, c);
        }
    }

    /// Binary PPM (`P6`, maxval 255).
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn write_ppm(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_ppm()).map_err(|e| Error::io(path, e))
    }

    pub fn write_png(&self, path: &Path) -> Result<()> {
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut encoder = png::Encoder::new(BufWriter::new(file), self.width as u32, self.height as u32);
        encoder.set_color(png::ColorType::Rgb);
        encoder.set_depth(png::BitDepth::Eight);
        let encode_err = |e: png::EncodingError| match e {
            png::EncodingError::IoError(io) => Error::io(path, io),
            other => Error::Format { path: path.to_path_buf(), reason: other.to_string() },
        };
        let mut writer = encoder.write_header().map_err(encode_err)?;
        writer.write_image_data(&self.pixels).map_err(encode_err)?;
        writer.finish().map_err(encode_err)
    }

    /// PNG when the extension says so, PPM otherwise.
    pub fn write(&self, path: &Path) -> Result<()> {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("png") => self.write_png(path),
            _ => self.write_ppm(path),
        }
    }
}
