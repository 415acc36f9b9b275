//! Deterministic rasterization of wave functions, Wigner functions and
//! flow fields.
//!
//! Rendering is a pure function of the field and the [`RenderSpec`]: every
//! float is quantized by rounding half away from zero before it touches a
//! pixel, and all curves are drawn with integer line stepping, so the same
//! input gives byte-identical images everywhere.

pub mod color;
pub mod raster;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::FlowField;
use crate::state::WaveFunction;
use crate::wigner::{marginal_p, marginal_x, WignerGrid};

pub use color::{colorbar_value, diverging, phase_color, Rgb};
pub use raster::Image;

pub const MIN_SIZE: usize = 64;
pub const CONTOUR_LEVELS: usize = 9;
pub const COLORBAR_WIDTH: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Style {
    Reim,
    Phasor,
    PhaseColor,
    WignerMap,
    WignerFlow,
}

impl Style {
    pub const ALL: [Style; 5] = [Style::Reim, Style::Phasor, Style::PhaseColor, Style::WignerMap, Style::WignerFlow];

    pub fn name(self) -> &'static str {
        match self {
            Style::Reim => "reim",
            Style::Phasor => "phasor",
            Style::PhaseColor => "phase_color",
            Style::WignerMap => "wigner_map",
            Style::WignerFlow => "wigner_flow",
        }
    }

    pub fn is_wavefunction_style(self) -> bool {
        matches!(self, Style::Reim | Style::Phasor | Style::PhaseColor)
    }
}

impl fmt::Display for Style {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Style {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Style::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown style `{s}`; expected one of reim, phasor, phase_color, wigner_map, wigner_flow")))
    }
}

/// Image size, style and overlay switches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RenderSpec {
    pub width: usize,
    pub height: usize,
    pub style: Style,
    /// Spacing of phasors or flow arrows, in grid cells.
    pub stride: usize,
    /// Marginal line plots above and to the right of a Wigner map.
    pub marginals: bool,
    pub contours: bool,
    pub colorbar: bool,
    /// Position range shown by wave-function styles; the whole grid when unset.
    pub x_range: Option<(f64, f64)>,
}

impl RenderSpec {
    pub fn new(width: usize, height: usize, style: Style) -> Result<Self> {
        let spec = RenderSpec {
            width,
            height,
            style,
            stride: 16,
            marginals: false,
            contours: style == Style::WignerFlow,
            colorbar: false,
            x_range: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_stride(mut self, stride: usize) -> Result<Self> {
        self.stride = stride;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < MIN_SIZE || self.height < MIN_SIZE {
            return Err(Error::Usage(format!(
                "images must be at least {MIN_SIZE}x{MIN_SIZE} pixels, got {}x{}",
                self.width, self.height
            )));
        }
        if self.stride == 0 {
            return Err(Error::Usage("stride must be at least 1".into()));
        }
        Ok(())
    }
}

/// Where things ended up in an image, written beside it as JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImageMeta {
    pub style: Style,
    pub width: usize,
    pub height: usize,
    pub x_range: [f64; 2],
    /// Vertical data range; momentum for Wigner styles.
    pub y_range: Option<[f64; 2]>,
    pub origin: &'static str,
    pub vertical_axis: &'static str,
    /// Pixel rectangle `[left, top, width, height]` of the main plot.
    pub plot_area: [usize; 4],
    pub vmax: f64,
}

/// A rendered image and the metadata describing its axes.
#[derive(Debug, Clone)]
pub struct Rendered {
    pub image: Image,
    pub meta: ImageMeta,
}

/// Writes the image (PNG or PPM by extension) and its `<file>.json` sidecar.
pub fn write_image(rendered: &Rendered, path: &Path) -> Result<()> {
    rendered.image.write(path)?;
    let side = crate::io::sidecar_path(path);
    let text = serde_json::to_string_pretty(&rendered.meta).expect("image metadata serializes");
    std::fs::write(&side, text + "\n").map_err(|e| Error::io(&side, e))
}

/// Grid index shown in pixel `px` of a span `pixels` wide that covers `n`
/// samples.
fn sample_index(px: usize, pixels: usize, n: usize) -> usize {
    (px * n / pixels).min(n - 1)
}

/// Pixel center of grid index `i` in the same mapping.
fn pixel_of(i: usize, pixels: usize, n: usize) -> f64 {
    (i as f64 + 0.5) * pixels as f64 / n as f64 - 0.5
}

pub fn render_wavefunction(psi: &WaveFunction, spec: &RenderSpec) -> Result<Rendered> {
    spec.validate()?;
    if !spec.style.is_wavefunction_style() {
        return Err(Error::Usage(format!("style {} does not apply to wave functions", spec.style)));
    }
    let (w, h) = (spec.width, spec.height);
    let g = psi.grid();
    let (first, n) = match spec.x_range {
        Some((lo, hi)) => {
            let i0 = ((lo - g.x_min()) / g.dx()).ceil().clamp(0.0, g.n() as f64) as usize;
            let i1 = ((hi - g.x_min()) / g.dx()).ceil().clamp(0.0, g.n() as f64) as usize;
            if i1 <= i0 + 1 {
                return Err(Error::Usage(format!("x range [{lo}, {hi}) holds fewer than two samples")));
            }
            (i0, i1 - i0)
        }
        None => (0, g.n()),
    };
    let values = &psi.values()[first..first + n];
    let mut img = Image::new(w, h);
    let amax = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mid = (h - 1) as f64 / 2.0;
    let vmax = match spec.style {
        Style::Reim => {
            img.line((0, mid.round() as i64), (w as i64 - 1, mid.round() as i64), color::AXIS);
            for (part, c) in [(0, color::REAL_PART), (1, color::IMAG_PART)] {
                let y = |px: usize| -> i64 {
                    let z = values[sample_index(px, w, n)];
                    let v = if part == 0 { z.re } else { z.im };
                    let s = if amax > 0.0 { v / amax } else { 0.0 };
                    (mid * (1.0 - 0.95 * s)).round() as i64
                };
                for px in 1..w {
                    img.line((px as i64 - 1, y(px - 1)), (px as i64, y(px)), c);
                }
            }
            amax
        }
        Style::Phasor => {
            img.line((0, mid.round() as i64), (w as i64 - 1, mid.round() as i64), color::AXIS);
            let reach = 0.95 * mid;
            let mut i = spec.stride / 2;
            while i < n {
                let z = values[i];
                let len = if amax > 0.0 { reach * z.norm() / amax } else { 0.0 };
                if len >= 1.0 {
                    let x0 = pixel_of(i, w, n);
                    let (s, c) = z.arg().sin_cos();
                    img.arrow((x0, mid), (x0 + len * c, mid - len * s), color::BLACK);
                }
                i += spec.stride;
            }
            amax
        }
        _ => {
            let density: Vec<f64> = values.iter().map(|z| z.norm_sqr()).collect();
            let dmax = density.iter().copied().fold(0.0, f64::max);
            img.raw_mut().par_chunks_exact_mut(3 * w).enumerate().for_each(|(py, row)| {
                let from_bottom = (h - 1 - py) as f64;
                for px in 0..w {
                    let i = sample_index(px, w, n);
                    if dmax == 0.0 {
                        continue;
                    }
                    let height = ((h - 1) as f64 * density[i] / dmax).round();
                    if density[i] > 0.0 && from_bottom < height {
                        row[3 * px..3 * px + 3].copy_from_slice(&phase_color(values[i].arg()));
                    }
                }
            });
            dmax
        }
    };
    Ok(Rendered {
        image: img,
        meta: ImageMeta {
            style: spec.style,
            width: w,
            height: h,
            x_range: [g.point(first), g.point(first) + n as f64 * g.dx()],
            y_range: None,
            origin: "top-left",
            vertical_axis: "up",
            plot_area: [0, 0, w, h],
            vmax,
        },
    })
}

struct Layout {
    left: usize,
    top: usize,
    map_w: usize,
    map_h: usize,
    side_w: usize,
    bar_left: Option<usize>,
}

fn layout(spec: &RenderSpec) -> Layout {
    let bar = if spec.colorbar { COLORBAR_WIDTH + 4 } else { 0 };
    let (side_w, top) = if spec.marginals { ((spec.width - bar) / 5, spec.height / 5) } else { (0, 0) };
    let map_w = spec.width - bar - side_w;
    Layout {
        left: 0,
        top,
        map_w,
        map_h: spec.height - top,
        side_w,
        bar_left: spec.colorbar.then_some(spec.width - COLORBAR_WIDTH),
    }
}

/// Field values for each pixel of the map, sampled at the nearest cell.
fn sample_map(w: &WignerGrid, lay: &Layout) -> Vec<f64> {
    let (np, nx) = w.pgrid().shape();
    let vals = w.values();
    (0..lay.map_h)
        .flat_map(|py| {
            let ip = np - 1 - sample_index(py, lay.map_h, np);
            (0..lay.map_w).map(move |px| vals[[ip, sample_index(px, lay.map_w, nx)]])
        })
        .collect()
}

/// The `CONTOUR_LEVELS` levels strictly between `lo` and `hi`.
pub fn contour_levels(lo: f64, hi: f64) -> Vec<f64> {
    let step = (hi - lo) / (CONTOUR_LEVELS + 1) as f64;
    (1..=CONTOUR_LEVELS).map(|k| lo + k as f64 * step).collect()
}

pub fn render_wigner(w: &WignerGrid, spec: &RenderSpec, flow: Option<&FlowField>) -> Result<Rendered> {
    spec.validate()?;
    if spec.style.is_wavefunction_style() {
        return Err(Error::Usage(format!("style {} does not apply to Wigner functions", spec.style)));
    }
    if let Some(j) = flow {
        if !j.pgrid().same_as(w.pgrid()) {
            return Err(Error::Size("flow field and Wigner function live on different phase grids".into()));
        }
    }
    if spec.style == Style::WignerFlow && flow.is_none() {
        return Err(Error::Usage("style wigner_flow needs a flow field".into()));
    }
    let lay = layout(spec);
    if lay.map_w < 16 || lay.map_h < 16 {
        return Err(Error::Usage("image too small for the requested panels".into()));
    }
    let vmax = w.values().iter().map(|v| v.abs()).fold(0.0, f64::max);
    let field = sample_map(w, &lay);
    let mut img = Image::new(spec.width, spec.height);

    let row_len = 3 * spec.width;
    img.raw_mut()[lay.top * row_len..(lay.top + lay.map_h) * row_len].par_chunks_exact_mut(row_len).enumerate().for_each(|(py, row)| {
        for px in 0..lay.map_w {
            let c = diverging(field[py * lay.map_w + px], vmax);
            let at = 3 * (lay.left + px);
            row[at..at + 3].copy_from_slice(&c);
        }
    });

    if spec.contours && vmax > 0.0 {
        let levels = contour_levels(w.min(), w.max());
        let at = |px: usize, py: usize| field[py * lay.map_w + px];
        for py in 0..lay.map_h {
            for px in 0..lay.map_w {
                let a = at(px, py);
                let crosses = |b: f64| levels.iter().any(|&l| (a - l) * (b - l) < 0.0 || (a == l && b != l));
                let right = px + 1 < lay.map_w && crosses(at(px + 1, py));
                let below = py + 1 < lay.map_h && crosses(at(px, py + 1));
                if right || below {
                    img.set(lay.left + px, lay.top + py, color::CONTOUR);
                }
            }
        }
    }

    if let (Style::WignerFlow, Some(j)) = (spec.style, flow) {
        draw_quiver(&mut img, j, spec.stride, &lay);
    }

    if spec.marginals {
        draw_marginals(&mut img, w, &lay);
    }

    if let Some(bar) = lay.bar_left {
        for py in 0..lay.map_h {
            let c = diverging(colorbar_value(py, lay.map_h, vmax), vmax);
            for px in bar..spec.width {
                img.set(px, lay.top + py, c);
            }
        }
    }

    let g = w.pgrid();
    Ok(Rendered {
        image: img,
        meta: ImageMeta {
            style: spec.style,
            width: spec.width,
            height: spec.height,
            x_range: [g.x.x_min(), g.x.x_max()],
            y_range: Some([g.p.x_min(), g.p.x_max()]),
            origin: "top-left",
            vertical_axis: "up",
            plot_area: [lay.left, lay.top, lay.map_w, lay.map_h],
            vmax,
        },
    })
}

/// Arrows at every `stride`-th cell. Direction follows `(jx, jp)` in pixel
/// space; length is `|j|` relative to the largest sampled `|j|`, with the
/// largest arrow spanning one stride cell.
fn draw_quiver(img: &mut Image, j: &FlowField, stride: usize, lay: &Layout) {
    let g = j.pgrid();
    let (np, nx) = g.shape();
    let sx = lay.map_w as f64 / g.x.length();
    let sp = lay.map_h as f64 / g.p.length();
    let cell = (stride as f64 * lay.map_w as f64 / nx as f64).min(stride as f64 * lay.map_h as f64 / np as f64);
    let points: Vec<(usize, usize)> = (stride / 2..np)
        .step_by(stride)
        .flat_map(|ip| (stride / 2..nx).step_by(stride).map(move |ix| (ip, ix)))
        .collect();
    let jmax = points.iter().map(|&(ip, ix)| j.jx()[[ip, ix]].hypot(j.jp()[[ip, ix]])).fold(0.0, f64::max);
    if jmax == 0.0 {
        return;
    }
    for (ip, ix) in points {
        let (vx, vp) = (j.jx()[[ip, ix]], j.jp()[[ip, ix]]);
        let mag = vx.hypot(vp);
        let (ux, uy) = (vx * sx, -vp * sp);
        let ulen = ux.hypot(uy);
        if mag == 0.0 || ulen == 0.0 {
            continue;
        }
        let len = cell * mag / jmax;
        if len < 1.0 {
            continue;
        }
        let x0 = lay.left as f64 + pixel_of(ix, lay.map_w, nx);
        let y0 = lay.top as f64 + pixel_of(np - 1 - ip, lay.map_h, np);
        img.arrow((x0, y0), (x0 + len * ux / ulen, y0 + len * uy / ulen), color::BLACK);
    }
}

fn draw_marginals(img: &mut Image, w: &WignerGrid, lay: &Layout) {
    let (np, nx) = w.pgrid().shape();
    let mx = marginal_x(w);
    let top_span = (lay.top - 2) as f64;
    let mx_max = mx.iter().copied().fold(0.0, f64::max);
    if mx_max > 0.0 {
        let y = |px: usize| (top_span * (1.0 - mx[sample_index(px, lay.map_w, nx)] / mx_max)).round() as i64 + 1;
        for px in 1..lay.map_w {
            img.line(((lay.left + px - 1) as i64, y(px - 1)), ((lay.left + px) as i64, y(px)), color::BLACK);
        }
    }
    let mp = marginal_p(w);
    let side_left = lay.left + lay.map_w;
    let side_span = (lay.side_w - 2) as f64;
    let mp_max = mp.iter().copied().fold(0.0, f64::max);
    if mp_max > 0.0 {
        let x = |py: usize| {
            let ip = np - 1 - sample_index(py, lay.map_h, np);
            side_left as i64 + 1 + (side_span * mp[ip] / mp_max).round() as i64
        };
        for py in 1..lay.map_h {
            img.line((x(py - 1), (lay.top + py - 1) as i64), (x(py), (lay.top + py) as i64), color::BLACK);
        }
    }
}
