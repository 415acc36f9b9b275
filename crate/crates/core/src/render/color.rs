//! Color maps. All float-to-byte conversions round half away from zero.

use std::f64::consts::PI;

pub type Rgb = [u8; 3];

pub const WHITE: Rgb = [255, 255, 255];
pub const BLACK: Rgb = [0, 0, 0];
pub const CONTOUR: Rgb = [48, 48, 48];
pub const AXIS: Rgb = [200, 200, 200];
pub const REAL_PART: Rgb = [200, 0, 0];
pub const IMAG_PART: Rgb = [0, 0, 200];

/// `round(255 * s)` for `s` in `[0, 1]`.
pub fn quantize(s: f64) -> u8 {
    (255.0 * s.clamp(0.0, 1.0)).round() as u8
}

/// Blue-white-red map symmetric about zero over `[-vmax, vmax]`.
///
/// Zero is white. Any other value is pulled at least one step away from
/// white, so the sign of every nonzero cell stays visible.
pub fn diverging(v: f64, vmax: f64) -> Rgb {
    if v == 0.0 || !(vmax > 0.0) {
        return WHITE;
    }
    let c = quantize(1.0 - (v.abs() / vmax).min(1.0)).min(254);
    if v < 0.0 {
        [c, c, 255]
    } else {
        [255, c, c]
    }
}

/// Hue wheel at full saturation and value, with `phi = 0` pure red.
pub fn phase_color(phi: f64) -> Rgb {
    let phi = phi.rem_euclid(2.0 * PI);
    let h = phi / (PI / 3.0);
    let sector = (h.floor() as usize).min(5);
    let x = 1.0 - ((h % 2.0) - 1.0).abs();
    let (r, g, b) = match sector {
        0 => (1.0, x, 0.0),
        1 => (x, 1.0, 0.0),
        2 => (0.0, 1.0, x),
        3 => (0.0, x, 1.0),
        4 => (x, 0.0, 1.0),
        _ => (1.0, 0.0, x),
    };
    [quantize(r), quantize(g), quantize(b)]
}

/// Field value shown on row `row` of a color bar `rows` tall: `+vmax` at
/// the top, `-vmax` at the bottom.
pub fn colorbar_value(row: usize, rows: usize, vmax: f64) -> f64 {
    if rows < 2 {
        return 0.0;
    }
    vmax * (1.0 - 2.0 * row as f64 / (rows - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diverging_anchors() {
        assert_eq!(diverging(0.0, 1.0), WHITE);
        assert_eq!(diverging(1.0, 1.0), [255, 0, 0]);
        assert_eq!(diverging(-1.0, 1.0), [0, 0, 255]);
        assert_eq!(diverging(0.5, 1.0), [255, 128, 128]);
        assert_eq!(diverging(-1e-9, 1.0), [254, 254, 255]);
        assert_eq!(diverging(3.0, 0.0), WHITE);
    }

    #[test]
    fn hue_wheel() {
        assert_eq!(phase_color(0.0), [255, 0, 0]);
        assert_eq!(phase_color(2.0 * PI), [255, 0, 0]);
        assert_eq!(phase_color(2.0 * PI / 3.0), [0, 255, 0]);
        assert_eq!(phase_color(4.0 * PI / 3.0), [0, 0, 255]);
        assert_eq!(phase_color(PI), [0, 255, 255]);
        assert_eq!(phase_color(-PI / 3.0), [255, 0, 255]);
    }
}
