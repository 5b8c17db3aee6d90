//! Colour deconvolution of haematoxylin + DAB-like (RNAscope) stained RGB.
//!
//! Each stain is a unit vector in optical-density space. A pixel's optical
//! density is the concentration-weighted sum of the stain rows, so the
//! concentrations are recovered by multiplying the OD row vector with the
//! inverse of the stain matrix.

use crate::error::{Error, Result};
use crate::image::{ChannelImage, RgbImage};

pub const DEFAULT_HAEMATOXYLIN: [f64; 3] = [0.650, 0.704, 0.286];
pub const DEFAULT_RNASCOPE: [f64; 3] = [0.269, 0.568, 0.778];

#[derive(Debug, Clone, PartialEq)]
pub struct StainMatrix {
    /// Rows: haematoxylin, RNAscope, residual.
    rows: [[f64; 3]; 3],
    inverse: [[f64; 3]; 3],
}

fn normalize(v: [f64; 3]) -> Result<[f64; 3]> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if !n.is_finite() || n < 1e-12 {
        return Err(Error::SingularMatrix);
    }
    Ok([v[0] / n, v[1] / n, v[2] / n])
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn invert(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if !det.is_finite() || det.abs() < 1e-9 {
        return None;
    }
    let mut inv = [[0.0; 3]; 3];
    for (i, row) in inv.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            // cofactor of m[j][i]
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            *v = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / det;
        }
    }
    Some(inv)
}

impl StainMatrix {
    /// Builds a matrix from two stain vectors; the residual row is their
    /// normalized cross product.
    pub fn from_stains(haem: [f64; 3], rnascope: [f64; 3]) -> Result<Self> {
        let h = normalize(haem)?;
        let d = normalize(rnascope)?;
        let r = normalize(cross(h, d))?;
        Self::from_rows([h, d, r])
    }

    /// Rows are normalized; fails if the result is singular.
    pub fn from_rows(rows: [[f64; 3]; 3]) -> Result<Self> {
        let rows = [normalize(rows[0])?, normalize(rows[1])?, normalize(rows[2])?];
        let inverse = invert(&rows).ok_or(Error::SingularMatrix)?;
        Ok(Self { rows, inverse })
    }

    pub fn rows(&self) -> &[[f64; 3]; 3] {
        &self.rows
    }

    /// Optical density row vector -> stain concentrations.
    pub fn concentrations(&self, od: [f64; 3]) -> [f64; 3] {
        let m = &self.inverse;
        [
            od[0] * m[0][0] + od[1] * m[1][0] + od[2] * m[2][0],
            od[0] * m[0][1] + od[1] * m[1][1] + od[2] * m[2][1],
            od[0] * m[0][2] + od[1] * m[1][2] + od[2] * m[2][2],
        ]
    }

    /// Stain concentrations -> optical density.
    pub fn optical_density(&self, conc: [f64; 3]) -> [f64; 3] {
        let m = &self.rows;
        [0, 1, 2].map(|c| conc[0] * m[0][c] + conc[1] * m[1][c] + conc[2] * m[2][c])
    }

    /// Forward model: transmitted intensity in `[0, 255]` for the given
    /// concentrations, unrounded.
    pub fn render(&self, conc: [f64; 3]) -> [f64; 3] {
        self.optical_density(conc).map(|od| 255.0 * 10f64.powf(-od))
    }
}

impl Default for StainMatrix {
    fn default() -> Self {
        default_stain_matrix()
    }
}

pub fn default_stain_matrix() -> StainMatrix {
    StainMatrix::from_stains(DEFAULT_HAEMATOXYLIN, DEFAULT_RNASCOPE)
        .expect("default stain vectors are independent")
}

#[derive(Debug, Clone)]
pub struct StainPlanes {
    pub haem: ChannelImage,
    pub rnascope: ChannelImage,
    pub residual: ChannelImage,
}

fn od_of(intensity: u8) -> f64 {
    -((intensity.max(1) as f64) / 255.0).log10()
}

/// Concentration -> 8-bit pseudo-intensity; 255 means no stain.
pub fn concentration_to_intensity(a: f64) -> u8 {
    (255.0 * 10f64.powf(-a)).round().clamp(0.0, 255.0) as u8
}

pub fn deconvolve(img: &RgbImage, m: &StainMatrix) -> StainPlanes {
    let od_lut: Vec<f64> = (0..=255u8).map(od_of).collect();
    let n = img.width() * img.height();
    let (mut h, mut d, mut r) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for [pr, pg, pb] in img.pixels() {
        let od = [od_lut[pr as usize], od_lut[pg as usize], od_lut[pb as usize]];
        let a = m.concentrations(od);
        h.push(concentration_to_intensity(a[0]));
        d.push(concentration_to_intensity(a[1]));
        r.push(concentration_to_intensity(a[2]));
    }
    let (w, ht) = (img.width(), img.height());
    StainPlanes {
        haem: ChannelImage::new(w, ht, h).expect("same dimensions"),
        rnascope: ChannelImage::new(w, ht, d).expect("same dimensions"),
        residual: ChannelImage::new(w, ht, r).expect("same dimensions"),
    }
}
