//! Seeded synthetic patches with known transcript positions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::{AnnotationSet, Point, RgbImage};
use crate::stain::{default_stain_matrix, StainMatrix, DEFAULT_HAEMATOXYLIN, DEFAULT_RNASCOPE};

pub const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub side: usize,
    pub dots: usize,
    /// Inclusive radius range in pixels.
    pub dot_radius: (f64, f64),
    /// Maximum rotation of the dot stain vector toward haematoxylin.
    pub dot_hue_jitter_deg: f64,
    /// Peak RNAscope concentration range of a dot.
    pub dot_intensity: (f64, f64),
    pub nuclei: usize,
    /// Semi-axis range of nucleus ellipses in pixels.
    pub nucleus_axes: (f64, f64),
    /// Haematoxylin concentration range inside nuclei.
    pub nucleus_haem: (f64, f64),
    /// Tissue stain concentrations (haematoxylin, RNAscope).
    pub background: (f64, f64),
    /// Amplitude of smooth concentration noise (haematoxylin, RNAscope).
    pub noise_amplitude: (f64, f64),
    /// Lattice spacing of the smooth noise in pixels.
    pub noise_scale: f64,
    /// Per-pixel intensity noise in 8-bit units.
    pub pixel_noise: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            side: 480,
            dots: 80,
            dot_radius: (1.0, 3.0),
            dot_hue_jitter_deg: 8.0,
            dot_intensity: (0.5, 1.1),
            nuclei: 30,
            nucleus_axes: (6.0, 14.0),
            nucleus_haem: (0.25, 0.6),
            background: (0.15, 0.08),
            noise_amplitude: (0.05, 0.0),
            noise_scale: 12.0,
            pixel_noise: 0.5,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let range = |name: &str, (lo, hi): (f64, f64), min: f64| {
            if lo.is_finite() && hi.is_finite() && min <= lo && lo <= hi {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("{name} range [{lo}, {hi}] is invalid")))
            }
        };
        range("dot radius", self.dot_radius, 0.0)?;
        range("dot intensity", self.dot_intensity, 0.0)?;
        range("nucleus axes", self.nucleus_axes, 0.5)?;
        range("nucleus haematoxylin", self.nucleus_haem, 0.0)?;
        if self.side < 8 {
            return Err(Error::InvalidInput(format!("patch side {} is too small", self.side)));
        }
        let nonneg = [
            self.dot_hue_jitter_deg,
            self.background.0,
            self.background.1,
            self.noise_amplitude.0,
            self.noise_amplitude.1,
            self.pixel_noise,
        ];
        if nonneg.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || self.noise_scale.is_nan() || self.noise_scale <= 0.0 {
            return Err(Error::InvalidInput("noise and background settings must be non-negative".into()));
        }
        if self.dot_radius.1 * 2.0 >= self.side as f64 {
            return Err(Error::InvalidInput("dots do not fit in the patch".into()));
        }
        Ok(())
    }

    /// Minimum distance between dot centres.
    pub fn min_spacing(&self) -> f64 {
        2.0 * self.dot_radius.1
    }
}

/// Smooth value noise in `[-1, 1]` on a square lattice.
struct ValueNoise {
    cells: usize,
    scale: f64,
    lattice: Vec<f64>,
}

impl ValueNoise {
    fn new(rng: &mut ChaCha8Rng, side: usize, scale: f64) -> Self {
        let cells = (side as f64 / scale).ceil() as usize + 2;
        let lattice = (0..cells * cells).map(|_| rng.random_range(-1.0..=1.0)).collect();
        Self { cells, scale, lattice }
    }

    fn at(&self, x: f64, y: f64) -> f64 {
        let (gx, gy) = (x / self.scale, y / self.scale);
        let (ix, iy) = (gx.floor() as usize, gy.floor() as usize);
        let s = |t: f64| t * t * (3.0 - 2.0 * t);
        let (fx, fy) = (s(gx - ix as f64), s(gy - iy as f64));
        let v = |i: usize, j: usize| self.lattice[j.min(self.cells - 1) * self.cells + i.min(self.cells - 1)];
        let top = v(ix, iy) * (1.0 - fx) + v(ix + 1, iy) * fx;
        let bottom = v(ix, iy + 1) * (1.0 - fx) + v(ix + 1, iy + 1) * fx;
        top * (1.0 - fy) + bottom * fy
    }
}

struct Nucleus {
    cx: f64,
    cy: f64,
    a: f64,
    b: f64,
    cos: f64,
    sin: f64,
    haem: f64,
}

impl Nucleus {
    /// 1 inside, 0 outside, linear over about a pixel at the edge.
    fn weight(&self, x: f64, y: f64) -> f64 {
        let (dx, dy) = (x - self.cx, y - self.cy);
        let u = (dx * self.cos + dy * self.sin) / self.a;
        let v = (-dx * self.sin + dy * self.cos) / self.b;
        let r = (u * u + v * v).sqrt();
        let edge = 1.0 / self.a.min(self.b);
        ((1.0 - r) / edge + 0.5).clamp(0.0, 1.0)
    }
}

struct Dot {
    x: usize,
    y: usize,
    radius: f64,
    peak: f64,
    /// Concentrations produced by one unit of this dot's stain.
    unit: [f64; 3],
}

impl Dot {
    fn weight(&self, x: f64, y: f64) -> f64 {
        let d = ((x - self.x as f64).powi(2) + (y - self.y as f64).powi(2)).sqrt();
        (self.radius + 0.5 - d).clamp(0.0, 1.0)
    }
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    v.map(|c| c / n)
}

/// Dot stain rotated by `deg` toward haematoxylin, in stain-basis
/// coordinates.
fn jittered_unit(m: &StainMatrix, deg: f64) -> [f64; 3] {
    let d = normalize(DEFAULT_RNASCOPE);
    let h = normalize(DEFAULT_HAEMATOXYLIN);
    let dot = h[0] * d[0] + h[1] * d[1] + h[2] * d[2];
    let perp = normalize([0, 1, 2].map(|k| h[k] - dot * d[k]));
    let (s, c) = deg.to_radians().sin_cos();
    let dn = (DEFAULT_RNASCOPE.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let v = [0, 1, 2].map(|k| dn * (c * d[k] + s * perp[k]));
    m.concentrations(v)
}

fn sample(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

pub fn generate(cfg: &SynthConfig) -> Result<(RgbImage, AnnotationSet)> {
    cfg.validate()?;
    let m = default_stain_matrix();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let side = cfg.side;
    let noise_h = ValueNoise::new(&mut rng, side, cfg.noise_scale);
    let noise_d = ValueNoise::new(&mut rng, side, cfg.noise_scale);

    let nuclei: Vec<Nucleus> = (0..cfg.nuclei)
        .map(|_| {
            let angle = rng.random_range(0.0..std::f64::consts::PI);
            Nucleus {
                cx: rng.random_range(0.0..side as f64),
                cy: rng.random_range(0.0..side as f64),
                a: sample(&mut rng, cfg.nucleus_axes),
                b: sample(&mut rng, cfg.nucleus_axes),
                cos: angle.cos(),
                sin: angle.sin(),
                haem: sample(&mut rng, cfg.nucleus_haem),
            }
        })
        .collect();

    let margin = cfg.dot_radius.1.ceil() as usize;
    let spacing = cfg.min_spacing();
    let mut dots: Vec<Dot> = Vec::with_capacity(cfg.dots);
    let mut attempts = 0;
    while dots.len() < cfg.dots {
        if attempts == MAX_PLACEMENT_ATTEMPTS {
            return Err(Error::TooDense {
                placed: dots.len(),
                attempts,
            });
        }
        attempts += 1;
        let x = rng.random_range(margin..side - margin);
        let y = rng.random_range(margin..side - margin);
        let clear = dots.iter().all(|d| {
            let (dx, dy) = (d.x as f64 - x as f64, d.y as f64 - y as f64);
            (dx * dx + dy * dy).sqrt() >= spacing
        });
        if !clear {
            continue;
        }
        let radius = sample(&mut rng, cfg.dot_radius);
        let peak = sample(&mut rng, cfg.dot_intensity);
        let jitter = rng.random_range(-1.0..=1.0) * cfg.dot_hue_jitter_deg;
        dots.push(Dot {
            x,
            y,
            radius,
            peak,
            unit: jittered_unit(&m, jitter),
        });
    }

    let mut img = RgbImage::filled(side, side, [255, 255, 255]);
    for y in 0..side {
        for x in 0..side {
            let (xf, yf) = (x as f64, y as f64);
            let mut conc = [
                cfg.background.0 + cfg.noise_amplitude.0 * noise_h.at(xf, yf),
                cfg.background.1 + cfg.noise_amplitude.1 * noise_d.at(xf, yf),
                0.0,
            ];
            conc[0] = conc[0].max(0.0);
            conc[1] = conc[1].max(0.0);
            for n in &nuclei {
                conc[0] += n.haem * n.weight(xf, yf);
            }
            img.set_pixel(x, y, shade(&m, conc, &mut rng, cfg.pixel_noise));
        }
    }
    for d in &dots {
        let r = (d.radius + 1.0).ceil() as i64;
        for dy in -r..=r {
            for dx in -r..=r {
                let (x, y) = (d.x as i64 + dx, d.y as i64 + dy);
                if x < 0 || y < 0 || x >= side as i64 || y >= side as i64 {
                    continue;
                }
                let wgt = d.weight(x as f64, y as f64);
                if wgt <= 0.0 {
                    continue;
                }
                let (x, y) = (x as usize, y as usize);
                let mut od = [0, 1, 2].map(|c| -(img.pixel(x, y)[c].max(1) as f64 / 255.0).log10());
                let add = m.optical_density(d.unit.map(|u| u * d.peak * wgt));
                for c in 0..3 {
                    od[c] += add[c];
                }
                img.set_pixel(x, y, od.map(|v| (255.0 * 10f64.powf(-v)).round().clamp(0.0, 255.0) as u8));
            }
        }
    }

    let points = dots.iter().map(|d| Point::new(d.x as f64, d.y as f64)).collect();
    Ok((img, AnnotationSet::new(points, format!("synth seed {}", cfg.seed))))
}

fn shade(m: &StainMatrix, conc: [f64; 3], rng: &mut ChaCha8Rng, noise: f64) -> [u8; 3] {
    m.render(conc).map(|v| {
        let n = if noise > 0.0 { rng.random_range(-noise..=noise) } else { 0.0 };
        (v + n).round().clamp(0.0, 255.0) as u8
    })
}
