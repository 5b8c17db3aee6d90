//! Rasterizes classifier margins into a confidence map and turns the map
//! into point detections.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use crate::candidates::{for_each_in_disc, Candidate};
use crate::error::{Error, Result};
use crate::image::ChannelImage;

pub const DEFAULT_GRAY_THRESHOLD: u8 = 132;
pub const DEFAULT_AREA_THRESHOLD: usize = 2;

const NEIGHBOURS: [(i64, i64); 8] = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];

/// `round(255 * logistic(margin))`.
pub fn confidence(margin: f64) -> u8 {
    let p = 1.0 / (1.0 + (-margin).exp());
    (255.0 * p).round().clamp(0.0, 255.0) as u8
}

/// Paints each candidate's exclusion disc with its confidence. Overlaps keep
/// the larger value.
pub fn render_map(width: usize, height: usize, cands: &[Candidate], margins: &[f64]) -> Result<ChannelImage> {
    if cands.len() != margins.len() {
        return Err(Error::InvalidInput(format!(
            "{} candidates but {} scores",
            cands.len(),
            margins.len()
        )));
    }
    let mut map = ChannelImage::filled(width, height, 0);
    for (c, &m) in cands.iter().zip(margins) {
        let v = confidence(m);
        for_each_in_disc(c.x, c.y, c.radius, width, height, |x, y| {
            if map.get(x, y) < v {
                map.set(x, y, v);
            }
        });
    }
    Ok(map)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub x: f64,
    pub y: f64,
    pub area: usize,
    pub peak: u8,
}

#[derive(Debug, Clone, Default)]
struct Region {
    area: usize,
    peak: u8,
    weight: f64,
    wx: f64,
    wy: f64,
    sx: f64,
    sy: f64,
}

impl Region {
    fn add(&mut self, x: usize, y: usize, v: u8) {
        let (xf, yf, w) = (x as f64, y as f64, v as f64);
        self.area += 1;
        self.peak = self.peak.max(v);
        self.weight += w;
        self.wx += w * xf;
        self.wy += w * yf;
        self.sx += xf;
        self.sy += yf;
    }

    fn centroid(&self) -> (f64, f64) {
        if self.weight > 0.0 {
            (self.wx / self.weight, self.wy / self.weight)
        } else {
            (self.sx / self.area as f64, self.sy / self.area as f64)
        }
    }
}

/// Label of every pixel (0 for background, k for basin k-1) after seeded
/// flooding of the binarized map.
#[derive(Debug, Clone)]
pub struct Watershed {
    pub labels: Vec<u32>,
    regions: Vec<Region>,
}

impl Watershed {
    pub fn region_count(&self) -> usize {
        self.regions.len()
    }

    /// Regions with at least `min_area` pixels, ordered by centroid y, then x.
    pub fn detections(&self, min_area: usize) -> Vec<Detection> {
        let mut out: Vec<Detection> = self
            .regions
            .iter()
            .filter(|r| r.area >= min_area)
            .map(|r| {
                let (x, y) = r.centroid();
                Detection {
                    x,
                    y,
                    area: r.area,
                    peak: r.peak,
                }
            })
            .collect();
        out.sort_by(|a, b| a.y.total_cmp(&b.y).then(a.x.total_cmp(&b.x)));
        out
    }
}

/// Connected plateaus of equal value with no strictly brighter neighbour.
/// Returns one label per pixel (0 where not a maximum), labels in raster
/// order of each plateau's first pixel.
pub fn regional_maxima(map: &ChannelImage) -> (Vec<u32>, u32) {
    let (w, h) = (map.width(), map.height());
    let data = map.data();
    let mut seen = vec![false; w * h];
    let mut out = vec![0u32; w * h];
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    let mut members = Vec::new();
    for start in 0..w * h {
        if seen[start] {
            continue;
        }
        let v = data[start];
        let mut is_max = true;
        seen[start] = true;
        queue.push_back(start);
        members.clear();
        while let Some(p) = queue.pop_front() {
            members.push(p);
            let (x, y) = ((p % w) as i64, (p / w) as i64);
            for (dx, dy) in NEIGHBOURS {
                if !map.contains(x + dx, y + dy) {
                    continue;
                }
                let q = (y + dy) as usize * w + (x + dx) as usize;
                if data[q] > v {
                    is_max = false;
                } else if data[q] == v && !seen[q] {
                    seen[q] = true;
                    queue.push_back(q);
                }
            }
        }
        if is_max {
            next += 1;
            for &p in &members {
                out[p] = next;
            }
        }
    }
    (out, next)
}

/// Floods the foreground (`value >= gray_threshold`, never 0) from the regional
/// maxima that lie in it, brightest pixels first, 8-connected.
pub fn watershed(map: &ChannelImage, gray_threshold: u8) -> Watershed {
    let (maxima, _) = regional_maxima(map);
    watershed_with_maxima(map, &maxima, gray_threshold)
}

/// As [`watershed`] with precomputed maxima, for sweeping thresholds.
pub fn watershed_with_maxima(map: &ChannelImage, maxima: &[u32], gray_threshold: u8) -> Watershed {
    let (w, h) = (map.width(), map.height());
    let data = map.data();
    let mut labels = vec![0u32; w * h];
    let mut remap = std::collections::HashMap::new();
    let mut heap = BinaryHeap::new();
    let mut tick = 0u64;
    // unpainted pixels stay background even at threshold 0
    let gray_threshold = gray_threshold.max(1);
    for p in 0..w * h {
        if maxima[p] != 0 && data[p] >= gray_threshold {
            let n = remap.len() as u32 + 1;
            let l = *remap.entry(maxima[p]).or_insert(n);
            labels[p] = l;
            heap.push((data[p], Reverse(tick), p));
            tick += 1;
        }
    }
    while let Some((_, _, p)) = heap.pop() {
        let (x, y) = ((p % w) as i64, (p / w) as i64);
        for (dx, dy) in NEIGHBOURS {
            if !map.contains(x + dx, y + dy) {
                continue;
            }
            let q = (y + dy) as usize * w + (x + dx) as usize;
            if labels[q] == 0 && data[q] >= gray_threshold {
                labels[q] = labels[p];
                heap.push((data[q], Reverse(tick), q));
                tick += 1;
            }
        }
    }
    let mut regions = vec![Region::default(); remap.len()];
    for (p, &l) in labels.iter().enumerate() {
        if l != 0 {
            regions[l as usize - 1].add(p % w, p / w, data[p]);
        }
    }
    Watershed { labels, regions }
}

/// Binarize, split by watershed, drop regions smaller than `area_threshold`
/// and report confidence-weighted centroids.
pub fn detect(map: &ChannelImage, gray_threshold: u8, area_threshold: usize) -> Vec<Detection> {
    watershed(map, gray_threshold).detections(area_threshold)
}
