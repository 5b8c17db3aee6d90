//! Candidate pixel selection on the RNAscope plane.
//!
//! The RNAscope plane is blurred and thresholded at its histogram mode,
//! tightened once when too much tissue falls below the mode. RNAscope regions
//! and very dark grayscale regions are traced as contours and painted into a
//! candidate mask, from which pixels are taken greedily in order of
//! increasing value, each one suppressing a disc whose radius grows as the
//! pixel approaches the threshold.

mod contours;

pub use contours::{fill_contour, find_contours, Contour, ContourKind};

use crate::error::{Error, Result};
use crate::image::ChannelImage;

/// Values above this are treated as unstained background, not tissue.
pub const TISSUE_CUTOFF: u8 = 250;

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateParams {
    pub blur_sigma: f64,
    pub threshold_decrement: u8,
    pub dark_fill_offset: u8,
    pub dark_cutoff: u8,
}

impl Default for CandidateParams {
    fn default() -> Self {
        Self {
            blur_sigma: 1.1,
            threshold_decrement: 8,
            dark_fill_offset: 11,
            dark_cutoff: 100,
        }
    }
}

/// Reflect-101 border index (`-1 -> 1`, `n -> n - 2`).
pub(crate) fn reflect(i: i64, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as i64 - 1);
    let m = i.rem_euclid(period);
    if m >= n as i64 {
        (period - m) as usize
    } else {
        m as usize
    }
}

/// Normalized 1-D Gaussian taps for the 5x5 kernel; the 2-D kernel is their
/// outer product.
pub fn gaussian_taps(sigma: f64) -> [f64; 5] {
    let mut k = [-2.0f64, -1.0, 0.0, 1.0, 2.0].map(|d| (-d * d / (2.0 * sigma * sigma)).exp());
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

pub fn gaussian_blur5(img: &ChannelImage, sigma: f64) -> ChannelImage {
    let taps = gaussian_taps(sigma);
    let (w, h) = (img.width(), img.height());
    let mut rows = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, t) in taps.iter().enumerate() {
                acc += t * img.get(reflect(x as i64 + k as i64 - 2, w), y) as f64;
            }
            rows[y * w + x] = acc;
        }
    }
    ChannelImage::from_fn(w, h, |x, y| {
        let mut acc = 0.0;
        for (k, t) in taps.iter().enumerate() {
            acc += t * rows[reflect(y as i64 + k as i64 - 2, h) * w + x];
        }
        acc.round().clamp(0.0, 255.0) as u8
    })
}

/// Histogram-mode threshold over tissue pixels (`<= 250`), decreased once
/// by `decrement` when more than half the tissue lies below the mode.
pub fn select_threshold(blurred_rnascope: &ChannelImage, decrement: u8) -> Result<u8> {
    let mut hist = [0u64; 256];
    for &v in blurred_rnascope.data() {
        hist[v as usize] += 1;
    }
    let tissue: u64 = hist[..=TISSUE_CUTOFF as usize].iter().sum();
    if tissue == 0 {
        return Err(Error::NoTissue);
    }
    let mut thresh = 0u8;
    for v in 1..=TISSUE_CUTOFF {
        if hist[v as usize] > hist[thresh as usize] {
            thresh = v;
        }
    }
    let below: u64 = hist[..thresh as usize].iter().sum();
    if below as f64 / tissue as f64 > 0.5 {
        thresh = thresh.saturating_sub(decrement);
    }
    Ok(thresh)
}

/// Binary mask of pixels strictly darker than `cutoff`.
pub fn dark_regions(blurred_gray: &ChannelImage, cutoff: u8) -> ChannelImage {
    threshold_below(blurred_gray, cutoff)
}

pub(crate) fn threshold_below(img: &ChannelImage, cutoff: u8) -> ChannelImage {
    let data = img.data().iter().map(|&v| (v < cutoff) as u8).collect();
    ChannelImage::new(img.width(), img.height(), data).expect("same dimensions")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateMask {
    pub image: ChannelImage,
    pub thresh: u8,
}

/// Paints RNAscope and dark-region contours into a mask whose background is
/// `thresh`. RNAscope interiors keep their (blurred) intensity, dark regions
/// get `thresh - dark_fill_offset`; overlaps keep the minimum.
pub fn build_mask(
    blurred_rnascope: &ChannelImage,
    thresh: u8,
    rna_contours: &[Contour],
    dark_contours: &[Contour],
    dark_fill_offset: u8,
) -> CandidateMask {
    let (w, h) = (blurred_rnascope.width(), blurred_rnascope.height());
    let mut mask = ChannelImage::filled(w, h, thresh);
    if thresh > 0 {
        let cap = thresh - 1;
        for c in rna_contours {
            fill_contour(c, w, h, |x, y| {
                let v = blurred_rnascope.get(x, y).min(cap);
                if v < mask.get(x, y) {
                    mask.set(x, y, v);
                }
            });
        }
        let dark = thresh.saturating_sub(dark_fill_offset.max(1));
        for c in dark_contours {
            fill_contour(c, w, h, |x, y| {
                if dark < mask.get(x, y) {
                    mask.set(x, y, dark);
                }
            });
        }
    }
    CandidateMask { image: mask, thresh }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Candidate {
    pub x: usize,
    pub y: usize,
    pub intensity: u8,
    pub radius: u32,
}

/// `floor(max(intensity - thresh + 64, 0) / 32)`.
#[inline]
pub fn exclusion_radius(intensity: u8, thresh: u8) -> u32 {
    ((intensity as i32 - thresh as i32 + 64).max(0) / 32) as u32
}

/// Calls `paint` for every in-bounds pixel within Euclidean distance
/// `radius` of `(cx, cy)`.
pub fn for_each_in_disc(
    cx: usize,
    cy: usize,
    radius: u32,
    width: usize,
    height: usize,
    mut paint: impl FnMut(usize, usize),
) {
    let r = radius as i64;
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy > r * r {
                continue;
            }
            let (x, y) = (cx as i64 + dx, cy as i64 + dy);
            if x >= 0 && y >= 0 && (x as usize) < width && (y as usize) < height {
                paint(x as usize, y as usize);
            }
        }
    }
}

/// Greedy extraction: repeatedly take the darkest sub-threshold pixel
/// (ties by row, then column) and paint its exclusion disc with `thresh`.
/// Leaves no pixel below `thresh` in the mask.
pub fn extract_candidates_in_place(mask: &mut CandidateMask) -> Vec<Candidate> {
    let thresh = mask.thresh;
    let img = &mut mask.image;
    let (w, h) = (img.width(), img.height());
    // Painting only ever raises pixels to `thresh`, so the surviving pixels'
    // values never change and one sort gives the global-minimum order.
    let mut order: Vec<(u8, usize)> = img
        .data()
        .iter()
        .enumerate()
        .filter(|&(_, &v)| v < thresh)
        .map(|(i, &v)| (v, i))
        .collect();
    order.sort_unstable();

    let mut out = Vec::new();
    for (v, i) in order {
        if img.data()[i] >= thresh {
            continue;
        }
        let (x, y) = (i % w, i / w);
        let radius = exclusion_radius(v, thresh);
        out.push(Candidate {
            x,
            y,
            intensity: v,
            radius,
        });
        for_each_in_disc(x, y, radius, w, h, |px, py| img.set(px, py, thresh));
    }
    out
}

pub fn extract_candidates(mask: &CandidateMask) -> Vec<Candidate> {
    extract_candidates_in_place(&mut mask.clone())
}

/// Everything the selection stage produced for one patch.
#[derive(Debug, Clone)]
pub struct Selection {
    pub thresh: u8,
    pub mask: CandidateMask,
    pub candidates: Vec<Candidate>,
}

/// Runs the whole stage from the RNAscope plane and the grayscale image.
pub fn select_candidates(rnascope: &ChannelImage, gray: &ChannelImage, params: &CandidateParams) -> Result<Selection> {
    let blurred_rna = gaussian_blur5(rnascope, params.blur_sigma);
    let blurred_gray = gaussian_blur5(gray, params.blur_sigma);
    let thresh = select_threshold(&blurred_rna, params.threshold_decrement)?;
    let rna_contours = find_contours(&threshold_below(&blurred_rna, thresh));
    let dark_contours = find_contours(&dark_regions(&blurred_gray, params.dark_cutoff));
    let mask = build_mask(&blurred_rna, thresh, &rna_contours, &dark_contours, params.dark_fill_offset);
    let candidates = extract_candidates(&mask);
    Ok(Selection {
        thresh,
        mask,
        candidates,
    })
}
