//! Gray-level texture matrices over a quantized window.
//!
//! Gray level `i` is stored in row `i - 1`. All neighbourhoods are clipped
//! to the window.

use super::window::{QuantizedWindow, GRAY_LEVELS};

/// Dense `GRAY_LEVELS x cols` matrix of counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountMatrix {
    cols: usize,
    data: Vec<u32>,
}

impl CountMatrix {
    pub fn zeros(cols: usize) -> Self {
        Self {
            cols,
            data: vec![0; GRAY_LEVELS * cols],
        }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Count for gray level `level` (1-based) and column `col`.
    #[inline]
    pub fn get(&self, level: usize, col: usize) -> u32 {
        self.data[(level - 1) * self.cols + col]
    }

    #[inline]
    pub fn add(&mut self, level: usize, col: usize, n: u32) {
        self.data[(level - 1) * self.cols + col] += n;
    }

    pub fn total(&self) -> u64 {
        self.data.iter().map(|&v| v as u64).sum()
    }

    /// `(level, col, count)` for every nonzero cell, row-major.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(move |(k, &v)| (k / self.cols + 1, k % self.cols, v))
    }
}

/// The four unique directions (0, 45, 90, 135 degrees) as `(dx, dy)` with
/// rows growing downward; diagonals are scaled per axis.
pub fn directions(distance: usize) -> [(i64, i64); 4] {
    let d = distance as i64;
    [(d, 0), (d, -d), (0, d), (d, d)]
}

/// Symmetric co-occurrence counts summed over the four directions.
/// Column `j - 1` holds level `j`.
pub fn glcm(q: &QuantizedWindow, distance: usize) -> CountMatrix {
    assert!(distance >= 1);
    let side = q.side() as i64;
    let mut m = CountMatrix::zeros(GRAY_LEVELS);
    for (dx, dy) in directions(distance) {
        for y in 0..side {
            for x in 0..side {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= side || ny >= side {
                    continue;
                }
                let a = q.at(x as usize, y as usize) as usize;
                let b = q.at(nx as usize, ny as usize) as usize;
                m.add(a, b - 1, 1);
                m.add(b, a - 1, 1);
            }
        }
    }
    m
}

/// Maximal same-level runs, summed over the four directions at unit step.
/// Column `len - 1` holds runs of length `len`.
pub fn glrlm(q: &QuantizedWindow) -> CountMatrix {
    let side = q.side() as i64;
    let mut m = CountMatrix::zeros(q.side());
    for (dx, dy) in directions(1) {
        let inside = |x: i64, y: i64| x >= 0 && y >= 0 && x < side && y < side;
        // walk every line from its first pixel
        for y in 0..side {
            for x in 0..side {
                if inside(x - dx, y - dy) {
                    continue;
                }
                let (mut cx, mut cy) = (x, y);
                let mut level = q.at(cx as usize, cy as usize);
                let mut len = 0usize;
                while inside(cx, cy) {
                    let l = q.at(cx as usize, cy as usize);
                    if l == level {
                        len += 1;
                    } else {
                        m.add(level as usize, len - 1, 1);
                        level = l;
                        len = 1;
                    }
                    cx += dx;
                    cy += dy;
                }
                m.add(level as usize, len - 1, 1);
            }
        }
    }
    m
}

/// 8-connected zones of equal level. Column `size - 1` holds zones of
/// `size` pixels.
pub fn glszm(q: &QuantizedWindow) -> CountMatrix {
    let side = q.side();
    let mut m = CountMatrix::zeros(side * side);
    let mut seen = vec![false; side * side];
    let mut stack = Vec::new();
    for start in 0..side * side {
        if seen[start] {
            continue;
        }
        let level = q.levels()[start];
        seen[start] = true;
        stack.push(start);
        let mut size = 0usize;
        while let Some(k) = stack.pop() {
            size += 1;
            let (x, y) = ((k % side) as i64, (k / side) as i64);
            for dy in -1..=1i64 {
                for dx in -1..=1i64 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= side as i64 || ny >= side as i64 {
                        continue;
                    }
                    let n = ny as usize * side + nx as usize;
                    if !seen[n] && q.levels()[n] == level {
                        seen[n] = true;
                        stack.push(n);
                    }
                }
            }
        }
        m.add(level as usize, size - 1, 1);
    }
    m
}

/// Largest possible dependence count at Chebyshev `distance`.
pub fn max_dependence(distance: usize) -> usize {
    (2 * distance + 1) * (2 * distance + 1) - 1
}

/// Gray level dependence: for each pixel, the number of in-window
/// neighbours within Chebyshev `distance` whose level differs by at most
/// `cutoff`. Column `j` holds dependence `j`, starting from 0.
pub fn gldm(q: &QuantizedWindow, distance: usize, cutoff: u8) -> CountMatrix {
    assert!(distance >= 1);
    let side = q.side();
    let d = distance as i64;
    let mut m = CountMatrix::zeros(max_dependence(distance) + 1);
    for y in 0..side {
        for x in 0..side {
            let level = q.at(x, y);
            let (x0, x1) = ((x as i64 - d).max(0) as usize, (x + distance).min(side - 1));
            let (y0, y1) = ((y as i64 - d).max(0) as usize, (y + distance).min(side - 1));
            let mut dep = 0usize;
            for ny in y0..=y1 {
                for nx in x0..=x1 {
                    if q.at(nx, ny).abs_diff(level) <= cutoff {
                        dep += 1;
                    }
                }
            }
            // the centre always matches itself
            m.add(level as usize, dep - 1, 1);
        }
    }
    m
}

/// Neighbouring gray tone difference summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Ngtdm {
    /// Pixels per level, index `level - 1`.
    pub counts: [u32; GRAY_LEVELS],
    /// Sum over those pixels of `|level - neighbourhood mean|`.
    pub s: [f64; GRAY_LEVELS],
    /// Pixels with at least one neighbour.
    pub total: u32,
}

impl Ngtdm {
    pub fn probability(&self, level: usize) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.counts[level - 1] as f64 / self.total as f64
        }
    }
}

pub fn ngtdm(q: &QuantizedWindow, distance: usize) -> Ngtdm {
    assert!(distance >= 1);
    let side = q.side();
    let d = distance as i64;
    let mut out = Ngtdm {
        counts: [0; GRAY_LEVELS],
        s: [0.0; GRAY_LEVELS],
        total: 0,
    };
    for y in 0..side {
        for x in 0..side {
            let (x0, x1) = ((x as i64 - d).max(0) as usize, (x + distance).min(side - 1));
            let (y0, y1) = ((y as i64 - d).max(0) as usize, (y + distance).min(side - 1));
            let mut sum = 0u32;
            for ny in y0..=y1 {
                for nx in x0..=x1 {
                    sum += q.at(nx, ny) as u32;
                }
            }
            let level = q.at(x, y);
            let n = ((x1 - x0 + 1) * (y1 - y0 + 1) - 1) as u32;
            if n == 0 {
                continue;
            }
            let mean = (sum - level as u32) as f64 / n as f64;
            out.counts[level as usize - 1] += 1;
            out.s[level as usize - 1] += (level as f64 - mean).abs();
            out.total += 1;
        }
    }
    out
}
