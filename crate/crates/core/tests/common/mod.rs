//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rnaseg_core::image::Point;
use rnaseg_core::model::{primal_objective, TrainConfig};
use rnaseg_core::texture::{CountMatrix, Family, Ngtdm, QuantizedWindow, Window, GRAY_LEVELS};

pub const NG: usize = GRAY_LEVELS;

/// Dense `(NG + 1) x cols` table indexed by gray level directly; row 0 unused.
pub type Dense = Vec<Vec<u64>>;

pub fn dense(m: &CountMatrix) -> Dense {
    (0..=NG)
        .map(|i| (0..m.cols()).map(|c| if i == 0 { 0 } else { m.get(i, c) as u64 }).collect())
        .collect()
}

fn pixels(q: &QuantizedWindow) -> Vec<(i64, i64, usize)> {
    let s = q.side();
    (0..s * s)
        .map(|k| ((k % s) as i64, (k / s) as i64, q.levels()[k] as usize))
        .collect()
}

fn chebyshev(a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

/// Every ordered pixel pair is tested against the four offsets at angle
/// 0, 45, 90 and 135 degrees; both orders are counted.
pub fn naive_glcm(q: &QuantizedWindow, d: usize) -> Dense {
    let d = d as i64;
    let offsets = [(d, 0), (d, -d), (0, d), (d, d)];
    let px = pixels(q);
    let mut m = vec![vec![0u64; NG]; NG + 1];
    for &(x1, y1, a) in &px {
        for &(x2, y2, b) in &px {
            for &(dx, dy) in &offsets {
                if x2 - x1 == dx && y2 - y1 == dy {
                    m[a][b - 1] += 1;
                    m[b][a - 1] += 1;
                }
            }
        }
    }
    m
}

/// A run starts wherever the previous pixel along the direction is absent
/// or has another level, and extends while the level repeats.
pub fn naive_glrlm(q: &QuantizedWindow) -> Dense {
    let s = q.side() as i64;
    let level = |x: i64, y: i64| -> Option<u8> {
        (x >= 0 && y >= 0 && x < s && y < s).then(|| q.at(x as usize, y as usize))
    };
    let mut m = vec![vec![0u64; q.side()]; NG + 1];
    for (dx, dy) in [(1, 0), (1, -1), (0, 1), (1, 1)] {
        for y in 0..s {
            for x in 0..s {
                let here = level(x, y);
                if level(x - dx, y - dy) == here {
                    continue;
                }
                let mut len = 1;
                while level(x + len * dx, y + len * dy) == here {
                    len += 1;
                }
                m[here.unwrap() as usize][len as usize - 1] += 1;
            }
        }
    }
    m
}

fn find(parent: &mut [usize], mut k: usize) -> usize {
    while parent[k] != k {
        parent[k] = parent[parent[k]];
        k = parent[k];
    }
    k
}

/// Union-find over all 8-adjacent pairs with equal level.
pub fn naive_glszm(q: &QuantizedWindow) -> Dense {
    let px = pixels(q);
    let n = px.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for a in 0..n {
        for b in a + 1..n {
            let (pa, pb) = (px[a], px[b]);
            if pa.2 == pb.2 && chebyshev((pa.0, pa.1), (pb.0, pb.1)) == 1 {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
        }
    }
    let mut size = vec![0usize; n];
    for k in 0..n {
        let r = find(&mut parent, k);
        size[r] += 1;
    }
    let mut m = vec![vec![0u64; n]; NG + 1];
    for k in 0..n {
        if size[k] > 0 {
            m[px[k].2][size[k] - 1] += 1;
        }
    }
    m
}

pub fn naive_gldm(q: &QuantizedWindow, d: usize, cutoff: u8) -> Dense {
    let px = pixels(q);
    let cols = (2 * d + 1) * (2 * d + 1);
    let mut m = vec![vec![0u64; cols]; NG + 1];
    for (a, &(x, y, l)) in px.iter().enumerate() {
        let dep = px
            .iter()
            .enumerate()
            .filter(|&(b, &(x2, y2, l2))| {
                b != a && chebyshev((x, y), (x2, y2)) <= d as i64 && l.abs_diff(l2) <= cutoff as usize
            })
            .count();
        m[l][dep] += 1;
    }
    m
}

/// Per level: pixel count, summed `|i - neighbourhood mean|`; plus the
/// number of pixels that had neighbours.
pub fn naive_ngtdm(q: &QuantizedWindow, d: usize) -> (Vec<u64>, Vec<f64>, u64) {
    let px = pixels(q);
    let mut n = vec![0u64; NG + 1];
    let mut s = vec![0.0f64; NG + 1];
    let mut total = 0;
    for (a, &(x, y, l)) in px.iter().enumerate() {
        let neigh: Vec<usize> = px
            .iter()
            .enumerate()
            .filter(|&(b, &(x2, y2, _))| b != a && chebyshev((x, y), (x2, y2)) <= d as i64)
            .map(|(_, p)| p.2)
            .collect();
        if neigh.is_empty() {
            continue;
        }
        let mean = neigh.iter().sum::<usize>() as f64 / neigh.len() as f64;
        n[l] += 1;
        s[l] += (l as f64 - mean).abs();
        total += 1;
    }
    (n, s, total)
}

pub fn ngtdm_as_naive(n: &Ngtdm) -> (Vec<u64>, Vec<f64>, u64) {
    let mut counts = vec![0u64; NG + 1];
    let mut s = vec![0.0; NG + 1];
    for i in 1..=NG {
        counts[i] = n.counts[i - 1] as u64;
        s[i] = n.s[i - 1];
    }
    (counts, s, n.total as u64)
}

fn h(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

fn lin_percentile(sorted: &[f64], q: f64) -> f64 {
    let rank = q * (sorted.len() as f64 - 1.0);
    let (lo, frac) = (rank.floor(), rank - rank.floor());
    let lo = lo as usize;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac
    }
}

pub fn oracle_firstorder(w: &Window) -> Vec<f64> {
    let x: Vec<f64> = w.values().iter().map(|&v| v as f64).collect();
    let n = x.len() as f64;
    let mut sorted = x.clone();
    sorted.sort_by(f64::total_cmp);
    let mean = x.iter().sum::<f64>() / n;
    let moment = |k: i32| x.iter().map(|v| (v - mean).powi(k)).sum::<f64>() / n;
    let var = moment(2);
    let energy: f64 = x.iter().map(|v| v * v).sum();
    let p10 = lin_percentile(&sorted, 0.1);
    let p90 = lin_percentile(&sorted, 0.9);
    let mid: Vec<f64> = x.iter().copied().filter(|v| (p10..=p90).contains(v)).collect();
    let mid_mean = mid.iter().sum::<f64>() / mid.len() as f64;
    let mut hist = vec![0.0; NG + 1];
    for &v in w.values() {
        hist[v as usize / 8 + 1] += 1.0 / n;
    }
    vec![
        energy,
        energy,
        hist.iter().map(|&p| h(p)).sum(),
        sorted[0],
        p10,
        p90,
        *sorted.last().unwrap(),
        mean,
        lin_percentile(&sorted, 0.5),
        lin_percentile(&sorted, 0.75) - lin_percentile(&sorted, 0.25),
        sorted.last().unwrap() - sorted[0],
        x.iter().map(|v| (v - mean).abs()).sum::<f64>() / n,
        mid.iter().map(|v| (v - mid_mean).abs()).sum::<f64>() / mid.len() as f64,
        (energy / n).sqrt(),
        if var > 0.0 { moment(3) / var.powf(1.5) } else { 0.0 },
        if var > 0.0 { moment(4) / (var * var) } else { 0.0 },
        var,
        hist.iter().map(|p| p * p).sum(),
    ]
}

pub fn oracle_glcm(m: &Dense) -> Vec<f64> {
    let total: u64 = m.iter().flatten().sum();
    let p = |i: usize, j: usize| m[i][j - 1] as f64 / total as f64;
    let lv = || 1..=NG;
    let px: Vec<f64> = (0..=NG).map(|i| if i == 0 { 0.0 } else { lv().map(|j| p(i, j)).sum() }).collect();
    let py: Vec<f64> = (0..=NG).map(|j| if j == 0 { 0.0 } else { lv().map(|i| p(i, j)).sum() }).collect();
    let sum_p = |k: usize| -> f64 { lv().flat_map(|i| lv().map(move |j| (i, j))).filter(|&(i, j)| i + j == k).map(|(i, j)| p(i, j)).sum() };
    let diff_p = |k: usize| -> f64 { lv().flat_map(|i| lv().map(move |j| (i, j))).filter(|&(i, j)| i.abs_diff(j) == k).map(|(i, j)| p(i, j)).sum() };
    let ux: f64 = lv().map(|i| i as f64 * px[i]).sum();
    let uy: f64 = lv().map(|j| j as f64 * py[j]).sum();
    let sx = lv().map(|i| (i as f64 - ux).powi(2) * px[i]).sum::<f64>().sqrt();
    let sy = lv().map(|j| (j as f64 - uy).powi(2) * py[j]).sum::<f64>().sqrt();
    let sum2 = |f: &dyn Fn(usize, usize, f64) -> f64| -> f64 { lv().map(|i| lv().map(|j| f(i, j, p(i, j))).sum::<f64>()).sum() };
    let ngf = NG as f64;

    let autocorr = sum2(&|i, j, v| (i * j) as f64 * v);
    let hxy = sum2(&|_, _, v| h(v));
    let hxy1 = sum2(&|i, j, v| if v > 0.0 { -v * (px[i] * py[j]).log2() } else { 0.0 });
    let hxy2 = sum2(&|i, j, _| h(px[i] * py[j]));
    let hx: f64 = lv().map(|i| h(px[i])).sum();
    let hy: f64 = lv().map(|j| h(py[j])).sum();
    let diffs: Vec<f64> = (0..NG).map(diff_p).collect();
    let sums: Vec<f64> = (2..=2 * NG).map(sum_p).collect();
    let diff_avg: f64 = diffs.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
    let maxp = lv().flat_map(|i| lv().map(move |j| (i, j))).map(|(i, j)| p(i, j)).fold(0.0, f64::max);
    let shift = |i: usize, j: usize| i as f64 + j as f64 - ux - uy;

    vec![
        autocorr,
        ux,
        sum2(&|i, j, v| shift(i, j).powi(4) * v),
        sum2(&|i, j, v| shift(i, j).powi(3) * v),
        sum2(&|i, j, v| shift(i, j).powi(2) * v),
        sum2(&|i, j, v| (i as f64 - j as f64).powi(2) * v),
        if sx > 0.0 && sy > 0.0 { (autocorr - ux * uy) / (sx * sy) } else { 0.0 },
        diff_avg,
        diffs.iter().map(|&v| h(v)).sum(),
        diffs.iter().enumerate().map(|(k, v)| (k as f64 - diff_avg).powi(2) * v).sum(),
        sum2(&|_, _, v| v * v),
        hxy,
        if hx.max(hy) > 0.0 { (hxy - hxy1) / hx.max(hy) } else { 0.0 },
        (1.0 - (-2.0 * (hxy2 - hxy)).exp()).max(0.0).sqrt(),
        sum2(&|i, j, v| v / (1.0 + (i as f64 - j as f64).powi(2))),
        sum2(&|i, j, v| v / (1.0 + (i as f64 - j as f64).powi(2) / (ngf * ngf))),
        sum2(&|i, j, v| v / (1.0 + i.abs_diff(j) as f64)),
        sum2(&|i, j, v| v / (1.0 + i.abs_diff(j) as f64 / ngf)),
        sum2(&|i, j, v| if i == j { 0.0 } else { v / (i as f64 - j as f64).powi(2) }),
        maxp,
        sums.iter().enumerate().map(|(k, v)| (k + 2) as f64 * v).sum(),
        sums.iter().map(|&v| h(v)).sum(),
        sx * sx,
        oracle_mcc(&p, &px, &py),
    ]
}

/// Square root of the second largest eigenvalue of the non-symmetric
/// `Q(i,j) = sum_k p(i,k) p(j,k) / (px(i) py(k))` over occupied levels.
fn oracle_mcc(p: &dyn Fn(usize, usize) -> f64, px: &[f64], py: &[f64]) -> f64 {
    let occ: Vec<usize> = (1..=NG).filter(|&i| px[i] > 0.0).collect();
    if occ.len() < 2 {
        return 0.0;
    }
    let q = DMatrix::from_fn(occ.len(), occ.len(), |a, b| {
        let (i, j) = (occ[a], occ[b]);
        (1..=NG)
            .filter(|&k| py[k] > 0.0)
            .map(|k| p(i, k) * p(j, k) / (px[i] * py[k]))
            .sum()
    });
    let schur = nalgebra::linalg::Schur::try_new(q, 1e-15, 100_000).expect("Schur iteration did not converge");
    let mut eig: Vec<f64> = schur.complex_eigenvalues().iter().map(|c| c.re).collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    eig[1].clamp(0.0, 1.0).sqrt()
}

/// Shared emphasis statistics of a level-by-column matrix where the
/// column's value is `jv(col)` and `js(col)` is used for the small
/// emphasis denominators.
fn emphasis(m: &Dense, js: &dyn Fn(usize) -> f64, jv: &dyn Fn(usize) -> f64) -> Vec<f64> {
    let cells: Vec<(f64, usize, f64)> = (1..=NG)
        .flat_map(|i| (0..m[i].len()).map(move |c| (i, c)))
        .filter(|&(i, c)| m[i][c] > 0)
        .map(|(i, c)| (i as f64, c, m[i][c] as f64))
        .collect();
    let n: f64 = cells.iter().map(|c| c.2).sum();
    let avg = |f: &dyn Fn(f64, usize) -> f64| cells.iter().map(|&(i, c, v)| v * f(i, c)).sum::<f64>() / n;
    let mut row = vec![0.0; NG + 1];
    let mut col = vec![0.0; m[1].len()];
    for &(i, c, v) in &cells {
        row[i as usize] += v;
        col[c] += v;
    }
    let mi = avg(&|i, _| i);
    let mj = avg(&|_, c| jv(c));
    vec![
        avg(&|_, c| 1.0 / js(c).powi(2)),
        avg(&|_, c| jv(c).powi(2)),
        row.iter().map(|r| r * r).sum::<f64>() / n,
        col.iter().map(|r| r * r).sum::<f64>() / n,
        avg(&|i, _| (i - mi).powi(2)),
        avg(&|_, c| (jv(c) - mj).powi(2)),
        cells.iter().map(|c| h(c.2 / n)).sum(),
        avg(&|i, _| 1.0 / (i * i)),
        avg(&|i, _| i * i),
        avg(&|i, c| 1.0 / (i * i * js(c).powi(2))),
        avg(&|i, c| i * i / js(c).powi(2)),
        avg(&|i, c| jv(c).powi(2) / (i * i)),
        avg(&|i, c| i * i * jv(c).powi(2)),
        n,
    ]
}

/// Run-length features for a matrix summed over four directions, each
/// covering `pixels` pixels.
pub fn oracle_glrlm(m: &Dense, pixels: usize) -> Vec<f64> {
    let e = emphasis(m, &|c| (c + 1) as f64, &|c| (c + 1) as f64);
    let n = e[13];
    vec![
        e[0], e[1], e[2], e[2] / n, e[3], e[3] / n, n / (4 * pixels) as f64, e[4], e[5], e[6], e[7], e[8], e[9], e[10],
        e[11], e[12],
    ]
}

pub fn oracle_glszm(m: &Dense, pixels: usize) -> Vec<f64> {
    let e = emphasis(m, &|c| (c + 1) as f64, &|c| (c + 1) as f64);
    let n = e[13];
    vec![
        e[0], e[1], e[2], e[2] / n, e[3], e[3] / n, n / pixels as f64, e[4], e[5], e[6], e[7], e[8], e[9], e[10], e[11],
        e[12],
    ]
}

/// Column `c` is dependence `c`; small emphases use `c + 1`.
pub fn oracle_gldm(m: &Dense) -> Vec<f64> {
    let e = emphasis(m, &|c| (c + 1) as f64, &|c| c as f64);
    let n = e[13];
    vec![e[0], e[1], e[2], e[3], e[3] / n, e[4], e[5], e[6], e[7], e[8], e[9], e[10], e[11], e[12]]
}

pub fn oracle_ngtdm(counts: &[u64], s: &[f64], total: u64) -> Vec<f64> {
    let nv = total as f64;
    let p = |i: usize| if total == 0 { 0.0 } else { counts[i] as f64 / nv };
    let occ: Vec<usize> = (1..=NG).filter(|&i| counts[i] > 0).collect();
    let ngp = occ.len() as f64;
    let ps: f64 = occ.iter().map(|&i| p(i) * s[i]).sum();
    let s_sum: f64 = occ.iter().map(|&i| s[i]).sum();
    let pairs = || occ.iter().flat_map(|&i| occ.iter().map(move |&j| (i as f64, j as f64, i, j)));
    let coarseness = if ps == 0.0 { 1e6 } else { 1.0 / ps };
    let contrast = if ngp > 1.0 {
        pairs().map(|(i, j, a, b)| p(a) * p(b) * (i - j).powi(2)).sum::<f64>() / (ngp * (ngp - 1.0)) * s_sum / nv
    } else {
        0.0
    };
    let busy_den: f64 = pairs().map(|(i, j, a, b)| (i * p(a) - j * p(b)).abs()).sum();
    let busyness = if ngp > 1.0 && busy_den > 0.0 { ps / busy_den } else { 0.0 };
    let complexity = pairs()
        .map(|(i, j, a, b)| (i - j).abs() * (p(a) * s[a] + p(b) * s[b]) / (p(a) + p(b)))
        .sum::<f64>()
        / nv;
    let strength = if s_sum > 0.0 {
        pairs().map(|(i, j, a, b)| (p(a) + p(b)) * (i - j).powi(2)).sum::<f64>() / s_sum
    } else {
        0.0
    };
    vec![coarseness, contrast, busyness, complexity, strength]
}

/// `|a - b| <= rel * max(|a|, |b|)`, with a tiny absolute allowance for
/// quantities that are zero in exact arithmetic.
pub fn close(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs()) + 1e-12
}

/// Windows that mix noise, few-level patches and smooth ramps so runs,
/// zones and dependences all get exercised.
pub fn random_window(rng: &mut ChaCha8Rng, side: usize) -> Window {
    let n = side * side;
    let values: Vec<u8> = match rng.random_range(0..4) {
        0 => (0..n).map(|_| rng.random()).collect(),
        1 => {
            let palette: Vec<u8> = (0..rng.random_range(1..=4)).map(|_| rng.random()).collect();
            (0..n).map(|_| palette[rng.random_range(0..palette.len())]).collect()
        }
        2 => {
            let (a, b): (f64, f64) = (rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0));
            let base: f64 = rng.random_range(0.0..255.0);
            (0..n)
                .map(|k| {
                    let (x, y) = ((k % side) as f64, (k / side) as f64);
                    (base + a * x + b * y + rng.random_range(-6.0..6.0)).clamp(0.0, 255.0) as u8
                })
                .collect()
        }
        _ => {
            let lo: u8 = rng.random_range(0..200);
            (0..n).map(|_| lo + rng.random_range(0..56)).collect()
        }
    };
    Window::new(side, values)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Zooming grid search for the SVM primal minimum over `(w, b)`.
pub fn grid_optimum(rows: &[Vec<f64>], labels: &[bool], cfg: &TrainConfig) -> f64 {
    let dims = rows[0].len();
    let obj = |p: &[f64]| primal_objective(rows, labels, cfg, &p[..dims], p[dims]).unwrap();
    let mut centre = vec![0.0; dims + 1];
    let mut best = obj(&centre);
    let steps = 10i64;
    let side = (2 * steps + 1) as usize;
    let mut half = 8.0;
    while half > 1e-9 {
        loop {
            let mut improved = false;
            for code in 0..side.pow(dims as u32 + 1) {
                let mut p = centre.clone();
                let mut c = code;
                for v in p.iter_mut() {
                    *v += half * ((c % side) as i64 - steps) as f64 / steps as f64;
                    c /= side;
                }
                let o = obj(&p);
                if o < best - 1e-15 {
                    best = o;
                    centre = p;
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
        half *= 0.5;
    }
    best
}

/// Linearly separable 2-D points with a margin around `x + 0.5 y = 0.2`.
pub fn separable_toy(seed: u64, n: usize) -> (Vec<Vec<f64>>, Vec<bool>) {
    let mut r = rng(seed);
    let (mut rows, mut labels) = (Vec::new(), Vec::new());
    while rows.len() < n {
        let p: [f64; 2] = [r.random_range(-2.0..2.0), r.random_range(-2.0..2.0)];
        let s = p[0] + 0.5 * p[1] - 0.2;
        if s.abs() < 0.3 {
            continue;
        }
        labels.push(s > 0.0);
        rows.push(p.to_vec());
    }
    (rows, labels)
}

/// Size of the largest one-to-one matching with pairs closer than `radius`,
/// by trying every injection of the smaller side into the larger.
pub fn brute_force_matching(a: &[Point], b: &[Point], radius: f64) -> usize {
    fn go(i: usize, a: &[Point], b: &[Point], used: &mut [bool], radius: f64) -> usize {
        if i == a.len() {
            return 0;
        }
        let mut best = go(i + 1, a, b, used, radius);
        for j in 0..b.len() {
            if !used[j] && a[i].dist(&b[j]) < radius {
                used[j] = true;
                best = best.max(1 + go(i + 1, a, b, used, radius));
                used[j] = false;
            }
        }
        best
    }
    go(0, a, b, &mut vec![false; b.len()], radius)
}

fn compare(what: &str, got: &[f64], want: &[f64], names: &[&str]) -> Result<(), String> {
    for (k, (g, w)) in got.iter().zip(want).enumerate() {
        // MCC is compared on the eigenvalue scale.
        let mcc_ok = names[k] == "MCC" && (g * g - w * w).abs() <= 1e-12;
        if !close(*g, *w, 1e-9) && !mcc_ok {
            return Err(format!("{what} {}: got {g:e}, oracle {w:e}", names[k]));
        }
    }
    Ok(())
}

/// Matrices and features of one family on one window, checked against the
/// brute-force builders at every distance and cutoff.
pub fn check_family(family: Family, w: &Window) -> Result<(), String> {
    use rnaseg_core::texture::*;
    let q = w.quantize();
    let px = w.side() * w.side();
    match family {
        Family::FirstOrder => compare("firstorder", &firstorder_features(w), &oracle_firstorder(w), &FIRSTORDER_NAMES),
        Family::Glcm => {
            for d in DISTANCES {
                let m = glcm(&q, d);
                let want = naive_glcm(&q, d);
                if dense(&m) != want {
                    return Err(format!("glcm d{d} counts differ"));
                }
                compare(&format!("glcm d{d}"), &glcm_features(&m), &oracle_glcm(&want), &GLCM_NAMES)?;
            }
            Ok(())
        }
        Family::Glrlm => {
            let m = glrlm(&q);
            let want = naive_glrlm(&q);
            if dense(&m) != want {
                return Err("glrlm counts differ".into());
            }
            compare("glrlm", &glrlm_features(&m, px), &oracle_glrlm(&want, px), &GLRLM_NAMES)
        }
        Family::Glszm => {
            let m = glszm(&q);
            let want = naive_glszm(&q);
            if dense(&m) != want {
                return Err("glszm counts differ".into());
            }
            compare("glszm", &glszm_features(&m, px), &oracle_glszm(&want, px), &GLSZM_NAMES)
        }
        Family::Gldm => {
            for d in DISTANCES {
                for a in GLDM_CUTOFFS {
                    let m = gldm(&q, d, a);
                    let want = naive_gldm(&q, d, a);
                    if dense(&m) != want {
                        return Err(format!("gldm d{d} a{a} counts differ"));
                    }
                    compare(&format!("gldm d{d} a{a}"), &gldm_features(&m), &oracle_gldm(&want), &GLDM_NAMES)?;
                }
            }
            Ok(())
        }
        Family::Ngtdm => {
            for d in DISTANCES {
                let n = ngtdm(&q, d);
                let (counts, s, total) = naive_ngtdm(&q, d);
                let (gc, gs, gt) = ngtdm_as_naive(&n);
                if gc != counts || gt != total {
                    return Err(format!("ngtdm d{d} counts differ"));
                }
                for i in 1..=NG {
                    if !close(gs[i], s[i], 1e-12) {
                        return Err(format!("ngtdm d{d} s[{i}]: got {}, oracle {}", gs[i], s[i]));
                    }
                }
                compare(&format!("ngtdm d{d}"), &ngtdm_features(&n), &oracle_ngtdm(&counts, &s, total), &NGTDM_NAMES)?;
            }
            Ok(())
        }
    }
}
