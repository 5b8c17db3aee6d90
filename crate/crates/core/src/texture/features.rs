//! Scalar texture features. Names and formulas follow the usual radiomics
//! conventions; entropies are base 2 and skip empty cells.

use nalgebra::DMatrix;

use super::matrices::{CountMatrix, Ngtdm};
use super::window::{quantize_value, Window, GRAY_LEVELS};

/// Returned by coarseness when every gray tone difference is zero.
pub const COARSENESS_CAP: f64 = 1e6;

fn entropy(probs: impl Iterator<Item = f64>) -> f64 {
    -probs.filter(|&p| p > 0.0).map(|p| p * p.log2()).sum::<f64>()
}

/// Sum of squared raw values.
pub fn feature_energy(w: &Window) -> f64 {
    w.values().iter().map(|&v| (v as f64) * (v as f64)).sum()
}

/// Population variance of raw values.
pub fn feature_variance(w: &Window) -> f64 {
    let n = w.values().len() as f64;
    let mean = w.values().iter().map(|&v| v as f64).sum::<f64>() / n;
    w.values().iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / n
}

pub const FIRSTORDER_NAMES: [&str; 18] = [
    "Energy",
    "TotalEnergy",
    "Entropy",
    "Minimum",
    "10Percentile",
    "90Percentile",
    "Maximum",
    "Mean",
    "Median",
    "InterquartileRange",
    "Range",
    "MeanAbsoluteDeviation",
    "RobustMeanAbsoluteDeviation",
    "RootMeanSquared",
    "Skewness",
    "Kurtosis",
    "Variance",
    "Uniformity",
];

/// Linear-interpolated percentile of sorted data, `q` in `[0, 1]`.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// First-order statistics in [`FIRSTORDER_NAMES`] order. Entropy and
/// uniformity use the quantized histogram; everything else raw values.
/// Pixel area is 1, so total energy equals energy.
pub fn firstorder_features(w: &Window) -> [f64; 18] {
    let mut sorted: Vec<f64> = w.values().iter().map(|&v| v as f64).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let energy = feature_energy(w);
    let variance = feature_variance(w);
    let (m3, m4) = sorted.iter().fold((0.0, 0.0), |(a, b), &x| {
        let d = x - mean;
        (a + d * d * d, b + d * d * d * d)
    });
    let (m3, m4) = (m3 / n, m4 / n);
    let (skewness, kurtosis) = if variance > 0.0 {
        (m3 / variance.powf(1.5), m4 / (variance * variance))
    } else {
        (0.0, 0.0)
    };
    let p10 = percentile(&sorted, 0.10);
    let p90 = percentile(&sorted, 0.90);
    let p25 = percentile(&sorted, 0.25);
    let p75 = percentile(&sorted, 0.75);
    let mad = sorted.iter().map(|x| (x - mean).abs()).sum::<f64>() / n;
    let robust: Vec<f64> = sorted.iter().copied().filter(|&x| x >= p10 && x <= p90).collect();
    let robust_mean = robust.iter().sum::<f64>() / robust.len() as f64;
    let rmad = robust.iter().map(|x| (x - robust_mean).abs()).sum::<f64>() / robust.len() as f64;

    let mut hist = [0u32; GRAY_LEVELS];
    for &v in w.values() {
        hist[quantize_value(v) as usize - 1] += 1;
    }
    let probs = hist.map(|c| c as f64 / n);

    [
        energy,
        energy,
        entropy(probs.iter().copied()),
        sorted[0],
        p10,
        p90,
        sorted[sorted.len() - 1],
        mean,
        percentile(&sorted, 0.5),
        p75 - p25,
        sorted[sorted.len() - 1] - sorted[0],
        mad,
        rmad,
        (energy / n).sqrt(),
        skewness,
        kurtosis,
        variance,
        probs.iter().map(|p| p * p).sum(),
    ]
}

pub const GLCM_NAMES: [&str; 24] = [
    "Autocorrelation",
    "JointAverage",
    "ClusterProminence",
    "ClusterShade",
    "ClusterTendency",
    "Contrast",
    "Correlation",
    "DifferenceAverage",
    "DifferenceEntropy",
    "DifferenceVariance",
    "JointEnergy",
    "JointEntropy",
    "Imc1",
    "Imc2",
    "Idm",
    "Idmn",
    "Id",
    "Idn",
    "InverseVariance",
    "MaximumProbability",
    "SumAverage",
    "SumEntropy",
    "SumSquares",
    "MCC",
];

/// Features of a symmetric co-occurrence matrix, [`GLCM_NAMES`] order.
/// Correlation-type features are 0 when the marginal variance is 0.
pub fn glcm_features(m: &CountMatrix) -> [f64; 24] {
    let ng = GRAY_LEVELS;
    let total = m.total() as f64;
    let mut p = vec![0.0f64; ng * ng];
    for (i, j0, c) in m.nonzero() {
        p[(i - 1) * ng + j0] = c as f64 / total;
    }
    let pij = |i: usize, j: usize| p[(i - 1) * ng + (j - 1)];
    let levels = 1..=ng;

    let mut px = vec![0.0f64; ng + 1];
    let mut py = vec![0.0f64; ng + 1];
    let mut psum = vec![0.0f64; 2 * ng + 1];
    let mut pdiff = vec![0.0f64; ng];
    for i in levels.clone() {
        for j in levels.clone() {
            let v = pij(i, j);
            px[i] += v;
            py[j] += v;
            psum[i + j] += v;
            pdiff[i.abs_diff(j)] += v;
        }
    }
    let mux: f64 = levels.clone().map(|i| i as f64 * px[i]).sum();
    let muy: f64 = levels.clone().map(|j| j as f64 * py[j]).sum();
    let varx: f64 = levels.clone().map(|i| (i as f64 - mux).powi(2) * px[i]).sum();
    let vary: f64 = levels.clone().map(|j| (j as f64 - muy).powi(2) * py[j]).sum();

    let (mut autocorr, mut prom, mut shade, mut tend, mut contrast) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut energy, mut idm, mut idmn, mut id, mut idn, mut invvar, mut maxp) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0f64);
    let (mut hxy, mut hxy1, mut hxy2) = (0.0, 0.0, 0.0);
    let ngf = ng as f64;
    for i in levels.clone() {
        for j in levels.clone() {
            let pxpy = px[i] * py[j];
            if pxpy > 0.0 {
                hxy2 -= pxpy * pxpy.log2();
            }
            let v = pij(i, j);
            if v == 0.0 {
                continue;
            }
            let (fi, fj) = (i as f64, j as f64);
            let d = fi - fj;
            let s = fi + fj - mux - muy;
            autocorr += fi * fj * v;
            prom += s.powi(4) * v;
            shade += s.powi(3) * v;
            tend += s * s * v;
            contrast += d * d * v;
            energy += v * v;
            idm += v / (1.0 + d * d);
            idmn += v / (1.0 + d * d / (ngf * ngf));
            id += v / (1.0 + d.abs());
            idn += v / (1.0 + d.abs() / ngf);
            if i != j {
                invvar += v / (d * d);
            }
            maxp = maxp.max(v);
            hxy -= v * v.log2();
            hxy1 -= v * pxpy.log2();
        }
    }
    let correlation = if varx > 0.0 && vary > 0.0 {
        (autocorr - mux * muy) / (varx.sqrt() * vary.sqrt())
    } else {
        0.0
    };
    let diff_avg: f64 = pdiff.iter().enumerate().map(|(k, &v)| k as f64 * v).sum();
    let diff_var: f64 = pdiff.iter().enumerate().map(|(k, &v)| (k as f64 - diff_avg).powi(2) * v).sum();
    let sum_avg: f64 = psum.iter().enumerate().map(|(k, &v)| k as f64 * v).sum();
    let hx = entropy(px.iter().copied());
    let hy = entropy(py.iter().copied());
    let imc1 = if hx.max(hy) > 0.0 { (hxy - hxy1) / hx.max(hy) } else { 0.0 };
    let imc2 = (1.0 - (-2.0 * (hxy2 - hxy)).exp()).max(0.0).sqrt();

    [
        autocorr,
        mux,
        prom,
        shade,
        tend,
        contrast,
        correlation,
        diff_avg,
        entropy(pdiff.iter().copied()),
        diff_var,
        energy,
        hxy,
        imc1,
        imc2,
        idm,
        idmn,
        id,
        idn,
        invvar,
        maxp,
        sum_avg,
        entropy(psum.iter().copied()),
        varx,
        mcc(&p, &px, &py),
    ]
}

/// Maximal correlation coefficient: square root of the second largest
/// eigenvalue of `Q(i,j) = sum_k p(i,k) p(j,k) / (px(i) py(k))`, computed
/// through the symmetric similar matrix `A A^T` with
/// `A = Dx^-1/2 P Dy^-1/2`.
fn mcc(p: &[f64], px: &[f64], py: &[f64]) -> f64 {
    let ng = GRAY_LEVELS;
    let rows: Vec<usize> = (1..=ng).filter(|&i| px[i] > 0.0).collect();
    let cols: Vec<usize> = (1..=ng).filter(|&j| py[j] > 0.0).collect();
    if rows.len() < 2 || cols.len() < 2 {
        return 0.0;
    }
    let a = DMatrix::from_fn(rows.len(), cols.len(), |r, c| {
        let (i, j) = (rows[r], cols[c]);
        p[(i - 1) * ng + (j - 1)] / (px[i] * py[j]).sqrt()
    });
    let mut eig: Vec<f64> = (&a * a.transpose()).symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|x, y| y.partial_cmp(x).unwrap());
    eig[1].clamp(0.0, 1.0).sqrt()
}

/// Row-level / column-value emphasis statistics shared by the run length,
/// size zone and dependence matrices.
struct EmphasisStats {
    n: f64,
    small: f64,
    large: f64,
    gln: f64,
    sn: f64,
    glv: f64,
    sv: f64,
    entropy: f64,
    low_gray: f64,
    high_gray: f64,
    small_low: f64,
    small_high: f64,
    large_low: f64,
    large_high: f64,
}

/// `small_j(col)` is the column value used in `1/j^2` terms, `large_j(col)`
/// the one used in `j^2` terms and in the size mean/variance.
fn emphasis_stats(m: &CountMatrix, small_j: impl Fn(usize) -> f64, large_j: impl Fn(usize) -> f64) -> EmphasisStats {
    let n = m.total() as f64;
    let mut rows = [0.0f64; GRAY_LEVELS];
    let mut cols = vec![0.0f64; m.cols()];
    let mut s = EmphasisStats {
        n,
        small: 0.0,
        large: 0.0,
        gln: 0.0,
        sn: 0.0,
        glv: 0.0,
        sv: 0.0,
        entropy: 0.0,
        low_gray: 0.0,
        high_gray: 0.0,
        small_low: 0.0,
        small_high: 0.0,
        large_low: 0.0,
        large_high: 0.0,
    };
    let (mut mu_i, mut mu_j) = (0.0, 0.0);
    for (i, col, c) in m.nonzero() {
        let c = c as f64;
        let i2 = (i * i) as f64;
        let js = small_j(col);
        let js2 = js * js;
        let jl = large_j(col);
        let jl2 = jl * jl;
        rows[i - 1] += c;
        cols[col] += c;
        s.small += c / js2;
        s.large += c * jl2;
        s.low_gray += c / i2;
        s.high_gray += c * i2;
        s.small_low += c / (i2 * js2);
        s.small_high += c * i2 / js2;
        s.large_low += c * jl2 / i2;
        s.large_high += c * i2 * jl2;
        let p = c / n;
        mu_i += i as f64 * p;
        mu_j += jl * p;
        s.entropy -= p * p.log2();
    }
    for (i, col, c) in m.nonzero() {
        let p = c as f64 / n;
        s.glv += p * (i as f64 - mu_i).powi(2);
        s.sv += p * (large_j(col) - mu_j).powi(2);
    }
    s.gln = rows.iter().map(|r| r * r).sum();
    s.sn = cols.iter().map(|c| c * c).sum();
    for v in [
        &mut s.small,
        &mut s.large,
        &mut s.gln,
        &mut s.sn,
        &mut s.low_gray,
        &mut s.high_gray,
        &mut s.small_low,
        &mut s.small_high,
        &mut s.large_low,
        &mut s.large_high,
    ] {
        *v /= n;
    }
    s
}

pub const GLRLM_NAMES: [&str; 16] = [
    "ShortRunEmphasis",
    "LongRunEmphasis",
    "GrayLevelNonUniformity",
    "GrayLevelNonUniformityNormalized",
    "RunLengthNonUniformity",
    "RunLengthNonUniformityNormalized",
    "RunPercentage",
    "GrayLevelVariance",
    "RunVariance",
    "RunEntropy",
    "LowGrayLevelRunEmphasis",
    "HighGrayLevelRunEmphasis",
    "ShortRunLowGrayLevelEmphasis",
    "ShortRunHighGrayLevelEmphasis",
    "LongRunLowGrayLevelEmphasis",
    "LongRunHighGrayLevelEmphasis",
];

/// `pixels` is the number of pixels each direction covers; the matrix is a
/// sum over four directions.
pub fn glrlm_features(m: &CountMatrix, pixels: usize) -> [f64; 16] {
    let len = |col: usize| (col + 1) as f64;
    let s = emphasis_stats(m, len, len);
    [
        s.small,
        s.large,
        s.gln,
        s.gln / s.n,
        s.sn,
        s.sn / s.n,
        s.n / (4 * pixels) as f64,
        s.glv,
        s.sv,
        s.entropy,
        s.low_gray,
        s.high_gray,
        s.small_low,
        s.small_high,
        s.large_low,
        s.large_high,
    ]
}

pub const GLSZM_NAMES: [&str; 16] = [
    "SmallAreaEmphasis",
    "LargeAreaEmphasis",
    "GrayLevelNonUniformity",
    "GrayLevelNonUniformityNormalized",
    "SizeZoneNonUniformity",
    "SizeZoneNonUniformityNormalized",
    "ZonePercentage",
    "GrayLevelVariance",
    "ZoneVariance",
    "ZoneEntropy",
    "LowGrayLevelZoneEmphasis",
    "HighGrayLevelZoneEmphasis",
    "SmallAreaLowGrayLevelEmphasis",
    "SmallAreaHighGrayLevelEmphasis",
    "LargeAreaLowGrayLevelEmphasis",
    "LargeAreaHighGrayLevelEmphasis",
];

/// Large area high gray level emphasis, `sum P(i,z) i^2 z^2 / Nz`.
pub fn feature_lahgle(m: &CountMatrix) -> f64 {
    let nz = m.total() as f64;
    m.nonzero()
        .map(|(i, col, c)| {
            let z = (col + 1) as f64;
            c as f64 * (i * i) as f64 * z * z
        })
        .sum::<f64>()
        / nz
}

pub fn glszm_features(m: &CountMatrix, pixels: usize) -> [f64; 16] {
    let size = |col: usize| (col + 1) as f64;
    let s = emphasis_stats(m, size, size);
    [
        s.small,
        s.large,
        s.gln,
        s.gln / s.n,
        s.sn,
        s.sn / s.n,
        s.n / pixels as f64,
        s.glv,
        s.sv,
        s.entropy,
        s.low_gray,
        s.high_gray,
        s.small_low,
        s.small_high,
        s.large_low,
        feature_lahgle(m),
    ]
}

pub const GLDM_NAMES: [&str; 14] = [
    "SmallDependenceEmphasis",
    "LargeDependenceEmphasis",
    "GrayLevelNonUniformity",
    "DependenceNonUniformity",
    "DependenceNonUniformityNormalized",
    "GrayLevelVariance",
    "DependenceVariance",
    "DependenceEntropy",
    "LowGrayLevelEmphasis",
    "HighGrayLevelEmphasis",
    "SmallDependenceLowGrayLevelEmphasis",
    "SmallDependenceHighGrayLevelEmphasis",
    "LargeDependenceLowGrayLevelEmphasis",
    "LargeDependenceHighGrayLevelEmphasis",
];

/// Large dependence high gray level emphasis, `sum P(i,j) i^2 j^2 / Nz`
/// with `j` the neighbour count (0 allowed).
pub fn feature_ldhgle(m: &CountMatrix) -> f64 {
    let nz = m.total() as f64;
    m.nonzero()
        .map(|(i, j, c)| c as f64 * (i * i) as f64 * (j * j) as f64)
        .sum::<f64>()
        / nz
}

/// Dependence features. Small-dependence emphases divide by `(j + 1)^2`,
/// counting the centre pixel, since `j` can be 0; large-dependence terms
/// and the dependence variance use `j` itself.
pub fn gldm_features(m: &CountMatrix) -> [f64; 14] {
    let s = emphasis_stats(m, |col| (col + 1) as f64, |col| col as f64);
    [
        s.small,
        s.large,
        s.gln,
        s.sn,
        s.sn / s.n,
        s.glv,
        s.sv,
        s.entropy,
        s.low_gray,
        s.high_gray,
        s.small_low,
        s.small_high,
        s.large_low,
        feature_ldhgle(m),
    ]
}

pub const NGTDM_NAMES: [&str; 5] = ["Coarseness", "Contrast", "Busyness", "Complexity", "Strength"];

/// `1 / sum p_i s_i`, capped at [`COARSENESS_CAP`] when the sum is zero.
pub fn feature_coarseness(n: &Ngtdm) -> f64 {
    let denom: f64 = (1..=GRAY_LEVELS).map(|i| n.probability(i) * n.s[i - 1]).sum();
    if denom == 0.0 {
        COARSENESS_CAP
    } else {
        1.0 / denom
    }
}

pub fn ngtdm_features(n: &Ngtdm) -> [f64; 5] {
    let occupied: Vec<(f64, f64, f64)> = (1..=GRAY_LEVELS)
        .filter(|&i| n.counts[i - 1] > 0)
        .map(|i| (i as f64, n.probability(i), n.s[i - 1]))
        .collect();
    let ngp = occupied.len() as f64;
    let nvp = n.total as f64;
    let s_total: f64 = occupied.iter().map(|o| o.2).sum();
    let ps_total: f64 = occupied.iter().map(|o| o.1 * o.2).sum();

    let (mut pair_sq, mut busy_denom, mut complexity, mut strength) = (0.0, 0.0, 0.0, 0.0);
    for &(i, pi, si) in &occupied {
        for &(j, pj, sj) in &occupied {
            let d = i - j;
            pair_sq += pi * pj * d * d;
            busy_denom += (i * pi - j * pj).abs();
            complexity += d.abs() * (pi * si + pj * sj) / (pi + pj);
            strength += (pi + pj) * d * d;
        }
    }
    let contrast = if ngp > 1.0 {
        pair_sq / (ngp * (ngp - 1.0)) * s_total / nvp
    } else {
        0.0
    };
    let busyness = if ngp > 1.0 && busy_denom > 0.0 { ps_total / busy_denom } else { 0.0 };
    let strength = if s_total > 0.0 { strength / s_total } else { 0.0 };
    [feature_coarseness(n), contrast, busyness, complexity / nvp, strength]
}
