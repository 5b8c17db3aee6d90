//! L2-regularized hinge-loss linear SVM with an unregularized bias.
//!
//! The hinge is replaced by a Huber-smoothed version of width `h`,
//!
//! ```text
//! L_h(z) = 0 (z <= 0),  z^2 / 2h (0 < z < h),  z - h/2 (z >= h),   z = 1 - y (w.x + b)
//! ```
//!
//! whose objective is minimized over `(w, b)` by Newton steps (conjugate
//! gradients on Hessian-vector products, exact line search). `h` shrinks
//! geometrically with warm starts. At each smoothed optimum the weights
//! `a_i = C_i L_h'(z_i)` are dual feasible for the hinge problem, so the
//! duality gap certifies accuracy; training stops once the hinge objective
//! at the best bias for the current `w` is within `tolerance` (relative)
//! of that lower bound.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub c: f64,
    pub tolerance: f64,
    /// Budget of Newton steps over the whole training run.
    pub max_iterations: u64,
    pub balanced: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            tolerance: 1e-7,
            max_iterations: 10_000_000,
            balanced: true,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidInput(format!("C must be positive, got {}", self.c)));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidInput("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

/// `(negative, positive)` weights `n_total / (2 n_class)`.
pub fn balanced_class_weights(labels: &[bool]) -> Result<(f64, f64)> {
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    let n = labels.len() as f64;
    Ok((n / (2.0 * neg as f64), n / (2.0 * pos as f64)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmSolution {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub epochs: u64,
    pub converged: bool,
}

/// Primal objective `1/2 |w|^2 + sum_i C_i hinge(1 - y_i (w.x_i + b))`.
pub fn primal_objective(rows: &[Vec<f64>], labels: &[bool], cfg: &TrainConfig, w: &[f64], b: f64) -> Result<f64> {
    let costs = per_row_cost(labels, cfg)?;
    let reg = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
    let loss: f64 = rows
        .iter()
        .zip(labels)
        .zip(&costs)
        .map(|((x, &l), c)| {
            let y = if l { 1.0 } else { -1.0 };
            c * (1.0 - y * (dot(w, x) + b)).max(0.0)
        })
        .sum();
    Ok(reg + loss)
}

fn per_row_cost(labels: &[bool], cfg: &TrainConfig) -> Result<Vec<f64>> {
    let (wn, wp) = if cfg.balanced {
        balanced_class_weights(labels)?
    } else {
        if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
            return Err(Error::SingleClass);
        }
        (1.0, 1.0)
    };
    Ok(labels.iter().map(|&l| cfg.c * if l { wp } else { wn }).collect())
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Problem<'a> {
    rows: &'a [Vec<f64>],
    y: Vec<f64>,
    cost: Vec<f64>,
}

/// Smoothed objective state at one point.
struct Eval {
    value: f64,
    /// `C_i L_h'(z_i)`, in `[0, C_i]`
    alpha: Vec<f64>,
    grad_w: Vec<f64>,
    grad_b: f64,
}

impl Problem<'_> {
    fn margins(&self, w: &[f64], b: f64) -> Vec<f64> {
        self.rows.iter().zip(&self.y).map(|(x, y)| y * (dot(w, x) + b)).collect()
    }

    fn eval(&self, w: &[f64], b: f64, h: f64) -> Eval {
        let margins = self.margins(w, b);
        let mut value = 0.5 * dot(w, w);
        let mut alpha = vec![0.0; self.rows.len()];
        for (k, m) in margins.iter().enumerate() {
            let z = 1.0 - m;
            if z <= 0.0 {
                continue;
            }
            let c = self.cost[k];
            if z < h {
                value += c * z * z / (2.0 * h);
                alpha[k] = c * z / h;
            } else {
                value += c * (z - 0.5 * h);
                alpha[k] = c;
            }
        }
        let mut grad_w = w.to_vec();
        let mut grad_b = 0.0;
        for (k, x) in self.rows.iter().enumerate() {
            let s = alpha[k] * self.y[k];
            if s != 0.0 {
                grad_b -= s;
                for (g, xj) in grad_w.iter_mut().zip(x) {
                    *g -= s * xj;
                }
            }
        }
        Eval {
            value,
            alpha,
            grad_w,
            grad_b,
        }
    }

    /// Rows inside the quadratic band at `(w, b)`.
    fn band(&self, w: &[f64], b: f64, h: f64) -> Vec<usize> {
        self.margins(w, b)
            .iter()
            .enumerate()
            .filter(|(_, m)| {
                let z = 1.0 - *m;
                z > 0.0 && z < h
            })
            .map(|(k, _)| k)
            .collect()
    }

    /// Newton direction from conjugate gradients on
    /// `(I_w + mu_b + sum_band C/h x~ x~') p = -g`.
    fn newton_direction(&self, band: &[usize], h: f64, ev: &Eval) -> (Vec<f64>, f64) {
        let d = ev.grad_w.len();
        const MU_B: f64 = 1e-10;
        let hess = |v: &[f64], vb: f64| -> (Vec<f64>, f64) {
            let mut out = v.to_vec();
            let mut ob = MU_B * vb;
            for &k in band {
                let x = &self.rows[k];
                let s = self.cost[k] / h * (dot(x, v) + vb);
                ob += s;
                for (o, xj) in out.iter_mut().zip(x) {
                    *o += s * xj;
                }
            }
            (out, ob)
        };
        let mut p = vec![0.0; d];
        let mut pb = 0.0;
        let mut r: Vec<f64> = ev.grad_w.iter().map(|g| -g).collect();
        let mut rb = -ev.grad_b;
        let mut q = r.clone();
        let mut qb = rb;
        let mut rr = dot(&r, &r) + rb * rb;
        let stop = 1e-20f64.max(1e-6 * rr);
        for _ in 0..(2 * (d + 1)).max(10) {
            if rr <= stop {
                break;
            }
            let (hq, hqb) = hess(&q, qb);
            let curv = dot(&q, &hq) + qb * hqb;
            if curv <= 0.0 {
                break;
            }
            let step = rr / curv;
            for j in 0..d {
                p[j] += step * q[j];
                r[j] -= step * hq[j];
            }
            pb += step * qb;
            rb -= step * hqb;
            let next = dot(&r, &r) + rb * rb;
            let beta = next / rr;
            rr = next;
            for j in 0..d {
                q[j] = r[j] + beta * q[j];
            }
            qb = rb + beta * qb;
        }
        if dot(&p, &p) + pb * pb == 0.0 {
            return (r, rb);
        }
        (p, pb)
    }

    /// Exact minimizer of the smoothed objective along `(p, pb)`; the
    /// directional derivative is monotone so it is bracketed and bisected.
    fn line_search(&self, w: &[f64], b: f64, p: &[f64], pb: f64, h: f64) -> f64 {
        let m0 = self.margins(w, b);
        let dm: Vec<f64> = self.rows.iter().zip(&self.y).map(|(x, y)| y * (dot(p, x) + pb)).collect();
        let (wp, pp) = (dot(w, p), dot(p, p));
        let slope = |t: f64| -> f64 {
            let mut g = wp + t * pp;
            for k in 0..m0.len() {
                let z = 1.0 - m0[k] - t * dm[k];
                if z > 0.0 {
                    g -= self.cost[k] * (z / h).min(1.0) * dm[k];
                }
            }
            g
        };
        if slope(0.0) >= 0.0 {
            return 0.0;
        }
        let mut hi = 1.0;
        while slope(hi) < 0.0 {
            hi *= 2.0;
            if hi > 1e12 {
                return hi;
            }
        }
        let mut lo = 0.0;
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if slope(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Hinge dual objective at `alpha` after scaling the heavier class so
    /// that `y'a = 0`; a lower bound on the optimum.
    fn feasible_dual(&self, alpha: &[f64]) -> f64 {
        let (mut pos, mut neg) = (0.0, 0.0);
        for (a, y) in alpha.iter().zip(&self.y) {
            if *y > 0.0 {
                pos += a;
            } else {
                neg += a;
            }
        }
        let (sp, sn) = if pos > neg {
            (neg / pos, 1.0)
        } else if neg > pos {
            (1.0, pos / neg)
        } else {
            (1.0, 1.0)
        };
        let d = self.rows[0].len();
        let mut w = vec![0.0; d];
        for (k, x) in self.rows.iter().enumerate() {
            let s = alpha[k] * self.y[k] * if self.y[k] > 0.0 { sp } else { sn };
            if s != 0.0 {
                for (wj, xj) in w.iter_mut().zip(x) {
                    *wj += s * xj;
                }
            }
        }
        sp * pos + sn * neg - 0.5 * dot(&w, &w)
    }

    /// Hinge objective at `w` with the best bias for it (closest to
    /// `hint`), plus that bias.
    fn hinge_at_best_bias(&self, w: &[f64], hint: f64) -> (f64, f64) {
        let scores: Vec<f64> = self.rows.iter().map(|x| dot(w, x)).collect();
        let (left, right) = optimal_bias_interval(&scores, &self.y, &self.cost);
        let b = hint.clamp(left, right);
        let loss: f64 = scores
            .iter()
            .zip(&self.y)
            .zip(&self.cost)
            .map(|((s, y), c)| c * (1.0 - y * (s + b)).max(0.0))
            .sum();
        (0.5 * dot(w, w) + loss, b)
    }
}

/// Interval of exact minimizers over `b` of the hinge terms for fixed
/// scores. The loss is piecewise linear in `b` with one kink per row, and
/// every kink raises the slope by that row's cost.
fn optimal_bias_interval(scores: &[f64], y: &[f64], cost: &[f64]) -> (f64, f64) {
    let mut kinks: Vec<(f64, f64)> = Vec::with_capacity(scores.len());
    let mut slope = 0.0;
    for k in 0..scores.len() {
        if y[k] > 0.0 {
            slope -= cost[k];
        }
        // margin y_k (s + b) = 1 at b = y_k - s
        kinks.push((y[k] - scores[k], cost[k]));
    }
    kinks.sort_by(|a, b| a.0.total_cmp(&b.0));
    let eps = 1e-12 * cost.iter().sum::<f64>();
    let mut left = None;
    for &(at, c) in &kinks {
        slope += c;
        if left.is_none() && slope >= -eps {
            left = Some(at);
        }
        if slope > eps {
            return (left.unwrap_or(at), at);
        }
    }
    let last = kinks.last().map_or(0.0, |k| k.0);
    (left.unwrap_or(last), last)
}

const INITIAL_SMOOTHING: f64 = 1.0;
const MIN_SMOOTHING: f64 = 1e-12;
const NEWTON_STEPS_PER_STAGE: u64 = 60;

/// Trains on already-normalized rows.
pub fn train_svm(rows: &[Vec<f64>], labels: &[bool], cfg: &TrainConfig) -> Result<SvmSolution> {
    cfg.validate()?;
    if rows.len() != labels.len() {
        return Err(Error::InvalidInput(format!(
            "{} feature rows but {} labels",
            rows.len(),
            labels.len()
        )));
    }
    let cost = per_row_cost(labels, cfg)?;
    let dims = rows[0].len();
    if let Some(bad) = rows.iter().find(|r| r.len() != dims) {
        return Err(Error::DimensionMismatch {
            expected: dims,
            got: bad.len(),
        });
    }
    // the seed fixes the row order, which decides floating-point summation
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
    let shuffled: Vec<Vec<f64>> = order.iter().map(|&k| rows[k].clone()).collect();
    let prob = Problem {
        rows: &shuffled,
        y: order.iter().map(|&k| if labels[k] { 1.0 } else { -1.0 }).collect(),
        cost: order.iter().map(|&k| cost[k]).collect(),
    };

    let mut w = vec![0.0; dims];
    let mut b = 0.0;
    let mut h = INITIAL_SMOOTHING;
    let mut steps = 0u64;
    let mut converged = false;
    let mut best = (f64::INFINITY, w.clone(), b);
    'stages: loop {
        let mut ev = prob.eval(&w, b, h);
        for _ in 0..NEWTON_STEPS_PER_STAGE {
            if steps >= cfg.max_iterations {
                break 'stages;
            }
            steps += 1;
            let band = prob.band(&w, b, h);
            let (p, pb) = prob.newton_direction(&band, h, &ev);
            let t = prob.line_search(&w, b, &p, pb, h);
            if t == 0.0 {
                break;
            }
            for (wj, pj) in w.iter_mut().zip(&p) {
                *wj += t * pj;
            }
            b += t * pb;
            let next = prob.eval(&w, b, h);
            let done = ev.value - next.value <= 1e-15 * next.value.abs().max(1.0);
            ev = next;
            if done {
                break;
            }
        }
        let (primal, bias) = prob.hinge_at_best_bias(&w, b);
        if primal < best.0 {
            best = (primal, w.clone(), bias);
        }
        let gap = best.0 - prob.feasible_dual(&ev.alpha);
        log::trace!("smoothing {h:e}: objective {primal} gap {gap:e}");
        if gap <= cfg.tolerance * best.0.abs().max(1.0) {
            converged = true;
            break;
        }
        if h <= MIN_SMOOTHING {
            break;
        }
        h = (h * 0.1).max(MIN_SMOOTHING);
    }
    let (_, weights, bias) = best;
    Ok(SvmSolution {
        weights,
        bias,
        epochs: steps,
        converged,
    })
}
