//! Brute-force reference computations shared by the integration tests. None
//! of these call into the solver code paths they are compared with.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes a unimodal `f` on `[a, b]` by golden-section search.
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Grid search of `f` on `[lo, hi]` with spacing `step`, refined by golden
/// section inside the neighbouring cells. Returns `(argmax, max)`.
pub fn grid_golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> (f64, f64) {
    let n = ((hi - lo) / step).round() as usize;
    let mut best = (lo, f(lo));
    for i in 1..=n {
        let t = lo + i as f64 * step;
        let v = f(t);
        if v > best.1 {
            best = (t, v);
        }
    }
    let a = (best.0 - step).max(lo);
    let b = (best.0 + step).min(hi);
    let t = golden_max(&f, a, b, 1e-13);
    (t, f(t))
}

/// `sup_λ (λ x − Λ(λ))` for a one-dimensional `Λ`, searching `λ ∈ [0, 50]`
/// (or `[-50, 0]` for negative `x`) at step 1e-4.
pub fn legendre_1d(log_mgf: impl Fn(f64) -> f64, x: f64) -> (f64, f64) {
    let obj = |l: f64| l * x - log_mgf(l);
    if x >= 0.0 {
        grid_golden_max(obj, 0.0, 50.0, 1e-4)
    } else {
        grid_golden_max(obj, -50.0, 0.0, 1e-4)
    }
}

/// `sup_λ (λ·x − Λ(λ))` in several dimensions by cyclic coordinate ascent;
/// each coordinate update is a grid search plus golden section. Returns
/// `(maximizer, value)`.
pub fn legendre_nd(log_mgf: impl Fn(&[f64]) -> f64, x: &[f64]) -> (Vec<f64>, f64) {
    let d = x.len();
    let mut lambda = vec![0.0; d];
    let obj = |l: &[f64]| l.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() - log_mgf(l);
    let mut width: f64 = 30.0;
    for _sweep in 0..2000 {
        let mut biggest: f64 = 0.0;
        for i in 0..d {
            let centre = lambda[i];
            let f = |t: f64| {
                let mut trial = lambda.clone();
                trial[i] = t;
                obj(&trial)
            };
            let (t, _) = grid_golden_max(f, centre - width, centre + width, width / 20.0);
            biggest = biggest.max((t - centre).abs());
            lambda[i] = t;
        }
        if biggest < 1e-7 {
            break;
        }
        width = (4.0 * biggest).clamp(1e-6, width);
    }
    let v = obj(&lambda);
    (lambda, v)
}

/// Root of the nondecreasing `g` by sign change on a grid of spacing `step`
/// starting at `lo`: binary search over grid indices, then linear
/// interpolation between the bracketing grid points.
pub fn grid_root(g: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> f64 {
    let (mut i, mut j) = (0usize, ((hi - lo) / step).ceil() as usize);
    assert!(g(lo) < 0.0 && g(lo + j as f64 * step) > 0.0);
    while j - i > 1 {
        let m = (i + j) / 2;
        if g(lo + m as f64 * step) < 0.0 {
            i = m;
        } else {
            j = m;
        }
    }
    let (a, b) = (lo + i as f64 * step, lo + j as f64 * step);
    let (ga, gb) = (g(a), g(b));
    a + (b - a) * (-ga) / (gb - ga)
}

/// First-coordinate speed constant from a one-dimensional log-MGF, by the
/// double-grid construction (grid in `c`, grid-plus-golden Legendre at each
/// `c`).
pub fn c1_double_grid(log_mgf: impl Fn(f64) -> f64 + Copy, rho: f64, c_hi: f64) -> f64 {
    grid_root(|c| legendre_1d(log_mgf, c).1 - rho.ln(), 1e-5, c_hi, 1e-5)
}

/// `log(sinh l / l)` written as `|l| + log(1 − e^{−2|l|}) − log 2 − log |l|`.
pub fn log_sinh_over(l: f64) -> f64 {
    let a = l.abs();
    if a < 1e-4 {
        return a * a / 6.0 - a.powi(4) / 180.0;
    }
    a + (-(-2.0 * a).exp()).ln_1p() - 2f64.ln() - a.ln()
}

pub fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// First column of `m⁻¹` by cofactors.
pub fn inverse_first_column3(m: &[[f64; 3]; 3]) -> [f64; 3] {
    let det = det3(m);
    [
        (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det,
        -(m[1][0] * m[2][2] - m[1][2] * m[2][0]) / det,
        (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det,
    ]
}

/// `A Aᵀ + 0.5 I` for a random `A` with entries in `[-1, 1]`.
pub fn random_spd3<R: Rng>(rng: &mut R) -> [[f64; 3]; 3] {
    let a: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = (0..3).map(|k| a[3 * i + k] * a[3 * j + k]).sum::<f64>();
        }
        m[i][i] += 0.5;
    }
    m
}

pub fn flat3(m: &[[f64; 3]; 3]) -> Vec<f64> {
    m.iter().flatten().copied().collect()
}

/// `E #{v : η_v ≥ t}` after `n` generations for a walk with Uniform[−1, 1]
/// steps and mean offspring `rho`, from the exponentially tilted n-fold
/// convolution of a midpoint-discretized uniform law with cell width `h`.
pub fn expected_count_uniform(n: usize, rho: f64, tilt: f64, thresholds: &[f64], h: f64) -> Vec<f64> {
    let cells = (2.0 / h).round() as usize;
    let points: Vec<f64> = (0..cells).map(|k| -1.0 + (k as f64 + 0.5) * h).collect();
    let raw: Vec<f64> = points.iter().map(|t| (tilt * t).exp()).collect();
    let total: f64 = raw.iter().sum();
    let kernel: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let log_mgf = (total / cells as f64).ln();

    // density of the tilted sum on the lattice offset + k h
    let mut dens = vec![1.0];
    let mut offset = 0.0;
    for _ in 0..n {
        let mut next = vec![0.0; dens.len() + cells - 1];
        for (i, &p) in dens.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (k, &q) in kernel.iter().enumerate() {
                next[i + k] += p * q;
            }
        }
        dens = next;
        offset += points[0];
    }
    let log_scale = n as f64 * (rho.ln() + log_mgf);
    thresholds
        .iter()
        .map(|&t| {
            let tail: f64 = dens
                .iter()
                .enumerate()
                .map(|(i, &p)| (offset + i as f64 * h, p))
                .filter(|(s, _)| *s >= t)
                .map(|(s, p)| p * (-tilt * s).exp())
                .sum();
            (log_scale + tail.ln()).exp()
        })
        .collect()
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_statistic(a: &[u64], b: &[u64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] == v {
            i += 1;
        }
        while j < b.len() && b[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}
