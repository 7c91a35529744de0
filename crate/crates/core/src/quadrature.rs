//! Gauss–Legendre quadrature with a cached ladder of rules.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Node counts tried by [`integrate_adaptive`], in order.
pub const LADDER: [usize; 6] = [200, 400, 800, 1600, 3200, 6400];

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `n`-point rule on [-1, 1] by Newton iteration on P_n.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, z);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(mid + half * t))
            .sum::<f64>()
            * half
    }
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (z * p - p0) / (z * z - 1.0);
    (p, d)
}

/// Cached rule for `LADDER[level]`.
pub fn rule(level: usize) -> &'static GaussLegendre {
    static RULES: [OnceLock<GaussLegendre>; LADDER.len()] = [
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
    ];
    RULES[level].get_or_init(|| GaussLegendre::new(LADDER[level]))
}

/// Evaluates `eval` on successive rules of the ladder until two consecutive
/// results agree to `rel_tol` (componentwise, relative to the larger value).
pub fn integrate_adaptive<const N: usize, F>(rel_tol: f64, mut eval: F) -> Result<[f64; N]>
where
    F: FnMut(&GaussLegendre) -> [f64; N],
{
    let mut prev = eval(rule(0));
    for level in 1..LADDER.len() {
        let next = eval(rule(level));
        // components that cancel to ~0 are judged against the largest one
        let floor = next.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let converged = prev.iter().zip(&next).all(|(a, b)| {
            let scale = a.abs().max(b.abs()).max(floor * 1e-3);
            (a - b).abs() <= rel_tol * scale || scale == 0.0
        });
        if converged {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::QuadratureFailure {
        nodes: *LADDER.last().unwrap(),
        tolerance: rel_tol,
    })
}
