//! Summaries of first-passage samples and the `x/c1 + B log x + C` fit.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::asymptotics::AsymptoticPrediction;
use crate::error::{Error, Result};

/// Quantile levels reported by [`summarize`].
pub const QUANTILE_LEVELS: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

const MAX_CONDITION: f64 = 1e12;

/// First-passage times collected at one target distance. Only surviving runs
/// that hit contribute samples; the others are counted.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FptSampleSet {
    pub x: f64,
    pub samples: Vec<u64>,
    pub n_extinct: usize,
    pub n_timeout: usize,
    pub master_seed: u64,
    /// Half-open replica index range the samples came from.
    pub replicas: (u64, u64),
}

impl FptSampleSet {
    pub fn new(x: f64, samples: Vec<u64>) -> Self {
        Self {
            x,
            replicas: (0, samples.len() as u64),
            samples,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    /// `(r, t^{(r)})` for each level in [`QUANTILE_LEVELS`].
    pub quantiles: Vec<(f64, u64)>,
}

impl Summary {
    pub fn quantile(&self, r: f64) -> Option<u64> {
        self.quantiles
            .iter()
            .find(|(level, _)| (level - r).abs() < 1e-12)
            .map(|(_, v)| *v)
    }

    pub fn median(&self) -> u64 {
        self.quantile(0.5).expect("median is always reported")
    }
}

/// Lower empirical quantile: the order statistic of rank `ceil(r n)`.
pub fn lower_quantile(sorted: &[u64], r: f64) -> u64 {
    let n = sorted.len();
    let rank = ((r * n as f64) - 1e-9).ceil().max(1.0) as usize;
    sorted[rank.min(n) - 1]
}

pub fn summarize(set: &FptSampleSet) -> Result<Summary> {
    let n = set.samples.len();
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }
    let mut sorted = set.samples.clone();
    sorted.sort_unstable();
    // summing in sorted order makes the result independent of input order
    let mean = sorted.iter().map(|&v| v as f64).sum::<f64>() / n as f64;
    let var = sorted.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok(Summary {
        n,
        mean,
        std: var.sqrt(),
        quantiles: QUANTILE_LEVELS
            .iter()
            .map(|&r| (r, lower_quantile(&sorted, r)))
            .collect(),
    })
}

/// Least-squares fit of `E[τ_x] = a x + B log x + C`, with `a = 1/c1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub inv_c1: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub residual_rms: f64,
    pub c1_hat_empirical: f64,
}

pub fn fit_linear_log(points: &[(f64, f64)]) -> Result<FitResult> {
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 3 {
        return Err(Error::InsufficientSamples {
            needed: 3,
            got: xs.len(),
        });
    }
    if let Some(&(x, _)) = points.iter().find(|p| p.0.is_nan() || p.0 <= 1.0 || !p.1.is_finite()) {
        return Err(Error::ConfigError(format!(
            "fit points need x > 1 and finite means, got x = {x}"
        )));
    }

    let n = points.len();
    let mut design = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => points[i].0,
        1 => points[i].0.ln(),
        _ => 1.0,
    });
    // equilibrate columns before judging the conditioning
    let scales: Vec<f64> = (0..3).map(|j| design.column(j).norm()).collect();
    for (j, s) in scales.iter().enumerate() {
        design.column_mut(j).unscale_mut(*s);
    }
    let y = DVector::from_iterator(n, points.iter().map(|p| p.1));

    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > MAX_CONDITION {
        return Err(Error::SingularDesign { condition });
    }
    let coef = svd.solve(&y, 0.0).map_err(|_| Error::SingularDesign { condition })?;
    let (a, b, c) = (coef[0] / scales[0], coef[1] / scales[1], coef[2] / scales[2]);

    let residual_rms = (points
        .iter()
        .map(|&(x, m)| (m - (a * x + b * x.ln() + c)).powi(2))
        .sum::<f64>()
        / n as f64)
        .sqrt();
    Ok(FitResult {
        inv_c1: a,
        b,
        c,
        residual_rms,
        c1_hat_empirical: 1.0 / a,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TightnessReport {
    pub std_by_x: Vec<(f64, f64)>,
    /// Largest standard deviation over the smallest.
    pub max_ratio: f64,
}

pub fn tightness_report(sets: &[FptSampleSet]) -> Result<TightnessReport> {
    let mut xs: Vec<f64> = sets.iter().map(|s| s.x).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: xs.len(),
        });
    }
    let std_by_x = sets
        .iter()
        .map(|s| summarize(s).map(|sum| (s.x, sum.std)))
        .collect::<Result<Vec<_>>>()?;
    let max = std_by_x.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let min = std_by_x.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let max_ratio = if max == min { 1.0 } else { max / min };
    Ok(TightnessReport { std_by_x, max_ratio })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryGap {
    pub gap_mean: f64,
    pub gap_median: f64,
}

/// Empirical mean and median minus the predicted total.
pub fn compare_to_theory(set: &FptSampleSet, prediction: &AsymptoticPrediction) -> Result<TheoryGap> {
    if (set.x - prediction.x).abs() > 1e-9 * set.x.abs().max(1.0) {
        return Err(Error::ConfigError(format!(
            "sample set at x = {} compared with a prediction at x = {}",
            set.x, prediction.x
        )));
    }
    let s = summarize(set)?;
    Ok(TheoryGap {
        gap_mean: s.mean - prediction.total,
        gap_median: s.median() as f64 - prediction.total,
    })
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn ols_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: points.len(),
        });
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::SingularDesign {
            condition: f64::INFINITY,
        });
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(sxy / sxx)
}

/// Slope of `log(count / x)` against `x`, skipping empty counts.
pub fn frontier_slope(counts: &[(f64, u64)]) -> Result<f64> {
    let points: Vec<(f64, f64)> = counts
        .iter()
        .filter(|(_, c)| *c > 0)
        .map(|&(x, c)| (x, (c as f64 / x).ln()))
        .collect();
    ols_slope(&points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::predict_a;

    #[test]
    fn constant_samples() {
        let s = summarize(&FptSampleSet::new(10.0, vec![5, 5, 5])).unwrap();
        assert_eq!(s.mean, 5.0);
        assert_eq!(s.std, 0.0);
    }

    #[test]
    fn median_is_lower_order_statistic() {
        let s = summarize(&FptSampleSet::new(10.0, (1..=100).collect())).unwrap();
        assert_eq!(s.median(), 50);
        assert_eq!(s.quantile(0.05), Some(5));
        assert_eq!(s.quantile(0.95), Some(95));
    }

    #[test]
    fn two_point_std() {
        let s = summarize(&FptSampleSet::new(10.0, vec![2, 4])).unwrap();
        assert_eq!(s.mean, 3.0);
        assert!((s.std - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(
            summarize(&FptSampleSet::new(10.0, vec![3])),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn exact_three_point_fit() {
        let pts: Vec<(f64, f64)> = [10.0, 20.0, 40.0]
            .iter()
            .map(|&x: &f64| (x, 2.0 * x + 3.0 * x.ln() + 1.0))
            .collect();
        let f = fit_linear_log(&pts).unwrap();
        assert!((f.inv_c1 - 2.0).abs() < 1e-9);
        assert!((f.b - 3.0).abs() < 1e-9);
        assert!((f.c - 1.0).abs() < 1e-9);
        assert!(f.residual_rms < 1e-9);
    }

    #[test]
    fn fit_recovers_theoretical_speed() {
        let c = (2.0 * 2f64.ln()).sqrt();
        let lx = 65.5;
        let pts: Vec<(f64, f64)> = [0.25, 0.5, 0.75, 1.0]
            .iter()
            .map(|f| {
                let x = f * lx;
                (x, predict_a(x, c, c, 3).unwrap().total)
            })
            .collect();
        assert_eq!(pts[0].0, 16.375);
        let fit = fit_linear_log(&pts).unwrap();
        assert!((fit.c1_hat_empirical - c).abs() < 1e-9);
    }

    #[test]
    fn two_points_are_underdetermined() {
        assert!(fit_linear_log(&[(2.0, 1.0), (3.0, 2.0)]).is_err());
        assert!(fit_linear_log(&[(2.0, 1.0), (2.0, 1.5), (3.0, 2.0)]).is_err());
    }

    #[test]
    fn nearly_coincident_design_is_singular() {
        let pts = [(5.0, 1.0), (5.0 + 1e-7, 1.0), (5.0 + 2e-7, 1.0)];
        assert!(matches!(fit_linear_log(&pts), Err(Error::SingularDesign { .. })));
    }

    #[test]
    fn tightness_ratios() {
        let a = FptSampleSet::new(10.0, vec![1, 2, 3, 4]);
        let b = FptSampleSet::new(20.0, vec![11, 12, 13, 14]);
        assert_eq!(tightness_report(&[a.clone(), b]).unwrap().max_ratio, 1.0);

        // std 2 and std 3
        let c = FptSampleSet::new(10.0, vec![8, 12]);
        let d = FptSampleSet {
            x: 20.0,
            samples: vec![10, 13, 16],
            ..Default::default()
        };
        let r = tightness_report(&[c, d]).unwrap();
        assert!((r.std_by_x[0].1 - 8f64.sqrt()).abs() < 1e-12);
        assert!((r.max_ratio - 3.0 / 8f64.sqrt()).abs() < 1e-12);
        assert!(tightness_report(&[a]).is_err());
    }

    #[test]
    fn std_ratio_two_to_three() {
        let c = FptSampleSet::new(10.0, vec![0, 2, 4]);
        let d = FptSampleSet::new(20.0, vec![0, 3, 6]);
        let r = tightness_report(&[c, d]).unwrap();
        assert!((r.max_ratio - 1.5).abs() < 1e-15);
    }

    #[test]
    fn gap_of_rounded_prediction() {
        let p = predict_a(20.0, 1.2, 1.1, 3).unwrap();
        let t = p.total.round() as u64;
        let g = compare_to_theory(&FptSampleSet::new(20.0, vec![t; 10]), &p).unwrap();
        assert!(g.gap_mean.abs() <= 0.5);
        let shifted = compare_to_theory(&FptSampleSet::new(20.0, vec![t + 4; 10]), &p).unwrap();
        assert!((shifted.gap_mean - g.gap_mean - 4.0).abs() < 1e-12);
        assert!((shifted.gap_median - g.gap_median - 4.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_x_rejected() {
        let p = predict_a(20.0, 1.0, 1.0, 3).unwrap();
        assert!(compare_to_theory(&FptSampleSet::new(10.0, vec![1, 2]), &p).is_err());
    }

    #[test]
    fn slope_of_exponential_counts() {
        let counts: Vec<(f64, u64)> = (1..=5)
            .map(|k| {
                let x = 2.0 * k as f64;
                (x, (x * (0.8 * x).exp()).round() as u64)
            })
            .collect();
        assert!((frontier_slope(&counts).unwrap() - 0.8).abs() < 0.01);
    }
}
