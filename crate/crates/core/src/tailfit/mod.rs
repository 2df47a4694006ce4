//! Power-law tail estimation: continuous maximum-likelihood exponent and the
//! lower cutoff x_min chosen by minimizing the Kolmogorov–Smirnov distance
//! between the tail and its fitted Pareto law.

use crate::error::{Error, Result};
use crate::ingest::ReturnSeries;
use serde::{Deserialize, Serialize};

pub const DEFAULT_MIN_TAIL: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

impl std::str::FromStr for Side {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            _ => Err(Error::Input(format!("tail side must be left or right, got '{s}'"))),
        }
    }
}

/// Exponent estimate and its standard error (α̂ − 1)/√n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaEstimate {
    pub alpha: f64,
    pub se: f64,
}

/// α̂ = 1 + n / Σ ln(x_i/x_min) for a continuous Pareto tail.
pub fn alpha_mle(tail: &[f64], x_min: f64) -> Result<AlphaEstimate> {
    if !(x_min > 0.0) {
        return Err(Error::Input(format!("x_min must be positive, got {x_min}")));
    }
    if let Some(x) = tail.iter().find(|&&x| !(x >= x_min)) {
        return Err(Error::Input(format!("tail value {x} lies below x_min = {x_min}")));
    }
    let n = tail.len() as f64;
    // summed in sorted order so the estimate does not depend on input order
    let mut logs: Vec<f64> = tail.iter().map(|&x| (x / x_min).ln()).collect();
    logs.sort_by(f64::total_cmp);
    let s: f64 = logs.iter().sum();
    if !(s > 0.0) {
        return Err(Error::Input("all tail values equal x_min; the exponent is undefined".into()));
    }
    let alpha = 1.0 + n / s;
    Ok(AlphaEstimate { alpha, se: (alpha - 1.0) / n.sqrt() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub x_min: f64,
    pub alpha: f64,
    pub ks: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct TailOptions {
    /// Fewest tail points a candidate may leave.
    pub min_tail: usize,
    /// Scan every distinct value from this quantile up (default: upper quartile).
    pub start_quantile: f64,
    /// Evenly thin the default candidates to at most this many.
    pub max_candidates: Option<usize>,
}

impl Default for TailOptions {
    fn default() -> Self {
        Self { min_tail: DEFAULT_MIN_TAIL, start_quantile: 0.75, max_candidates: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFitReport {
    pub side: Side,
    pub alpha: f64,
    pub alpha_se: f64,
    pub x_min: f64,
    pub n_tail: usize,
    pub ks_at_xmin: f64,
    pub scan: Vec<ScanPoint>,
}

/// KS distance between a sorted tail, given by its logs `ln_y` (the first
/// being ln x_min), and the Pareto law with exponent `alpha`.
fn pareto_ks(ln_y: &[f64], alpha: f64) -> f64 {
    let m = ln_y.len() as f64;
    let l0 = ln_y[0];
    let mut d: f64 = 0.0;
    for (i, &l) in ln_y.iter().enumerate() {
        let f = -((1.0 - alpha) * (l - l0)).exp_m1();
        d = d.max((i + 1) as f64 / m - f).max(f - i as f64 / m);
    }
    d
}

/// Scans x_min candidates and keeps the one with the smallest KS distance
/// (the smallest such x_min on ties). `side` only labels the report.
pub fn xmin_scan(data: &[f64], candidates: Option<&[f64]>, side: Side, opts: &TailOptions) -> Result<TailFitReport> {
    if data.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Input("tail scan needs positive finite data".into()));
    }
    if data.len() < 100 {
        return Err(Error::Input(format!("tail scan needs at least 100 positive points, got {}", data.len())));
    }
    let mut x = data.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len();
    if n < opts.min_tail {
        return Err(Error::Input(format!("only {n} points, fewer than the minimum tail of {}", opts.min_tail)));
    }
    let ln_x: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    // suffix sums of ln x give each candidate's log-sum in O(1)
    let mut suffix = vec![0.0; n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1] + ln_x[i];
    }
    let last_start = n - opts.min_tail;
    let starts: Vec<usize> = match candidates {
        Some(c) => {
            if c.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::Input("x_min candidates must be strictly increasing".into()));
            }
            c.iter().map(|&v| x.partition_point(|&y| y < v)).filter(|&k| k <= last_start).collect()
        }
        None => {
            let first = ((n - 1) as f64 * opts.start_quantile).floor() as usize;
            let mut s: Vec<usize> = (first..=last_start).filter(|&k| k == 0 || x[k] != x[k - 1]).collect();
            if let Some(cap) = opts.max_candidates {
                if s.len() > cap && cap > 0 {
                    let step = s.len() as f64 / cap as f64;
                    s = (0..cap).map(|j| s[(j as f64 * step) as usize]).collect();
                }
            }
            s
        }
    };
    let mut scan = Vec::with_capacity(starts.len());
    let mut best: Option<(usize, f64, AlphaEstimate)> = None;
    for &k in &starts {
        let m = (n - k) as f64;
        let log_sum = suffix[k] - m * ln_x[k];
        if !(log_sum > 0.0) {
            continue;
        }
        let alpha = 1.0 + m / log_sum;
        let ks = pareto_ks(&ln_x[k..], alpha);
        scan.push(ScanPoint { x_min: x[k], alpha, ks });
        if best.is_none_or(|(_, b, _)| ks < b) {
            best = Some((k, ks, AlphaEstimate { alpha, se: (alpha - 1.0) / m.sqrt() }));
        }
    }
    let Some((k, ks, est)) = best else {
        return Err(Error::Input(format!("no x_min candidate leaves at least {} distinct tail points", opts.min_tail)));
    };
    Ok(TailFitReport { side, alpha: est.alpha, alpha_se: est.se, x_min: x[k], n_tail: n - k, ks_at_xmin: ks, scan })
}

/// Magnitudes of the returns on one side: positive returns for the right
/// tail, negated negative returns for the left.
pub fn tail_values(values: &[f64], side: Side) -> Vec<f64> {
    match side {
        Side::Right => values.iter().copied().filter(|v| *v > 0.0).collect(),
        Side::Left => values.iter().filter(|v| **v < 0.0).map(|v| -v).collect(),
    }
}

pub fn tail_fit(series: &ReturnSeries, side: Side, opts: &TailOptions) -> Result<TailFitReport> {
    if series.standardization().is_identity() {
        log::warn!("tail fit on an unstandardized series; x_min is in raw return units");
    }
    let t = tail_values(series.values(), side);
    if t.is_empty() {
        return Err(Error::Input(format!("the {} tail is empty", side.as_str())));
    }
    xmin_scan(&t, None, side, opts)
}

/// Empirical complementary CDF points (x, P(X ≥ x)) of positive data, for log-log plots.
pub fn ccdf(data: &[f64]) -> Vec<(f64, f64)> {
    let mut x = data.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    x.iter().enumerate().map(|(i, &v)| (v, (n - i as f64) / n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pareto(n: usize, alpha: f64, x_min: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| x_min * (1.0 - rng.random::<f64>()).powf(-1.0 / (alpha - 1.0))).collect()
    }

    #[test]
    fn alpha_examples() {
        let e = alpha_mle(&[std::f64::consts::E * 2.0], 2.0).unwrap();
        assert!((e.alpha - 2.0).abs() < 1e-15);
        assert!(alpha_mle(&[3.0, 3.0], 3.0).is_err());
        assert!(alpha_mle(&[1.0], 2.0).is_err());
        let x = pareto(100_000, 4.6, 7.76, 1);
        let e = alpha_mle(&x, 7.76).unwrap();
        assert!((e.alpha - 4.6).abs() < 0.04, "{e:?}");
        let mut y = x.clone();
        y.reverse();
        assert_eq!(alpha_mle(&y, 7.76).unwrap().alpha, e.alpha);
    }

    #[test]
    fn pure_pareto_scan() {
        let x = pareto(100_000, 3.0, 1.0, 2);
        let r = xmin_scan(&x, None, Side::Right, &TailOptions { start_quantile: 0.0, max_candidates: Some(400), ..Default::default() })
            .unwrap();
        assert!(r.x_min <= 1.2 && (r.alpha - 3.0).abs() < 0.05, "{} {}", r.x_min, r.alpha);
        assert!(r.scan.iter().all(|p| p.ks >= r.ks_at_xmin));
    }

    #[test]
    fn lognormal_splice() {
        use rand_distr::{Distribution, LogNormal};
        let body = LogNormal::new(0.5, 0.6).unwrap();
        let mut hits = 0;
        for run in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(run);
            // lognormal below 5, Pareto with the return-tail exponent 4.6 above
            let mut x: Vec<f64> = Vec::with_capacity(10_000);
            while x.len() < 8000 {
                let v = body.sample(&mut rng);
                if v < 5.0 {
                    x.push(v);
                }
            }
            for _ in 0..2000 {
                x.push(5.0 * (1.0 - rng.random::<f64>()).powf(-1.0 / 3.6));
            }
            let r = xmin_scan(&x, None, Side::Right, &TailOptions::default()).unwrap();
            if (4.0..=6.5).contains(&r.x_min) {
                hits += 1;
            }
        }
        assert!(hits >= 90, "{hits}");
    }

    #[test]
    fn scale_equivariance_and_errors() {
        let x = pareto(2000, 3.5, 2.0, 3);
        let a = xmin_scan(&x, None, Side::Right, &TailOptions::default()).unwrap();
        let y: Vec<f64> = x.iter().map(|v| v * 3.0).collect();
        let b = xmin_scan(&y, None, Side::Right, &TailOptions::default()).unwrap();
        assert!((b.x_min / a.x_min - 3.0).abs() < 1e-12);
        assert!((b.alpha - a.alpha).abs() < 1e-6);
        assert!(xmin_scan(&x[..40], None, Side::Right, &TailOptions::default()).is_err());
        let series = ReturnSeries::single_day(x.clone(), 15).unwrap();
        assert!(tail_fit(&series, Side::Left, &TailOptions::default()).is_err());
    }

    #[test]
    fn symmetric_sides_agree() {
        let x = pareto(3000, 4.0, 1.0, 4);
        let both: Vec<f64> = x.iter().flat_map(|v| [*v, -v]).collect();
        let s = ReturnSeries::single_day(both, 15).unwrap();
        let l = tail_fit(&s, Side::Left, &TailOptions::default()).unwrap();
        let r = tail_fit(&s, Side::Right, &TailOptions::default()).unwrap();
        assert_eq!((l.alpha, l.x_min, l.n_tail), (r.alpha, r.x_min, r.n_tail));
    }
}
