//! Goodness-of-fit statistics (χ², Kolmogorov–Smirnov, Anderson–Darling,
//! Cramér–von Mises), their asymptotic critical points, and a parametric
//! bootstrap p-value.
//!
//! The EDF statistics work on the probability-integral transforms
//! u_i = F(x_(i)) of the sorted sample; the `*_stat` wrappers take a CDF
//! callback and the `*_from_probs` functions take the u_i directly.

use crate::distributions::{Family, Model, Params};
use crate::error::{Error, Result};
use crate::estimation::{fit, FitOptions};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::collections::BTreeMap;

/// Default χ² bin count; 199 equiprobable bins give df = 198.
pub const DEFAULT_CHI2_BINS: usize = 199;
/// Probabilities closer than this to 0 or 1 are clamped in the AD statistic.
pub const AD_CLAMP_WINDOW: f64 = 1e-12;
const AD_CLAMP: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GofTest {
    Chi2,
    Ks,
    Ad,
    Cvm,
}

impl GofTest {
    pub const ALL: [GofTest; 4] = [GofTest::Chi2, GofTest::Ks, GofTest::Ad, GofTest::Cvm];

    pub fn as_str(self) -> &'static str {
        match self {
            GofTest::Chi2 => "chi2",
            GofTest::Ks => "ks",
            GofTest::Ad => "ad",
            GofTest::Cvm => "cvm",
        }
    }
}

impl std::str::FromStr for GofTest {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "chi2" | "chi-square" | "chisq" => Ok(GofTest::Chi2),
            "ks" | "kolmogorov-smirnov" => Ok(GofTest::Ks),
            "ad" | "anderson-darling" => Ok(GofTest::Ad),
            "cvm" | "cramer-von-mises" => Ok(GofTest::Cvm),
            _ => Err(Error::Input(format!("unknown test '{s}'"))),
        }
    }
}

fn check_sorted(data: &[f64]) -> Result<()> {
    if data.is_empty() {
        return Err(Error::Input("empty sample".into()));
    }
    if let Some(i) = data.windows(2).position(|w| !(w[0] <= w[1])) {
        return Err(Error::Input(format!("data must be sorted ascending (index {})", i + 1)));
    }
    Ok(())
}

fn probs(data: &[f64], mut cdf: impl FnMut(f64) -> f64) -> Result<Vec<f64>> {
    check_sorted(data)?;
    let u: Vec<f64> = data.iter().map(|&x| cdf(x)).collect();
    if let Some(i) = u.iter().position(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::Contract(format!("CDF value {} at index {i} is outside [0, 1]", u[i])));
    }
    if let Some(i) = u.windows(2).position(|w| w[1] < w[0]) {
        return Err(Error::Contract(format!("CDF decreases between indices {i} and {}", i + 1)));
    }
    Ok(u)
}

/// D = max_i max(i/n − u_i, u_i − (i−1)/n).
pub fn ks_from_probs(u: &[f64]) -> f64 {
    let n = u.len() as f64;
    u.iter()
        .enumerate()
        .map(|(i, &v)| ((i + 1) as f64 / n - v).max(v - i as f64 / n))
        .fold(0.0, f64::max)
        .clamp(0.0, 1.0)
}

pub fn ks_stat(sorted: &[f64], cdf: impl FnMut(f64) -> f64) -> Result<f64> {
    Ok(ks_from_probs(&probs(sorted, cdf)?))
}

/// W² = Σ (u_i − (2i−1)/(2n))² + 1/(12n).
pub fn cvm_from_probs(u: &[f64]) -> f64 {
    let n = u.len() as f64;
    let s: f64 = u.iter().enumerate().map(|(i, &v)| (v - (2 * i + 1) as f64 / (2.0 * n)).powi(2)).sum();
    s + 1.0 / (12.0 * n)
}

pub fn cvm_stat(sorted: &[f64], cdf: impl FnMut(f64) -> f64) -> Result<f64> {
    Ok(cvm_from_probs(&probs(sorted, cdf)?))
}

/// A² = −n − (1/n) Σ (2i−1)[ln u_i + ln(1 − u_{n+1−i})]. Values within
/// [`AD_CLAMP_WINDOW`] of 0 or 1 are clamped to 1e-15 from the boundary;
/// values exactly at the boundary are an error naming the index.
pub fn ad_from_probs(u: &[f64]) -> Result<f64> {
    if let Some(i) = u.iter().position(|&v| v <= 0.0 || v >= 1.0) {
        return Err(Error::Numerical(format!(
            "Anderson-Darling needs F strictly inside (0, 1); F = {} at index {i} (tail underflow)",
            u[i]
        )));
    }
    let near = u.iter().filter(|&&v| v < AD_CLAMP_WINDOW || v > 1.0 - AD_CLAMP_WINDOW).count();
    if near > 0 {
        log::warn!("{near} probabilities within {AD_CLAMP_WINDOW:e} of 0 or 1 clamped for Anderson-Darling");
    }
    Ok(ad_clamped(u).0)
}

/// A² with every probability clamped into [1e-15, 1 − 1e-15]; also returns
/// how many values needed clamping. For very large samples under fitted
/// heavy-tailed models where double-precision CDFs saturate.
pub fn ad_clamped(u: &[f64]) -> (f64, usize) {
    let n = u.len();
    let c = |v: f64| v.clamp(AD_CLAMP, 1.0 - AD_CLAMP);
    let clamped = u.iter().filter(|&&v| v != c(v)).count();
    let s: f64 = (0..n).map(|i| (2 * i + 1) as f64 * (c(u[i]).ln() + (1.0 - c(u[n - 1 - i])).ln())).sum();
    (-(n as f64) - s / n as f64, clamped)
}

pub fn ad_stat(sorted: &[f64], cdf: impl FnMut(f64) -> f64) -> Result<f64> {
    ad_from_probs(&probs(sorted, cdf)?)
}

/// Σ (O − E)²/E.
pub fn chi2_statistic(observed: &[f64], expected: &[f64]) -> Result<f64> {
    if observed.len() != expected.len() || expected.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::Input("χ² needs matching bins with positive expectations".into()));
    }
    Ok(observed.iter().zip(expected).map(|(o, e)| (o - e).powi(2) / e).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chi2Result {
    pub statistic: f64,
    pub df: usize,
    pub bins: usize,
}

/// χ² over equiprobable bins from probability transforms: bin k holds
/// u ∈ [k/K, (k+1)/K), the same partition as edges at the model quantiles.
pub fn chi2_from_probs(u: &[f64], n_bins: usize, estimated_params: usize) -> Result<Chi2Result> {
    let n = u.len();
    if n_bins < 3 {
        return Err(Error::Input(format!("χ² needs at least 3 bins, got {n_bins}")));
    }
    if n < 5 * n_bins {
        return Err(Error::Input(format!("χ² with {n_bins} bins needs at least {} points, got {n}", 5 * n_bins)));
    }
    if n_bins <= 1 + estimated_params {
        return Err(Error::Input("no degrees of freedom left for χ²".into()));
    }
    let mut counts = vec![0.0; n_bins];
    for &v in u {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Contract(format!("CDF value {v} outside [0, 1]")));
        }
        counts[((v * n_bins as f64) as usize).min(n_bins - 1)] += 1.0;
    }
    let expected = vec![n as f64 / n_bins as f64; n_bins];
    Ok(Chi2Result { statistic: chi2_statistic(&counts, &expected)?, df: n_bins - 1 - estimated_params, bins: n_bins })
}

pub fn chi2_test(data: &[f64], mut cdf: impl FnMut(f64) -> f64, n_bins: usize) -> Result<Chi2Result> {
    let u: Vec<f64> = data.iter().map(|&x| cdf(x)).collect();
    chi2_from_probs(&u, n_bins, 0)
}

fn level_index(level: f64) -> Result<usize> {
    if (level - 0.05).abs() < 1e-12 {
        Ok(0)
    } else if (level - 0.01).abs() < 1e-12 {
        Ok(1)
    } else {
        Err(Error::Input(format!("unsupported significance level {level}; use 0.05 or 0.01")))
    }
}

/// Asymptotic Kolmogorov point c/√n with c = 1.358 (5%) or 1.628 (1%).
pub fn ks_critical(n: usize, level: f64) -> Result<f64> {
    let c = [1.358, 1.628][level_index(level)?];
    if n < 35 {
        return Err(Error::Input(format!("asymptotic KS points need n ≥ 35, got {n}")));
    }
    Ok(c / (n as f64).sqrt())
}

/// Asymptotic Cramér–von Mises points.
pub fn cvm_critical(level: f64) -> Result<f64> {
    Ok([0.4614, 0.7435][level_index(level)?])
}

/// Asymptotic Anderson–Darling points.
pub fn ad_critical(level: f64) -> Result<f64> {
    Ok([2.492, 3.878][level_index(level)?])
}

pub fn chi2_critical(df: usize, level: f64) -> Result<f64> {
    level_index(level)?;
    let d = ChiSquared::new(df as f64).map_err(|e| Error::Input(e.to_string()))?;
    Ok(d.inverse_cdf(1.0 - level))
}

pub fn critical_point(test: GofTest, n: usize, df: usize, level: f64) -> Result<f64> {
    match test {
        GofTest::Chi2 => chi2_critical(df, level),
        GofTest::Ks => ks_critical(n, level),
        GofTest::Ad => ad_critical(level),
        GofTest::Cvm => cvm_critical(level),
    }
}

fn level_key(level: f64) -> String {
    format!("{}%", (level * 100.0).round())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub family: Family,
    pub n: usize,
    pub chi2: Chi2Result,
    pub ks: f64,
    pub ad: f64,
    pub cvm: f64,
    /// Points whose CDF value was clamped for the AD statistic.
    pub ad_clamped: usize,
    pub critical_points: BTreeMap<String, BTreeMap<String, f64>>,
    /// True where the statistic exceeds the critical point.
    pub reject: BTreeMap<String, BTreeMap<String, bool>>,
}

impl GofReport {
    pub fn statistic(&self, test: GofTest) -> f64 {
        match test {
            GofTest::Chi2 => self.chi2.statistic,
            GofTest::Ks => self.ks,
            GofTest::Ad => self.ad,
            GofTest::Cvm => self.cvm,
        }
    }
}

/// Probability transforms of the sorted sample under `model`.
pub fn model_probs(model: &Model, sorted: &[f64]) -> Result<Vec<f64>> {
    check_sorted(sorted)?;
    model.cdf_many(sorted)
}

/// All four statistics of `data` against `model`, with decisions at `levels`.
pub fn gof_report(data: &[f64], model: &Model, levels: &[f64], chi2_bins: usize) -> Result<GofReport> {
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let u = model_probs(model, &sorted)?;
    let n = u.len();
    let chi2 = chi2_from_probs(&u, chi2_bins, 0)?;
    let (ad, ad_clamped) = ad_clamped(&u);
    if ad_clamped > 0 {
        log::warn!("{ad_clamped} CDF values saturated near 0 or 1 and were clamped for Anderson-Darling");
    }
    let report_stats = [(GofTest::Chi2, chi2.statistic), (GofTest::Ks, ks_from_probs(&u)), (GofTest::Ad, ad), (GofTest::Cvm, cvm_from_probs(&u))];
    let mut critical_points = BTreeMap::new();
    let mut reject = BTreeMap::new();
    for (test, stat) in report_stats {
        let mut cp = BTreeMap::new();
        let mut dec = BTreeMap::new();
        for &level in levels {
            let c = critical_point(test, n, chi2.df, level)?;
            cp.insert(level_key(level), c);
            dec.insert(level_key(level), stat > c);
        }
        critical_points.insert(test.as_str().to_string(), cp);
        reject.insert(test.as_str().to_string(), dec);
    }
    Ok(GofReport {
        family: model.family(),
        n,
        chi2,
        ks: report_stats[1].1,
        ad,
        cvm: report_stats[3].1,
        ad_clamped,
        critical_points,
        reject,
    })
}

fn statistic_of(test: GofTest, model: &Model, data: &[f64], chi2_bins: usize) -> Result<f64> {
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let u = model_probs(model, &sorted)?;
    Ok(match test {
        GofTest::Chi2 => chi2_from_probs(&u, chi2_bins, 0)?.statistic,
        GofTest::Ks => ks_from_probs(&u),
        GofTest::Ad => ad_clamped(&u).0,
        GofTest::Cvm => cvm_from_probs(&u),
    })
}

/// Parametric bootstrap: B samples of size n from `fitted`, each refitted and
/// re-tested; p = (1 + #{T_b ≥ T_obs})/(B + 1). Replicate b uses seed + b.
pub fn bootstrap_pvalue(data: &[f64], family: Family, fitted: &Params, b: usize, test: GofTest, seed: u64) -> Result<f64> {
    if b < 99 {
        return Err(Error::Input(format!("bootstrap needs at least 99 replicates, got {b}")));
    }
    if fitted.family() != family {
        return Err(Error::Input(format!("fitted parameters are {} but the family is {family}", fitted.family())));
    }
    let n = data.len();
    let bins = DEFAULT_CHI2_BINS.min(n / 5).max(3);
    let model = Model::new(fitted)?;
    let observed = statistic_of(test, &model, data, bins)?;
    let reps: Vec<Option<f64>> = (0..b)
        .into_par_iter()
        .map(|i| {
            let x = model.sample(n, seed.wrapping_add(i as u64));
            let refit = fit(family, &x, Some(fitted), &FitOptions::default()).ok()?;
            let m = Model::new(&refit.params).ok()?;
            statistic_of(test, &m, &x, bins).ok()
        })
        .collect();
    let failed = reps.iter().filter(|r| r.is_none()).count();
    if failed as f64 > 0.05 * b as f64 {
        return Err(Error::Numerical(format!("{failed} of {b} bootstrap refits failed")));
    }
    let exceed = reps.iter().flatten().filter(|&&t| t >= observed).count();
    let used = b - failed;
    Ok((1 + exceed) as f64 / (used + 1) as f64)
}

#[cfg(test)]
mod tests;
