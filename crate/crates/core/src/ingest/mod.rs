//! From raw ticks to intraday log-return series: fixed-interval resampling,
//! overnight exclusion, optional seasonality normalization, standardization
//! and sample statistics.

mod io;
mod synthetic;
mod ticks;

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub use io::{read_series, sidecar_path, write_series, SeriesSidecar};
pub use synthetic::{synthetic_ticks, SyntheticTickSpec};
pub use ticks::{log_returns, parse_ticks, resample, DayGrid, Resampled, SessionSpec, TickParse, TickRecord};

/// Affine map applied to the raw values: stored = (raw − location)/scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub location: f64,
    pub scale: f64,
}

impl Default for Standardization {
    fn default() -> Self {
        Self { location: 0.0, scale: 1.0 }
    }
}

impl Standardization {
    pub fn is_identity(&self) -> bool {
        self.location == 0.0 && self.scale == 1.0
    }
}

/// Log-returns on a fixed sampling grid, grouped by trading day.
///
/// Day `d` holds `values[day_offsets[d]..day_offsets[d+1]]`, and its first
/// return belongs to time-of-day slot `day_slots[d]`. No return spans two days.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    values: Vec<f64>,
    day_offsets: Vec<usize>,
    day_slots: Vec<usize>,
    slots_per_day: usize,
    scale_seconds: u32,
    standardization: Standardization,
    deseasonalized: bool,
    session: Option<SessionSpec>,
}

impl ReturnSeries {
    /// Builds a series from per-day (first slot, returns) blocks.
    pub fn from_days(days: Vec<(usize, Vec<f64>)>, slots_per_day: usize, scale_seconds: u32) -> Result<Self> {
        let mut values = Vec::new();
        let mut day_offsets = Vec::new();
        let mut day_slots = Vec::new();
        for (slot, day) in days {
            if day.is_empty() {
                continue;
            }
            day_offsets.push(values.len());
            day_slots.push(slot);
            values.extend(day);
        }
        let s = Self {
            values,
            day_offsets,
            day_slots,
            slots_per_day,
            scale_seconds,
            standardization: Standardization::default(),
            deseasonalized: false,
            session: None,
        };
        s.check()?;
        Ok(s)
    }

    /// Equal-length days cut from one flat vector; a trailing partial day is kept and flagged short.
    pub fn from_values(values: Vec<f64>, slots_per_day: usize, scale_seconds: u32) -> Result<Self> {
        if slots_per_day == 0 {
            return Err(Error::Input("slots_per_day must be positive".into()));
        }
        let days = values.chunks(slots_per_day).map(|c| (0, c.to_vec())).collect();
        Self::from_days(days, slots_per_day, scale_seconds)
    }

    /// A single-day series, for data without intraday structure.
    pub fn single_day(values: Vec<f64>, scale_seconds: u32) -> Result<Self> {
        let n = values.len().max(1);
        Self::from_values(values, n, scale_seconds)
    }

    fn check(&self) -> Result<()> {
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("return series contains non-finite values".into()));
        }
        if self.scale_seconds == 0 {
            return Err(Error::Input("scale_seconds must be positive".into()));
        }
        for d in 0..self.n_days() {
            let len = self.day(d).len();
            if self.day_slots[d] + len > self.slots_per_day {
                return Err(Error::Input(format!(
                    "day {d} covers slots {}..{} beyond the {} slots per day",
                    self.day_slots[d],
                    self.day_slots[d] + len,
                    self.slots_per_day
                )));
            }
        }
        Ok(())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    pub fn day_offsets(&self) -> &[usize] {
        &self.day_offsets
    }
    pub fn day_slots(&self) -> &[usize] {
        &self.day_slots
    }
    pub fn n_days(&self) -> usize {
        self.day_offsets.len()
    }
    pub fn slots_per_day(&self) -> usize {
        self.slots_per_day
    }
    pub fn scale_seconds(&self) -> u32 {
        self.scale_seconds
    }
    pub fn standardization(&self) -> Standardization {
        self.standardization
    }
    pub fn is_deseasonalized(&self) -> bool {
        self.deseasonalized
    }
    pub fn session(&self) -> Option<&SessionSpec> {
        self.session.as_ref()
    }
    pub fn with_session(mut self, session: SessionSpec) -> Self {
        self.session = Some(session);
        self
    }

    pub fn day(&self, d: usize) -> &[f64] {
        let start = self.day_offsets[d];
        let end = self.day_offsets.get(d + 1).copied().unwrap_or(self.values.len());
        &self.values[start..end]
    }

    /// Days with fewer returns than a full session.
    pub fn short_days(&self) -> Vec<usize> {
        (0..self.n_days()).filter(|&d| self.day(d).len() < self.slots_per_day).collect()
    }

    /// Same structure, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.values.len() {
            return Err(Error::Input(format!("expected {} values, got {}", self.values.len(), values.len())));
        }
        let mut s = self.clone();
        s.values = values;
        s.check()?;
        Ok(s)
    }

    pub(crate) fn with_parts(&self, days: Vec<(usize, Vec<f64>)>, slots_per_day: usize, scale_seconds: u32) -> Result<Self> {
        let mut s = Self::from_days(days, slots_per_day, scale_seconds)?;
        s.standardization = self.standardization;
        s.deseasonalized = self.deseasonalized;
        s.session = self.session.clone();
        Ok(s)
    }

    pub(crate) fn set_metadata(&mut self, standardization: Standardization, deseasonalized: bool) {
        self.standardization = standardization;
        self.deseasonalized = deseasonalized;
    }
}

/// Result of [`deseasonalize`]: the normalized series and the slots left unchanged.
#[derive(Debug, Clone)]
pub struct Deseasonalized {
    pub series: ReturnSeries,
    pub slot_means: Vec<f64>,
    pub zero_slots: Vec<usize>,
}

/// Divide each return by the across-days mean absolute return of its time-of-day slot.
pub fn deseasonalize(series: &ReturnSeries) -> Result<Deseasonalized> {
    let m = series.slots_per_day;
    let mut sum = vec![0.0; m];
    let mut count = vec![0usize; m];
    for d in 0..series.n_days() {
        let s0 = series.day_slots[d];
        for (k, v) in series.day(d).iter().enumerate() {
            let slot = s0 + k;
            if slot >= m {
                return Err(Error::Input(format!("day {d} is not aligned to the {m}-slot grid")));
            }
            sum[slot] += v.abs();
            count[slot] += 1;
        }
    }
    let slot_means: Vec<f64> = sum.iter().zip(&count).map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 }).collect();
    let zero_slots: Vec<usize> = (0..m).filter(|&k| count[k] > 0 && slot_means[k] == 0.0).collect();
    let mut values = Vec::with_capacity(series.len());
    for d in 0..series.n_days() {
        let s0 = series.day_slots[d];
        for (k, v) in series.day(d).iter().enumerate() {
            let mean = slot_means[s0 + k];
            values.push(if mean > 0.0 { v / mean } else { *v });
        }
    }
    if !zero_slots.is_empty() {
        log::warn!("{} slots have zero mean absolute return and were left unchanged", zero_slots.len());
    }
    let mut out = series.with_values(values)?;
    out.deseasonalized = true;
    Ok(Deseasonalized { series: out, slot_means, zero_slots })
}

/// Shift and scale to sample mean 0 and sample variance 1 (denominator n − 1).
pub fn standardize(series: &ReturnSeries) -> Result<ReturnSeries> {
    let n = series.len();
    if n < 2 {
        return Err(Error::Input("standardization needs at least 2 values".into()));
    }
    let mean = series.values.iter().sum::<f64>() / n as f64;
    let var = series.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    if !(var > 0.0) {
        return Err(Error::Input("cannot standardize a series with zero variance".into()));
    }
    let sd = var.sqrt();
    let values = series.values.iter().map(|v| (v - mean) / sd).collect();
    let mut out = series.with_values(values)?;
    let prior = series.standardization;
    out.standardization = Standardization { location: prior.location + mean * prior.scale, scale: prior.scale * sd };
    Ok(out)
}

/// Undo every recorded standardization.
pub fn unstandardize(series: &ReturnSeries) -> ReturnSeries {
    let st = series.standardization;
    let values = series.values.iter().map(|v| v * st.scale + st.location).collect();
    let mut out = series.with_values(values).expect("same length");
    out.standardization = Standardization::default();
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub n: usize,
    pub max: f64,
    pub min: f64,
    pub mean: f64,
    /// Unbiased (n − 1) variance.
    pub variance: f64,
    pub skewness: f64,
    /// m₄/m₂².
    pub kurtosis_raw: f64,
    pub kurtosis_excess: f64,
}

/// Sum over values sorted ascending, pairing the i-th smallest with the i-th
/// largest so that sign-symmetric samples cancel exactly.
fn paired_sum(sorted: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len();
    let mut acc = if n % 2 == 1 { f(sorted[n / 2]) } else { 0.0 };
    for i in (0..n / 2).rev() {
        acc += f(sorted[i]) + f(sorted[n - 1 - i]);
    }
    acc
}

/// Moment statistics; skewness and kurtosis use central moments with denominator n.
pub fn sample_stats(values: &[f64]) -> Result<SampleStats> {
    let n = values.len();
    if n < 4 {
        return Err(Error::Input(format!("sample statistics need at least 4 values, got {n}")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let nf = n as f64;
    let mean = paired_sum(&sorted, |v| v) / nf;
    let m2 = paired_sum(&sorted, |v| (v - mean).powi(2)) / nf;
    let m3 = paired_sum(&sorted, |v| (v - mean).powi(3)) / nf;
    let m4 = paired_sum(&sorted, |v| (v - mean).powi(4)) / nf;
    let variance = m2 * nf / (nf - 1.0);
    let (skewness, kurtosis_raw) = if m2 > 0.0 { (m3 / m2.powf(1.5), m4 / (m2 * m2)) } else { (0.0, f64::NAN) };
    Ok(SampleStats {
        n,
        max: sorted[n - 1],
        min: sorted[0],
        mean,
        variance,
        skewness,
        kurtosis_raw,
        kurtosis_excess: kurtosis_raw - 3.0,
    })
}

/// Moments of three values, where kurtosis is defined but the
/// four-value precondition of [`sample_stats`] is not met.
pub fn central_moment_ratios(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let m = |k: i32| values.iter().map(|v| (v - mean).powi(k)).sum::<f64>() / n;
    let m2 = m(2);
    (m(3) / m2.powf(1.5), m(4) / (m2 * m2))
}

/// Summary of a series for reports.
pub fn describe(series: &ReturnSeries) -> BTreeMap<&'static str, serde_json::Value> {
    let mut out = BTreeMap::new();
    out.insert("n", serde_json::json!(series.len()));
    out.insert("days", serde_json::json!(series.n_days()));
    out.insert("slots_per_day", serde_json::json!(series.slots_per_day()));
    out.insert("short_days", serde_json::json!(series.short_days().len()));
    out.insert("scale_seconds", serde_json::json!(series.scale_seconds()));
    out.insert("standardization", serde_json::json!(series.standardization()));
    out.insert("deseasonalized", serde_json::json!(series.is_deseasonalized()));
    out
}
