//! Stability across time scales: block aggregation, t^H rescaling, detrended
//! fluctuation analysis and the reshuffling experiments.

use crate::error::{Error, Result};
use crate::gof::{ks_critical, ks_from_probs};
use crate::ingest::{standardize, ReturnSeries};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

/// Sums non-overlapping blocks of `factor` slots inside each day. Blocks sit
/// on the slot grid (slot k·factor onward), so a day that starts mid-block
/// loses its leading partial block just as every day loses its trailing one.
pub fn aggregate(series: &ReturnSeries, factor: usize) -> Result<ReturnSeries> {
    if factor == 0 {
        return Err(Error::Input("aggregation factor must be at least 1".into()));
    }
    if factor == 1 {
        return Ok(series.clone());
    }
    let spd = series.slots_per_day();
    if 2 * factor > spd {
        return Err(Error::Input(format!("aggregation factor {factor} exceeds half the day ({spd} slots)")));
    }
    let mut days = Vec::with_capacity(series.n_days());
    for d in 0..series.n_days() {
        let r = series.day(d);
        let s0 = series.day_slots()[d];
        let first = s0.div_ceil(factor);
        let end = (s0 + r.len()) / factor;
        let blocks: Vec<f64> = (first..end)
            .map(|k| r[k * factor - s0..(k + 1) * factor - s0].iter().sum())
            .collect();
        days.push((first, blocks));
    }
    let scale = u32::try_from(factor)
        .ok()
        .and_then(|f| series.scale_seconds().checked_mul(f))
        .ok_or_else(|| Error::Input("aggregated interval overflows".into()))?;
    let mut out = series.with_parts(days, spd / factor, scale)?;
    // a block sum of standardized returns is (raw sum − factor·location)/scale
    let mut st = series.standardization();
    st.location *= factor as f64;
    out.set_metadata(st, series.is_deseasonalized());
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DfaResult {
    pub hurst: f64,
    /// (window size, F) pairs.
    pub curve: Vec<(usize, f64)>,
}

pub const DFA_MIN_LEN: usize = 1024;
const DFA_WINDOWS: usize = 20;

fn dfa_windows(n: usize) -> Vec<usize> {
    let (lo, hi) = (16f64.ln(), (n as f64 / 4.0).ln());
    let mut w: Vec<usize> = (0..DFA_WINDOWS)
        .map(|i| (lo + (hi - lo) * i as f64 / (DFA_WINDOWS - 1) as f64).exp().round() as usize)
        .collect();
    w.dedup();
    w
}

/// Residual sum of squares of a least-squares line through y against 0..s.
fn detrended_ss(y: &[f64]) -> f64 {
    let s = y.len() as f64;
    let t_mean = (s - 1.0) / 2.0;
    let stt = s * (s * s - 1.0) / 12.0;
    let y_mean = y.iter().sum::<f64>() / s;
    let (mut sty, mut syy) = (0.0, 0.0);
    for (t, &v) in y.iter().enumerate() {
        let dy = v - y_mean;
        sty += (t as f64 - t_mean) * dy;
        syy += dy * dy;
    }
    (syy - sty * sty / stt).max(0.0)
}

/// First-order DFA with windows covered from both ends of the profile.
pub fn dfa(values: &[f64]) -> Result<DfaResult> {
    let n = values.len();
    if n < DFA_MIN_LEN {
        return Err(Error::Input(format!("DFA needs at least {DFA_MIN_LEN} values, got {n}")));
    }
    if values.iter().all(|&v| v == values[0]) {
        return Err(Error::Input("constant series has zero fluctuation at every window".into()));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let profile: Vec<f64> = values
        .iter()
        .scan(0.0, |acc, &v| {
            *acc += v - mean;
            Some(*acc)
        })
        .collect();
    let mut curve = Vec::new();
    for s in dfa_windows(n) {
        let k = n / s;
        let mut total = 0.0;
        for j in 0..k {
            total += detrended_ss(&profile[j * s..(j + 1) * s]);
            total += detrended_ss(&profile[n - (j + 1) * s..n - j * s]);
        }
        let f = (total / (2 * k * s) as f64).sqrt();
        if !(f > 0.0) {
            return Err(Error::Numerical(format!("zero fluctuation at window {s}")));
        }
        curve.push((s, f));
    }
    let pts: Vec<(f64, f64)> = curve.iter().map(|&(s, f)| ((s as f64).ln(), f.ln())).collect();
    let m = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / m, pts.iter().map(|p| p.1).sum::<f64>() / m);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(DfaResult { hurst: sxy / sxx, curve })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShuffleMode {
    Global,
    DayBlock,
    WithinDaySlot,
}

impl ShuffleMode {
    pub const ALL: [ShuffleMode; 3] = [ShuffleMode::Global, ShuffleMode::DayBlock, ShuffleMode::WithinDaySlot];

    pub fn as_str(self) -> &'static str {
        match self {
            ShuffleMode::Global => "global",
            ShuffleMode::DayBlock => "day_block",
            ShuffleMode::WithinDaySlot => "within_day_slot",
        }
    }

    fn stream(self) -> u64 {
        match self {
            ShuffleMode::Global => 1,
            ShuffleMode::DayBlock => 2,
            ShuffleMode::WithinDaySlot => 3,
        }
    }
}

impl std::str::FromStr for ShuffleMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Input(format!("unknown reshuffle mode '{s}'")))
    }
}

/// Permutes the returns; the generator stream depends on the mode, so one
/// seed drives all three experiments independently.
pub fn reshuffle(series: &ReturnSeries, mode: ShuffleMode, seed: u64) -> Result<ReturnSeries> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(mode.stream());
    match mode {
        ShuffleMode::Global => {
            let mut v = series.values().to_vec();
            v.shuffle(&mut rng);
            series.with_values(v)
        }
        ShuffleMode::DayBlock => {
            let mut order: Vec<usize> = (0..series.n_days()).collect();
            order.shuffle(&mut rng);
            let days = order.iter().map(|&d| (series.day_slots()[d], series.day(d).to_vec())).collect();
            let mut out = series.with_parts(days, series.slots_per_day(), series.scale_seconds())?;
            out.set_metadata(series.standardization(), series.is_deseasonalized());
            Ok(out)
        }
        ShuffleMode::WithinDaySlot => {
            // positions of each slot across days; day_slots keeps them aligned
            let mut by_slot: Vec<Vec<usize>> = vec![Vec::new(); series.slots_per_day()];
            for d in 0..series.n_days() {
                let (off, s0) = (series.day_offsets()[d], series.day_slots()[d]);
                for i in 0..series.day(d).len() {
                    by_slot[s0 + i].push(off + i);
                }
            }
            let src = series.values();
            let mut v = src.to_vec();
            for pos in &by_slot {
                let mut vals: Vec<f64> = pos.iter().map(|&p| src[p]).collect();
                vals.shuffle(&mut rng);
                for (&p, x) in pos.iter().zip(vals) {
                    v[p] = x;
                }
            }
            series.with_values(v)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    StandardNormal,
    BaseScale,
}

impl std::str::FromStr for Reference {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard_normal" => Ok(Reference::StandardNormal),
            "base_scale" => Ok(Reference::BaseScale),
            _ => Err(Error::Input(format!("unknown reference '{s}'; use standard_normal or base_scale"))),
        }
    }
}

/// Which experiment produced a report: the raw series or one of the reshuffles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingMode {
    Raw,
    GlobalShuffle,
    DailyShuffle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HurstSource {
    Dfa,
    Given,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalePoint {
    pub scale: usize,
    pub n: usize,
    pub distance: f64,
    /// Asymptotic KS points for context; absent when the sample is too small.
    pub critical_5: Option<f64>,
    pub critical_1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub mode: ScalingMode,
    /// The daily-shuffle reading (day_block or within_day_slot) when mode is daily_shuffle.
    pub shuffle: Option<ShuffleMode>,
    pub reference: Reference,
    pub hurst: f64,
    pub hurst_source: HurstSource,
    pub scales: Vec<usize>,
    pub collapse: Vec<ScalePoint>,
    /// KS to N(0,1) of each re-standardized aggregate.
    pub convergence: Option<Vec<ScalePoint>>,
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn ks_normal(sorted: &[f64]) -> f64 {
    let u: Vec<f64> = sorted.iter().map(|&x| normal_cdf(x)).collect();
    ks_from_probs(&u)
}

/// Two-sample KS distance between sorted samples.
fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

fn point(scale: usize, n: usize, distance: f64, two_sample_with: Option<usize>) -> ScalePoint {
    let crit = |level| {
        let c = ks_critical(n, level).ok()?;
        Some(match two_sample_with {
            Some(m) => c * ((n + m) as f64 / m as f64).sqrt(),
            None => c,
        })
    };
    ScalePoint { scale, n, distance, critical_5: crit(0.05), critical_1: crit(0.01) }
}

fn check_scales(scales: &[usize]) -> Result<()> {
    if scales.is_empty() || scales.windows(2).any(|w| w[0] >= w[1]) || scales[0] == 0 {
        return Err(Error::Input("scales must be a non-empty, strictly increasing list of positive factors".into()));
    }
    Ok(())
}

fn sorted_values(s: &ReturnSeries) -> Vec<f64> {
    let mut v = s.values().to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Powers of two from 1 up to half the day.
pub fn default_scales(series: &ReturnSeries) -> Vec<usize> {
    let half = series.slots_per_day() / 2;
    std::iter::successors(Some(1usize), |&s| Some(s * 2)).take_while(|&s| s == 1 || s <= half).collect()
}

/// Aggregates at each scale, divides by scale^hurst and measures the KS
/// distance to the chosen reference.
pub fn collapse_scan(series: &ReturnSeries, scales: &[usize], hurst: f64, reference: Reference) -> Result<ScalingReport> {
    check_scales(scales)?;
    if !hurst.is_finite() {
        return Err(Error::Input("hurst exponent must be finite".into()));
    }
    if series.standardization().is_identity() {
        log::warn!("collapse scan on an unstandardized series");
    }
    let base = sorted_values(series);
    let mut collapse = Vec::with_capacity(scales.len());
    for &k in scales {
        let agg = aggregate(series, k)?;
        if agg.is_empty() {
            return Err(Error::Input(format!("no complete blocks at scale {k}")));
        }
        let c = (k as f64).powf(hurst);
        let mut z: Vec<f64> = agg.values().iter().map(|v| v / c).collect();
        z.sort_by(f64::total_cmp);
        collapse.push(match reference {
            Reference::StandardNormal => point(k, z.len(), ks_normal(&z), None),
            Reference::BaseScale => point(k, z.len(), ks_two_sample(&z, &base), Some(base.len())),
        });
    }
    Ok(ScalingReport {
        mode: ScalingMode::Raw,
        shuffle: None,
        reference,
        hurst,
        hurst_source: HurstSource::Given,
        scales: scales.to_vec(),
        collapse,
        convergence: None,
    })
}

/// KS distance to N(0,1) of each aggregate after re-standardizing it.
pub fn convergence_scan(series: &ReturnSeries, scales: &[usize]) -> Result<Vec<ScalePoint>> {
    check_scales(scales)?;
    scales
        .iter()
        .map(|&k| {
            let agg = standardize(&aggregate(series, k)?)?;
            let z = sorted_values(&agg);
            Ok(point(k, z.len(), ks_normal(&z), None))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramRow {
    pub bin_center: f64,
    pub density: f64,
    pub scale: usize,
}

/// Density histograms of the rescaled aggregates on a common grid over
/// [−range, range]; mass outside the grid is left out.
pub fn rescaled_histograms(series: &ReturnSeries, scales: &[usize], hurst: f64, bins: usize, range: f64) -> Result<Vec<HistogramRow>> {
    check_scales(scales)?;
    if bins == 0 || !(range > 0.0) {
        return Err(Error::Input("histogram needs at least one bin and a positive range".into()));
    }
    let width = 2.0 * range / bins as f64;
    let mut rows = Vec::with_capacity(bins * scales.len());
    for &k in scales {
        let agg = aggregate(series, k)?;
        let c = (k as f64).powf(hurst);
        let mut counts = vec![0usize; bins];
        for v in agg.values() {
            let b = ((v / c + range) / width).floor();
            if b >= 0.0 && (b as usize) < bins {
                counts[b as usize] += 1;
            }
        }
        let n = agg.len().max(1) as f64;
        for (b, &cnt) in counts.iter().enumerate() {
            rows.push(HistogramRow { bin_center: -range + (b as f64 + 0.5) * width, density: cnt as f64 / (n * width), scale: k });
        }
    }
    Ok(rows)
}

/// One full scaling experiment: optional reshuffle, DFA (unless `hurst` is
/// given), collapse against `reference` and the re-standardized convergence.
pub fn scaling_experiment(
    series: &ReturnSeries,
    shuffle: Option<ShuffleMode>,
    scales: &[usize],
    hurst: Option<f64>,
    reference: Reference,
    seed: u64,
) -> Result<ScalingReport> {
    let s = match shuffle {
        Some(m) => reshuffle(series, m, seed)?,
        None => series.clone(),
    };
    let (h, source) = match hurst {
        Some(h) => (h, HurstSource::Given),
        None => (dfa(s.values())?.hurst, HurstSource::Dfa),
    };
    let mut r = collapse_scan(&s, scales, h, reference)?;
    r.hurst_source = source;
    r.shuffle = shuffle;
    r.mode = match shuffle {
        None => ScalingMode::Raw,
        Some(ShuffleMode::Global) => ScalingMode::GlobalShuffle,
        Some(_) => ScalingMode::DailyShuffle,
    };
    r.convergence = Some(convergence_scan(&s, scales)?);
    Ok(r)
}

#[cfg(test)]
mod tests;
