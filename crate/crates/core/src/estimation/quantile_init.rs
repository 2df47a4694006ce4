//! Stable parameters from five sample quantiles, McCulloch style.
//!
//! With q_p the p-quantile, the ratios
//!   ν_α = (q.95 − q.05)/(q.75 − q.25),  ν_β = (q.95 + q.05 − 2q.50)/(q.95 − q.05)
//! do not depend on scale or location. Their values for standard laws are
//! tabulated once per process from our own stable CDF on a grid in (α, β), and
//! the sample ratios are inverted by nested bisection on the bilinear
//! interpolants. Scale and location follow from the interquartile range and
//! the median, using the S0 median so the location is smooth through α = 1.

use crate::distributions::{StableParams, StableTable, ALPHA_ONE_WINDOW};
use crate::error::{Error, Result};
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

const ALPHA_MIN: f64 = 0.5;
const ALPHA_STEP: f64 = 0.05;
const N_ALPHA: usize = 31;
const BETA_STEP: f64 = 0.25;
const N_BETA: usize = 5;
const LEVELS: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

#[derive(Debug)]
struct Tables {
    /// Indexed [alpha][beta], β ≥ 0 only; ν_α and the scale ratio are even in β, the rest odd.
    nu_alpha: Vec<[f64; N_BETA]>,
    nu_beta: Vec<[f64; N_BETA]>,
    iqr: Vec<[f64; N_BETA]>,
    median0: Vec<[f64; N_BETA]>,
}

fn table_quantile(t: &StableTable, p: f64) -> f64 {
    let (mut lo, mut hi) = (-1.0, 1.0);
    while t.cdf(lo) > p {
        lo *= 2.0;
    }
    while t.cdf(hi) < p {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if t.cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut t = Tables { nu_alpha: vec![], nu_beta: vec![], iqr: vec![], median0: vec![] };
        for i in 0..N_ALPHA {
            let alpha = ALPHA_MIN + i as f64 * ALPHA_STEP;
            let (mut na, mut nb, mut iq, mut m0) = ([0.0; N_BETA], [0.0; N_BETA], [0.0; N_BETA], [0.0; N_BETA]);
            for j in 0..N_BETA {
                let beta = j as f64 * BETA_STEP;
                let table = StableTable::new(StableParams::standard(alpha, beta)).expect("standard stable law tabulates");
                let q: Vec<f64> = LEVELS.iter().map(|&p| table_quantile(&table, p)).collect();
                na[j] = (q[4] - q[0]) / (q[3] - q[1]);
                nb[j] = (q[4] + q[0] - 2.0 * q[2]) / (q[4] - q[0]);
                iq[j] = q[3] - q[1];
                m0[j] = q[2] - s0_shift(alpha, beta);
            }
            // symmetric laws have zero median and zero skewness ratio
            nb[0] = 0.0;
            m0[0] = 0.0;
            if i == N_ALPHA - 1 {
                // at α = 2 skewness has no effect
                nb = [0.0; N_BETA];
                m0 = [0.0; N_BETA];
            }
            t.nu_alpha.push(na);
            t.nu_beta.push(nb);
            t.iqr.push(iq);
            t.median0.push(m0);
        }
        t
    })
}

/// S1 minus S0 location for a standard law.
fn s0_shift(alpha: f64, beta: f64) -> f64 {
    if (alpha - 1.0).abs() < ALPHA_ONE_WINDOW {
        0.0
    } else {
        beta * (FRAC_PI_2 * alpha).tan()
    }
}

/// Bilinear interpolation at (α, b) with b = |β|.
fn interp(table: &[[f64; N_BETA]], alpha: f64, b: f64) -> f64 {
    let u = ((alpha - ALPHA_MIN) / ALPHA_STEP).clamp(0.0, (N_ALPHA - 1) as f64);
    let v = (b / BETA_STEP).clamp(0.0, (N_BETA - 1) as f64);
    let i = (u.floor() as usize).min(N_ALPHA - 2);
    let j = (v.floor() as usize).min(N_BETA - 2);
    let (s, t) = (u - i as f64, v - j as f64);
    (1.0 - s) * ((1.0 - t) * table[i][j] + t * table[i][j + 1]) + s * ((1.0 - t) * table[i + 1][j] + t * table[i + 1][j + 1])
}

/// Bisection for increasing `f` on [lo, hi], clamped at the ends.
fn solve_increasing(f: impl Fn(f64) -> f64, target: f64, lo: f64, hi: f64) -> f64 {
    if f(lo) >= target {
        return lo;
    }
    if f(hi) <= target {
        return hi;
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if f(m) < target {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Sample quantiles by linear interpolation between order statistics; upper
/// quantiles are taken from the top so that q(1 − p) = −q(p) for samples
/// symmetric about zero.
fn quantiles(sorted: &[f64]) -> [f64; 5] {
    let n = sorted.len();
    let lower = |p: f64, at: &dyn Fn(usize) -> f64| {
        let h = (n - 1) as f64 * p;
        let k = h.floor() as usize;
        let frac = h - k as f64;
        at(k) + frac * (at((k + 1).min(n - 1)) - at(k))
    };
    let asc = |k: usize| sorted[k];
    let desc = |k: usize| sorted[n - 1 - k];
    let median = if n % 2 == 1 { sorted[n / 2] } else { 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) };
    [lower(0.05, &asc), lower(0.25, &asc), median, lower(0.25, &desc), lower(0.05, &desc)]
}

/// Quantile-matching stable estimate. Needs at least 100 finite values with a
/// positive interquartile range.
pub fn stable_quantile_init(data: &[f64]) -> Result<StableParams> {
    if data.len() < 100 {
        return Err(Error::Input(format!("quantile initialization needs at least 100 values, got {}", data.len())));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("data contain non-finite values".into()));
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q = quantiles(&sorted);
    let spread = q[3] - q[1];
    if !(spread > 0.0) || !(q[4] - q[0] > 0.0) {
        return Err(Error::Input("degenerate sample quantiles (zero interquartile range)".into()));
    }
    let nu_a = (q[4] - q[0]) / spread;
    let nu_b = (q[4] + q[0] - 2.0 * q[2]) / (q[4] - q[0]);
    let t = tables();
    let alpha_for = |b: f64| solve_increasing(|a| -interp(&t.nu_alpha, a, b), -nu_a, ALPHA_MIN, 2.0);
    let (alpha, b) = if nu_b == 0.0 {
        (alpha_for(0.0), 0.0)
    } else {
        let b = solve_increasing(|b| interp(&t.nu_beta, alpha_for(b), b), nu_b.abs(), 0.0, 1.0);
        (alpha_for(b), b)
    };
    // Skewness stops moving the quantiles as α → 2, so exact inversion in the
    // last cell turns sampling noise into large |β|. There β is interpolated
    // linearly in ν_α between its value on the last interior row and zero at α = 2.
    let last_row = 2.0 - ALPHA_STEP;
    let (alpha, b) = if alpha > last_row && nu_b != 0.0 {
        let b_row = solve_increasing(|b| interp(&t.nu_beta, last_row, b), nu_b.abs(), 0.0, 1.0);
        let edge = t.nu_alpha[N_ALPHA - 1][0];
        let w = ((nu_a - edge) / (interp(&t.nu_alpha, last_row, b_row) - edge)).clamp(0.0, 1.0);
        (alpha_for(w * b_row), w * b_row)
    } else {
        (alpha, b)
    };
    let alpha = if (alpha - 1.0).abs() < ALPHA_ONE_WINDOW { 1.0 } else { alpha };
    let beta = b.copysign(nu_b);
    let delta = spread / interp(&t.iqr, alpha, b);
    let m0 = interp(&t.median0, alpha, b).copysign(nu_b);
    let mu = if alpha == 1.0 {
        q[2] - delta * m0 - 2.0 / PI * beta * delta * delta.ln()
    } else {
        q[2] - delta * (m0 + s0_shift(alpha, beta))
    };
    StableParams::new(alpha, beta, delta, mu)
}
