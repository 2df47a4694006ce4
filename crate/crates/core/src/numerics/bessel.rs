//! Modified Bessel function of the third kind, K_ν(x), for real order.
//!
//! The fractional part μ ∈ [−½, ½] of the order is handled by Temme's series
//! for x < 2 and by Steed's continued fraction (CF2) for x ≥ 2; integer steps
//! are taken with the upward recurrence, which is stable for K. Values are
//! carried as a mantissa plus a log-scale so that neither tiny arguments with
//! large orders nor large arguments ever overflow internally.

use crate::error::{domain, Error, Result};
use std::f64::consts::PI;

const CROSSOVER: f64 = 2.0;
const MAX_ITER: usize = 100_000;

// Taylor coefficients of 1/Γ(1+μ) about μ = 0.
const RGAMMA1P: [f64; 31] = [
    1.0,
    0.577_215_664_901_532_860_61,
    -0.655_878_071_520_253_881_08,
    -0.042_002_635_034_095_235_529,
    0.166_538_611_382_291_489_5,
    -0.042_197_734_555_544_336_748,
    -0.009_621_971_527_876_973_562_1,
    0.007_218_943_246_663_099_542_4,
    -0.001_165_167_591_859_065_112_1,
    -0.000_215_241_674_114_950_972_82,
    0.000_128_050_282_388_116_186_15,
    -0.000_020_134_854_780_788_238_656,
    -1.250_493_482_142_670_657_3e-6,
    1.133_027_231_981_695_882_4e-6,
    -2.056_338_416_977_607_103_5e-7,
    6.116_095_104_481_415_817_9e-9,
    5.002_007_644_469_222_930_1e-9,
    -1.181_274_570_487_020_144_6e-9,
    1.043_426_711_691_100_510_5e-10,
    7.782_263_439_905_071_254e-12,
    -3.696_805_618_642_205_708_2e-12,
    5.100_370_287_454_475_979e-13,
    -2.058_326_053_566_506_783_2e-14,
    -5.348_122_539_423_017_982_4e-15,
    1.226_778_628_238_260_790_2e-15,
    -1.181_259_301_697_458_769_5e-16,
    1.186_692_254_751_600_332_6e-18,
    1.412_380_655_318_031_781_6e-18,
    -2.298_745_684_435_370_206_6e-19,
    1.714_406_321_927_337_433_4e-20,
    1.337_351_730_493_693_114_9e-22,
];

/// (γ₁, γ₂, 1/Γ(1+μ), 1/Γ(1−μ)) as used by Temme's series.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    let m2 = mu * mu;
    let mut even = 0.0;
    let mut odd = 0.0;
    for k in (0..RGAMMA1P.len()).rev() {
        if k % 2 == 0 {
            even = even * m2 + RGAMMA1P[k];
        } else {
            odd = odd * m2 + RGAMMA1P[k];
        }
    }
    // 1/Γ(1+μ) = even + μ·odd, 1/Γ(1−μ) = even − μ·odd
    let gampl = even + mu * odd;
    let gammi = even - mu * odd;
    (-odd, even, gampl, gammi)
}

/// K_μ(x) and K_{μ+1}(x) for |μ| ≤ ½, as (k_mu, k_mu1, log_scale) with the
/// true values equal to the returned ones times e^{log_scale}.
fn k_fractional(mu: f64, x: f64) -> Result<(f64, f64, f64)> {
    let mu2 = mu * mu;
    let xi = 1.0 / x;
    if x < CROSSOVER {
        let x2 = 0.5 * x;
        let pimu = PI * mu;
        let fact = if pimu.abs() < f64::EPSILON { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = mu * d;
        let fact2 = if e.abs() < f64::EPSILON { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut c = 1.0;
        let dd = x2 * x2;
        let mut sum1 = p;
        let mut converged = false;
        for i in 1..MAX_ITER {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - mu2);
            c *= dd / fi;
            p /= fi - mu;
            q /= fi + mu;
            let del = c * ff;
            sum += del;
            sum1 += c * (p - fi * ff);
            if del.abs() < sum.abs() * f64::EPSILON {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numerical(format!("bessel_k series did not converge at x={x}")));
        }
        Ok((sum, sum1 * 2.0 * xi, 0.0))
    } else {
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut delh = d;
        let mut h = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - mu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        let mut converged = false;
        for i in 1..MAX_ITER {
            let fi = i as f64;
            a -= 2.0 * fi;
            c = -a * c / (fi + 1.0);
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh = (b * d - 1.0) * delh;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < f64::EPSILON {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numerical(format!("bessel_k continued fraction did not converge at x={x}")));
        }
        h *= a1;
        let kmu = (PI / (2.0 * x)).sqrt() / s;
        let k1 = kmu * (mu + x + 0.5 - h) * xi;
        Ok((kmu, k1, -x))
    }
}

/// ln K_ν(x). Finite for every finite order and x > 0.
pub fn ln_bessel_k(order: f64, x: f64) -> Result<f64> {
    Ok(ln_bessel_k_dlog(order, x)?.0)
}

/// (ln K_ν(x), d ln K_ν / d ln x), the latter from K'_ν = −K_{ν+1} + (ν/x)K_ν.
pub(crate) fn ln_bessel_k_dlog(order: f64, x: f64) -> Result<(f64, f64)> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(format!("bessel_k requires finite x > 0, got {x}")));
    }
    if !order.is_finite() {
        return Err(domain(format!("bessel_k requires a finite order, got {order}")));
    }
    let nu = order.abs();
    let nl = (nu + 0.5).floor();
    let mu = nu - nl;
    let (mut k0, mut k1, mut log_scale) = k_fractional(mu, x)?;
    let two_over_x = 2.0 / x;
    const BIG: f64 = 1e250;
    for i in 0..(nl as u64) {
        let next = (mu + i as f64 + 1.0) * two_over_x * k1 + k0;
        k0 = k1;
        k1 = next;
        if k1 > BIG {
            k0 /= BIG;
            k1 /= BIG;
            log_scale += BIG.ln();
        }
    }
    Ok((k0.ln() + log_scale, nu - x * k1 / k0))
}

/// K_ν(x). Returns a range error when the value overflows; use
/// [`bessel_k_scaled`] or [`ln_bessel_k`] there.
pub fn bessel_k(order: f64, x: f64) -> Result<f64> {
    let lk = ln_bessel_k(order, x)?;
    let v = lk.exp();
    if !v.is_finite() {
        return Err(Error::Range(format!(
            "K_{order}({x}) overflows f64; use the scaled variant e^x·K"
        )));
    }
    Ok(v)
}

/// e^x · K_ν(x), free of underflow for large x.
pub fn bessel_k_scaled(order: f64, x: f64) -> Result<f64> {
    let v = (ln_bessel_k(order, x)? + x).exp();
    if !v.is_finite() {
        return Err(Error::Range(format!("e^x·K_{order}({x}) overflows f64")));
    }
    Ok(v)
}

/// K_ν(x), optionally scaled by e^x.
pub fn bessel_k_with(order: f64, x: f64, scaled: bool) -> Result<f64> {
    if scaled {
        bessel_k_scaled(order, x)
    } else {
        bessel_k(order, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn half_order_closed_form() {
        for &x in &[1e-6, 0.01, 0.5, 1.999, 2.0, 2.5, 10.0, 100.0, 600.0] {
            let exact = (PI / (2.0 * x)).sqrt() * (-x).exp();
            assert!(rel(bessel_k(0.5, x).unwrap(), exact) < 1e-13, "x={x}");
            assert!(rel(bessel_k(-0.5, x).unwrap(), exact) < 1e-13, "x={x}");
        }
        let v = bessel_k(0.5, 2.0).unwrap();
        assert!((v - 0.119_937_7).abs() < 1e-7);
    }

    #[test]
    fn k_three_halves_closed_form() {
        for &x in &[0.05, 1.0, 3.0, 40.0] {
            let exact = (PI / (2.0 * x)).sqrt() * (-x).exp() * (1.0 + 1.0 / x);
            assert!(rel(bessel_k(1.5, x).unwrap(), exact) < 1e-13, "x={x}");
        }
    }

    #[test]
    fn reference_values() {
        // mpmath, 30 digits
        assert!(rel(bessel_k(1.0, 1.0).unwrap(), 0.601_907_230_197_234_6) < 1e-13);
        assert!(rel(bessel_k(0.0, 1.0).unwrap(), 0.421_024_438_240_708_3) < 1e-13);
        assert!(rel(bessel_k(0.0, 0.1).unwrap(), 2.427_069_024_702_016_6) < 1e-13);
        assert!(rel(bessel_k(2.0, 5.0).unwrap(), 5.308_943_712_223_46e-3) < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(matches!(bessel_k(1.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_k(1.0, -1.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_k(f64::NAN, 1.0), Err(Error::Domain(_))));
        // K_5(1e-8) ~ 3e41 is fine; a large order at tiny x overflows
        assert!(bessel_k(5.0, 1e-8).is_ok());
        assert!(matches!(bessel_k(60.0, 1e-8), Err(Error::Range(_))));
        assert!(ln_bessel_k(60.0, 1e-8).unwrap().is_finite());
    }

    #[test]
    fn log_derivative_matches_differences() {
        for &(nu, x) in &[(0.0, 0.3), (-1.7, 2.5), (3.2, 11.0), (0.5, 1.0)] {
            let (_, d) = ln_bessel_k_dlog(nu, x).unwrap();
            let e = 1e-6;
            let num = (ln_bessel_k(nu, x * (1.0 + e)).unwrap() - ln_bessel_k(nu, x * (1.0 - e)).unwrap())
                / ((1.0 + e).ln() - (1.0 - e).ln());
            assert!((d - num).abs() < 1e-6 * d.abs().max(1.0), "nu={nu} x={x}: {d} vs {num}");
        }
    }

    #[test]
    fn scaled_survives_large_x() {
        let s = bessel_k_scaled(1.0, 2000.0).unwrap();
        let approx = (PI / 4000.0).sqrt() * (1.0 + 3.0 / 16000.0);
        assert!(rel(s, approx) < 1e-7);
        assert_eq!(bessel_k(1.0, 2000.0).unwrap(), 0.0);
    }
}
