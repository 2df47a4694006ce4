//! Generalized inverse Gaussian variates, density ∝ x^{λ−1}·exp(−(χ/x + ψx)/2).
//!
//! Uses the ratio-of-uniforms samplers of Hörmann and Leydold (2014) on the
//! two-parameter form with ω = √(χψ), scaled by η = √(χ/ψ). Negative λ is
//! handled through X ~ GIG(−λ) ⇒ 1/X ~ GIG(λ) in the standardized form.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Open01};

fn mode(lambda: f64, omega: f64) -> f64 {
    if lambda >= 1.0 {
        ((lambda - 1.0).hypot(omega) + (lambda - 1.0)) / omega
    } else {
        omega / ((1.0 - lambda).hypot(omega) + (1.0 - lambda))
    }
}

#[inline]
fn unif<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Open01.sample(rng)
}

/// Ratio-of-uniforms with mode shift, for λ > 2 or ω > 3.
fn rou_shift<R: Rng + ?Sized>(lambda: f64, omega: f64, rng: &mut R) -> f64 {
    let t = 0.5 * (lambda - 1.0);
    let s = 0.25 * omega;
    let xm = mode(lambda, omega);
    let nc = t * xm.ln() - s * (xm + 1.0 / xm);
    let a = -(2.0 * (lambda + 1.0) / omega + xm);
    let b = 2.0 * (lambda - 1.0) * xm / omega - 1.0;
    let c = xm;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let fi = (-q / (2.0 * (-(p * p * p) / 27.0).sqrt())).acos();
    let fak = 2.0 * (-p / 3.0).sqrt();
    let y1 = fak * (fi / 3.0).cos() - a / 3.0;
    let y2 = fak * (fi / 3.0 + 4.0 / 3.0 * std::f64::consts::PI).cos() - a / 3.0;
    let uplus = (y1 - xm) * (t * y1.ln() - s * (y1 + 1.0 / y1) - nc).exp();
    let uminus = (y2 - xm) * (t * y2.ln() - s * (y2 + 1.0 / y2) - nc).exp();
    loop {
        let u = uminus + unif(rng) * (uplus - uminus);
        let v = unif(rng);
        let x = u / v + xm;
        if x > 0.0 && v.ln() <= t * x.ln() - s * (x + 1.0 / x) - nc {
            return x;
        }
    }
}

/// Ratio-of-uniforms without shift, for moderate λ and ω.
fn rou_noshift<R: Rng + ?Sized>(lambda: f64, omega: f64, rng: &mut R) -> f64 {
    let t = 0.5 * (lambda - 1.0);
    let s = 0.25 * omega;
    let xm = mode(lambda, omega);
    let nc = t * xm.ln() - s * (xm + 1.0 / xm);
    let ym = ((lambda + 1.0) + (lambda + 1.0).hypot(omega)) / omega;
    let um = (0.5 * (lambda + 1.0) * ym.ln() - s * (ym + 1.0 / ym) - nc).exp();
    loop {
        let u = um * unif(rng);
        let v = unif(rng);
        let x = u / v;
        if v.ln() <= t * x.ln() - s * (x + 1.0 / x) - nc {
            return x;
        }
    }
}

/// Rejection from a three-piece hat, for 0 ≤ λ < 1 and small ω.
fn small_omega<R: Rng + ?Sized>(lambda: f64, omega: f64, rng: &mut R) -> f64 {
    let xm = mode(lambda, omega);
    let x0 = omega / (1.0 - lambda);
    let k0 = ((lambda - 1.0) * xm.ln() - 0.5 * omega * (xm + 1.0 / xm)).exp();
    let a0 = k0 * x0;
    let (k1, a1, k2, a2);
    if x0 >= 2.0 / omega {
        k1 = 0.0;
        a1 = 0.0;
        k2 = x0.powf(lambda - 1.0);
        a2 = k2 * 2.0 * (-omega * x0 / 2.0).exp() / omega;
    } else {
        k1 = (-omega).exp();
        a1 = if lambda == 0.0 {
            k1 * (2.0 / (omega * omega)).ln()
        } else {
            k1 / lambda * ((2.0 / omega).powf(lambda) - x0.powf(lambda))
        };
        k2 = (2.0 / omega).powf(lambda - 1.0);
        a2 = k2 * 2.0 * (-1f64).exp() / omega;
    }
    let total = a0 + a1 + a2;
    loop {
        let mut v = total * unif(rng);
        let (x, hx);
        if v <= a0 {
            x = x0 * v / a0;
            hx = k0;
        } else {
            v -= a0;
            if v <= a1 {
                if lambda == 0.0 {
                    x = omega * (omega.exp() * v).exp();
                    hx = k1 / x;
                } else {
                    x = (x0.powf(lambda) + lambda / k1 * v).powf(1.0 / lambda);
                    hx = k1 * x.powf(lambda - 1.0);
                }
            } else {
                v -= a1;
                let a = x0.max(2.0 / omega);
                x = -2.0 / omega * ((-omega / 2.0 * a).exp() - omega / (2.0 * k2) * v).ln();
                hx = k2 * (-omega / 2.0 * x).exp();
            }
        }
        let u = unif(rng) * hx;
        if u.ln() <= (lambda - 1.0) * x.ln() - omega / 2.0 * (x + 1.0 / x) {
            return x;
        }
    }
}

/// One GIG(λ, χ, ψ) draw. Requires χ > 0; ψ = 0 with λ < 0 is the inverse
/// gamma limit χ/(2·Gamma(−λ)).
pub fn sample_gig<R: Rng + ?Sized>(lambda: f64, chi: f64, psi: f64, rng: &mut R) -> f64 {
    if psi == 0.0 {
        let g = Gamma::new(-lambda, 1.0).expect("inverse gamma limit needs lambda < 0");
        return 0.5 * chi / g.sample(rng);
    }
    let omega = (chi * psi).sqrt();
    let eta = (chi / psi).sqrt();
    let lam = lambda.abs();
    let x = if lam > 2.0 || omega > 3.0 {
        rou_shift(lam, omega, rng)
    } else if lam >= 1.0 - 2.25 * omega * omega || omega > 0.2 {
        rou_noshift(lam, omega, rng)
    } else {
        small_omega(lam, omega, rng)
    };
    if lambda < 0.0 {
        eta / x
    } else {
        eta * x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::ln_bessel_k;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// E[X] = η·K_{λ+1}(ω)/K_λ(ω).
    fn gig_mean(lambda: f64, chi: f64, psi: f64) -> f64 {
        let omega = (chi * psi).sqrt();
        (chi / psi).sqrt() * (ln_bessel_k(lambda + 1.0, omega).unwrap() - ln_bessel_k(lambda, omega).unwrap()).exp()
    }

    #[test]
    fn means_across_regimes() {
        // one case per sampler branch, both signs of λ
        let cases = [
            (-0.5, 1.0, 1.0),
            (0.5, 0.01, 0.01),
            (0.3, 0.02, 0.5),
            (-0.3, 0.02, 0.5),
            (3.5, 2.0, 1.0),
            (1.0, 20.0, 1.0),
            (-2.7, 0.4, 0.3),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (l, chi, psi) in cases {
            let n = 40_000;
            let xs: Vec<f64> = (0..n).map(|_| sample_gig(l, chi, psi, &mut rng)).collect();
            assert!(xs.iter().all(|x| *x > 0.0 && x.is_finite()));
            let m = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
            let want = gig_mean(l, chi, psi);
            let se = (var / n as f64).sqrt();
            assert!((m - want).abs() < 4.0 * se, "λ={l} χ={chi} ψ={psi}: mean {m} vs {want} (se {se})");
        }
    }
}
