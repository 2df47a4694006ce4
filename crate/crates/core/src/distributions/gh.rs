//! Generalized hyperbolic densities in log space.
//!
//! Every member is written as
//! ln f(x) = c + β(x − μ) + ln K_ν(a·q) + p·ln q,  q = √(δ² + (x − μ)²),
//! with the Bessel term absent for the symmetric Student's t. Only the
//! constants differ between GH, NIG and skew-t.

use super::gig::sample_gig;
use super::{GhParams, NigParams, SkewTParams};
use crate::error::Result;
use crate::numerics::interp::UniformHermite;
use crate::numerics::{ln_bessel_k, ln_bessel_k_dlog, ln_gamma_pos};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use std::f64::consts::PI;

/// Batches at least this long go through a tabulated ln K.
const TABLE_MIN_BATCH: usize = 4096;
/// Node spacing of the ln K table in ln(argument).
const TABLE_STEP: f64 = 0.004;

#[derive(Debug, Clone, Copy)]
enum Mixing {
    /// GIG(λ, δ², γ²)
    Gig { lambda: f64, chi: f64, psi: f64 },
    /// δ²/(2·Gamma(ν/2)), the ψ = 0 limit
    InverseGamma { shape: f64, chi: f64 },
}

#[derive(Debug, Clone)]
pub(crate) struct GhKernel {
    beta: f64,
    delta: f64,
    mu: f64,
    log_const: f64,
    /// (order ν, multiplier a) of the Bessel factor.
    bessel: Option<(f64, f64)>,
    q_power: f64,
    mixing: Mixing,
    scale_hint: f64,
}

impl GhKernel {
    pub fn gh(p: &GhParams) -> Result<Self> {
        p.validate()?;
        let gamma = p.gamma();
        let lam = p.lambda;
        let log_const = lam * (gamma / p.delta).ln() - 0.5 * (2.0 * PI).ln() - ln_bessel_k(lam, p.delta * gamma)?
            - (lam - 0.5) * p.alpha.ln();
        Ok(Self {
            beta: p.beta,
            delta: p.delta,
            mu: p.mu,
            log_const,
            bessel: Some((lam - 0.5, p.alpha)),
            q_power: lam - 0.5,
            mixing: Mixing::Gig { lambda: lam, chi: p.delta * p.delta, psi: gamma * gamma },
            scale_hint: p.delta.min((p.delta / p.alpha).sqrt()),
        })
    }

    pub fn nig(p: &NigParams) -> Result<Self> {
        p.validate()?;
        let gamma = p.gamma();
        Ok(Self {
            beta: p.beta,
            delta: p.delta,
            mu: p.mu,
            log_const: p.alpha.ln() + p.delta.ln() + p.delta * gamma - PI.ln(),
            bessel: Some((1.0, p.alpha)),
            q_power: -1.0,
            mixing: Mixing::Gig { lambda: -0.5, chi: p.delta * p.delta, psi: gamma * gamma },
            scale_hint: p.delta.min((p.delta / p.alpha).sqrt()),
        })
    }

    pub fn skew_t(p: &SkewTParams) -> Result<Self> {
        p.validate()?;
        let nu = p.nu;
        let half = 0.5 * (nu + 1.0);
        let mixing = Mixing::InverseGamma { shape: 0.5 * nu, chi: p.delta * p.delta };
        let scale_hint = p.delta / nu.sqrt().max(1.0);
        if p.beta == 0.0 {
            // β → 0 limit: Γ((ν+1)/2)/(Γ(ν/2)√π δ)·(1 + (x−μ)²/δ²)^{−(ν+1)/2}
            let log_const = ln_gamma_pos(half) - ln_gamma_pos(0.5 * nu) - 0.5 * PI.ln() + nu * p.delta.ln();
            return Ok(Self {
                beta: 0.0,
                delta: p.delta,
                mu: p.mu,
                log_const,
                bessel: None,
                q_power: -(nu + 1.0),
                mixing,
                scale_hint,
            });
        }
        let ab = p.beta.abs();
        let log_const = 0.5 * (1.0 - nu) * 2f64.ln() + nu * p.delta.ln() + half * ab.ln()
            - ln_gamma_pos(0.5 * nu)
            - 0.5 * PI.ln();
        Ok(Self {
            beta: p.beta,
            delta: p.delta,
            mu: p.mu,
            log_const,
            bessel: Some((half, ab)),
            q_power: -half,
            mixing,
            scale_hint,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Width used to lay out CDF grids.
    pub fn cdf_scale(&self) -> f64 {
        self.scale_hint
    }

    #[inline]
    fn q(&self, x: f64) -> f64 {
        (x - self.mu).hypot(self.delta)
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        if !x.is_finite() {
            return f64::NEG_INFINITY;
        }
        let q = self.q(x);
        let mut v = self.log_const + self.beta * (x - self.mu) + self.q_power * q.ln();
        if let Some((order, a)) = self.bessel {
            v += match ln_bessel_k(order, a * q) {
                Ok(k) => k,
                Err(_) => return f64::NEG_INFINITY,
            };
        }
        v
    }

    pub fn ln_pdf_many(&self, xs: &[f64]) -> Vec<f64> {
        let Some((order, a)) = self.bessel else {
            return xs.iter().map(|&x| self.ln_pdf(x)).collect();
        };
        if xs.len() < TABLE_MIN_BATCH || xs.iter().any(|x| !x.is_finite()) {
            return xs.iter().map(|&x| self.ln_pdf(x)).collect();
        }
        let q_max = xs.iter().fold(0.0f64, |m, &x| m.max((x - self.mu).abs())).hypot(self.delta);
        let Some(table) = LnKTable::new(order, a * self.delta, a * q_max) else {
            return xs.iter().map(|&x| self.ln_pdf(x)).collect();
        };
        let ln_a = a.ln();
        let d2 = self.delta * self.delta;
        xs.iter()
            .map(|&x| {
                let y = x - self.mu;
                let ln_q = 0.5 * (y * y + d2).ln();
                self.log_const + self.beta * y + self.q_power * ln_q + table.eval(ln_a + ln_q)
            })
            .collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        let mut out = Vec::with_capacity(n);
        match self.mixing {
            Mixing::Gig { lambda, chi, psi } => {
                for _ in 0..n {
                    let v = sample_gig(lambda, chi, psi, rng);
                    let z: f64 = StandardNormal.sample(rng);
                    out.push(self.mu + self.beta * v + v.sqrt() * z);
                }
            }
            Mixing::InverseGamma { shape, chi } => {
                let g = Gamma::new(shape, 1.0).expect("shape is positive");
                for _ in 0..n {
                    let v = 0.5 * chi / g.sample(rng);
                    let z: f64 = StandardNormal.sample(rng);
                    out.push(self.mu + self.beta * v + v.sqrt() * z);
                }
            }
        }
        out
    }
}

/// ln K_ν(e^v) tabulated on a uniform grid in v with exact slopes.
struct LnKTable {
    interp: UniformHermite,
}

impl LnKTable {
    fn new(order: f64, u_min: f64, u_max: f64) -> Option<Self> {
        let v0 = u_min.ln();
        let v1 = u_max.ln().max(v0 + TABLE_STEP);
        let n = (((v1 - v0) / TABLE_STEP).ceil() as usize + 1).max(4);
        let h = (v1 - v0) / (n - 1) as f64;
        let mut y = Vec::with_capacity(n);
        let mut d = Vec::with_capacity(n);
        for j in 0..n {
            let (lk, dl) = ln_bessel_k_dlog(order, (v0 + j as f64 * h).exp()).ok()?;
            y.push(lk);
            d.push(dl);
        }
        Some(Self { interp: UniformHermite { x0: v0, h, y, d } })
    }

    #[inline]
    fn eval(&self, v: f64) -> f64 {
        let u = ((v - self.interp.x0) / self.interp.h).max(0.0);
        let last = self.interp.y.len() - 2;
        let k = (u as usize).min(last);
        let t = (u - k as f64).min(1.0);
        crate::numerics::interp::hermite(
            self.interp.y[k],
            self.interp.y[k + 1],
            self.interp.d[k],
            self.interp.d[k + 1],
            self.interp.h,
            t,
        )
    }
}

/// Mean of a GH law, E[X] = μ + β·E[V].
#[cfg(test)]
pub(crate) fn gh_mean(p: &GhParams) -> Result<f64> {
    let g = p.gamma();
    if g == 0.0 {
        return Err(crate::error::domain("GH mean needs |beta| < alpha"));
    }
    let w = p.delta * g;
    let ratio = (ln_bessel_k(p.lambda + 1.0, w)? - ln_bessel_k(p.lambda, w)?).exp();
    Ok(p.mu + p.beta * p.delta / g * ratio)
}
