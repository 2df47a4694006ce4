//! Densities, distribution functions and samplers for the five model
//! families: Lévy-stable, generalized hyperbolic (GH), normal inverse
//! Gaussian (NIG), GH skew Student's t and Gaussian.
//!
//! Parameter structs are plain values. [`Model`] validates a parameter
//! vector once, precomputes its constants and lazily caches the CDF grid, so
//! it is the type to hold on to when evaluating many points.

mod cdf;
mod gh;
mod gig;
mod stable;

use crate::error::{domain, Result};
use crate::numerics::{normal_cdf, stable_sum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

pub use cdf::CdfTable;
pub use gig::sample_gig;
pub use stable::{stable_cf, StableTable, ALPHA_ONE_WINDOW};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Stable,
    Gh,
    Nig,
    SkewT,
    Gaussian,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::Stable, Family::Gh, Family::Nig, Family::SkewT, Family::Gaussian];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Stable => "stable",
            Family::Gh => "gh",
            Family::Nig => "nig",
            Family::SkewT => "skew_t",
            Family::Gaussian => "gaussian",
        }
    }

    /// Number of free parameters.
    pub fn n_params(self) -> usize {
        match self {
            Family::Gh => 5,
            Family::Stable | Family::Nig | Family::SkewT => 4,
            Family::Gaussian => 2,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "stable" | "levy" | "levy_stable" => Ok(Family::Stable),
            "gh" | "generalized_hyperbolic" => Ok(Family::Gh),
            "nig" => Ok(Family::Nig),
            "skew_t" | "skewt" | "student_t" | "t" => Ok(Family::SkewT),
            "gaussian" | "normal" => Ok(Family::Gaussian),
            _ => Err(domain(format!("unknown family '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableParams {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GhParams {
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NigParams {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkewTParams {
    pub nu: f64,
    pub beta: f64,
    pub delta: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    pub mu: f64,
    pub sigma: f64,
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("{name} must be finite, got {v}")))
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("{name} must be finite and > 0, got {v}")))
    }
}

impl StableParams {
    pub fn new(alpha: f64, beta: f64, delta: f64, mu: f64) -> Result<Self> {
        let p = Self { alpha, beta, delta, mu };
        p.validate()?;
        Ok(p)
    }
    pub fn standard(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta, delta: 1.0, mu: 0.0 }
    }
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(domain(format!("stable alpha must lie in (0, 2], got {}", self.alpha)));
        }
        if !(self.beta.abs() <= 1.0) {
            return Err(domain(format!("stable beta must lie in [-1, 1], got {}", self.beta)));
        }
        check_positive("stable delta", self.delta)?;
        check_finite("stable mu", self.mu)
    }
}

impl GhParams {
    pub fn new(lambda: f64, alpha: f64, beta: f64, delta: f64, mu: f64) -> Result<Self> {
        let p = Self { lambda, alpha, beta, delta, mu };
        p.validate()?;
        Ok(p)
    }
    pub fn gamma(&self) -> f64 {
        (self.alpha * self.alpha - self.beta * self.beta).sqrt()
    }
    pub fn validate(&self) -> Result<()> {
        check_finite("GH lambda", self.lambda)?;
        check_positive("GH alpha", self.alpha)?;
        check_finite("GH beta", self.beta)?;
        if !(self.beta.abs() < self.alpha) {
            return Err(domain(format!(
                "GH requires |beta| < alpha, got beta={} alpha={}",
                self.beta, self.alpha
            )));
        }
        check_positive("GH delta", self.delta)?;
        check_finite("GH mu", self.mu)
    }
}

impl From<NigParams> for GhParams {
    fn from(p: NigParams) -> Self {
        GhParams { lambda: -0.5, alpha: p.alpha, beta: p.beta, delta: p.delta, mu: p.mu }
    }
}

impl NigParams {
    pub fn new(alpha: f64, beta: f64, delta: f64, mu: f64) -> Result<Self> {
        let p = Self { alpha, beta, delta, mu };
        p.validate()?;
        Ok(p)
    }
    pub fn gamma(&self) -> f64 {
        (self.alpha * self.alpha - self.beta * self.beta).sqrt()
    }
    pub fn validate(&self) -> Result<()> {
        GhParams::from(*self).validate().map_err(|e| domain(e.to_string().replace("GH", "NIG")))
    }
}

impl SkewTParams {
    pub fn new(nu: f64, beta: f64, delta: f64, mu: f64) -> Result<Self> {
        let p = Self { nu, beta, delta, mu };
        p.validate()?;
        Ok(p)
    }
    pub fn validate(&self) -> Result<()> {
        check_positive("skew-t nu", self.nu)?;
        check_finite("skew-t beta", self.beta)?;
        check_positive("skew-t delta", self.delta)?;
        check_finite("skew-t mu", self.mu)
    }
}

impl GaussianParams {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        let p = Self { mu, sigma };
        p.validate()?;
        Ok(p)
    }
    pub fn validate(&self) -> Result<()> {
        check_finite("gaussian mu", self.mu)?;
        check_positive("gaussian sigma", self.sigma)
    }
}

/// A parameter vector of any family. Serializes as
/// `{"family": "nig", "alpha": …, "beta": …, "delta": …, "mu": …}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Params {
    Stable(StableParams),
    Gh(GhParams),
    Nig(NigParams),
    SkewT(SkewTParams),
    Gaussian(GaussianParams),
}

impl Params {
    pub fn family(&self) -> Family {
        match self {
            Params::Stable(_) => Family::Stable,
            Params::Gh(_) => Family::Gh,
            Params::Nig(_) => Family::Nig,
            Params::SkewT(_) => Family::SkewT,
            Params::Gaussian(_) => Family::Gaussian,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Params::Stable(p) => p.validate(),
            Params::Gh(p) => p.validate(),
            Params::Nig(p) => p.validate(),
            Params::SkewT(p) => p.validate(),
            Params::Gaussian(p) => p.validate(),
        }
    }

    pub fn location(&self) -> f64 {
        match self {
            Params::Stable(p) => p.mu,
            Params::Gh(p) => p.mu,
            Params::Nig(p) => p.mu,
            Params::SkewT(p) => p.mu,
            Params::Gaussian(p) => p.mu,
        }
    }

    /// δ, or σ for the Gaussian.
    pub fn scale(&self) -> f64 {
        match self {
            Params::Stable(p) => p.delta,
            Params::Gh(p) => p.delta,
            Params::Nig(p) => p.delta,
            Params::SkewT(p) => p.delta,
            Params::Gaussian(p) => p.sigma,
        }
    }

    /// Parameters of a·X + b for a > 0.
    pub fn affine(&self, a: f64, b: f64) -> Params {
        match *self {
            Params::Stable(p) => {
                let shift = if p.alpha == 1.0 {
                    // the α=1 law is not location-scale closed without a drift
                    -2.0 / std::f64::consts::PI * p.beta * a * p.delta * a.ln()
                } else {
                    0.0
                };
                Params::Stable(StableParams { delta: a * p.delta, mu: a * p.mu + b + shift, ..p })
            }
            Params::Gh(p) => Params::Gh(GhParams {
                alpha: p.alpha / a,
                beta: p.beta / a,
                delta: a * p.delta,
                mu: a * p.mu + b,
                ..p
            }),
            Params::Nig(p) => Params::Nig(NigParams {
                alpha: p.alpha / a,
                beta: p.beta / a,
                delta: a * p.delta,
                mu: a * p.mu + b,
            }),
            Params::SkewT(p) => Params::SkewT(SkewTParams {
                beta: p.beta / a,
                delta: a * p.delta,
                mu: a * p.mu + b,
                ..p
            }),
            Params::Gaussian(p) => Params::Gaussian(GaussianParams { mu: a * p.mu + b, sigma: a * p.sigma }),
        }
    }
}

enum Kernel {
    Stable(StableTable),
    Gh(gh::GhKernel),
    Gaussian(GaussianParams),
}

/// A validated parameter vector with precomputed constants.
pub struct Model {
    params: Params,
    kernel: Kernel,
    cdf: OnceLock<std::result::Result<CdfTable, String>>,
}

impl fmt::Debug for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Model").field("params", &self.params).finish_non_exhaustive()
    }
}

impl Model {
    pub fn new(params: &Params) -> Result<Self> {
        params.validate()?;
        let kernel = match *params {
            Params::Stable(p) => Kernel::Stable(StableTable::new(p)?),
            Params::Gh(p) => Kernel::Gh(gh::GhKernel::gh(&p)?),
            Params::Nig(p) => Kernel::Gh(gh::GhKernel::nig(&p)?),
            Params::SkewT(p) => Kernel::Gh(gh::GhKernel::skew_t(&p)?),
            Params::Gaussian(p) => Kernel::Gaussian(p),
        };
        Ok(Self { params: *params, kernel, cdf: OnceLock::new() })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn family(&self) -> Family {
        self.params.family()
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        match &self.kernel {
            Kernel::Stable(t) => t.ln_pdf(x),
            Kernel::Gh(k) => k.ln_pdf(x),
            Kernel::Gaussian(p) => {
                let z = (x - p.mu) / p.sigma;
                -0.5 * z * z - p.sigma.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match &self.kernel {
            Kernel::Stable(t) => t.pdf(x),
            _ => self.ln_pdf(x).exp(),
        }
    }

    /// Log-densities at many points. Uses interpolation tables where that
    /// is faster than direct evaluation.
    pub fn ln_pdf_many(&self, xs: &[f64]) -> Vec<f64> {
        match &self.kernel {
            Kernel::Gh(k) => k.ln_pdf_many(xs),
            _ => xs.iter().map(|&x| self.ln_pdf(x)).collect(),
        }
    }

    /// Σ ln f(x_i), summed in a fixed pairwise order.
    pub fn log_likelihood(&self, xs: &[f64]) -> f64 {
        stable_sum(&self.ln_pdf_many(xs))
    }

    fn cdf_table(&self) -> Result<&CdfTable> {
        let cell = self.cdf.get_or_init(|| match &self.kernel {
            Kernel::Gh(k) => CdfTable::build(|x| k.ln_pdf(x).exp(), k.mu(), k.cdf_scale()).map_err(|e| e.to_string()),
            _ => Err("no tabulated CDF for this family".to_string()),
        });
        cell.as_ref().map_err(|e| crate::Error::Numerical(e.clone()))
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        match &self.kernel {
            Kernel::Stable(t) => Ok(t.cdf(x)),
            Kernel::Gaussian(p) => Ok(normal_cdf((x - p.mu) / p.sigma)),
            Kernel::Gh(k) => self.cdf_table()?.cdf(x, |y| k.ln_pdf(y).exp()),
        }
    }

    /// CDF at many points; sorted input yields nondecreasing output.
    pub fn cdf_many(&self, xs: &[f64]) -> Result<Vec<f64>> {
        let mut out = xs.iter().map(|&x| self.cdf(x)).collect::<Result<Vec<f64>>>()?;
        if xs.windows(2).all(|w| w[0] <= w[1]) {
            // interpolation rounding can dip by an ulp between close points
            for i in 1..out.len() {
                if out[i] < out[i - 1] {
                    out[i] = out[i - 1];
                }
            }
        }
        Ok(out)
    }

    /// Quantile by bisection on the CDF.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(domain(format!("quantile level must lie in (0, 1), got {p}")));
        }
        let loc = self.params.location();
        let s = self.params.scale();
        let mut lo = loc - s;
        let mut hi = loc + s;
        let mut step = s;
        while self.cdf(lo)? > p {
            step *= 2.0;
            lo = loc - step;
            if step > 1e300 {
                return Err(crate::Error::Numerical("quantile bracket diverged".into()));
            }
        }
        step = s;
        while self.cdf(hi)? < p {
            step *= 2.0;
            hi = loc + step;
            if step > 1e300 {
                return Err(crate::Error::Numerical("quantile bracket diverged".into()));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid)? < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// `n` draws, deterministic in `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(n, &mut rng)
    }

    pub fn sample_with<R: rand::Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        use rand_distr::{Distribution, StandardNormal};
        match (&self.kernel, &self.params) {
            (Kernel::Stable(_), Params::Stable(p)) => stable::sample(p, n, rng),
            (Kernel::Gh(k), _) => k.sample(n, rng),
            (Kernel::Gaussian(p), _) => (0..n)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(rng);
                    p.mu + p.sigma * z
                })
                .collect(),
            _ => unreachable!("kernel matches params by construction"),
        }
    }
}

pub fn stable_pdf(params: &StableParams, x: f64) -> Result<f64> {
    Ok(StableTable::new(*params)?.pdf(x))
}

pub fn stable_cdf(params: &StableParams, x: f64) -> Result<f64> {
    Ok(StableTable::new(*params)?.cdf(x))
}

pub fn gh_pdf(params: &GhParams, x: f64) -> Result<f64> {
    Ok(gh::GhKernel::gh(params)?.ln_pdf(x).exp())
}

pub fn nig_pdf(params: &NigParams, x: f64) -> Result<f64> {
    Ok(gh::GhKernel::nig(params)?.ln_pdf(x).exp())
}

pub fn skewt_pdf(params: &SkewTParams, x: f64) -> Result<f64> {
    Ok(gh::GhKernel::skew_t(params)?.ln_pdf(x).exp())
}

pub fn family_cdf(params: &Params, x: f64) -> Result<f64> {
    Model::new(params)?.cdf(x)
}

pub fn family_sample(params: &Params, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(domain("sample size must be at least 1"));
    }
    Ok(Model::new(params)?.sample(n, seed))
}

#[cfg(test)]
mod tests;
