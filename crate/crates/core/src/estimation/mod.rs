//! Maximum-likelihood fitting, quantile initialization for stable laws and
//! likelihood-ratio tests between nested GH subfamilies.
//!
//! Every family is optimized over an unconstrained vector θ. Positive
//! parameters go through exp, bounded ones through tanh or a scaled
//! logistic, and location and scale are measured against the sample median
//! and half interquartile range so that θ is O(1) whatever the data units.

mod optim;
mod quantile_init;

use crate::distributions::{
    Family, GaussianParams, GhParams, Model, NigParams, Params, SkewTParams, StableParams, StableTable,
};
use crate::error::{Error, Result};
use crate::ingest::ReturnSeries;
use crate::numerics::stable_sum;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub use optim::{minimize, OptimOptions, OptimResult};
pub use quantile_init::stable_quantile_init;

/// Smallest stable α the optimizer may visit; below it the density grid
/// grows past practical sizes.
pub const STABLE_ALPHA_FLOOR: f64 = 0.2;
pub const MIN_FIT_SIZE: usize = 50;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FitResult {
    pub family: Family,
    pub params: Params,
    #[serde(rename = "loglik")]
    pub log_likelihood: f64,
    pub n: usize,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub objective_tolerance_met: bool,
    pub init_params: Params,
    pub init_loglik: f64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FitOptions {
    pub optim: OptimOptions,
}

/// Location and scale used to normalize θ.
#[derive(Debug, Clone, Copy)]
struct Anchor {
    m: f64,
    s: f64,
}

impl Anchor {
    fn of(data: &[f64]) -> Result<Self> {
        let mut sorted = data.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let q = |p: f64| {
            let h = (n - 1) as f64 * p;
            let k = h.floor() as usize;
            sorted[k] + (h - k as f64) * (sorted[(k + 1).min(n - 1)] - sorted[k])
        };
        let m = q(0.5);
        let mut s = 0.5 * (q(0.75) - q(0.25));
        if !(s > 0.0) {
            let mean = data.iter().sum::<f64>() / n as f64;
            s = (data.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        }
        if !(s > 0.0) {
            return Err(Error::Input("data have zero spread".into()));
        }
        Ok(Self { m, s })
    }
}

fn logistic(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

fn logit(p: f64) -> f64 {
    let p = p.clamp(1e-12, 1.0 - 1e-12);
    (p / (1.0 - p)).ln()
}

fn atanh_clamped(r: f64) -> f64 {
    r.clamp(-1.0 + 1e-12, 1.0 - 1e-12).atanh()
}

fn to_theta(p: &Params, a: Anchor) -> Vec<f64> {
    let loc = |mu: f64| (mu - a.m) / a.s;
    let sc = |d: f64| (d / a.s).ln();
    match *p {
        Params::Stable(p) => vec![
            logit((p.alpha - STABLE_ALPHA_FLOOR) / (2.0 - STABLE_ALPHA_FLOOR)),
            atanh_clamped(p.beta),
            sc(p.delta),
            loc(p.mu),
        ],
        Params::Gh(p) => vec![p.lambda, (p.alpha * a.s).ln(), atanh_clamped(p.beta / p.alpha), sc(p.delta), loc(p.mu)],
        Params::Nig(p) => vec![(p.alpha * a.s).ln(), atanh_clamped(p.beta / p.alpha), sc(p.delta), loc(p.mu)],
        Params::SkewT(p) => vec![p.nu.ln(), p.beta * a.s, sc(p.delta), loc(p.mu)],
        Params::Gaussian(p) => vec![loc(p.mu), sc(p.sigma)],
    }
}

fn from_theta(family: Family, t: &[f64], a: Anchor) -> Params {
    let mu = a.m + a.s * t[t.len() - 1];
    let delta = a.s * t[t.len() - 2].exp();
    match family {
        Family::Stable => Params::Stable(StableParams {
            alpha: STABLE_ALPHA_FLOOR + (2.0 - STABLE_ALPHA_FLOOR) * logistic(t[0]),
            beta: t[1].tanh(),
            delta,
            mu,
        }),
        Family::Gh => {
            let alpha = t[1].exp() / a.s;
            Params::Gh(GhParams { lambda: t[0], alpha, beta: alpha * t[2].tanh(), delta, mu })
        }
        Family::Nig => {
            let alpha = t[0].exp() / a.s;
            Params::Nig(NigParams { alpha, beta: alpha * t[1].tanh(), delta, mu })
        }
        Family::SkewT => Params::SkewT(SkewTParams { nu: t[0].exp(), beta: t[1] / a.s, delta, mu }),
        Family::Gaussian => Params::Gaussian(GaussianParams { mu: a.m + a.s * t[0], sigma: a.s * t[1].exp() }),
    }
}

/// Starting values: median location, half-IQR scale, no skew, α = 1/scale,
/// λ = −½, ν = 4, and the quantile estimate for stable laws.
pub fn default_init(family: Family, data: &[f64]) -> Result<Params> {
    let a = Anchor::of(data)?;
    Ok(match family {
        Family::Stable => Params::Stable(stable_quantile_init(data)?),
        Family::Gh => Params::Gh(GhParams { lambda: -0.5, alpha: 1.0 / a.s, beta: 0.0, delta: a.s, mu: a.m }),
        Family::Nig => Params::Nig(NigParams { alpha: 1.0 / a.s, beta: 0.0, delta: a.s, mu: a.m }),
        Family::SkewT => Params::SkewT(SkewTParams { nu: 4.0, beta: 0.0, delta: a.s, mu: a.m }),
        Family::Gaussian => Params::Gaussian(GaussianParams { mu: a.m, sigma: a.s }),
    })
}

/// Log-likelihood evaluator that reuses stable tables across changes of δ and μ.
struct Likelihood<'a> {
    data: &'a [f64],
    stable_cache: Vec<((u64, u64), StableTable)>,
    buf: Vec<f64>,
}

impl<'a> Likelihood<'a> {
    fn new(data: &'a [f64]) -> Self {
        Self { data, stable_cache: Vec::new(), buf: Vec::with_capacity(data.len()) }
    }

    fn eval(&mut self, p: &Params) -> Result<f64> {
        p.validate()?;
        if let Params::Stable(sp) = p {
            let key = (sp.alpha.to_bits(), sp.beta.to_bits());
            let pos = match self.stable_cache.iter().position(|(k, _)| *k == key) {
                Some(i) => i,
                None => {
                    let table = StableTable::new(StableParams::standard(sp.alpha, sp.beta))?;
                    if self.stable_cache.len() == 4 {
                        self.stable_cache.remove(0);
                    }
                    self.stable_cache.push((key, table));
                    self.stable_cache.len() - 1
                }
            };
            let table = &self.stable_cache[pos].1;
            self.buf.clear();
            self.buf.extend(self.data.iter().map(|&x| table.ln_pdf_rescaled(x, sp.delta, sp.mu)));
            return Ok(stable_sum(&self.buf));
        }
        Ok(Model::new(p)?.log_likelihood(self.data))
    }
}

/// Maximum-likelihood fit of `family` to `data`.
pub fn fit(family: Family, data: &[f64], init: Option<&Params>, opts: &FitOptions) -> Result<FitResult> {
    let n = data.len();
    if n < MIN_FIT_SIZE {
        return Err(Error::Input(format!("fitting needs at least {MIN_FIT_SIZE} observations, got {n}")));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("data contain non-finite values".into()));
    }
    let init = match init {
        Some(p) => {
            if p.family() != family {
                return Err(Error::Input(format!("initial values are for {} but the fit is for {family}", p.family())));
            }
            p.validate()?;
            *p
        }
        None => default_init(family, data)?,
    };
    let mut lik = Likelihood::new(data);
    if family == Family::Gaussian {
        let mean = data.iter().sum::<f64>() / n as f64;
        let var = data.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        let params = Params::Gaussian(GaussianParams::new(mean, var.sqrt())?);
        return Ok(FitResult {
            family,
            params,
            log_likelihood: lik.eval(&params)?,
            n,
            iterations: 0,
            evaluations: 1,
            converged: true,
            objective_tolerance_met: true,
            init_params: init,
            init_loglik: lik.eval(&init)?,
        });
    }
    let anchor = Anchor::of(data)?;
    let theta0 = to_theta(&init, anchor);
    // the map is exact up to rounding, so evaluate the start where the optimizer does
    let start = from_theta(family, &theta0, anchor);
    let init_loglik = lik.eval(&start).ok().filter(|v| v.is_finite()).ok_or_else(|| {
        Error::Numerical(format!("log-likelihood is not finite at the initial parameters {start:?}"))
    })?;
    let scale = n as f64;
    let mut objective = |t: &[f64]| match lik.eval(&from_theta(family, t, anchor)) {
        Ok(v) if v.is_finite() => -v / scale,
        _ => f64::INFINITY,
    };
    let mut optim = opts.optim;
    if family == Family::Stable {
        // tabulated densities are smooth only to ~1e-10, so differentiate on a coarser step
        optim.fd_step = optim.fd_step.max(1e-5);
    }
    let r = minimize(&mut objective, &theta0, &optim);
    let params = from_theta(family, &r.x, anchor);
    let log_likelihood = -r.f * scale;
    Ok(FitResult {
        family,
        params,
        log_likelihood,
        n,
        iterations: r.iterations,
        evaluations: r.evaluations,
        converged: r.tolerance_met && r.iterations < optim.max_iterations,
        objective_tolerance_met: r.tolerance_met,
        init_params: start,
        init_loglik,
    })
}

/// [`fit`] on the values of a return series.
pub fn mle_fit(family: Family, data: &ReturnSeries, init: Option<&Params>) -> Result<FitResult> {
    fit(family, data.values(), init, &FitOptions::default())
}

/// Log-likelihood of `params` on `data`, evaluated the way [`fit`] does.
pub fn log_likelihood(params: &Params, data: &[f64]) -> Result<f64> {
    Likelihood::new(data).eval(params)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrtResult {
    pub full: Family,
    pub nested: Family,
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    /// `p_value` for reports; values under 1e-16 print as "<1e-16".
    pub p_display: String,
}

pub fn format_p_value(p: f64) -> String {
    if p < 1e-16 {
        "<1e-16".to_string()
    } else {
        format!("{p:.4}")
    }
}

/// True when `nested` is a restriction or boundary case of `full`.
fn nests(full: Family, nested: Family) -> bool {
    matches!((full, nested), (Family::Gh, Family::Nig) | (Family::Gh, Family::SkewT))
}

/// Likelihood-ratio test of `nested` against `full`, fitted to the same data.
pub fn lr_test(full: &FitResult, nested: &FitResult) -> Result<LrtResult> {
    if full.n != nested.n {
        return Err(Error::Input(format!("fits use different samples (n = {} vs {})", full.n, nested.n)));
    }
    if !nests(full.family, nested.family) {
        return Err(Error::Input(format!("{} is not nested in {}", nested.family, full.family)));
    }
    let diff = full.log_likelihood - nested.log_likelihood;
    if diff < -1e-6 {
        return Err(Error::Numerical(format!(
            "the {} fit has a lower likelihood than the nested {} fit by {:e}; the optimizer failed",
            full.family, nested.family, -diff
        )));
    }
    let statistic = (2.0 * diff).max(0.0);
    let df = full.family.n_params() - nested.family.n_params();
    let p_value = ChiSquared::new(df as f64).expect("positive df").sf(statistic).clamp(0.0, 1.0);
    Ok(LrtResult { full: full.family, nested: nested.family, statistic, df, p_value, p_display: format_p_value(p_value) })
}

/// GH initial values matching a nested fit: exactly for NIG (λ = −½), and
/// for skew-t (λ = −ν/2) just inside the boundary α = |β|.
pub fn gh_init_from(nested: &Params) -> Option<Params> {
    match *nested {
        Params::Nig(p) => Some(Params::Gh(p.into())),
        Params::SkewT(p) => Some(Params::Gh(GhParams {
            lambda: -p.nu / 2.0,
            alpha: p.beta.abs() + 1e-3 / p.delta,
            beta: p.beta,
            delta: p.delta,
            mu: p.mu,
        })),
        _ => None,
    }
}

#[cfg(test)]
mod tests;
