//! Special functions and numerical machinery shared by the distribution kernels.

mod bessel;
mod gamma;
pub mod interp;
mod inversion;
pub mod quad;

pub use bessel::{bessel_k, bessel_k_scaled, bessel_k_with, ln_bessel_k};
pub(crate) use bessel::ln_bessel_k_dlog;
pub use gamma::{hurwitz_zeta, log_gamma};
pub(crate) use gamma::ln_gamma_pos;
pub use inversion::{cf_invert, InversionGrid, TabulatedDensity, DEFAULT_POINTS, MIN_POINTS};
pub(crate) use inversion::invert_raw;
pub use quad::{integrate, integrate_lower, integrate_upper, QuadResult};

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Pairwise sum over fixed-size blocks; the result does not depend on thread count.
pub fn stable_sum(values: &[f64]) -> f64 {
    fn pairwise(v: &[f64]) -> f64 {
        if v.len() <= 64 {
            return v.iter().sum();
        }
        let mid = v.len() / 2;
        pairwise(&v[..mid]) + pairwise(&v[mid..])
    }
    pairwise(values)
}
