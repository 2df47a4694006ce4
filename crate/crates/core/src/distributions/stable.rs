//! Lévy-stable laws, characteristic function
//! φ(t) = exp[itμ − |δt|^α (1 − iβ·sgn(t)·Φ)], Φ = tan(πα/2) or −(2/π)ln|t| at α = 1.
//!
//! The standardized law Z (δ = 1, μ = 0) is tabulated by FFT inversion on a
//! window centred on its bulk. Heavy tails fold back into the window, so the
//! images are removed using the tail expansion f(x) ~ Σ_n R_n x^{−nα−1},
//! whose lattice sums are Hurwitz zeta values. The same expansion answers
//! queries outside the window, and its integral gives the tail masses.

use super::StableParams;
use crate::error::{Error, Result};
use crate::numerics::interp::UniformHermite;
use crate::numerics::{hurwitz_zeta, invert_raw, ln_gamma_pos, InversionGrid};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Open01};
use std::f64::consts::{FRAC_PI_2, PI};

/// |α − 1| below this is treated as α = 1 when building densities.
pub const ALPHA_ONE_WINDOW: f64 = 1e-4;

const HALF_WIDTH: f64 = 64.0;
const HALF_WIDTH_ALPHA_ONE_SKEWED: f64 = 512.0;
const MAX_SPACING: f64 = 0.01;
// e^{−t^α} < 1e-16 beyond t^α = 36.8
const CF_CUTOFF: f64 = 36.8;
const MIN_POINTS: usize = 1 << 10;
const MAX_POINTS: usize = 1 << 21;
const MAX_TERMS: usize = 16;
const COARSE_NODES: usize = 65;

pub fn stable_cf(p: &StableParams, t: f64) -> Complex64 {
    if t == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let a = (p.delta * t).abs().powf(p.alpha);
    let phi = if p.alpha == 1.0 { -2.0 / PI * t.abs().ln() } else { (FRAC_PI_2 * p.alpha).tan() };
    Complex64::new(-a, a * p.beta * t.signum() * phi + t * p.mu).exp()
}

fn snap_alpha(alpha: f64) -> f64 {
    if (alpha - 1.0).abs() < ALPHA_ONE_WINDOW {
        1.0
    } else {
        alpha
    }
}

/// Standardized characteristic function; `tan_term` is tan(πα/2) (unused at α = 1).
fn standard_cf(alpha: f64, beta: f64, tan_term: f64, t: f64) -> Complex64 {
    if t == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let at = t.abs();
    let (a, phi) = if alpha == 1.0 { (at, -2.0 / PI * at.ln()) } else { (at.powf(alpha), tan_term) };
    Complex64::new(-a, a * beta * t.signum() * phi).exp()
}

/// Coefficients of f(x) ~ Σ R_n x^{−nα−1} (x → +∞) and Σ L_n |x|^{−nα−1} (x → −∞).
fn tail_coefficients(alpha: f64, beta: f64, tan_term: f64) -> (Vec<f64>, Vec<f64>) {
    if alpha == 2.0 {
        return (Vec::new(), Vec::new());
    }
    if alpha == 1.0 && beta != 0.0 {
        // the logarithmic term leaves only the leading order in closed form
        return (vec![(1.0 + beta) / PI], vec![(1.0 - beta) / PI]);
    }
    let z = Complex64::new(1.0, if alpha == 1.0 { 0.0 } else { -beta * tan_term });
    let mut right = Vec::with_capacity(MAX_TERMS);
    let mut left = Vec::with_capacity(MAX_TERMS);
    let mut zn = Complex64::new(1.0, 0.0);
    for n in 1..=MAX_TERMS {
        zn *= -z;
        let nf = n as f64;
        let g = (ln_gamma_pos(nf * alpha + 1.0) - ln_gamma_pos(nf + 1.0)).exp();
        let phase = FRAC_PI_2 * (nf * alpha + 1.0);
        let r = zn * g * Complex64::from_polar(1.0, -phase);
        let l = zn * g * Complex64::from_polar(1.0, phase);
        // cancellation leaves rounding noise where a coefficient is exactly zero
        let noise = 1e-13 * r.norm();
        right.push(if r.re.abs() > noise { r.re / PI } else { 0.0 });
        left.push(if l.re.abs() > noise { l.re / PI } else { 0.0 });
    }
    (right, left)
}

/// Number of expansion terms to keep for |x| ≥ x_ref: the asymptotic series
/// is cut once its terms start to grow.
fn usable_terms(alpha: f64, right: &[f64], left: &[f64], x_ref: f64) -> usize {
    let mut best = f64::INFINITY;
    for n in 0..right.len() {
        let m = right[n].abs().max(left[n].abs()) * x_ref.powf(-((n + 1) as f64) * alpha - 1.0);
        if m > 0.0 {
            if m > best {
                return n;
            }
            best = m;
        }
    }
    right.len()
}

fn series(coef: &[f64], alpha: f64, x: f64) -> f64 {
    let xa = x.powf(-alpha);
    let mut p = xa / x;
    let mut s = 0.0;
    for &c in coef {
        s += c * p;
        p *= xa;
    }
    s
}

/// ∫_x^∞ of the expansion: Σ c_n x^{−nα}/(nα).
fn series_mass(coef: &[f64], alpha: f64, x: f64) -> f64 {
    let xa = x.powf(-alpha);
    let mut p = xa;
    let mut s = 0.0;
    for (i, &c) in coef.iter().enumerate() {
        s += c * p / ((i + 1) as f64 * alpha);
        p *= xa;
    }
    s
}

/// Density and distribution function of one stable law, tabulated.
#[derive(Debug, Clone)]
pub struct StableTable {
    params: StableParams,
    /// α after snapping to 1 inside [`ALPHA_ONE_WINDOW`].
    alpha: f64,
    /// Location of Z in X = δZ + shift.
    shift: f64,
    interp: UniformHermite,
    cumulative: Vec<f64>,
    right: Vec<f64>,
    left: Vec<f64>,
    left_mass: f64,
    cdf_factor: f64,
}

impl StableTable {
    pub fn new(params: StableParams) -> Result<Self> {
        params.validate()?;
        let alpha = snap_alpha(params.alpha);
        let beta = params.beta;
        let tan_term = if alpha == 1.0 { 0.0 } else { (FRAC_PI_2 * alpha).tan() };
        let (center, half_width) = if alpha == 1.0 {
            (0.0, if beta != 0.0 { HALF_WIDTH_ALPHA_ONE_SKEWED } else { HALF_WIDTH })
        } else {
            // S1 places the bulk near β·tan(πα/2); the expansion about the
            // origin needs |x|^α well above |1 − iβ tan(πα/2)|
            let zmod = (1.0 + (beta * tan_term).powi(2)).sqrt();
            (beta * tan_term, HALF_WIDTH * zmod.powf(1.0 / alpha).max(1.0))
        };
        let t_max = CF_CUTOFF.powf(1.0 / alpha);
        let h_target = MAX_SPACING.min(PI / t_max);
        let n = ((2.0 * half_width / h_target).ceil() as usize).next_power_of_two().clamp(MIN_POINTS, MAX_POINTS);
        let grid = InversionGrid::new(center - half_width, center + half_width, n)?;
        let h = grid.spacing();
        let (mut pdf, mut dpdf) = invert_raw(|t| standard_cf(alpha, beta, tan_term, t), &grid);

        let (mut right, mut left) = tail_coefficients(alpha, beta, tan_term);
        let x_ref = half_width - center.abs();
        let k = usable_terms(alpha, &right, &left, x_ref);
        right.truncate(k);
        left.truncate(k);
        if k > 0 {
            remove_images(&mut pdf, &mut dpdf, &grid, alpha, &right, &left)?;
        }
        for (i, v) in pdf.iter_mut().enumerate() {
            if *v < 0.0 {
                if *v < -1e-7 {
                    return Err(Error::Numerical(format!(
                        "stable density tabulation for α={}, β={} went negative ({v:e}) at z={}",
                        params.alpha,
                        beta,
                        grid.x_min() + i as f64 * h
                    )));
                }
                *v = 0.0;
            }
        }
        let interp = UniformHermite::new(grid.x_min(), h, pdf, dpdf);
        let cumulative = interp.cumulative();
        let total = *cumulative.last().expect("grid is nonempty");
        let left_mass = if k > 0 { series_mass(&left, alpha, -grid.x_min()) } else { 0.0 };
        let right_mass = if k > 0 { series_mass(&right, alpha, grid.x_max()) } else { 0.0 };
        let cdf_factor = (1.0 - left_mass - right_mass) / total;
        if !(cdf_factor > 0.0) || (cdf_factor - 1.0).abs() > 1e-3 {
            return Err(Error::Numerical(format!(
                "stable tabulation for α={}, β={} lost normalization (window mass {total})",
                params.alpha, beta
            )));
        }
        let shift = if alpha == 1.0 {
            params.mu + 2.0 / PI * beta * params.delta * params.delta.ln()
        } else {
            params.mu
        };
        Ok(Self { params, alpha, shift, interp, cumulative, right, left, left_mass, cdf_factor })
    }

    pub fn params(&self) -> &StableParams {
        &self.params
    }

    pub fn n_points(&self) -> usize {
        self.interp.y.len()
    }

    /// Window of the tabulation in standardized units.
    pub fn window(&self) -> (f64, f64) {
        (self.interp.x0, self.interp.x_max())
    }

    fn standardize(&self, x: f64) -> f64 {
        (x - self.shift) / self.params.delta
    }

    fn pdf_z(&self, z: f64) -> f64 {
        if let Some(v) = self.interp.eval(z) {
            return v.max(0.0);
        }
        let v = if z > 0.0 { series(&self.right, self.alpha, z) } else { series(&self.left, self.alpha, -z) };
        v.max(0.0)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.pdf_z(self.standardize(x)) / self.params.delta
    }

    /// ln f(x) for the same (α, β) at another scale and location, without retabulating.
    pub fn ln_pdf_rescaled(&self, x: f64, delta: f64, mu: f64) -> f64 {
        let shift = if self.alpha == 1.0 { mu + 2.0 / PI * self.params.beta * delta * delta.ln() } else { mu };
        (self.pdf_z((x - shift) / delta) / delta).ln()
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        self.pdf(x).ln()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let z = self.standardize(x);
        let (lo, hi) = self.window();
        let upper = self.left_mass + self.cdf_factor * self.cumulative.last().expect("nonempty");
        let v = if z < lo {
            if self.left.is_empty() {
                0.0
            } else {
                series_mass(&self.left, self.alpha, -z).clamp(0.0, self.left_mass)
            }
        } else if z > hi {
            if self.right.is_empty() {
                1.0
            } else {
                (1.0 - series_mass(&self.right, self.alpha, z)).clamp(upper, 1.0)
            }
        } else {
            self.left_mass + self.cdf_factor * self.interp.integral_to(&self.cumulative, z)
        };
        v.clamp(0.0, 1.0)
    }
}

/// Subtract Σ_{m≠0} f(x + mP) from the periodized FFT values and derivatives.
fn remove_images(
    pdf: &mut [f64],
    dpdf: &mut [f64],
    grid: &InversionGrid,
    alpha: f64,
    right: &[f64],
    left: &[f64],
) -> Result<()> {
    let period = grid.period();
    let x0 = grid.x_min();
    let x1 = grid.x_max();
    let step = (x1 - x0) / (COARSE_NODES - 1) as f64;
    let mut val = Vec::with_capacity(COARSE_NODES);
    let mut der = Vec::with_capacity(COARSE_NODES);
    for j in 0..COARSE_NODES {
        let x = x0 + j as f64 * step;
        let ar = 1.0 + x / period;
        let al = 1.0 - x / period;
        let mut v = 0.0;
        let mut d = 0.0;
        for n in 0..right.len() {
            let s = (n + 1) as f64 * alpha + 1.0;
            let ps = period.powf(-s);
            if right[n] != 0.0 {
                v += right[n] * ps * hurwitz_zeta(s, ar)?;
                d -= s * right[n] * ps / period * hurwitz_zeta(s + 1.0, ar)?;
            }
            if left[n] != 0.0 {
                v += left[n] * ps * hurwitz_zeta(s, al)?;
                d += s * left[n] * ps / period * hurwitz_zeta(s + 1.0, al)?;
            }
        }
        val.push(v);
        der.push(d);
    }
    // the correction varies on the scale of the period, so a coarse Hermite
    // interpolant is exact to far below the tabulation error
    let coarse = UniformHermite { x0, h: step, y: val, d: der.clone() };
    let h = grid.spacing();
    for (i, (p, dp)) in pdf.iter_mut().zip(dpdf.iter_mut()).enumerate() {
        let x = (x0 + i as f64 * h).min(x1);
        *p -= coarse.eval(x).expect("inside the grid");
        let u = ((x - x0) / step).min((COARSE_NODES - 1) as f64 - 1e-9);
        let k = u.floor() as usize;
        let t = u - k as f64;
        *dp -= der[k] * (1.0 - t) + der[k + 1] * t;
    }
    Ok(())
}

/// Chambers–Mallows–Stuck draws in the same parameterization.
pub(crate) fn sample<R: Rng + ?Sized>(p: &StableParams, n: usize, rng: &mut R) -> Vec<f64> {
    let alpha = snap_alpha(p.alpha);
    let beta = p.beta;
    let mut out = Vec::with_capacity(n);
    if alpha == 1.0 {
        let drift = 2.0 / PI * beta * p.delta * p.delta.ln();
        for _ in 0..n {
            let u: f64 = Open01.sample(rng);
            let v = PI * (u - 0.5);
            let w: f64 = Exp1.sample(rng);
            let a = FRAC_PI_2 + beta * v;
            let x = 2.0 / PI * (a * v.tan() - beta * ((FRAC_PI_2 * w * v.cos()) / a).ln());
            out.push(p.delta * x + drift + p.mu);
        }
    } else {
        let tan_term = (FRAC_PI_2 * alpha).tan();
        let b = (beta * tan_term).atan() / alpha;
        let s = (1.0 + (beta * tan_term).powi(2)).powf(0.5 / alpha);
        for _ in 0..n {
            let u: f64 = Open01.sample(rng);
            let v = PI * (u - 0.5);
            let w: f64 = Exp1.sample(rng);
            let ab = alpha * (v + b);
            let x = s * ab.sin() / v.cos().powf(1.0 / alpha) * ((v - ab).cos() / w).powf((1.0 - alpha) / alpha);
            out.push(p.delta * x + p.mu);
        }
    }
    out
}
