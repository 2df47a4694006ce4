//! Density tabulation by discrete Fourier inversion of a characteristic function.
//!
//! With nodes x_k = x_min + k·h (k < N) and frequencies t_j = (j − N/2)·Δt,
//! Δt = 2π/(N·h), the inversion integral (1/2π)∫e^{−itx}φ(t)dt collapses to
//! one forward FFT of φ(t_j)e^{−it_j·x_min}, up to the sign pattern (−1)^k.
//! A second FFT of −it·φ gives exact node derivatives for the Hermite
//! interpolant. The tabulation is periodic with period N·h: mass outside the
//! window folds back in (aliasing), which callers with heavy tails correct.

use super::interp::UniformHermite;
use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const DEFAULT_POINTS: usize = 1 << 16;
pub const MIN_POINTS: usize = 1 << 10;
pub const RIPPLE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InversionGrid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
    /// Accept point-mass inputs: negative ripple is clamped instead of rejected.
    degenerate: bool,
}

impl InversionGrid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min < x_max) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::Domain(format!("inversion grid needs x_min < x_max, got [{x_min}, {x_max}]")));
        }
        if n_points < MIN_POINTS || !n_points.is_power_of_two() {
            return Err(Error::Domain(format!(
                "inversion grid needs a power of two ≥ {MIN_POINTS} points, got {n_points}"
            )));
        }
        Ok(Self { x_min, x_max, n_points, degenerate: false })
    }

    /// Symmetric grid of `half_width` around `center` with the default point count.
    pub fn centered(center: f64, half_width: f64) -> Result<Self> {
        Self::new(center - half_width, center + half_width, DEFAULT_POINTS)
    }

    pub fn flagged_degenerate(mut self) -> Self {
        self.degenerate = true;
        self
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }
    pub fn x_max(&self) -> f64 {
        self.x_max
    }
    pub fn n_points(&self) -> usize {
        self.n_points
    }
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }
    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }
    /// Aliasing period of the tabulation.
    pub fn period(&self) -> f64 {
        self.spacing() * self.n_points as f64
    }
}

/// A density tabulated on an [`InversionGrid`], with node derivatives.
#[derive(Debug, Clone)]
pub struct TabulatedDensity {
    grid: InversionGrid,
    interp: UniformHermite,
    clamped: usize,
}

impl TabulatedDensity {
    pub(crate) fn from_parts(grid: InversionGrid, pdf: Vec<f64>, dpdf: Vec<f64>, clamped: usize) -> Self {
        let interp = UniformHermite::new(grid.x_min, grid.spacing(), pdf, dpdf);
        Self { grid, interp, clamped }
    }

    pub fn grid(&self) -> &InversionGrid {
        &self.grid
    }
    pub fn x_values(&self) -> Vec<f64> {
        (0..self.grid.n_points).map(|k| self.grid.x_min + k as f64 * self.grid.spacing()).collect()
    }
    pub fn pdf_values(&self) -> &[f64] {
        &self.interp.y
    }
    pub fn slopes(&self) -> &[f64] {
        &self.interp.d
    }
    /// Count of nodes clamped from tiny negative values to 0.
    pub fn clamped(&self) -> usize {
        self.clamped
    }
    pub fn interpolant(&self) -> &UniformHermite {
        &self.interp
    }

    /// Interpolated density; `None` outside the grid.
    pub fn pdf(&self, x: f64) -> Option<f64> {
        self.interp.eval(x).map(|v| v.max(0.0))
    }

    /// Trapezoid integral of the node values.
    pub fn trapezoid_mass(&self) -> f64 {
        let y = &self.interp.y;
        let inner: f64 = y[1..y.len() - 1].iter().sum();
        self.grid.spacing() * (inner + 0.5 * (y[0] + y[y.len() - 1]))
    }
}

/// Raw inversion: (pdf, dpdf) at the grid nodes without clamping or checks.
pub(crate) fn invert_raw<F>(cf: F, grid: &InversionGrid) -> (Vec<f64>, Vec<f64>)
where
    F: Fn(f64) -> Complex64,
{
    let n = grid.n_points;
    let h = grid.spacing();
    let dt = 2.0 * PI / (n as f64 * h);
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for j in 0..n {
        let t = (j as f64 - (n / 2) as f64) * dt;
        let v = cf(t) * Complex64::from_polar(1.0, -t * grid.x_min);
        a.push(v);
        b.push(v * Complex64::new(0.0, -t));
    }
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    fft.process(&mut a);
    fft.process(&mut b);
    let norm = dt / (2.0 * PI);
    let mut pdf = Vec::with_capacity(n);
    let mut dpdf = Vec::with_capacity(n);
    for k in 0..n {
        let sign = if k % 2 == 0 { norm } else { -norm };
        pdf.push(a[k].re * sign);
        dpdf.push(b[k].re * sign);
    }
    (pdf, dpdf)
}

/// Tabulate the density whose characteristic function is `cf` on `grid`.
pub fn cf_invert<F>(cf: F, grid: &InversionGrid) -> Result<TabulatedDensity>
where
    F: Fn(f64) -> Complex64,
{
    let at_zero = cf(0.0);
    if (at_zero - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
        return Err(Error::Contract(format!("characteristic function at 0 is {at_zero}, expected 1")));
    }
    let n = grid.n_points;
    let dt = 2.0 * PI / (n as f64 * grid.spacing());
    for j in 0..n {
        let t = (j as f64 - (n / 2) as f64) * dt;
        let m = cf(t).norm();
        if !(m <= 1.0 + 1e-12) {
            return Err(Error::Contract(format!("|cf({t})| = {m} exceeds 1")));
        }
    }
    let (mut pdf, dpdf) = invert_raw(&cf, grid);
    let clamped = clamp_ripple(&mut pdf, grid)?;
    Ok(TabulatedDensity::from_parts(*grid, pdf, dpdf, clamped))
}

/// Clamp negative ripple to zero; ripple below −[`RIPPLE_TOLERANCE`] is a
/// grid misconfiguration unless the grid is flagged degenerate.
pub(crate) fn clamp_ripple(pdf: &mut [f64], grid: &InversionGrid) -> Result<usize> {
    let mut clamped = 0;
    for (k, v) in pdf.iter_mut().enumerate() {
        if *v < 0.0 {
            if *v < -RIPPLE_TOLERANCE && !grid.degenerate {
                let x = grid.x_min + k as f64 * grid.spacing();
                return Err(Error::Contract(format!(
                    "inverted density is {v:e} at x={x}; grid resolution or support is inadequate for this characteristic function"
                )));
            }
            *v = 0.0;
            clamped += 1;
        }
    }
    Ok(clamped)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(InversionGrid::new(1.0, -1.0, 1024).is_err());
        assert!(InversionGrid::new(-1.0, 1.0, 1000).is_err());
        assert!(InversionGrid::new(-1.0, 1.0, 512).is_err());
        let g = InversionGrid::new(-1.0, 1.0, 1024).unwrap();
        assert!((g.spacing() - 2.0 / 1023.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_pair() {
        let grid = InversionGrid::centered(0.0, 32.0).unwrap();
        let tab = cf_invert(|t| Complex64::new((-t * t).exp(), 0.0), &grid).unwrap();
        let exact = |x: f64| (-x * x / 4.0).exp() / (2.0 * PI.sqrt());
        assert!((tab.pdf(0.0).unwrap() - 0.282_094_8).abs() < 1e-6);
        // ±10 standard deviations of N(0, 2)
        let sd = 2f64.sqrt();
        let mut worst: f64 = 0.0;
        for i in 0..=2000 {
            let x = -10.0 * sd + i as f64 * (20.0 * sd / 2000.0);
            worst = worst.max((tab.pdf(x).unwrap() - exact(x)).abs());
        }
        assert!(worst < 1e-6, "max error {worst}");
        assert!((tab.trapezoid_mass() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn cauchy_pair_on_wide_grid() {
        let grid = InversionGrid::centered(0.0, 2048.0).unwrap();
        let tab = cf_invert(|t| Complex64::new((-t.abs()).exp(), 0.0), &grid).unwrap();
        let e0 = tab.pdf(0.0).unwrap() - 1.0 / PI;
        assert!(e0.abs() < 1e-6, "error {e0:e}");
        assert!((tab.trapezoid_mass() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn contract_violations() {
        let grid = InversionGrid::centered(0.0, 8.0).unwrap();
        let r = cf_invert(|_| Complex64::new(0.5, 0.0), &grid);
        assert!(matches!(r, Err(Error::Contract(_))));
        let r = cf_invert(|t| Complex64::new(1.0 + t * t, 0.0), &grid);
        assert!(matches!(r, Err(Error::Contract(_))));
        // point mass: Dirichlet-kernel ripple is rejected ...
        let r = cf_invert(|_| Complex64::new(1.0, 0.0), &grid);
        assert!(matches!(r, Err(Error::Contract(_))));
        // ... unless the grid is flagged degenerate
        let tab = cf_invert(|_| Complex64::new(1.0, 0.0), &grid.flagged_degenerate()).unwrap();
        assert!(tab.pdf_values().iter().all(|&v| v >= 0.0));
        assert!(tab.clamped() > 0);
    }
}
