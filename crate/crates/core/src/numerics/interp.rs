//! Piecewise cubic Hermite interpolation on grids, with Fritsch–Carlson
//! limiting of the supplied node derivatives.

/// Apply the Fritsch–Carlson bound to node slopes `d` for values `y` on
/// nodes `x`: within each cell, if the slope ratios to the secant exceed the
/// radius-3 circle, both are scaled back onto it, and slopes of the wrong
/// sign are zeroed. Only cells inside a monotone run are limited; a flat
/// cell zeroes its slopes unless they straddle an extremum.
pub fn limit_slopes(x: &[f64], y: &[f64], d: &mut [f64]) {
    let n = y.len();
    for k in 0..n.saturating_sub(1) {
        let h = x[k + 1] - x[k];
        let dy = y[k + 1] - y[k];
        // differences at rounding level carry no shape information
        if dy.abs() <= 8.0 * f64::EPSILON * y[k].abs().max(y[k + 1].abs()) {
            // a flat cell between a rise and a fall is a genuine extremum
            if d[k] * d[k + 1] >= 0.0 {
                d[k] = 0.0;
                d[k + 1] = 0.0;
            }
            continue;
        }
        let delta = dy / h;
        let prev_same = k == 0 || ((y[k] - y[k - 1]) * delta >= 0.0);
        let next_same = k + 2 >= n || ((y[k + 2] - y[k + 1]) * delta >= 0.0);
        if !(prev_same && next_same) {
            // cells touching an extremum keep their exact slopes
            continue;
        }
        if d[k] * delta < 0.0 {
            d[k] = 0.0;
        }
        if d[k + 1] * delta < 0.0 {
            d[k + 1] = 0.0;
        }
        let a = d[k] / delta;
        let b = d[k + 1] / delta;
        let r2 = a * a + b * b;
        if r2 > 9.0 {
            let tau = 3.0 / r2.sqrt();
            d[k] = tau * a * delta;
            d[k + 1] = tau * b * delta;
        }
    }
}

#[inline]
pub fn hermite(y0: f64, y1: f64, d0: f64, d1: f64, h: f64, t: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}

/// Integral of the Hermite cubic over [0, t·h] of a cell.
#[inline]
pub fn hermite_integral(y0: f64, y1: f64, d0: f64, d1: f64, h: f64, t: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let i00 = 0.5 * t4 - t3 + t;
    let i10 = 0.25 * t4 - 2.0 / 3.0 * t3 + 0.5 * t2;
    let i01 = -0.5 * t4 + t3;
    let i11 = 0.25 * t4 - t3 / 3.0;
    h * (i00 * y0 + i10 * h * d0 + i01 * y1 + i11 * h * d1)
}

/// Hermite interpolant on an equispaced grid.
#[derive(Debug, Clone)]
pub struct UniformHermite {
    pub x0: f64,
    pub h: f64,
    pub y: Vec<f64>,
    pub d: Vec<f64>,
}

impl UniformHermite {
    pub fn new(x0: f64, h: f64, y: Vec<f64>, mut d: Vec<f64>) -> Self {
        let x: Vec<f64> = (0..y.len()).map(|k| x0 + k as f64 * h).collect();
        limit_slopes(&x, &y, &mut d);
        Self { x0, h, y, d }
    }

    pub fn x_max(&self) -> f64 {
        self.x0 + (self.y.len() - 1) as f64 * self.h
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x0 && x <= self.x_max()
    }

    /// (cell index, fractional position) for x inside the grid.
    #[inline]
    fn locate(&self, x: f64) -> (usize, f64) {
        let u = (x - self.x0) / self.h;
        let last = self.y.len() - 2;
        let k = (u.floor().max(0.0) as usize).min(last);
        (k, (u - k as f64).clamp(0.0, 1.0))
    }

    /// Interpolated value, `None` outside the grid.
    #[inline]
    pub fn eval(&self, x: f64) -> Option<f64> {
        if !self.contains(x) {
            return None;
        }
        let (k, t) = self.locate(x);
        Some(hermite(self.y[k], self.y[k + 1], self.d[k], self.d[k + 1], self.h, t))
    }

    /// Cumulative integrals at every node, starting from 0 at x0.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.y.len());
        let mut acc = 0.0;
        let mut comp = 0.0;
        out.push(0.0);
        for k in 0..self.y.len() - 1 {
            let cell = hermite_integral(self.y[k], self.y[k + 1], self.d[k], self.d[k + 1], self.h, 1.0);
            // Kahan summation
            let yk = cell - comp;
            let t = acc + yk;
            comp = (t - acc) - yk;
            acc = t;
            out.push(acc);
        }
        out
    }

    /// Integral from x0 to x given precomputed node cumulatives.
    pub fn integral_to(&self, cumulative: &[f64], x: f64) -> f64 {
        if x <= self.x0 {
            return 0.0;
        }
        if x >= self.x_max() {
            return *cumulative.last().expect("nonempty");
        }
        let (k, t) = self.locate(x);
        cumulative[k] + hermite_integral(self.y[k], self.y[k + 1], self.d[k], self.d[k + 1], self.h, t)
    }
}
