//! Unconstrained minimization: BFGS on forward-difference gradients, then a
//! Nelder–Mead polish that tolerates the small non-smoothness of tabulated
//! objectives.

#[derive(Debug, Clone, Copy)]
pub struct OptimOptions {
    /// Stop when one full iteration improves the objective by less than this, relatively.
    pub tolerance: f64,
    /// Cap on BFGS plus simplex iterations.
    pub max_iterations: usize,
    /// Relative forward-difference step.
    pub fd_step: f64,
    /// Initial simplex edge for the polish stage.
    pub simplex_step: f64,
}

impl Default for OptimOptions {
    fn default() -> Self {
        Self { tolerance: 1e-8, max_iterations: 2000, fd_step: 1e-6, simplex_step: 2e-3 }
    }
}

#[derive(Debug, Clone)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// The last full iteration met the relative tolerance.
    pub tolerance_met: bool,
}

struct Counted<'a> {
    f: &'a mut dyn FnMut(&[f64]) -> f64,
    evals: usize,
}

impl Counted<'_> {
    fn call(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

fn small_change(old: f64, new: f64, tol: f64) -> bool {
    old - new <= tol * old.abs().max(new.abs()).max(1e-12)
}

fn gradient(obj: &mut Counted, x: &[f64], fx: f64, step: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = step * x[i].abs().max(1.0);
            xp[i] = x[i] + h;
            let up = obj.call(&xp);
            let g = if up.is_finite() {
                (up - fx) / h
            } else {
                xp[i] = x[i] - h;
                (fx - obj.call(&xp)) / h
            };
            xp[i] = x[i];
            if g.is_finite() {
                g
            } else {
                0.0
            }
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes `f` from `x0`, which must give a finite value.
pub fn minimize(f: &mut dyn FnMut(&[f64]) -> f64, x0: &[f64], opts: &OptimOptions) -> OptimResult {
    let n = x0.len();
    let mut obj = Counted { f, evals: 0 };
    let mut x = x0.to_vec();
    let mut fx = obj.call(&x);
    let mut iterations = 0;
    let mut tolerance_met = false;

    // quasi-Newton stage, inverse Hessian approximation h
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
    let mut g = gradient(&mut obj, &x, fx, opts.fd_step);
    let mut first = true;
    while iterations < opts.max_iterations {
        iterations += 1;
        let mut p: Vec<f64> = (0..n).map(|i| -dot(&h[i * n..(i + 1) * n], &g)).collect();
        let mut slope = dot(&g, &p);
        if !(slope < 0.0) {
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] = if i == j { 1.0 } else { 0.0 };
                }
            }
            p = g.iter().map(|v| -v).collect();
            slope = dot(&g, &p);
            if !(slope < 0.0) {
                tolerance_met = true;
                break;
            }
        }
        let longest = p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if longest > 2.0 {
            p.iter_mut().for_each(|v| *v *= 2.0 / longest);
            slope = dot(&g, &p);
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let xt: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + t * b).collect();
            let ft = obj.call(&xt);
            if ft.is_finite() && ft <= fx + 1e-4 * t * slope {
                accepted = Some((xt, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((xn, fnew)) = accepted else { break };
        let gn = gradient(&mut obj, &xn, fnew, opts.fd_step);
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if first {
                let scale = sy / dot(&y, &y);
                h.iter_mut().for_each(|v| *v *= scale);
                first = false;
            }
            let hy: Vec<f64> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], &y)).collect();
            let yhy = dot(&y, &hy);
            let rho = 1.0 / sy;
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
                }
            }
        }
        let done = small_change(fx, fnew, opts.tolerance);
        x = xn;
        fx = fnew;
        g = gn;
        if done {
            tolerance_met = true;
            break;
        }
    }

    // simplex polish around the quasi-Newton optimum
    let mut simplex: Vec<Vec<f64>> = vec![x.clone()];
    let mut values = vec![fx];
    for i in 0..n {
        let mut v = x.clone();
        v[i] += opts.simplex_step * x[i].abs().max(1.0);
        values.push(obj.call(&v));
        simplex.push(v);
    }
    let mut polish_met = false;
    while iterations < opts.max_iterations {
        iterations += 1;
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        let (best, worst) = (values[0], values[n]);
        if worst.is_finite() && small_change(worst, best, opts.tolerance) {
            polish_met = true;
            break;
        }
        let centroid: Vec<f64> = (0..n).map(|j| simplex[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64).collect();
        let toward = |c: f64| -> Vec<f64> { (0..n).map(|j| centroid[j] + c * (simplex[n][j] - centroid[j])).collect() };
        let xr = toward(-1.0);
        let fr = obj.call(&xr);
        if fr < values[0] {
            let xe = toward(-2.0);
            let fe = obj.call(&xe);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
        } else {
            let (xc, fc) = if fr < values[n] {
                let xc = toward(-0.5);
                let fc = obj.call(&xc);
                (xc, fc)
            } else {
                let xc = toward(0.5);
                let fc = obj.call(&xc);
                (xc, fc)
            };
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
            } else {
                for i in 1..=n {
                    let xs: Vec<f64> = (0..n).map(|j| simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j])).collect();
                    values[i] = obj.call(&xs);
                    simplex[i] = xs;
                }
            }
        }
    }
    let k = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).expect("nonempty simplex");
    let (x, f) = if values[k] < fx { (simplex[k].clone(), values[k]) } else { (x, fx) };
    OptimResult { x, f, iterations, evaluations: obj.evals, tolerance_met: tolerance_met && polish_met }
}
