use super::*;
use crate::distributions::Model;

fn sample(p: &Params, n: usize, seed: u64) -> Vec<f64> {
    Model::new(p).unwrap().sample(n, seed)
}

#[test]
fn gaussian_fit_is_closed_form() {
    let x = sample(&Params::SkewT(SkewTParams::new(4.0, 0.3, 1.0, 0.5).unwrap()), 500, 1);
    let r = fit(Family::Gaussian, &x, None, &FitOptions::default()).unwrap();
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let Params::Gaussian(g) = r.params else { panic!() };
    assert!((g.mu - mean).abs() < 1e-9 && (g.sigma * g.sigma - var).abs() < 1e-9);
    let want = -0.5 * n * (1.0 + (2.0 * std::f64::consts::PI * var).ln());
    assert!((r.log_likelihood - want).abs() < 1e-8 * n);
}

#[test]
fn lr_test_examples() {
    let base = |family, ll| FitResult {
        family,
        params: Params::Gaussian(GaussianParams { mu: 0.0, sigma: 1.0 }),
        log_likelihood: ll,
        n: 100,
        iterations: 1,
        evaluations: 1,
        converged: true,
        objective_tolerance_met: true,
        init_params: Params::Gaussian(GaussianParams { mu: 0.0, sigma: 1.0 }),
        init_loglik: ll,
    };
    let r = lr_test(&base(Family::Gh, 10.0 + 2.745), &base(Family::Nig, 10.0)).unwrap();
    assert_eq!(r.df, 1);
    assert!((r.statistic - 5.49).abs() < 1e-9);
    // scipy.stats.chi2(1).sf(5.49)
    assert!((r.p_value - 0.019_125_5).abs() < 1e-6, "{}", r.p_value);
    let same = lr_test(&base(Family::Gh, -3.0), &base(Family::Nig, -3.0)).unwrap();
    assert_eq!((same.statistic, same.p_value), (0.0, 1.0));
    let huge = lr_test(&base(Family::Gh, 4551.78 / 2.0), &base(Family::SkewT, 0.0)).unwrap();
    assert!(huge.p_value < 1e-16);
    assert_eq!(huge.p_display, "<1e-16");
    let tiny_negative = lr_test(&base(Family::Gh, -1e-8), &base(Family::Nig, 0.0)).unwrap();
    assert_eq!(tiny_negative.statistic, 0.0);
    assert!(lr_test(&base(Family::Gh, -1.0), &base(Family::Nig, 0.0)).is_err());
    let mut other_n = base(Family::Nig, 0.0);
    other_n.n = 99;
    assert!(lr_test(&base(Family::Gh, 1.0), &other_n).is_err());
    assert!(lr_test(&base(Family::Nig, 1.0), &base(Family::Gh, 0.0)).is_err());
}

#[test]
fn quantile_init_gaussian_and_cauchy() {
    let g = sample(&Params::Gaussian(GaussianParams::new(0.0, 2f64.sqrt()).unwrap()), 1_000_000, 3);
    let p = stable_quantile_init(&g).unwrap();
    assert!(p.alpha >= 1.95 && p.beta.abs() <= 0.05, "{p:?}");
    let c = sample(&Params::Stable(StableParams::new(1.0, 0.0, 1.0, 0.0).unwrap()), 200_000, 4);
    let p = stable_quantile_init(&c).unwrap();
    assert!((p.alpha - 1.0).abs() <= 0.05 && (p.delta - 1.0).abs() <= 0.05, "{p:?}");
    let s = sample(&Params::Stable(StableParams::new(1.5, 0.5, 2.0, 1.0).unwrap()), 200_000, 5);
    let p = stable_quantile_init(&s).unwrap();
    assert!((p.alpha - 1.5).abs() < 0.05 && (p.beta - 0.5).abs() < 0.15, "{p:?}");
    assert!((p.delta - 2.0).abs() < 0.1 && (p.mu - 1.0).abs() < 0.2, "{p:?}");
}

#[test]
fn fits_improve_on_their_start_and_stay_valid() {
    let truth = Params::Nig(NigParams::new(0.649, -0.0103, 0.6365, 0.0101).unwrap());
    let x = sample(&truth, 5000, 7);
    for family in [Family::Nig, Family::Gh, Family::SkewT, Family::Stable] {
        let r = fit(family, &x, None, &FitOptions::default()).unwrap();
        r.params.validate().unwrap();
        assert!(r.log_likelihood >= r.init_loglik - 1e-9, "{family}");
        assert!(r.converged, "{family}: {r:?}");
        let check = log_likelihood(&r.params, &x).unwrap();
        assert!((check - r.log_likelihood).abs() < 1e-6, "{family}: {check} vs {}", r.log_likelihood);
    }
}

#[test]
fn optimum_beats_perturbations() {
    let truth = Params::SkewT(SkewTParams::new(3.0, -0.2, 1.0, 0.1).unwrap());
    let x = sample(&truth, 4000, 8);
    let r = fit(Family::SkewT, &x, None, &FitOptions::default()).unwrap();
    let a = Anchor::of(&x).unwrap();
    let theta = to_theta(&r.params, a);
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(1);
    for _ in 0..100 {
        let t: Vec<f64> = theta.iter().map(|v| v + 1e-3 * rand::Rng::random_range(&mut rng, -1.0..1.0)).collect();
        let ll = log_likelihood(&from_theta(Family::SkewT, &t, a), &x).unwrap();
        assert!(ll <= r.log_likelihood + 1e-6, "{ll} > {}", r.log_likelihood);
    }
}

#[test]
fn location_scale_equivariance() {
    let truth = Params::Nig(NigParams::new(1.2, 0.3, 0.9, -0.2).unwrap());
    let x = sample(&truth, 3000, 9);
    let (a, b) = (3.0, 5.0);
    let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
    let rx = fit(Family::Nig, &x, None, &FitOptions::default()).unwrap();
    let ry = fit(Family::Nig, &y, None, &FitOptions::default()).unwrap();
    let (Params::Nig(px), Params::Nig(py)) = (rx.params, ry.params) else { panic!() };
    assert!((py.mu - (a * px.mu + b)).abs() < 1e-4 * a);
    assert!((py.delta / (a * px.delta) - 1.0).abs() < 1e-4);
    assert!((py.alpha * a / px.alpha - 1.0).abs() < 1e-4);
    assert!((py.beta * a - px.beta).abs() < 1e-4 * px.alpha);
}

#[test]
fn rejects_bad_input() {
    assert!(fit(Family::Nig, &[0.0; 10], None, &FitOptions::default()).is_err());
    let mut x = sample(&Params::Gaussian(GaussianParams::new(0.0, 1.0).unwrap()), 100, 1);
    let init = Params::Gaussian(GaussianParams::new(0.0, 1.0).unwrap());
    assert!(fit(Family::Nig, &x, Some(&init), &FitOptions::default()).is_err());
    x[3] = f64::NAN;
    assert!(fit(Family::Nig, &x, None, &FitOptions::default()).is_err());
    // a Lévy law with all mass right of μ cannot start left of the data
    let y: Vec<f64> = (0..100).map(|i| -1.0 - i as f64).collect();
    let levy = Params::Stable(StableParams::new(0.5, 1.0, 1.0, 0.0).unwrap());
    let err = fit(Family::Stable, &y, Some(&levy), &FitOptions::default());
    assert!(matches!(err, Err(Error::Numerical(_))), "{err:?}");
}
