use super::*;
use crate::distributions::{GaussianParams, StableParams};

fn uniform(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

#[test]
fn ks_examples() {
    assert_eq!(ks_stat(&[0.5], uniform).unwrap(), 0.5);
    let n = 40;
    let mid: Vec<f64> = (1..=n).map(|i| (2 * i - 1) as f64 / (2 * n) as f64).collect();
    assert!((ks_stat(&mid, uniform).unwrap() - 1.0 / (2 * n) as f64).abs() < 1e-15);
    assert!((ks_stat(&[0.1, 0.2, 0.9], uniform).unwrap() - 0.466_666_666_666_666_7).abs() < 1e-15);
    assert!(ks_stat(&[0.2, 0.1], uniform).is_err());
}

#[test]
fn ad_examples() {
    // −2 − ½(2 ln 0.25 + 6 ln 0.75)
    let want = -2.0 - 0.5 * (2.0 * 0.25f64.ln() + 6.0 * 0.75f64.ln());
    assert!((want - 0.249_340_5).abs() < 1e-7);
    assert!((ad_from_probs(&[0.25, 0.75]).unwrap() - want).abs() < 1e-14);
    assert!(matches!(ad_from_probs(&[0.5, 1.0]), Err(Error::Numerical(m)) if m.contains("index 1")));
    assert!(ad_from_probs(&[0.0, 0.5]).is_err());
    let clamped = ad_from_probs(&[1e-300, 0.5]).unwrap();
    let direct = -2.0 - 0.5 * ((1e-15f64.ln() + 0.5f64.ln()) + 3.0 * (0.5f64.ln() + (1.0 - 1e-15f64).ln()));
    assert!((clamped - direct).abs() < 1e-12);
    assert_eq!(ad_clamped(&[1e-300, 0.5]).1, 1);
}

#[test]
fn cvm_examples() {
    assert!((cvm_from_probs(&[0.25, 0.75]) - 1.0 / 24.0).abs() < 1e-15);
    assert!((cvm_stat(&[0.9], uniform).unwrap() - (0.16 + 1.0 / 12.0)).abs() < 1e-15);
}

#[test]
fn chi2_examples() {
    assert_eq!(chi2_statistic(&[3.0, 1.0], &[2.0, 2.0]).unwrap(), 1.0);
    let u: Vec<f64> = (0..600).map(|i| (i as f64 + 0.5) / 600.0).collect();
    let r = chi2_from_probs(&u, 6, 0).unwrap();
    assert_eq!((r.statistic, r.df, r.bins), (0.0, 5, 6));
    assert!(chi2_from_probs(&u, 2, 0).is_err());
    assert!(chi2_from_probs(&u[..20], 6, 0).is_err());
    let c = chi2_test(&[0.5; 100], uniform, 3).unwrap();
    // everything in the middle bin: (0 − 100/3)²/(100/3)·2 + (100 − 100/3)²/(100/3)
    assert!((c.statistic - 200.0).abs() < 1e-9);
}

#[test]
fn critical_points() {
    assert!((ks_critical(1_035_810, 0.05).unwrap() - 0.001_334_3).abs() < 5e-8);
    assert!((ks_critical(1_035_810, 0.01).unwrap() - 0.001_599_6).abs() < 5e-8);
    assert!((ks_critical(100, 0.05).unwrap() - 0.1358).abs() < 1e-12);
    assert!(ks_critical(100, 0.10).is_err());
    assert!(ks_critical(20, 0.05).is_err());
    // scipy.stats.chi2(198).ppf(0.95), ppf(0.99)
    assert!((chi2_critical(198, 0.05).unwrap() - 231.829).abs() < 1e-3);
    assert!((chi2_critical(198, 0.01).unwrap() - 247.212).abs() < 1e-3);
    assert_eq!(cvm_critical(0.05).unwrap(), 0.4614);
    assert_eq!(ad_critical(0.01).unwrap(), 3.878);
}

#[test]
fn report_decisions_follow_statistics() {
    let m = Model::new(&Params::Gaussian(GaussianParams::new(0.0, 1.0).unwrap())).unwrap();
    let x = Model::new(&Params::Stable(StableParams::new(1.5, 0.0, 1.0, 0.0).unwrap())).unwrap().sample(5000, 3);
    let r = gof_report(&x, &m, &[0.05, 0.01], 199).unwrap();
    for t in GofTest::ALL {
        for (lvl, c) in &r.critical_points[t.as_str()] {
            assert_eq!(r.reject[t.as_str()][lvl], r.statistic(t) > *c);
        }
    }
    assert!(r.reject["ks"]["1%"] && r.reject["ad"]["1%"]);
    let v = serde_json::to_value(&r).unwrap();
    assert_eq!(v["family"], "gaussian");
    assert!(v["critical_points"]["cvm"]["5%"].as_f64().unwrap() == 0.4614);
}

#[test]
fn bootstrap_null_and_gross_misfit() {
    let g = Params::Gaussian(GaussianParams::new(0.0, 1.0).unwrap());
    let mut small = 0;
    for run in 0..100u64 {
        let x = Model::new(&g).unwrap().sample(500, 1000 + run);
        let f = fit(Family::Gaussian, &x, None, &FitOptions::default()).unwrap();
        let p = bootstrap_pvalue(&x, Family::Gaussian, &f.params, 199, GofTest::Ks, run * 7919).unwrap();
        assert!(p > 0.0 && p <= 1.0);
        if p <= 0.01 {
            small += 1;
        }
    }
    assert!(small <= 5, "{small} of 100 null p-values at or below 0.01");

    let c = Model::new(&Params::Stable(StableParams::new(1.0, 0.0, 1.0, 0.0).unwrap())).unwrap().sample(500, 4);
    let f = fit(Family::Gaussian, &c, None, &FitOptions::default()).unwrap();
    let p = bootstrap_pvalue(&c, Family::Gaussian, &f.params, 199, GofTest::Ad, 1).unwrap();
    assert_eq!(p, 1.0 / 200.0);
    assert!(bootstrap_pvalue(&c, Family::Gaussian, &f.params, 0, GofTest::Ks, 1).is_err());
}
