use super::*;
use crate::numerics::{integrate_lower, integrate_upper};
use std::f64::consts::PI;

fn total_mass(m: &Model) -> f64 {
    let c = m.params().location();
    let lo = integrate_lower(|x| m.pdf(x), c, 1e-14, 1e-10).unwrap().value;
    let hi = integrate_upper(|x| m.pdf(x), c, 1e-14, 1e-10).unwrap().value;
    lo + hi
}

#[test]
fn nig_reference_value() {
    // e·K₁(1)/π with K₁(1) = 0.6019072301972346 (mpmath)
    let p = NigParams::new(1.0, 0.0, 1.0, 0.0).unwrap();
    let v = nig_pdf(&p, 0.0).unwrap();
    assert!((v - 0.520_803_829_991_670_0).abs() < 1e-13, "{v}");
}

#[test]
fn gh_reduces_to_nig() {
    let nig = NigParams::new(1.0, 0.0, 1.0, 0.0).unwrap();
    let gh = GhParams::from(nig);
    assert!((gh_pdf(&gh, 0.7).unwrap() - nig_pdf(&nig, 0.7).unwrap()).abs() < 1e-12);
    let nig = NigParams::new(0.649, -0.0103, 0.6365, 0.0101).unwrap();
    let a = Model::new(&Params::Nig(nig)).unwrap();
    let b = Model::new(&Params::Gh(nig.into())).unwrap();
    for i in 0..200 {
        let x = -40.0 + 0.4 * i as f64;
        assert!((a.pdf(x) - b.pdf(x)).abs() < 1e-12, "x={x}");
    }
}

#[test]
fn symmetric_members_are_symmetric() {
    let gh = Model::new(&Params::Gh(GhParams::new(1.3, 2.0, 0.0, 0.5, 1.0).unwrap())).unwrap();
    let nig = Model::new(&Params::Nig(NigParams::new(1.5, 0.0, 2.0, -1.0).unwrap())).unwrap();
    for x in [0.1, 0.9, 3.0, 17.0] {
        assert!((gh.ln_pdf(1.0 + x) - gh.ln_pdf(1.0 - x)).abs() < 1e-12);
        assert!((nig.ln_pdf(-1.0 + x) - nig.ln_pdf(-1.0 - x)).abs() < 1e-12);
    }
}

#[test]
fn skew_t_examples() {
    let cauchy = SkewTParams::new(1.0, 0.0, 1.0, 0.0).unwrap();
    assert!((skewt_pdf(&cauchy, 0.0).unwrap() - 1.0 / PI).abs() < 1e-14);
    assert!((skewt_pdf(&cauchy, 1.0).unwrap() - 0.5 / PI).abs() < 1e-14);
    let sym = SkewTParams::new(3.0, 0.0, 1.0, 0.0).unwrap();
    let tiny = SkewTParams::new(3.0, 1e-8, 1.0, 0.0).unwrap();
    let a = skewt_pdf(&sym, 0.5).unwrap();
    let b = skewt_pdf(&tiny, 0.5).unwrap();
    assert!((a - b).abs() < 1e-6, "{a} vs {b}");
}

#[test]
fn skew_t_power_tail_slope() {
    let nu = 2.7;
    let m = Model::new(&Params::SkewT(SkewTParams::new(nu, 0.0, 0.96, 0.0).unwrap())).unwrap();
    let slope = (m.ln_pdf(1e4) - m.ln_pdf(1e2)) / (1e4f64.ln() - 1e2f64.ln());
    assert!((slope + nu + 1.0).abs() < 1e-3, "{slope}");
}

#[test]
fn nig_tail_is_exponentially_tempered() {
    // ln f eventually decreases like −(α − |β|)|x|
    let (a, b) = (2.0, 0.5);
    let m = Model::new(&Params::Nig(NigParams::new(a, b, 1.0, 0.0).unwrap())).unwrap();
    let slope = m.ln_pdf(401.0) - m.ln_pdf(400.0);
    assert!((slope + (a - b)).abs() < 1e-2, "{slope}");
}

#[test]
fn densities_integrate_to_one() {
    let cases = [
        Params::Gh(GhParams::new(-0.5352, 0.6296, -0.0103, 0.6495, 0.0101).unwrap()),
        Params::Gh(GhParams::new(2.5, 3.0, 1.0, 0.2, 0.0).unwrap()),
        Params::Nig(NigParams::new(0.649, -0.0103, 0.6365, 0.0101).unwrap()),
        Params::SkewT(SkewTParams::new(2.7029, -0.0089, 0.9643, 0.0101).unwrap()),
        Params::SkewT(SkewTParams::new(5.0, 1.2, 2.0, 0.0).unwrap()),
        Params::Stable(StableParams::new(1.5358, 0.0102, 0.4825, 0.0071).unwrap()),
        Params::Stable(StableParams::new(0.8, -0.6, 1.0, 0.0).unwrap()),
        Params::Gaussian(GaussianParams::new(0.3, 2.0).unwrap()),
    ];
    for p in cases {
        let m = Model::new(&p).unwrap();
        let mass = total_mass(&m);
        assert!((mass - 1.0).abs() < 1e-5, "{p:?}: {mass}");
    }
}

#[test]
fn cdf_examples() {
    let g = Params::Gaussian(GaussianParams::new(0.0, 1.0).unwrap());
    assert!((family_cdf(&g, 1.959_964).unwrap() - 0.975).abs() < 1e-9);
    // scipy norminvgauss(a=1, b=0.3).ppf(0.9)
    let nig = Params::Nig(NigParams::new(1.0, 0.3, 1.0, 0.0).unwrap());
    assert!((family_cdf(&nig, 1.570_949_442_6).unwrap() - 0.9).abs() < 1e-5);
    for p in [
        Params::Nig(NigParams::new(0.7, 0.0, 0.6, 0.2).unwrap()),
        Params::Gh(GhParams::new(1.0, 1.0, 0.0, 1.0, 0.2).unwrap()),
        Params::SkewT(SkewTParams::new(3.0, 0.0, 1.0, 0.2).unwrap()),
        Params::Stable(StableParams::new(1.2, 0.0, 1.0, 0.2).unwrap()),
    ] {
        assert!((family_cdf(&p, 0.2).unwrap() - 0.5).abs() < 1e-8, "{p:?}");
    }
}

#[test]
fn cdf_monotone_and_quantile_round_trip() {
    let m = Model::new(&Params::SkewT(SkewTParams::new(2.7, -0.3, 1.0, 0.0).unwrap())).unwrap();
    let xs: Vec<f64> = (0..2000).map(|i| -300.0 + 0.3 * i as f64).collect();
    let f = m.cdf_many(&xs).unwrap();
    assert!(f.windows(2).all(|w| w[0] <= w[1]));
    for p in [0.001, 0.2, 0.5, 0.97] {
        let q = m.quantile(p).unwrap();
        assert!((m.cdf(q).unwrap() - p).abs() < 1e-5);
    }
    assert!(m.cdf(1e9).unwrap() > 1.0 - 1e-9);
    assert!(m.cdf(-1e9).unwrap() < 1e-9);
}

#[test]
fn batched_log_density_matches_pointwise() {
    let m = Model::new(&Params::Gh(GhParams::new(-0.5352, 0.6296, -0.0103, 0.6495, 0.0101).unwrap())).unwrap();
    let xs = m.sample(10_000, 3);
    let batch = m.ln_pdf_many(&xs);
    for (x, b) in xs.iter().zip(&batch) {
        assert!((m.ln_pdf(*x) - b).abs() < 1e-9, "x={x}");
    }
}

#[test]
fn sampling_moments_and_determinism() {
    let g = Params::Stable(StableParams::new(2.0, 0.0, 1.0, 0.0).unwrap());
    let xs = family_sample(&g, 100_000, 5).unwrap();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    // SE of the sample variance of N(0, 2) is 2·√(2/n)
    assert!((var - 2.0).abs() < 3.0 * 2.0 * (2.0 / n).sqrt(), "{var}");
    assert_eq!(xs, family_sample(&g, 100_000, 5).unwrap());

    let p = NigParams::new(2.0, 0.5, 1.0, 0.0).unwrap();
    let ys = family_sample(&Params::Nig(p), 100_000, 9).unwrap();
    let m = ys.iter().sum::<f64>() / n;
    let sd = (ys.iter().map(|y| (y - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let want = p.mu + p.delta * p.beta / p.gamma();
    assert!((want - 0.258_198_889_7).abs() < 1e-9);
    assert!((gh::gh_mean(&p.into()).unwrap() - want).abs() < 1e-12);
    assert!((m - want).abs() < 3.0 * sd / n.sqrt(), "{m} vs {want}");
    assert!(family_sample(&Params::Nig(p), 0, 1).is_err());
}

#[test]
fn parameter_validation() {
    assert!(GhParams::new(0.0, 1.0, 1.0, 1.0, 0.0).is_err());
    assert!(NigParams::new(1.0, -1.5, 1.0, 0.0).is_err());
    assert!(StableParams::new(2.1, 0.0, 1.0, 0.0).is_err());
    assert!(StableParams::new(1.5, 1.1, 1.0, 0.0).is_err());
    assert!(SkewTParams::new(0.0, 0.0, 1.0, 0.0).is_err());
    assert!(SkewTParams::new(2.0, 0.0, -1.0, 0.0).is_err());
    assert!(GaussianParams::new(0.0, 0.0).is_err());
    assert!(matches!(gh_pdf(&GhParams { lambda: 1.0, alpha: 1.0, beta: 2.0, delta: 1.0, mu: 0.0 }, 0.0), Err(crate::Error::Domain(_))));
}

#[test]
fn json_shape() {
    let p = Params::Nig(NigParams::new(0.649, -0.0103, 0.6365, 0.0101).unwrap());
    let v: serde_json::Value = serde_json::to_value(p).unwrap();
    assert_eq!(v["family"], "nig");
    assert!(v.get("lambda").is_none() && v.get("nu").is_none());
    let back: Params = serde_json::from_value(v).unwrap();
    assert_eq!(back, p);
    let g: serde_json::Value = serde_json::to_value(Params::Gaussian(GaussianParams { mu: 0.0, sigma: 1.0 })).unwrap();
    assert_eq!(g["family"], "gaussian");
    assert_eq!(g["sigma"], 1.0);
    assert_eq!("skew-t".parse::<Family>().unwrap(), Family::SkewT);
}

#[test]
fn affine_maps_match_densities() {
    let (a, b) = (2.5, -0.7);
    let cases = [
        Params::Gh(GhParams::new(-0.5352, 0.6296, -0.0103, 0.6495, 0.0101).unwrap()),
        Params::SkewT(SkewTParams::new(2.7, 0.4, 1.0, 0.1).unwrap()),
        Params::Stable(StableParams::new(1.0, 0.5, 0.8, 0.1).unwrap()),
        Params::Stable(StableParams::new(1.6, -0.5, 0.8, 0.1).unwrap()),
    ];
    for p in cases {
        let m = Model::new(&p).unwrap();
        let ma = Model::new(&p.affine(a, b)).unwrap();
        for x in [-3.0, 0.0, 0.5, 4.0] {
            let want = m.pdf(x) / a;
            assert!((ma.pdf(a * x + b) - want).abs() < 1e-8, "{p:?} x={x}");
        }
    }
}
