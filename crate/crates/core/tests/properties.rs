use heavytail::distributions::{GhParams, Model, NigParams, Params, SkewTParams, StableParams};
use heavytail::gof::{cvm_from_probs, ks_from_probs};
use heavytail::ingest::{standardize, ReturnSeries};
use heavytail::scaling::{aggregate, reshuffle, ShuffleMode};
use heavytail::tailfit::alpha_mle;
use proptest::prelude::*;

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

// multiples of 2^-10 with small magnitude add exactly in any order
fn dyadic_days() -> impl Strategy<Value = (usize, Vec<(usize, Vec<f64>)>)> {
    (4usize..=24).prop_flat_map(|slots| {
        let day = (0..slots / 2).prop_flat_map(move |s0| {
            prop::collection::vec((-4096i32..4096).prop_map(|k| k as f64 / 1024.0), 1..=slots - s0)
                .prop_map(move |v| (s0, v))
        });
        (Just(slots), prop::collection::vec(day, 1..6))
    })
}

fn any_params() -> impl Strategy<Value = Params> {
    prop_oneof![
        (0.6f64..2.0, -1.0f64..1.0, 0.2f64..3.0, -2.0f64..2.0)
            .prop_map(|(a, b, d, m)| Params::Stable(StableParams::new(a, b, d, m).unwrap())),
        (-3.0f64..3.0, 0.3f64..4.0, -0.9f64..0.9, 0.2f64..3.0, -2.0f64..2.0)
            .prop_map(|(l, a, r, d, m)| Params::Gh(GhParams::new(l, a, r * a, d, m).unwrap())),
        (0.3f64..4.0, -0.9f64..0.9, 0.2f64..3.0, -2.0f64..2.0)
            .prop_map(|(a, r, d, m)| Params::Nig(NigParams::new(a, r * a, d, m).unwrap())),
        (0.5f64..10.0, -2.0f64..2.0, 0.2f64..3.0, -2.0f64..2.0)
            .prop_map(|(n, b, d, m)| Params::SkewT(SkewTParams::new(n, b, d, m).unwrap())),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn aggregation_preserves_sums_and_composes((slots, days) in dyadic_days(), a in 1usize..4, b in 1usize..4) {
        let s = ReturnSeries::from_days(days, slots, 15).unwrap();
        prop_assume!(2 * a * b <= slots);
        let agg = aggregate(&s, a).unwrap();
        let mut kept = 0.0;
        for d in 0..s.n_days() {
            let s0 = s.day_slots()[d];
            for (i, v) in s.day(d).iter().enumerate() {
                let slot = s0 + i;
                if slot >= s0.div_ceil(a) * a && slot < (s0 + s.day(d).len()) / a * a {
                    kept += v;
                }
            }
        }
        prop_assert_eq!(agg.values().iter().sum::<f64>(), kept);
        prop_assert_eq!(agg.scale_seconds(), 15 * a as u32);
        let two_step = aggregate(&agg, b).unwrap();
        let one_step = aggregate(&s, a * b).unwrap();
        prop_assert_eq!(two_step.values(), one_step.values());
        prop_assert_eq!(two_step.day_slots(), one_step.day_slots());
    }

    #[test]
    fn reshuffles_permute((slots, days) in dyadic_days(), seed in any::<u64>()) {
        let s = ReturnSeries::from_days(days, slots, 15).unwrap();
        let want = sorted(s.values().to_vec());
        for mode in ShuffleMode::ALL {
            let r = reshuffle(&s, mode, seed).unwrap();
            prop_assert_eq!(sorted(r.values().to_vec()), want.clone());
            prop_assert_eq!(r.len(), s.len());
        }
    }

    #[test]
    fn alpha_mle_ignores_order_and_scale(mut x in prop::collection::vec(1.0f64..1e3, 2..200), c in 0.01f64..100.0) {
        x.push(2.0);
        let a = alpha_mle(&x, 1.0).unwrap();
        let mut rev = x.clone();
        rev.reverse();
        prop_assert_eq!(alpha_mle(&rev, 1.0).unwrap().alpha, a.alpha);
        let y: Vec<f64> = x.iter().map(|v| v * c).collect();
        prop_assert!((alpha_mle(&y, c).unwrap().alpha - a.alpha).abs() < 1e-9 * a.alpha);
        prop_assert!(a.alpha > 1.0 && a.se > 0.0);
    }

    #[test]
    fn edf_statistics_are_bounded(u in prop::collection::vec(0.0f64..=1.0, 1..300)) {
        let u = sorted(u);
        let n = u.len() as f64;
        let d = ks_from_probs(&u);
        prop_assert!((0.5 / n - 1e-12..=1.0).contains(&d));
        prop_assert!(cvm_from_probs(&u) >= 1.0 / (12.0 * n) - 1e-15);
    }

    #[test]
    fn standardized_moments(v in prop::collection::vec(-1e3f64..1e3, 3..200)) {
        prop_assume!(v.iter().any(|x| (x - v[0]).abs() > 1e-3));
        let s = standardize(&ReturnSeries::single_day(v, 15).unwrap()).unwrap();
        let n = s.len() as f64;
        let mean = s.values().iter().sum::<f64>() / n;
        let var = s.values().iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        prop_assert!(mean.abs() < 1e-9 && (var - 1.0).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn densities_and_cdfs_are_coherent(p in any_params(), xs in prop::collection::vec(-20.0f64..20.0, 2..20)) {
        let m = Model::new(&p).unwrap();
        let xs = sorted(xs);
        let f = m.cdf_many(&xs).unwrap();
        for (i, x) in xs.iter().enumerate() {
            prop_assert!(m.pdf(*x) >= 0.0);
            prop_assert!((0.0..=1.0).contains(&f[i]));
            if i > 0 {
                prop_assert!(f[i] >= f[i - 1] - 1e-9, "{:?}: F({}) = {} < {}", p, x, f[i], f[i - 1]);
            }
        }
    }

    #[test]
    fn affine_maps_transform_densities(p in any_params(), a in 0.2f64..5.0, b in -3.0f64..3.0, x in -5.0f64..5.0) {
        let m = Model::new(&p).unwrap();
        let y = Model::new(&p.affine(a, b)).unwrap();
        let (lx, ly) = (m.ln_pdf(x), y.ln_pdf(a * x + b));
        prop_assume!(lx > -30.0);
        prop_assert!((ly + a.ln() - lx).abs() < 1e-6 * (1.0 + lx.abs()), "{:?}: {} vs {}", p, ly + a.ln(), lx);
    }
}
