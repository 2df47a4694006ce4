use super::*;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};

const SLOTS: usize = 2036;

fn normals(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

fn gaussian_days(days: usize, seed: u64) -> ReturnSeries {
    standardize(&ReturnSeries::from_values(normals(days * SLOTS, seed), SLOTS, 15).unwrap()).unwrap()
}

#[test]
fn aggregate_examples() {
    let s = ReturnSeries::from_values(vec![1.0, 2.0, 3.0, 4.0], 4, 15).unwrap();
    assert_eq!(aggregate(&s, 1).unwrap(), s);
    let a = aggregate(&s, 2).unwrap();
    assert_eq!(a.values(), &[3.0, 7.0]);
    assert_eq!((a.scale_seconds(), a.slots_per_day()), (30, 2));
    assert!(aggregate(&s, 3).is_err());
    assert!(aggregate(&s, 0).is_err());

    let two = ReturnSeries::from_days(vec![(0, vec![1.0, 2.0, 3.0, 4.0, 5.0]), (0, vec![10.0, 20.0, 30.0, 40.0, 50.0])], 5, 15).unwrap();
    let a = aggregate(&two, 2).unwrap();
    assert_eq!(a.values(), &[3.0, 7.0, 30.0, 70.0]);
    assert_eq!(a.n_days(), 2);

    // a day opening at slot 1 drops its half block
    let late = ReturnSeries::from_days(vec![(1, vec![1.0, 2.0, 3.0, 4.0, 5.0])], 6, 15).unwrap();
    let a = aggregate(&late, 2).unwrap();
    assert_eq!((a.values(), a.day_slots()), (&[5.0, 9.0][..], &[1][..]));
}

#[test]
fn dfa_white_noise_and_errors() {
    let r = dfa(&normals(1 << 17, 1)).unwrap();
    assert!((r.hurst - 0.5).abs() <= 0.02, "{}", r.hurst);
    assert!(r.curve.len() >= 15 && r.curve[0].0 == 16 && r.curve.last().unwrap().0 <= (1 << 15));
    assert!(dfa(&[0.3; 4096]).is_err());
    assert!(dfa(&normals(1000, 1)).is_err());
}

#[test]
fn dfa_after_global_reshuffle() {
    // strongly persistent AR(1) input
    let e = normals(50 * SLOTS, 2);
    let mut x = vec![0.0; e.len()];
    for i in 1..e.len() {
        x[i] = 0.95 * x[i - 1] + e[i];
    }
    let s = ReturnSeries::from_values(x.clone(), SLOTS, 15).unwrap();
    assert!(dfa(&x).unwrap().hurst > 0.7);
    for seed in 0..20 {
        let h = dfa(reshuffle(&s, ShuffleMode::Global, seed).unwrap().values()).unwrap().hurst;
        assert!((0.45..=0.55).contains(&h), "seed {seed}: {h}");
    }
}

#[test]
fn reshuffle_contracts() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let days: Vec<(usize, Vec<f64>)> =
        (0..12).map(|d| (d % 3, (0..(20 - d % 3)).map(|_| rng.random::<f64>()).collect())).collect();
    let s = ReturnSeries::from_days(days, 20, 15).unwrap();
    let mut sorted = s.values().to_vec();
    sorted.sort_by(f64::total_cmp);
    for mode in ShuffleMode::ALL {
        let r = reshuffle(&s, mode, 9).unwrap();
        assert_eq!(r, reshuffle(&s, mode, 9).unwrap());
        assert_ne!(r.values(), s.values());
        let mut v = r.values().to_vec();
        v.sort_by(f64::total_cmp);
        assert_eq!(v, sorted, "{}", mode.as_str());
    }
    let b = reshuffle(&s, ShuffleMode::DayBlock, 4).unwrap();
    for d in 0..b.n_days() {
        let orig = (0..s.n_days()).find(|&e| s.day(e) == b.day(d)).expect("day kept intact");
        assert_eq!(s.day_slots()[orig], b.day_slots()[d]);
    }
    // slot j keeps its own multiset of values
    let w = reshuffle(&s, ShuffleMode::WithinDaySlot, 4).unwrap();
    let by_slot = |x: &ReturnSeries| {
        let mut m = vec![Vec::new(); 20];
        for d in 0..x.n_days() {
            for (i, v) in x.day(d).iter().enumerate() {
                m[x.day_slots()[d] + i].push(*v);
            }
        }
        for c in &mut m {
            c.sort_by(f64::total_cmp);
        }
        m
    };
    assert_eq!(by_slot(&w), by_slot(&s));
    assert!(reshuffle(&s, ShuffleMode::Global, 1).unwrap() != reshuffle(&s, ShuffleMode::Global, 2).unwrap());
}

#[test]
fn collapse_gaussian_null() {
    let scales = [1, 4, 16, 64];
    let mut clean = 0;
    for run in 0..100 {
        let s = gaussian_days(20, 100 + run);
        let r = collapse_scan(&s, &scales, 0.5, Reference::StandardNormal).unwrap();
        if r.collapse.iter().all(|p| p.distance < p.critical_1.unwrap()) {
            clean += 1;
        }
    }
    assert!(clean >= 95, "{clean}");
}

#[test]
fn collapse_wrong_exponent_drifts() {
    let s = gaussian_days(200, 5);
    let r = collapse_scan(&s, &[4, 16, 64, 256], 0.65, Reference::StandardNormal).unwrap();
    let d: Vec<f64> = r.collapse.iter().map(|p| p.distance).collect();
    assert!(d.windows(2).all(|w| w[0] < w[1]), "{d:?}");
}

#[test]
fn base_scale_self_comparison() {
    let s = gaussian_days(2, 6);
    let r = collapse_scan(&s, &[1], 0.5, Reference::BaseScale).unwrap();
    assert_eq!(r.collapse[0].distance, 0.0);
    assert!(collapse_scan(&s, &[4, 2], 0.5, Reference::BaseScale).is_err());
    let v = serde_json::to_value(&r).unwrap();
    assert_eq!((v["reference"].as_str(), v["mode"].as_str()), (Some("base_scale"), Some("raw")));
}

#[test]
fn convergence_of_reshuffled_t3() {
    let t = StudentT::new(3.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x: Vec<f64> = (0..100 * SLOTS).map(|_| t.sample(&mut rng)).collect();
    let s = standardize(&ReturnSeries::from_values(x, SLOTS, 15).unwrap()).unwrap();
    let s = reshuffle(&s, ShuffleMode::Global, 7).unwrap();
    let c = convergence_scan(&s, &[1, 4, 16, 64, 240]).unwrap();
    let d: Vec<f64> = c.iter().map(|p| p.distance).collect();
    assert!(d[0] > d[2] && d[2] > d[4] && d[0] > c[0].critical_5.unwrap(), "{d:?}");
    assert!(c.iter().take(4).any(|p| p.distance < p.critical_5.unwrap()), "{c:?}");
}

#[test]
fn convergence_gaussian_null_and_consistency() {
    let mut clean = 0;
    for run in 0..100 {
        let s = gaussian_days(10, 300 + run);
        let c = convergence_scan(&s, &[1, 4, 16, 64]).unwrap();
        if c.iter().all(|p| p.distance < p.critical_5.unwrap()) {
            clean += 1;
        }
    }
    assert!(clean >= 95, "{clean}");

    let s = gaussian_days(3, 8);
    let plain = ks_normal(&sorted_values(&s));
    assert!((convergence_scan(&s, &[1]).unwrap()[0].distance - plain).abs() < 1e-12);
}

#[test]
fn experiment_and_histograms() {
    let s = gaussian_days(4, 9);
    let r = scaling_experiment(&s, Some(ShuffleMode::DayBlock), &default_scales(&s), None, Reference::StandardNormal, 1).unwrap();
    assert_eq!((r.mode, r.hurst_source), (ScalingMode::DailyShuffle, HurstSource::Dfa));
    assert_eq!(*r.scales.last().unwrap(), 512);
    assert!(r.collapse.iter().all(|p| (0.0..=1.0).contains(&p.distance)));
    let h = rescaled_histograms(&s, &[1, 4], 0.5, 80, 5.0).unwrap();
    assert_eq!(h.len(), 160);
    let mass: f64 = h.iter().filter(|r| r.scale == 1).map(|r| r.density * 0.125).sum();
    assert!(mass > 0.999 && mass <= 1.0 + 1e-12);
}
