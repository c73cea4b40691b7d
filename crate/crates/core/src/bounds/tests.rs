use super::*;
use crate::ExtendedFloat;
use num_bigfloat::BigFloat;
use proptest::prelude::*;

const C_BSC25: f64 = 0.188_721_875_540_867_1;

#[test]
fn rate_known_examples() {
    let r: f64 = rate_known(1.0, 20.0, 2f64.powi(-10)).unwrap();
    assert!((r - 20.0 / 31.0).abs() < 1e-15);
    let r60: f64 = rate_known(1.0, 60.0, 2f64.powi(-10)).unwrap();
    assert!((r60 - 60.0 / 71.0).abs() < 1e-15);
    let r: f64 = rate_known(1.0, 10.0, 0.999).unwrap();
    assert!((r - 0.908_971_634_091_754_7).abs() < 1e-12);
    assert!(rate_known(0.0, 10.0, 0.1).is_err());
    assert!(rate_known(1.0, 0.5, 0.1).is_err());
    assert!(rate_known(1.0, 10.0, 1.0).is_err());
}

#[test]
fn randomized_known_branches() {
    let r: f64 = rate_known_randomized(1.0, 20.0, 0.5).unwrap();
    assert!((r - 1.500_675_614_337_298_9).abs() < 1e-12);
    // small-ε branch is exactly the plain rate
    let eps = 0.01;
    assert_eq!(rate_known_randomized(1.0, 20.0, eps).unwrap(), rate_known(1.0, 20.0, eps).unwrap());
    // seam
    let k = 16.0;
    let seam = 1.0 / k;
    let below: f64 = rate_known_randomized(1.0, k, seam).unwrap();
    let above: f64 = rate_known_randomized(1.0, k, seam * (1.0 + 1e-12)).unwrap();
    assert!((below - above).abs() < 1e-9);
    // same as transforming the δ = 1/log M decoder
    let base: f64 = rate_known(1.0, 20.0, 0.05).unwrap();
    let (et, e2) = randomized_transform(20.0 / base, 0.05, (0.5 - 0.05) / (1.0 - 0.05)).unwrap();
    assert!((e2 - 0.5).abs() < 1e-12);
    assert!((20.0 / et - r).abs() < 1e-12);
}

#[test]
fn exponent_examples() {
    assert_eq!(error_exponent_known(0.7, 0.0, 12.0).unwrap(), 0.7);
    let e: f64 = error_exponent_known(1.0, 0.5, 40.0).unwrap();
    assert!((e - 0.4875).abs() < 1e-15);
    let root = 1.0 / (1.0 + 1.0 / 30.0);
    assert!(error_exponent_known(1.0f64, root, 30.0).unwrap().abs() < 1e-15);
    assert!(error_exponent_known(1.0, -0.1, 30.0).is_err());
}

#[test]
fn converse_examples() {
    let r: f64 = converse_rate(1.0, 10.0, 0.0).unwrap();
    assert!((r - 10.0 / 9.0).abs() < 1e-15);
    assert!(matches!(converse_rate(1.0, 1.0, 0.9), Err(BoundsError::DegenerateRegime(_))));
}

#[test]
fn burnashev_examples() {
    let bsc = Dmc::bsc(0.25).unwrap();
    let r = burnashev_exponent(&bsc, C_BSC25, 0.1).unwrap();
    assert!((r.c1 - 0.5 * 3f64.log2()).abs() < 1e-12);
    assert!((r.exponent - r.c1 * (1.0 - 0.1 / C_BSC25)).abs() < 1e-12);
    assert_eq!(burnashev_exponent(&bsc, C_BSC25, C_BSC25).unwrap().exponent, 0.0);
    let z = Dmc::z_channel(0.3).unwrap();
    let zr = burnashev_exponent(&z, 0.5, 0.2).unwrap();
    assert!(zr.infinite && zr.exponent.is_infinite());
    assert_eq!(burnashev_exponent(&z, 0.5, 0.5).unwrap().exponent, 0.0);
    assert!(burnashev_exponent(&bsc, C_BSC25, 0.5).is_err());
    assert!(burnashev_c1(&Dmc::noiseless(3).unwrap()).is_infinite());
}

#[test]
fn universal_examples() {
    let r: f64 = rate_universal(1.0, 20.0, 0.5, 2, 2).unwrap();
    assert!((r - 0.500_709_133_740_432_2).abs() < 1e-12);
    assert!(rate_universal(1.0, 4.0, 0.1, 2, 2).is_ok());
    assert!(matches!(rate_universal(1.0, 2.0, 0.1, 2, 2), Err(BoundsError::MessageSetTooSmall { .. })));
    let et: f64 = expected_time_universal(C_BSC25, 12.0, 2f64.powi(-6), 2, 2).unwrap();
    assert!((et - 235.146_917_116_485_5).abs() < 1e-9);
    let r: f64 = rate_universal(C_BSC25, 12.0, 2f64.powi(-6), 2, 2).unwrap();
    assert!((12.0 / et - r).abs() < 1e-12);
}

#[test]
fn universal_randomized_examples() {
    let r: f64 = rate_universal_randomized(1.0, 20.0, 0.5, 0.25, 2, 2).unwrap();
    assert!((r - 0.729_714_983_973_310_7).abs() < 1e-12);
    assert!(r > rate_universal(1.0, 20.0, 0.5, 2, 2).unwrap());
    let near: f64 = rate_universal_randomized(1.0, 20.0, 0.5, 0.5 - 1e-12, 2, 2).unwrap();
    assert!((near - rate_universal(1.0, 20.0, 0.5, 2, 2).unwrap()).abs() < 1e-9);
    assert!(rate_universal_randomized(1.0, 20.0, 0.5, 0.5, 2, 2).is_err());
    assert!(rate_universal_randomized(1.0, 20.0, 0.5, 0.0, 2, 2).is_err());
    let (d, best) = optimize_universal_delta(1.0, 20.0, 0.5, 2, 2).unwrap();
    assert!(d > 0.0 && d < 0.5);
    for probe in [1e-9, 1e-4, 0.01, 0.1, 0.25, 0.4, 0.499] {
        assert!(best >= rate_universal_randomized(1.0, 20.0, 0.5, probe, 2, 2).unwrap() - 1e-12);
    }
}

#[test]
fn limited_feedback_examples() {
    let r: f64 = rate_limited_feedback(1.0, 10.0, 2f64.powi(-10), 5.0).unwrap();
    assert!((r - 10.0 / 24.0).abs() < 1e-15);
    let s1: f64 = rate_limited_feedback(1.0, 10.0, 0.01, 1.0).unwrap();
    assert!((s1 - 1.0 / (1.0 - 0.01f64.log2() / 10.0)).abs() < 1e-15);
    let mut prev = f64::INFINITY;
    for s in [1.0, 2.0, 10.0, 1e3, 1e6] {
        let r: f64 = rate_limited_feedback(1.0, 10.0, 0.01, s).unwrap();
        assert!(r < prev);
        prev = r;
    }
    assert!(prev < 1e-4);
    assert!(matches!(rate_limited_feedback(1.0, 10.0, 0.01, 0.5), Err(BoundsError::BadPeriod(_))));
}

#[test]
fn source_examples() {
    assert_eq!(joint_sc_expected_time(0.0, 1.0, 0.5).unwrap(), 2.0);
    assert_eq!(joint_sc_expected_time(8.0, 2.0, 2f64.powi(-10)).unwrap(), 10.0);
    // per-bit form is the rearrangement log2 M / E[T]
    let (h, k, c, eps) = (6.0, 10.0, 0.7, 0.01);
    let et: f64 = joint_sc_expected_time(h, c, eps).unwrap();
    let r: f64 = joint_sc_rate(c, k, eps, h / k).unwrap();
    assert!((k / et - r).abs() < 1e-12);
    let sw = slepian_wolf_rates(2.0, 0.0, 0.5).unwrap();
    assert_eq!((sw.r1, sw.r2, sw.sum), (5.0, 3.0, 8.0));
    let sw = slepian_wolf_rates(3.5f64, 1.25, 0.1).unwrap();
    let joint = slepian_wolf_rates(4.75f64, 0.0, 0.1).unwrap();
    assert!((sw.sum - (joint.r1 + joint.r2)).abs() < 1e-12);
    assert!(slepian_wolf_rates(1.0, 1.0, 2.0).is_err());
}

#[test]
fn complete_universal_examples() {
    // |S| = 2, L = log2 M: the block-length term is (1/2)·log2 L / log2 M shifted by the 2πe constant
    let k = 64.0;
    let h_hat: f64 = empirical_per_bit_entropy(0.5, k, 2, k, 0.0).unwrap();
    let expected = 0.5 + 0.5 * (k.log2() - (2.0 * std::f64::consts::PI * std::f64::consts::E).log2()) / k;
    assert!((h_hat - expected).abs() < 1e-15);
    let r: f64 = rate_complete_universal(1.0, 16.0, 0.1, 2, 2, 0.0, 2, 16.0, 0.0).unwrap();
    assert!(r.is_finite() && r > 0.0);
    assert!(matches!(
        rate_complete_universal(1.0, 16.0, 0.1, 2, 2, 0.5, 2, 12.0, 0.0),
        Err(BoundsError::InconsistentBlockLength { .. })
    ));
    let r3: f64 = rate_complete_universal(1.0, 3f64.log2() * 10.0, 0.1, 2, 2, 0.5, 3, 10.0, 0.0).unwrap();
    assert!(r3 > 0.0);
}

#[test]
fn complete_universal_below_informed_rate_on_grid() {
    for k in (16..=64).step_by(4) {
        let k = k as f64;
        for &h in &[0.0, 0.3, 0.7, 1.0] {
            for &eps in &[1e-3, 0.05, 0.3] {
                for &c in &[0.2, 0.5, 1.0] {
                    let cu: f64 = rate_complete_universal(c, k, eps, 2, 2, h, 2, k, 0.0).unwrap();
                    let informed: f64 = joint_sc_rate(c, k, eps, h).unwrap();
                    assert!(cu <= informed, "k={k} h={h} eps={eps} c={c}");
                }
            }
        }
    }
}

#[test]
fn universal_penalty_convergence_in_extended_precision() {
    let ratio = |log_m: f64| {
        let (c, k, eps) = (BigFloat::from_f64(1.0), BigFloat::from_f64(log_m), BigFloat::from_f64(2f64.powi(-10)));
        let gap = rate_known(c, k, eps).unwrap() - rate_universal(c, k, eps, 2, 2).unwrap();
        let lead = BigFloat::from_f64(2.0) * c * k.log2() / k;
        (gap / lead).to_f64_lossy()
    };
    // values from an independent 50-digit evaluation
    assert!((ratio(200.0) - 1.179_943_450_279_728_9).abs() < 1e-12);
    assert!((ratio(1e10) - 1.096_664_880_193_306).abs() < 1e-9);
    assert!((ratio(1e10) - 1.0).abs() < 0.1);
    let mut prev = ratio(1e3);
    for p in 4..=20 {
        let r = ratio(10f64.powi(p));
        assert!(r < prev && r > 1.0);
        prev = r;
    }
    assert!((prev - 1.048_332_445_116_079).abs() < 1e-9);
    // and the f64 path agrees at moderate sizes
    let f: f64 = rate_known(1.0, 200.0, 2f64.powi(-10)).unwrap() - rate_universal(1.0, 200.0, 2f64.powi(-10), 2, 2).unwrap();
    let e: ExtendedFloat = rate_known(BigFloat::from_f64(1.0), BigFloat::from_f64(200.0), BigFloat::from_f64(2f64.powi(-10))).unwrap()
        - rate_universal(BigFloat::from_f64(1.0), BigFloat::from_f64(200.0), BigFloat::from_f64(2f64.powi(-10)), 2, 2).unwrap();
    assert!((f - e.to_f64_lossy()).abs() < 1e-13);
}

#[test]
fn dominance_threshold_matches_redundancy_bound() {
    let a = 18.0;
    for t in [1u64, 2, 10, 1000] {
        let th: f64 = universal_dominance_threshold(a, t, 2, 2).unwrap();
        let rc = crate::mixture::redundancy_constants::<f64>(2, 2).unwrap();
        assert!((th - (a + 2.0 * (t as f64).log2() + rc.beta)).abs() < 1e-12);
    }
}

#[test]
fn randomized_transform_examples() {
    let (t, e): (f64, f64) = randomized_transform(100.0, 0.01, 0.3).unwrap();
    assert!((t - 70.0).abs() < 1e-12);
    assert!((e - (0.3 + 0.01 - 0.003)).abs() < 1e-15);
    assert!(randomized_transform(1.0, 0.1, 1.0).is_err());
}

#[test]
fn f32_path_tracks_f64() {
    let a: f32 = rate_universal(0.5f32, 30.0, 0.01, 2, 3).unwrap();
    let b: f64 = rate_universal(0.5f64, 30.0, 0.01, 2, 3).unwrap();
    assert!((a as f64 - b).abs() < 1e-5);
}

fn grid() -> impl Iterator<Item = (f64, f64, f64)> {
    let cs = [0.05, 0.19, 0.5, 1.0, 2.0];
    let ks = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 1024.0, 4096.0];
    let es = [1e-9, 1e-6, 1e-3, 0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.45, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99, 0.2, 0.25, 0.125];
    cs.into_iter().flat_map(move |c| ks.into_iter().flat_map(move |k| es.into_iter().map(move |e| (c, k, e))))
}

#[test]
fn ordering_on_grid() {
    let mut compared = 0;
    for (c, k, eps) in grid() {
        let known: f64 = rate_known(c, k, eps).unwrap();
        if let Ok(conv) = converse_rate(c, k, eps) {
            assert!(known < conv, "c={c} k={k} eps={eps}");
            compared += 1;
        }
        if let Ok(u) = rate_universal(c, k, eps, 2, 2) {
            assert!(u < known, "c={c} k={k} eps={eps}");
        }
        let mut prev = f64::INFINITY;
        for s in 1..6 {
            let r: f64 = rate_limited_feedback(c, k, eps, s as f64).unwrap();
            assert!(r <= prev);
            prev = r;
        }
        let e: f64 = error_exponent_known(c, known, k).unwrap();
        let identity = -eps.log2() * c / (k + c - eps.log2());
        assert!((e - identity).abs() < 1e-12);
    }
    assert!(compared >= 900);
}

proptest! {
    #[test]
    fn rate_known_monotone(c in 0.01f64..4.0, k in 1.0f64..500.0, eps in 1e-12f64..0.99, dk in 0.0f64..100.0, dc in 0.0f64..1.0) {
        let r: f64 = rate_known(c, k, eps).unwrap();
        prop_assert!(rate_known(c, k + dk, eps).unwrap() >= r);
        prop_assert!(rate_known(c + dc, k, eps).unwrap() >= r);
        prop_assert!(rate_known(c, k, eps * 0.5).unwrap() <= r);
    }

    #[test]
    fn universal_below_known(c in 0.01f64..2.0, k in 3.0f64..1e4, eps in 1e-9f64..0.99, x in 2usize..5, y in 2usize..5) {
        if let Ok(u) = rate_universal(c, k, eps, x, y) {
            prop_assert!(u < rate_known(c, k, eps).unwrap());
        }
    }

    #[test]
    fn slepian_wolf_chain_rule(h1 in 0.0f64..20.0, h2 in 0.0f64..20.0, eps in 1e-6f64..0.99) {
        let sw = slepian_wolf_rates(h1, h2, eps).unwrap();
        let excess = 1.0 - (eps / 2.0).log2();
        prop_assert!((sw.sum - (h1 + h2 + 2.0 * excess)).abs() < 1e-9);
    }
}
