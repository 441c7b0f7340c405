use std::f64::consts::{E, PI};

use approx::assert_relative_eq;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use libm::{erf, erfc};
use subkernel::quad::{integrate_log, QuadratureConfig};
use subkernel::subordinator::{SubordinatorSpec, TailBoundParams};
use subkernel::Error;

fn stable(b: f64) -> SubordinatorSpec {
    SubordinatorSpec::stable(b).unwrap()
}

fn truncated() -> SubordinatorSpec {
    SubordinatorSpec::truncated_stable(0.5, 2.0, 1.0).unwrap()
}

#[test]
fn stable_laplace_exponent_closed_forms() {
    let s = stable(0.5);
    assert_relative_eq!(s.phi(4.0).unwrap(), 2.0, max_relative = 1e-15);
    assert_relative_eq!(stable(0.3).phi(1.0).unwrap(), 1.0);
    assert_relative_eq!(s.phi_prime(4.0).unwrap(), 0.25, max_relative = 1e-15);
    assert_relative_eq!(s.phi_second(1.0).unwrap(), -0.25, max_relative = 1e-15);
    assert_relative_eq!(s.big_h(4.0).unwrap(), 1.0, max_relative = 1e-15);
    assert_relative_eq!(s.h_inverse(1.0).unwrap(), 4.0, max_relative = 1e-14);
    assert!(matches!(s.phi(0.0), Err(Error::Domain(_))));
    assert!(matches!(s.phi(-1.0), Err(Error::Domain(_))));
    assert!(SubordinatorSpec::stable(1.0).is_err());
    assert!(SubordinatorSpec::truncated_stable(0.5, 1.0, 1.0).is_err());
}

// values from mpmath quadrature of ∫(1−e^{−λs})ν(ds) at 30 digits
#[test]
fn truncated_stable_exponent_matches_independent_quadrature() {
    let s = truncated();
    assert_relative_eq!(s.phi(1.0).unwrap(), 1.642_143_772_400_776, max_relative = 1e-11);
    assert_relative_eq!(s.phi(2.0).unwrap(), 2.467_644_550_286_197, max_relative = 1e-11);
    assert_relative_eq!(s.phi_prime(2.0).unwrap(), 0.673_212_530_302_285, max_relative = 1e-11);
    assert_relative_eq!(s.phi_second(2.0).unwrap(), -0.213_503_202_272_295_1, max_relative = 1e-10);
    assert_relative_eq!(s.big_h(1.0).unwrap(), 0.598_328_626_036_505, max_relative = 1e-11);
    assert_relative_eq!(s.big_h(10.0).unwrap(), 2.802_435_602_661_771, max_relative = 1e-11);
}

#[test]
fn truncated_stable_derivatives_agree_with_finite_differences() {
    let s = truncated();
    let h = 1e-6;
    let fd = (s.phi(2.0 + h).unwrap() - s.phi(2.0 - h).unwrap()) / (2.0 * h);
    assert_relative_eq!(fd, s.phi_prime(2.0).unwrap(), max_relative = 1e-5);
    let h = 1e-3;
    let fd2 = (s.phi_prime(2.0 + h).unwrap() - s.phi_prime(2.0 - h).unwrap()) / (2.0 * h);
    assert_relative_eq!(fd2, s.phi_second(2.0).unwrap(), max_relative = 1e-5);
}

#[test]
fn cached_exponent_tracks_direct_values() {
    let direct = truncated();
    let cached = truncated().with_phi_cache().unwrap();
    for &l in &[1e-4, 3e-2, 0.7, 2.0, 55.0, 4e4] {
        assert_relative_eq!(cached.phi(l).unwrap(), direct.phi(l).unwrap(), max_relative = 1e-6);
        assert_relative_eq!(cached.phi_prime(l).unwrap(), direct.phi_prime(l).unwrap(), max_relative = 1e-5);
    }
}

#[test]
fn inverse_identities() {
    for spec in [stable(0.3), stable(0.5), stable(0.7), truncated()] {
        for &l in &[0.1, 1.0, 10.0] {
            let h = spec.big_h(l).unwrap();
            assert_relative_eq!(spec.h_inverse(h).unwrap(), l, max_relative = 1e-10);
            let u = spec.phi(l).unwrap();
            assert_relative_eq!(spec.phi_inverse(u).unwrap(), l, max_relative = 1e-10);
        }
        for &t in &[0.01, 0.1, 1.0, 10.0] {
            let tb = t * spec.b_of_t(t).unwrap();
            let val = t * spec.big_h(spec.sigma(t, tb).unwrap()).unwrap();
            assert_relative_eq!(val, 1.0, max_relative = 1e-10);
        }
    }
}

#[test]
fn sigma_and_b_examples() {
    let s = stable(0.5);
    assert_relative_eq!(s.sigma(1.0, 1.0).unwrap(), 0.25, max_relative = 1e-14);
    assert_relative_eq!(s.sigma(1.0, 0.25).unwrap(), 4.0, max_relative = 1e-14);
    assert_relative_eq!(s.t_h_sigma(1.0, 0.25).unwrap(), 1.0, max_relative = 1e-14);
    assert_relative_eq!(s.b_of_t(1.0).unwrap(), 0.25, max_relative = 1e-13);
    assert_relative_eq!(4.0 * s.b_of_t(4.0).unwrap(), 4.0, max_relative = 1e-13);
    // sandwich φ⁻¹(7/t)⁻¹ ≤ t·b(t) ≤ φ⁻¹(1/t)⁻¹
    for spec in [stable(0.3), stable(0.5), stable(0.7), truncated()] {
        let mut prev = 0.0;
        for k in -20..=20 {
            let t = 10f64.powf(k as f64 / 10.0);
            let tb = t * spec.b_of_t(t).unwrap();
            assert!(tb > prev);
            prev = tb;
            assert!(1.0 / spec.phi_inverse(7.0 / t).unwrap() <= tb);
            assert!(tb <= 1.0 / spec.phi_inverse(1.0 / t).unwrap());
        }
        let mut prev = f64::INFINITY;
        for k in 0..30 {
            let sg = spec.sigma(1.0, 1e-3 * 1.5f64.powi(k)).unwrap();
            assert!(sg <= prev);
            prev = sg;
        }
    }
}

#[test]
fn truncated_sigma_vanishes_beyond_slope_at_zero() {
    let s = truncated();
    let m = s.phi_prime_at_zero();
    assert_relative_eq!(m, 3.0, max_relative = 1e-15);
    assert_eq!(s.sigma(1.0, 3.5).unwrap(), 0.0);
    assert!(s.sigma(1.0, 2.9).unwrap() > 0.0);
}

#[test]
fn levy_tail_examples() {
    let s = stable(0.5);
    assert_relative_eq!(s.levy_tail(1.0).unwrap(), 0.564_189_583_547_756_3, max_relative = 1e-14);
    let int_w = 2.0 / PI.sqrt();
    assert!(int_w / E <= s.phi(1.0).unwrap() && s.phi(1.0).unwrap() <= 2.0 * int_w);
    assert_relative_eq!(truncated().levy_tail(4.0).unwrap(), 0.0625);
    let d = stable(0.3).levy_density(2.0).unwrap();
    let h = 1e-6;
    let fd = (stable(0.3).levy_tail(2.0 - h).unwrap() - stable(0.3).levy_tail(2.0 + h).unwrap()) / (2.0 * h);
    assert_relative_eq!(d, fd, max_relative = 1e-7);
}

#[test]
fn one_half_density_and_cdf() {
    let s = stable(0.5);
    assert_relative_eq!(s.density(1.0, 1.0).unwrap(), 0.219_695_644_733_861, max_relative = 1e-12);
    assert_relative_eq!(s.cdf(1.0, 1.0).unwrap(), 0.479_500_122_186_953_5, max_relative = 1e-12);
    assert!(SubordinatorSpec::truncated_stable(0.5, 2.0, 1.0).unwrap().density(1.0, 1.0).is_err());
}

// reference values: Talbot inversion of e^{−p^β}/p and e^{−p^β} in mpmath at 40 digits
#[test]
fn general_beta_distribution_matches_laplace_inversion() {
    let table = [
        (0.3, 0.2, 0.241_232_007_912_421_8, 0.572_906_208_837_652_1),
        (0.3, 1.0, 0.432_448_741_006_305, 0.117_157_002_565_916_15),
        (0.3, 5.0, 0.605_512_019_662_010_7, 0.019_154_354_837_293_765),
        (0.3, 100.0, 0.820_407_171_769_513_9, 0.000_498_005_983_019_927_2),
        (0.7, 0.2, 0.000_709_777_839_797_214_2, 0.049_842_343_922_514_09),
        (0.7, 1.0, 0.537_187_233_326_160_4, 0.387_395_010_146_592_44),
        (0.7, 5.0, 0.877_135_620_304_671_3, 0.019_260_270_724_066_874),
        (0.7, 100.0, 0.986_478_460_548_197_2, 9.615_518_544_963_508e-5),
    ];
    for (b, x, cdf, dens) in table {
        let s = stable(b);
        assert_relative_eq!(s.cdf(1.0, x).unwrap(), cdf, max_relative = 1e-9);
        assert_relative_eq!(s.survival(1.0, x).unwrap(), 1.0 - cdf, max_relative = 1e-9);
        assert_relative_eq!(s.density(1.0, x).unwrap(), dens, max_relative = 1e-9);
    }
}

#[test]
fn density_normalization_and_self_similarity() {
    let cfg = QuadratureConfig::default().with_rel_tol(1e-11);
    for &b in &[0.3, 0.5, 0.7] {
        let s = stable(b);
        for &t in &[0.5f64, 2.0] {
            let mode = t.powf(1.0 / b);
            let total = integrate_log(|x| s.density(t, x).unwrap(), 0.0, f64::INFINITY, &[mode], &cfg).unwrap();
            assert_relative_eq!(total.value, 1.0, max_relative = 1e-8);
            // cdf agrees with integrated density
            let part = integrate_log(|x| s.density(t, x).unwrap(), 0.0, 3.0 * mode, &[mode], &cfg).unwrap();
            assert_relative_eq!(part.value, s.cdf(t, 3.0 * mode).unwrap(), max_relative = 1e-8);
            for &x in &[0.1, 1.0, 10.0] {
                let lhs = s.density(t, x).unwrap();
                let rhs = t.powf(-1.0 / b) * s.density(1.0, x * t.powf(-1.0 / b)).unwrap();
                assert_relative_eq!(lhs, rhs, max_relative = 1e-8);
            }
        }
    }
}

#[test]
fn sampling_reproduces_laplace_transform() {
    let n = 200_000;
    for (b, lam) in [(0.5, 1.0), (0.3, 2.0), (0.7, 1.0)] {
        let s = stable(b);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let vals: Vec<f64> = (0..n).map(|_| (-lam * s.sample(1.0, &mut rng).unwrap()).exp()).collect();
        let mean = vals.iter().sum::<f64>() / n as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let exact = (-s.phi(lam).unwrap()).exp();
        assert!((mean - exact).abs() < 4.0 * (var / n as f64).sqrt(), "beta={b}: {mean} vs {exact}");
    }
}

#[test]
fn sampling_matches_cdf_at_quantiles() {
    let n = 100_000;
    let s = stable(0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut draws: Vec<f64> = (0..n).map(|_| s.sample(1.0, &mut rng).unwrap()).collect();
    draws.sort_by(f64::total_cmp);
    for &x in &[0.05, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0, 1e3, 1e4] {
        let p = s.cdf(1.0, x).unwrap();
        let emp = draws.partition_point(|d| *d <= x) as f64 / n as f64;
        let sd = (p * (1.0 - p) / n as f64).sqrt();
        assert!((emp - p).abs() <= 3.0 * sd + 1e-12, "x={x}: {emp} vs {p}");
    }
}

#[test]
fn antithetic_pairs_share_the_exponential() {
    let s = stable(0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (a, b) = s.sample_antithetic(1.0, &mut rng).unwrap();
    assert!(a > 0.0 && b > 0.0);
    assert_eq!(s.sample_seeded(2.0, 99).unwrap(), s.sample_seeded(2.0, 99).unwrap());
}

#[test]
fn truncated_shot_noise_reproduces_laplace_transform() {
    let s = truncated();
    let n = 4000;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let vals: Vec<f64> = (0..n).map(|_| (-s.sample(0.2, &mut rng).unwrap()).exp()).collect();
    let mean = vals.iter().sum::<f64>() / n as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let exact = (-0.2 * s.phi(1.0).unwrap()).exp();
    assert!((mean - exact).abs() < 4.0 * (var / n as f64).sqrt());
}

#[test]
fn left_tail_upper_bound_dominates() {
    let s = stable(0.5);
    assert_relative_eq!(s.t_h_sigma(1.0, 0.25).unwrap(), 1.0, max_relative = 1e-14);
    let p = TailBoundParams {
        kind: "stable".into(),
        beta: 0.5,
        c_lower: 0.1,
        c_exp: 2.0,
        fitted_on_grid: serde_json::Value::Null,
    };
    let (_, up) = s.left_tail_bounds(1.0, 0.25, &p).unwrap();
    assert_relative_eq!(up, 1.0, max_relative = 1e-14);
    assert!(up >= erfc(1.0));
    let (_, up) = s.left_tail_bounds(1.0, 1e12, &p).unwrap();
    assert!((up - E).abs() < 1e-5);
    for i in 0..100 {
        let u = 10f64.powf(-3.0 + 5.0 * i as f64 / 99.0);
        assert!(erfc(u) <= E * (-u * u).exp());
    }
    for &b in &[0.3, 0.7] {
        let s = stable(b);
        for &t in &[0.1f64, 1.0] {
            for k in 0..20 {
                let x = 10f64.powf(-2.0 + 0.2 * k as f64) * t.powf(1.0 / b);
                let (_, up) = s.left_tail_bounds(t, x, &p).unwrap();
                assert!(s.cdf(t, x).unwrap() <= up);
            }
        }
    }
}

#[test]
fn right_tail_examples() {
    let s = stable(0.5);
    let est = s.right_tail_estimate(1.0, 4.0).unwrap();
    assert_relative_eq!(est, 0.282_094_791_773_878_1, max_relative = 1e-13);
    assert_relative_eq!(erf(0.25) / est, 0.9796, max_relative = 1e-4);
    let r = s.survival(1.0, 100.0).unwrap() / s.right_tail_estimate(1.0, 100.0).unwrap();
    assert!((0.95..=1.0).contains(&r));
    let r = s.survival(0.1, 0.02).unwrap() / s.right_tail_estimate(0.1, 0.02).unwrap();
    assert_relative_eq!(r, 0.960, max_relative = 1e-3);
    assert!(matches!(s.right_tail_estimate(1.0, 1.0), Err(Error::Range(_))));
    assert!(matches!(truncated().right_tail_estimate(1e-4, 0.6), Err(Error::Range(_))));
}

#[test]
fn mode_interval_examples() {
    let s = stable(0.5);
    let p = s.mode_interval_probability(1.0, 0.01).unwrap();
    assert_relative_eq!(p, erfc(0.5) - erfc(5.0), max_relative = 1e-12);
    assert!(s.mode_interval_probability(1.0, 1.0 - 1e-9).unwrap() < 1e-8);
    assert_relative_eq!(s.mode_interval_probability(17.0, 0.01).unwrap(), p, max_relative = 1e-10);
    assert!(matches!(truncated().mode_interval_probability(1.0, 0.5), Err(Error::Unsupported(_))));
}

#[test]
fn truncated_moment_examples() {
    let s = stable(0.5);
    assert_relative_eq!(s.truncated_moment_bound(1.0, 1.0, 1.0).unwrap(), (-0.125f64).exp(), max_relative = 1e-14);
    let q = s.truncated_moment(1.0, 0.01, 1.0).unwrap();
    let bound = s.truncated_moment_bound(1.0, 0.01, 1.0).unwrap();
    assert_relative_eq!(bound, 100.0 * (-12.5f64).exp(), max_relative = 1e-12);
    assert!(q <= bound);
    assert!(matches!(s.truncated_moment_bound(1.0, 2.0, 1.0), Err(Error::Range(_))));
}

#[test]
fn spec_round_trips_through_json() {
    let s = truncated();
    let j = serde_json::to_string(&s).unwrap();
    assert_eq!(j, r#"{"kind":"truncated_stable","ell":2.0,"crossover":1.0,"beta":0.5}"#);
    let back: SubordinatorSpec = serde_json::from_str(&j).unwrap();
    assert_eq!(back, s);
    assert!(serde_json::from_str::<SubordinatorSpec>(r#"{"kind":"stable","beta":1.5}"#).is_err());
}

// far tail, same Laplace-inversion reference
#[test]
fn far_tail_survival_and_density() {
    let table = [
        (0.3, 1e4, 0.047_715_022_730_157_857, 1.404_803_193_765_068_3e-6),
        (0.3, 1e5, 0.024_136_804_303_067_125, 7.173_756_412_933_82e-8),
        (0.3, 1e7, 0.006_105_157_411_738_064, 1.827_285_754_649_694e-10),
        (0.7, 70.0, 0.017_434_651_646_471_927, 0.000_177_896_554_917_224_87),
        (0.7, 1e3, 0.002_663_705_220_521_604_6, 1.870_537_255_913_215e-6),
    ];
    for (b, x, surv, dens) in table {
        let s = stable(b);
        assert_relative_eq!(s.survival(1.0, x).unwrap(), surv, max_relative = 1e-10);
        assert_relative_eq!(s.density(1.0, x).unwrap(), dens, max_relative = 1e-10);
    }
    // leading behaviour x^{-β}/Γ(1−β)
    let s = stable(0.7);
    let x = 1e200;
    assert_relative_eq!(s.survival(1.0, x).unwrap(), s.levy_tail(x).unwrap(), max_relative = 1e-12);
}
