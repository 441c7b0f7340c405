use std::f64::consts::PI;

use subkernel::envelopes::{BoundaryCase, GreenRegime, HkForm, MinArrangement, Regime, Setting, TheoremId};
use subkernel::geometry::{BoundaryFnSpec, Dist, Domain, GeometrySpec, PairDistances};
use subkernel::subordinator::SubordinatorSpec;
use subkernel::Error;

fn setting(domain: Domain, c0: u8, p: f64, q: f64, beta: f64) -> Setting {
    Setting::new(
        GeometrySpec::line(domain, 2.0, c0).unwrap(),
        BoundaryFnSpec::new(p, q).unwrap(),
        SubordinatorSpec::stable(beta).unwrap(),
    )
    .unwrap()
}

fn free(rho: f64) -> PairDistances {
    PairDistances::new(rho, Dist::Infinite, Dist::Infinite).unwrap()
}

fn pair(rho: f64, dx: f64, dy: f64) -> PairDistances {
    PairDistances::new(rho, Dist::Finite(dx), Dist::Finite(dy)).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a / b - 1.0).abs() < tol
}

fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (n - 1) as f64))
        .collect()
}

#[test]
fn boundary_integral_has_closed_form_on_the_line() {
    let s = setting(Domain::FullLine, 1, 0.0, 0.0, 0.5);
    for (t, r) in [(0.01, 0.5), (0.1, 0.3), (0.2, 2.0), (1e-4, 1e-3)] {
        let got = s.b_h(t, &free(r)).unwrap();
        let want = 2.0 / PI.sqrt() * (2.0 * r - 2f64.sqrt() * t);
        assert!(close(got, want, 1e-8), "t={t} r={r}: {got} vs {want}");
    }
    for r in [1e-3, 0.4, 3.0] {
        let got = s.b_h_star(&free(r)).unwrap();
        assert!(close(got, 2.0 / PI.sqrt() * r, 1e-8));
    }
}

#[test]
fn boundary_integral_rejects_an_empty_range() {
    let s = setting(Domain::FullLine, 1, 0.0, 0.0, 0.5);
    assert!(matches!(s.b_h(1.0, &free(0.5)), Err(Error::Range(_))));
}

#[test]
fn static_boundary_integral_matches_the_small_time_limit() {
    for (p, q, beta) in [(0.5, 0.5, 0.5), (0.1, 0.6, 0.3), (0.0, 0.5, 0.7)] {
        let s = setting(Domain::HalfLine, 1, p, q, beta);
        for rho in [0.01, 0.1, 1.0] {
            for (dx, dy) in [(0.5, 0.5), (1.0, 2.0), (10.0, 10.0), (0.01, 3.0)] {
                let pd = pair(rho, dx * rho, dy * rho);
                let ratio = s.b_h_star(&pd).unwrap() / s.b_h(1e-12, &pd).unwrap();
                assert!((0.125..=8.0).contains(&ratio), "{p} {q} {beta} {rho} {dx} {dy}: {ratio}");
            }
        }
    }
}

#[test]
fn factorization_is_one_in_the_interior() {
    let s = setting(Domain::HalfLine, 1, 0.5, 0.5, 0.7);
    let v = s.a_pq_closed(1e-3, &pair(0.1, 0.3, 0.15)).unwrap();
    assert_eq!(v.value, 1.0);
    assert_eq!(v.regime, Regime::Interior);
}

#[test]
fn factorization_saturates_when_every_cap_does() {
    let s = setting(Domain::HalfLine, 1, 0.1, 0.2, 0.3);
    let v = s.a_pq_closed(1e-3, &pair(0.1, 0.15, 0.15)).unwrap();
    assert_eq!(v.regime, Regime::Case(BoundaryCase::I));
    assert!(close(v.value, 1.0, 1e-12));
}

#[test]
fn factorization_case_selection() {
    assert_eq!(BoundaryCase::select(0.5, 0.5, 0.5).unwrap(), BoundaryCase::VII);
    assert_eq!(BoundaryCase::select(0.5, 0.5, 0.7).unwrap(), BoundaryCase::IV);
    assert_eq!(BoundaryCase::select(0.1, 0.2, 0.3).unwrap(), BoundaryCase::I);
    assert_eq!(BoundaryCase::select(0.0, 0.5, 0.5).unwrap(), BoundaryCase::VI);
    let logs: Vec<_> = BoundaryCase::ALL.iter().filter(|c| c.is_log()).collect();
    assert!(!logs.is_empty());
    let s = setting(Domain::HalfLine, 1, 0.6, 0.2, 0.5);
    match s.a_pq_closed(1e-3, &pair(0.1, 0.05, 0.05)) {
        Err(Error::Dispatch(msg)) => assert!(msg.contains("swap")),
        other => panic!("expected dispatch error, got {other:?}"),
    }
}

#[test]
fn factorization_agrees_with_quadrature() {
    let s = setting(Domain::HalfLine, 1, 0.5, 0.5, 0.5);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for rho in logspace(-3.0, 0.0, 5) {
        let psi = s.geom.psi(&s.sub, rho).unwrap();
        for t in logspace(-4.0, 0.0, 5) {
            for (dx, dy) in [(0.5, 0.5), (1.0, 1.0), (0.5, 1.0), (2.0, 1.0)] {
                let pd = pair(rho, dx * rho, dy * rho);
                let r = s.a_pq_closed(t * psi, &pd).unwrap().value / s.a_pq_quadrature(t * psi, &pd).unwrap();
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
    }
    assert!(hi / lo < 20.0, "spread {}", hi / lo);
}

#[test]
fn explicit_boundary_factor_examples() {
    let s = setting(Domain::HalfLine, 0, 0.5, 0.5, 0.5);
    let v = s.b_pq_explicit(1e-4, &pair(0.1, 0.01, 0.01)).unwrap();
    assert!(close(v.value, 0.01, 1e-12), "{}", v.value);
    assert_eq!(v.regime, Regime::Product);

    let s = setting(Domain::HalfLine, 1, 0.6, 0.6, 0.5);
    let pd = pair(0.1, 0.02, 0.05);
    let v = s.b_pq_explicit(1e-4, &pd).unwrap();
    assert!(close(v.value, (0.02f64 / 0.1).powf(2.0 * 0.5), 1e-12), "{}", v.value);
}

#[test]
fn explicit_factor_specializes_to_the_symmetric_form() {
    let log_one = (1.0 + std::f64::consts::E).ln();
    for (alpha, c0) in [(2.0, 0), (1.5, 1)] {
        for beta in [0.3, 0.5, 0.7] {
            let s = Setting::new(
                GeometrySpec::line(Domain::HalfLine, alpha, c0).unwrap(),
                BoundaryFnSpec::symmetric(0.5).unwrap(),
                SubordinatorSpec::stable(beta).unwrap(),
            )
            .unwrap();
            for rho in [0.01, 0.1, 1.0] {
                for t in [1e-6, 1e-3, 0.1] {
                    for (dx, dy) in [(0.5, 0.5), (0.2, 3.0), (2.0, 2.0), (10.0, 0.1)] {
                        let pd = pair(rho, dx * rho, dy * rho);
                        let a = s.b_pq_explicit(t, &pd).unwrap().value;
                        let b = s.b_alpha_beta(t, &pd).unwrap().value;
                        // the two log forms differ only once δ∧ ∨ t^{1/(αβ)} reaches ρ
                        let reg = t.powf(1.0 / (alpha * beta));
                        let exact = alpha == 2.0 || beta != 0.5 || pd.dmin().max_f(reg).min_f(f64::INFINITY) < rho;
                        if exact {
                            assert!(close(a, b, 1e-12), "{alpha} {beta} {rho} {t}: {a} vs {b}");
                        } else {
                            let r = a / b;
                            assert!(r >= 1.0 / log_one - 1e-12 && r <= log_one + 1e-12, "{r}");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn on_diagonal_envelope_against_cauchy() {
    let s = setting(Domain::FullLine, 1, 0.0, 0.0, 0.5);
    for t in [1e-3, 0.1, 1.0, 50.0] {
        for rho in [0.0, 0.5 * t, t] {
            let pd = free(if rho == 0.0 { 1e-8 * t } else { rho });
            let v = s.sub_hk_envelope(t, &pd, HkForm::OnDiag, 4.0).unwrap();
            assert!(close(v.value, 1.0 / (2.0 * t), 1e-12));
            assert_eq!(v.regime, Regime::OnDiagonal);
        }
        let cauchy = 1.0 / (PI * t);
        assert!(close(cauchy / (1.0 / (2.0 * t)), 2.0 / PI, 1e-12));
    }
    assert!(matches!(
        s.sub_hk_envelope(0.1, &free(1.0), HkForm::OnDiag, 4.0),
        Err(Error::Range(_))
    ));
}

#[test]
fn simple_off_diagonal_form() {
    let s = setting(Domain::FullLine, 0, 0.0, 0.0, 0.5);
    for (t, rho) in [(0.01, 0.5), (1e-3, 2.0), (0.1, 0.3)] {
        let v = s.sub_hk_envelope(t, &free(rho), HkForm::OffSimple, 4.0).unwrap();
        let want = t / (2.0 * rho * rho.powf(2.0 * 0.5));
        assert!(close(v.value, want, 1e-12), "{} vs {want}", v.value);
    }
}

#[test]
fn large_time_form_on_the_unit_interval() {
    let s = setting(Domain::Interval { length: 1.0 }, 1, 0.5, 0.5, 0.5);
    let g = s.geom;
    for t in [1.0, 2.0, 4.0] {
        for (x, y) in [(0.5, 0.5), (0.1, 0.9), (0.02, 0.03)] {
            let pd = g.pair(x, y).unwrap();
            let v = s.sub_hk_envelope(t, &pd, HkForm::LargeTime, 4.0).unwrap();
            let want = (-PI * t).exp() * s.bfn.h_value(&g, 1.0, x, y).unwrap();
            assert!(close(v.value, want, 1e-12));
        }
    }
    let unbounded = setting(Domain::HalfLine, 1, 0.5, 0.5, 0.5);
    assert!(unbounded
        .sub_hk_envelope(2.0, &pair(0.1, 1.0, 1.0), HkForm::LargeTime, 4.0)
        .is_err());
}

#[test]
fn off_diagonal_terms_sum_and_tag_the_gaussian_constant() {
    let s = setting(Domain::HalfLine, 1, 0.5, 0.5, 0.5);
    let pd = pair(0.5, 0.1, 0.2);
    let terms = s.off_diagonal_terms(1e-3, &pd, 0.25).unwrap();
    let v = s.sub_hk_envelope(1e-3, &pd, HkForm::OffGeneral, 0.25).unwrap();
    assert!(close(v.value, terms.sum(), 1e-12));
    assert_eq!(v.gauss_c, Some(0.25));
    let lower = s.off_diagonal_terms(1e-3, &pd, 4.0).unwrap();
    assert!(lower.gaussian <= terms.gaussian);
}

#[test]
fn boundary_integral_term_dominates_when_c0_is_one() {
    let s = setting(Domain::HalfLine, 1, 0.5, 0.5, 0.5);
    let mut worst = f64::INFINITY;
    for rho in logspace(-3.0, 0.0, 6) {
        let psi = s.geom.psi(&s.sub, rho).unwrap();
        for t in logspace(-5.0, -0.5, 6) {
            for (dx, dy) in [(0.5, 0.5), (1.0, 2.0), (10.0, 10.0), (0.1, 5.0)] {
                let a = s.off_diagonal_terms(t * psi, &pair(rho, dx * rho, dy * rho), 4.0).unwrap();
                let others = a.time_scale.max(a.gaussian).max(a.tail);
                worst = worst.min(a.boundary_integral / others);
            }
        }
    }
    assert!(worst > 0.1, "A1 / max(A2, A3, A4) fell to {worst}");
}

#[test]
fn symmetric_arrangements_agree_within_two() {
    for beta in [0.3, 0.5, 0.7] {
        let s = setting(Domain::HalfLine, 1, 0.5, 0.5, beta);
        for rho in logspace(-3.0, 0.0, 5) {
            for t in logspace(-6.0, -1.0, 5) {
                for (dx, dy) in [(0.5, 0.5), (0.01, 0.01), (2.0, 0.1), (10.0, 10.0)] {
                    let pd = pair(rho, dx * rho, dy * rho);
                    let a = s.hk_symmetric_power(t, &pd, MinArrangement::Outside).unwrap().value;
                    let b = s.hk_symmetric_power(t, &pd, MinArrangement::Inside).unwrap().value;
                    assert!((0.5..=2.0).contains(&(a / b)), "{beta} {rho} {t}: {}", a / b);
                }
            }
        }
    }
}

#[test]
fn envelopes_do_not_increase_with_separation() {
    let s = setting(Domain::HalfLine, 1, 0.5, 0.5, 0.5);
    for (dx, dy) in [(0.01, 0.01), (0.1, 1.0), (1.0, 1.0)] {
        let mut last = [f64::INFINITY; 3];
        for rho in logspace(-2.0, 1.0, 30) {
            let pd = pair(rho, dx, dy);
            let now = [
                s.jump_envelope(&pd).unwrap().value,
                s.hk_symmetric_power(1e-3, &pd, MinArrangement::Outside).unwrap().value,
                s.jump_explicit(&pd).unwrap().value,
            ];
            for k in 0..3 {
                assert!(now[k] <= last[k] * (1.0 + 1e-12), "envelope {k} at rho={rho}");
            }
            last = now;
        }
    }
}

#[test]
fn jump_envelope_against_cauchy() {
    let s = setting(Domain::FullLine, 0, 0.0, 0.0, 0.5);
    for rho in [1e-3, 0.2, 5.0] {
        let v = s.jump_envelope(&free(rho)).unwrap().value;
        assert!(close(v, 1.0 / (2.0 * PI.sqrt() * rho * rho), 1e-12));
        let exact = 1.0 / (PI * rho * rho);
        assert!(close(v / exact, PI.sqrt() / 2.0, 1e-12));
    }
    let half = setting(Domain::HalfLine, 0, 0.5, 0.5, 0.5);
    let pd = pair(0.3, 0.1, 0.4);
    let v = half.jump_envelope(&pd).unwrap().value;
    let big = half.geom.big_phi(0.3);
    let want = half.bfn.h(&half.geom, big, &pd) * half.sub.levy_tail(big).unwrap() / half.geom.volume(0.3);
    assert!(close(v, want, 1e-12));
}

#[test]
fn jump_envelope_scales_near_the_diagonal() {
    let s = setting(Domain::HalfLine, 1, 0.5, 0.5, 0.3);
    let a = s.jump_envelope(&pair(1e-6, 1.0, 1.0)).unwrap().value;
    let b = s.jump_envelope(&pair(2e-6, 1.0, 1.0)).unwrap().value;
    assert!(close(a / b, 2f64.powf(1.0 + 0.6), 1e-3), "{}", a / b);
}

#[test]
fn jump_is_the_small_time_limit_of_the_heat_kernel() {
    for beta in [0.3, 0.5, 0.7] {
        let s = setting(Domain::HalfLine, 1, 0.5, 0.5, beta);
        let mut ratios = Vec::new();
        for rho in [0.01, 0.1, 1.0] {
            for (dx, dy) in [(0.5, 0.5), (2.0, 0.1), (10.0, 10.0)] {
                let pd = pair(rho, dx * rho, dy * rho);
                let q = s.sub_hk_envelope(1e-12, &pd, HkForm::ExplicitStable, 4.0).unwrap().value / 1e-12;
                ratios.push(q / s.jump_explicit(&pd).unwrap().value);
            }
        }
        let hi = ratios.iter().cloned().fold(0.0, f64::max);
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(hi / lo < 4.0, "beta={beta}: spread {}", hi / lo);
    }
}

#[test]
fn tail_mass_on_the_line() {
    let s = setting(Domain::FullLine, 0, 0.0, 0.0, 0.5);
    let mut last = f64::INFINITY;
    for r in [0.01, 0.1, 1.0, 10.0] {
        let m = s.tail_mass(0.0, r).unwrap();
        let psi = s.geom.psi(&s.sub, r).unwrap();
        assert!(close(m * psi, 1.0 / PI.sqrt(), 1e-7), "{}", m * psi);
        assert!(m < last);
        last = m;
    }
    let half = setting(Domain::HalfLine, 1, 0.5, 0.5, 0.5);
    for (x, r) in [(1.0, 0.1), (1.0, 0.25), (5.0, 1.0), (0.1, 0.02)] {
        let ratio = half.tail_mass(x, r).unwrap() / half.tail_mass(x, 2.0 * r).unwrap();
        // doubling constant frozen from the worst pair with 2r <= δ(x)/2 (1.36)
        assert!((1.0..=2.0 * 1.5).contains(&ratio), "x={x} r={r}: {ratio}");
    }
    assert!(matches!(half.tail_mass(1.0, 1.0), Err(Error::Range(_))));
}

#[test]
fn green_integral_envelope_regimes() {
    let s = setting(Domain::FullLine, 1, 0.0, 0.0, 0.3);
    let a = s.green_integral_envelope(&free(0.1)).unwrap().value;
    let b = s.green_integral_envelope(&free(0.2)).unwrap().value;
    assert!(close(a / b, 2f64.powf(0.4), 1e-6), "{}", a / b);

    let s = setting(Domain::FullLine, 1, 0.0, 0.0, 0.7);
    let v = s.green_integral_envelope(&free(0.1)).unwrap();
    assert!(v.is_divergent() && v.value.is_infinite());
    assert_eq!(v.regime, Regime::Divergent);

    let s = setting(Domain::Interval { length: 1.0 }, 1, 0.5, 0.5, 0.7);
    let pd = s.geom.pair(0.2, 0.7).unwrap();
    assert!(s.green_integral_envelope(&pd).unwrap().value.is_finite());
}

#[test]
fn explicit_green_interior_power() {
    let s = setting(Domain::FullLine, 1, 0.5, 0.5, 0.3);
    let v = s.green_explicit(&free(0.1)).unwrap();
    assert!(close(v.value, 10f64.powf(0.4), 1e-12), "{}", v.value);
}

#[test]
fn closed_green_forms() {
    let s = setting(Domain::HalfLine, 1, 0.75, 0.75, 0.5);
    let v = s.green_closed(&pair(0.5, 0.01, 0.02)).unwrap();
    assert_eq!(v.regime, Regime::Green(GreenRegime::AnomalousLog));
    let s = setting(Domain::Interval { length: 1.0 }, 1, 0.5, 0.5, 0.3);
    let v = s.green_closed(&s.geom.pair(0.3, 0.5).unwrap()).unwrap();
    assert_eq!(v.regime.label(), "green d>αβ");
}

#[test]
fn bracket_matches_its_product_form() {
    let s = setting(Domain::Interval { length: 1.0 }, 1, 0.5, 0.75, 0.5);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for x in [0.01, 0.1, 0.3, 0.5] {
        for y in [0.02, 0.2, 0.6, 0.95, 0.999] {
            let pd = s.geom.pair(x, y).unwrap();
            let r = s.bracket(&pd).unwrap() / s.bracket_product(&pd).unwrap();
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    assert!(hi / lo < 10.0, "spread {}", hi / lo);
}

#[test]
fn far_green_closed_form_tracks_its_quadrature() {
    let s = setting(Domain::Interval { length: 1.0 }, 1, 0.5, 0.5, 0.3);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for x in [0.01, 0.1, 0.3, 0.5] {
        for y in [0.02, 0.2, 0.6, 0.95] {
            if x == y {
                continue;
            }
            let pd = s.geom.pair(x, y).unwrap();
            let r = s.g_tilde_cases(&pd).unwrap().value / s.far_green_quadrature(&pd).unwrap();
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    assert!(hi / lo < 20.0, "spread {}", hi / lo);
}

#[test]
fn theorem_ids_round_trip() {
    for id in TheoremId::ALL {
        assert_eq!(TheoremId::parse(id.as_str()).unwrap(), id);
    }
    match TheoremId::parse("thm9.9") {
        Err(Error::Config(msg)) => assert!(msg.contains("thm4.3") && msg.contains("thm5.8")),
        other => panic!("{other:?}"),
    }
}
