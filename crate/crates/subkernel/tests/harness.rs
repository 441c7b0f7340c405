use std::f64::consts::PI;

use subkernel::envelopes::{HkForm, Setting, TheoremId, GAUSS_C_LOWER};
use subkernel::geometry::{BoundaryFnSpec, Domain, GeometrySpec};
use subkernel::harness::acceptance::{factorization_cases, run_criterion, Context};
use subkernel::harness::{
    boundary_layers, factorization_case, regime_tag, run_report, run_sweep, scaling_index_fit, sweep, sweep_serial,
    Evaluation, Frozen, GridPoint, GridSpec, LogRange, PointSpec, RunConfig, SweepConfig, TimeScale,
};
use subkernel::kernels::HeatKernelModel;
use subkernel::numeric::McConfig;
use subkernel::quad::QuadratureConfig;
use subkernel::subordinator::SubordinatorSpec;
use subkernel::Error;

fn line(domain: Domain, c0: u8) -> GeometrySpec {
    GeometrySpec::line(domain, 2.0, c0).unwrap()
}

fn setting(domain: Domain, c0: u8, p: f64, q: f64, beta: f64) -> Setting {
    Setting::new(line(domain, c0), BoundaryFnSpec::new(p, q).unwrap(), SubordinatorSpec::stable(beta).unwrap()).unwrap()
}

fn small_grid(geom: &GeometrySpec) -> Vec<GridPoint> {
    let mut g = Vec::new();
    for t in [0.01, 0.1, 1.0] {
        for (x, y) in [(0.1, 0.2), (0.5, 2.0), (1.0, 1.5)] {
            g.push(GridPoint::at(geom, t, x, y).unwrap());
        }
    }
    g
}

#[test]
fn self_sweep_has_unit_spread() {
    let s = setting(Domain::HalfLine, 1, 0.5, 0.5, 0.5);
    let grid = small_grid(&s.geom);
    let rep = sweep("self", &grid, |gp| {
        let v = s.sub_hk_envelope(gp.t, &gp.pd, HkForm::SmallTime, GAUSS_C_LOWER)?;
        Ok(Evaluation::new(v.value, v.value, v.regime.label()))
    })
    .unwrap();
    assert_eq!(rep.n_points, 9);
    assert!((rep.spread - 1.0).abs() < 1e-15);
    assert!(rep.flagged.is_empty());
}

#[test]
fn cauchy_on_diagonal_ratio_is_two_over_pi() {
    let s = setting(Domain::FullLine, 1, 0.0, 0.0, 0.5);
    let grid: Vec<GridPoint> = [1e-3, 0.1, 1.0, 10.0]
        .iter()
        .map(|&t| GridPoint::at(&s.geom, t, 0.0, 1e-8 * t).unwrap())
        .collect();
    let rep = sweep("on-diagonal", &grid, |gp| {
        let env = s.sub_hk_envelope(gp.t, &gp.pd, HkForm::OnDiag, GAUSS_C_LOWER)?;
        let rho = gp.pd.rho;
        let cauchy = gp.t / (PI * (gp.t * gp.t + rho * rho));
        Ok(Evaluation::new(cauchy, env.value, env.regime.label()))
    })
    .unwrap();
    assert!((rep.sup_ratio - 2.0 / PI).abs() < 1e-9, "{}", rep.sup_ratio);
    assert!((rep.inf_ratio - 2.0 / PI).abs() < 1e-9);
}

#[test]
fn empty_grid_is_an_error() {
    let f = |_: &GridPoint| Ok(Evaluation::new(1.0, 1.0, "x"));
    assert!(matches!(sweep("empty", &[], f), Err(Error::Range(_))));
    assert!(matches!(sweep_serial("empty", &[], f), Err(Error::Range(_))));
}

#[test]
fn failing_points_are_flagged_not_fatal() {
    let geom = line(Domain::HalfLine, 1);
    let grid = small_grid(&geom);
    let rep = sweep("flags", &grid, |gp| {
        if gp.t > 0.5 {
            Err(Error::Range("too late".into()))
        } else {
            Ok(Evaluation::new(gp.t, 1.0, "a"))
        }
    })
    .unwrap();
    assert_eq!(rep.flagged.len(), 3);
    assert!((rep.spread - 10.0).abs() < 1e-12);
}

#[test]
fn parallel_and_serial_sweeps_agree() {
    let s = setting(Domain::Interval { length: 2.0 }, 1, 0.3, 0.6, 0.7);
    let grid = GridSpec {
        t_range: LogRange::new(1e-3, 1.0, 6).unwrap(),
        time_scale: TimeScale::Absolute,
        points: PointSpec::Points {
            x: boundary_layers(&s.geom, 4, 1e-3),
            y: vec![0.05, 1.0, 1.9],
        },
        regimes: None,
    }
    .build(&s.geom, &s.sub)
    .unwrap();
    let f = |gp: &GridPoint| {
        let a = s.sub_hk_envelope(gp.t, &gp.pd, HkForm::SmallTime, GAUSS_C_LOWER)?;
        let b = s.b_pq_explicit(gp.t, &gp.pd)?;
        Ok(Evaluation::new(a.value, b.value, a.regime.label()))
    };
    let par = sweep("cmp", &grid, f).unwrap();
    let ser = sweep_serial("cmp", &grid, f).unwrap();
    assert_eq!(serde_json::to_string(&par).unwrap(), serde_json::to_string(&ser).unwrap());
    assert_eq!(par.points, ser.points);
}

#[test]
fn scaling_index_of_stable_tail() {
    let sub = SubordinatorSpec::stable(0.5).unwrap();
    let (lo, hi) = scaling_index_fit(|s| sub.levy_tail(s).unwrap(), 1e-3, 1e3).unwrap();
    assert!((lo - 0.5).abs() < 0.01 && (hi - 0.5).abs() < 0.01, "{lo} {hi}");
}

#[test]
fn scaling_index_of_truncated_tail_spans_both_exponents() {
    let sub = SubordinatorSpec::truncated_stable(0.5, 2.0, 1.0).unwrap();
    let (lo, hi) = scaling_index_fit(|s| sub.levy_tail(s).unwrap(), 1e-3, 1e3).unwrap();
    assert!((lo - 0.5).abs() < 0.05, "{lo}");
    assert!((hi - 2.0).abs() < 0.05, "{hi}");
}

#[test]
fn scaling_index_of_psi_for_cauchy() {
    let geom = line(Domain::FullLine, 1);
    let sub = SubordinatorSpec::stable(0.5).unwrap();
    let (lo, hi) = scaling_index_fit(|r| geom.psi(&sub, r).unwrap(), 1e-4, 1e4).unwrap();
    assert!((lo - 1.0).abs() < 1e-9 && (hi - 1.0).abs() < 1e-9);
}

#[test]
fn scaling_index_rejects_bad_input() {
    assert!(scaling_index_fit(|r| r, 1.0, 1.0).is_err());
    assert!(scaling_index_fit(|r| r, -1.0, 1.0).is_err());
    assert!(scaling_index_fit(|_| 0.0, 1.0, 10.0).is_err());
}

#[test]
fn regime_tags() {
    let s = setting(Domain::HalfLine, 1, 0.5, 0.5, 0.5);
    let near = GridPoint::at(&s.geom, 1.0, 1.0, 1.1).unwrap();
    let far = GridPoint::at(&s.geom, 1e-3, 1.0, 5.0).unwrap();
    assert_eq!(regime_tag(&s, TheoremId::SmallTime, &near), "on-diagonal");
    assert_eq!(regime_tag(&s, TheoremId::SmallTime, &far), "off-diagonal");
    // no bottom eigenvalue on the half-line
    assert_eq!(regime_tag(&s, TheoremId::LargeTime, &near), "inadmissible");
    let boundary = GridPoint::at(&s.geom, 1e-2, 1e-3, 1.0).unwrap();
    assert_eq!(regime_tag(&s, TheoremId::Factorization, &boundary), "case-vii");
    let inside = GridPoint::at(&s.geom, 1e-3, 5.0, 5.5).unwrap();
    assert_eq!(regime_tag(&s, TheoremId::Factorization, &inside), "interior");
}

#[test]
fn factorization_cases_select_themselves() {
    for (case, p, q, beta) in factorization_cases() {
        assert_eq!(factorization_case(p, q, beta).unwrap(), case);
    }
    assert!(factorization_case(0.6, 0.2, 0.5).is_err());
}

#[test]
fn strata_grid_reaches_every_placement() {
    let s = setting(Domain::HalfLine, 1, 0.2, 0.5, 0.5);
    let grid = subkernel::harness::acceptance::factorization_grid().build(&s.geom, &s.sub).unwrap();
    assert_eq!(grid.len(), 1000);
    assert!(grid.iter().all(|gp| gp.x.is_nan()));
    // relative times scale with psi(rho)
    let first = &grid[0];
    let psi = s.geom.psi(&s.sub, first.pd.rho).unwrap();
    assert!((first.t / psi - 1e-6).abs() < 1e-18);
}

#[test]
fn log_range_parsing() {
    let r = LogRange::parse("1e-3:1e2:6").unwrap();
    let v = r.values();
    assert_eq!(v.len(), 6);
    assert!((v[1] - 1e-2).abs() < 1e-15);
    for bad in ["1:2", "0:1:5", "2:1:5", "1:2:1", "a:b:c"] {
        assert!(matches!(LogRange::parse(bad), Err(Error::Config(_))), "{bad}");
    }
}

#[test]
fn config_errors_are_descriptive() {
    let unknown = r#"{"sweeps":[{"name":"a","theorem":"thm9.9","kernel":{"kernel":"free_bm"},
        "subordinator":{"kind":"stable","beta":0.5},
        "grid":{"t_range":{"lo":0.1,"hi":1,"n":3},"points":{"placement":"points","x":[0],"y":[1]}}}]}"#;
    let err = RunConfig::from_json(unknown).unwrap_err().to_string();
    assert!(err.contains("thm4.3") && err.contains("lemma7.1"), "{err}");

    let bad_criterion = RunConfig::from_json(r#"{"criteria":[11]}"#).unwrap_err();
    assert!(bad_criterion.to_string().contains("11"));

    let no_kernel = r#"{"sweeps":[{"name":"a","theorem":"thm4.3",
        "subordinator":{"kind":"stable","beta":0.5},
        "grid":{"t_range":{"lo":0.1,"hi":1,"n":3},"points":{"placement":"points","x":[0],"y":[1]}}}]}"#;
    assert!(RunConfig::from_json(no_kernel).unwrap_err().to_string().contains("needs a kernel"));
}

fn cauchy_sweep() -> SweepConfig {
    SweepConfig {
        name: "cauchy".into(),
        theorem: TheoremId::SmallTime,
        kernel: Some(HeatKernelModel::FreeBm),
        geometry: None,
        subordinator: SubordinatorSpec::stable(0.5).unwrap(),
        grid: GridSpec {
            t_range: LogRange::new(1e-2, 1.0, 3).unwrap(),
            time_scale: TimeScale::Absolute,
            points: PointSpec::Points {
                x: vec![0.0],
                y: vec![0.01, 0.3, 3.0],
            },
            regimes: None,
        },
        gauss_c: subkernel::envelopes::GAUSS_C_UPPER,
        max_spread: Some(50.0),
    }
}

#[test]
fn configured_sweep_runs_and_filters_regimes() {
    let mut sc = cauchy_sweep();
    let rep = run_sweep(&sc, &QuadratureConfig::default(), &McConfig::default()).unwrap();
    assert_eq!(rep.n_points, 9);
    assert!(rep.flagged.is_empty());
    assert!(rep.spread.is_finite() && rep.spread < 50.0);

    sc.grid.regimes = Some(vec!["on-diagonal".into()]);
    let on = run_sweep(&sc, &QuadratureConfig::default(), &McConfig::default()).unwrap();
    assert!(on.n_points < 9 && on.n_points > 0);
    assert_eq!(on.regime_histogram.keys().collect::<Vec<_>>(), ["on-diagonal"]);

    sc.grid.regimes = Some(vec!["nowhere".into()]);
    assert!(run_sweep(&sc, &QuadratureConfig::default(), &McConfig::default()).is_err());
}

#[test]
fn green_sweeps_ignore_time() {
    let mut sc = cauchy_sweep();
    sc.theorem = TheoremId::GreenIntegral;
    sc.kernel = Some(HeatKernelModel::interval_bm(1.0).unwrap());
    sc.subordinator = SubordinatorSpec::stable(0.3).unwrap();
    sc.grid.points = PointSpec::Points {
        x: vec![0.1],
        y: vec![0.3, 0.8],
    };
    let rep = run_sweep(&sc, &QuadratureConfig::default().with_rel_tol(1e-7), &McConfig::default()).unwrap();
    assert_eq!(rep.n_points, 2);
    assert!(rep.flagged.is_empty(), "{:?}", rep.flagged);
}

#[test]
fn reports_are_deterministic_and_written() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        seed: 7,
        criteria: vec![1, 2],
        sweeps: vec![cauchy_sweep()],
        ..RunConfig::default()
    };
    let a = run_report(&cfg, dir.path(), false).unwrap();
    let b = run_report(&cfg, dir.path(), false).unwrap();
    assert!(a.passed());
    a.write(&dir.path().join("a")).unwrap();
    b.write(&dir.path().join("b")).unwrap();
    let ra = std::fs::read(dir.path().join("a/report.json")).unwrap();
    let rb = std::fs::read(dir.path().join("b/report.json")).unwrap();
    assert_eq!(ra, rb);
    assert!(dir.path().join("a/cauchy.csv").exists());
    assert!(dir.path().join("a/cauchy_plot.csv").exists());
}

#[test]
fn missing_frozen_value_fails_until_frozen() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        criteria: vec![7],
        ..RunConfig::default()
    };
    let first = run_report(&cfg, dir.path(), true).unwrap();
    assert!(!first.passed());
    first.refrozen.as_ref().unwrap().save(dir.path()).unwrap();
    let second = run_report(&cfg, dir.path(), false).unwrap();
    assert!(second.passed(), "{:?}", second.criteria);
}

#[test]
fn frozen_check_allows_five_percent() {
    let mut frozen = Frozen::default();
    frozen.values.insert("c7/spread".into(), 1.0);
    let mut ctx = Context::new(frozen, QuadratureConfig::default(), McConfig::default(), 0);
    let out = run_criterion(7, &mut ctx).unwrap();
    let c = out.checks.iter().find(|c| c.name == "c7/spread").unwrap();
    assert!((c.limit - 1.05).abs() < 1e-15);
    assert!(!c.passed);
    assert!(ctx.observed["c7/spread"] > 1.05);
}
