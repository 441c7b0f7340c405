//! The acceptance criteria. Each returns a list of named checks; checks
//! against frozen spreads read their limit from [`Frozen`] and record the
//! observed value so fixtures can be regenerated.

use std::collections::BTreeMap;
use std::f64::consts::{E, PI};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::envelopes::{BoundaryCase, HkForm, MinArrangement, Setting, GAUSS_C_LOWER};
use crate::error::{Error, Result};
use crate::geometry::{check_boundary_axioms, sample_axiom_tuples, BoundaryFnSpec, Domain, GeometrySpec};
use crate::harness::config::{boundary_layers, boundary_strata, GridSpec, LogRange, PointSpec, TimeScale};
use crate::harness::fixtures::{Frozen, FIXTURE_SLACK};
use crate::harness::{sweep, Evaluation, GridPoint, RatioReport};
use crate::kernels::HeatKernelModel;
use crate::numeric::{green_quadrature, jump_quadrature, q_monte_carlo, q_quadrature, McConfig};
use crate::quad::QuadratureConfig;
use crate::subordinator::SubordinatorSpec;

pub const CRITERIA: [u32; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtMost,
    AtLeast,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub limit: f64,
    pub bound: Bound,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, observed: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            observed,
            limit,
            bound: Bound::AtMost,
            passed: observed <= limit,
        }
    }

    pub fn at_least(name: impl Into<String>, observed: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            observed,
            limit,
            bound: Bound::AtLeast,
            passed: observed >= limit,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub title: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// Wall time; left out of serialized reports so they stay reproducible.
    #[serde(skip)]
    pub runtime: Duration,
    #[serde(skip)]
    pub budget: Duration,
}

impl CriterionOutcome {
    pub fn within_budget(&self) -> bool {
        self.runtime <= self.budget
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Shared state of an acceptance run.
pub struct Context {
    pub frozen: Frozen,
    /// Values observed for frozen keys during this run.
    pub observed: BTreeMap<String, f64>,
    pub quad: QuadratureConfig,
    pub mc: McConfig,
    pub seed: u64,
}

impl Context {
    pub fn new(frozen: Frozen, quad: QuadratureConfig, mc: McConfig, seed: u64) -> Self {
        Self {
            frozen,
            observed: BTreeMap::new(),
            quad,
            mc,
            seed,
        }
    }

    /// `observed ≤ frozen × 1.05`; fails when no value has been frozen.
    fn frozen_check(&mut self, key: &str, observed: f64) -> Check {
        self.observed.insert(key.to_string(), observed);
        let limit = self.frozen.get(key).map_or(f64::NAN, |v| v * FIXTURE_SLACK);
        let mut c = Check::at_most(key, observed, limit);
        c.passed = observed.is_finite() && observed <= limit;
        c
    }

    /// Frozen observed values merged over the existing fixtures.
    pub fn refrozen(&self) -> Frozen {
        let mut f = self.frozen.clone();
        f.values.extend(self.observed.iter().map(|(k, v)| (k.clone(), *v)));
        f
    }
}

pub fn title(id: u32) -> &'static str {
    match id {
        1 => "exact identities tH(sigma(t,tb(t)))=1 and psi inverse",
        2 => "left-tail upper bound with constant e",
        3 => "right tail P(S_t>=s) against t w(s)",
        4 => "subordination oracle against the Cauchy density",
        5 => "nine-case factorization against quadrature",
        6 => "small-time heat kernel envelope",
        7 => "large-time heat kernel envelope",
        8 => "Green function envelopes and regime dispatch",
        9 => "jump kernel and tail mass",
        10 => "boundary function axioms",
        _ => "unknown",
    }
}

fn budget(id: u32) -> Duration {
    Duration::from_secs(match id {
        1 | 2 => 1,
        3 | 10 => 10,
        4 => 30,
        5 | 8 => 300,
        6 => 600,
        7 | 9 => 120,
        _ => 0,
    })
}

pub fn run_criterion(id: u32, ctx: &mut Context) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let checks = match id {
        1 => identities()?,
        2 => left_tail()?,
        3 => right_tail()?,
        4 => cauchy_oracle(ctx)?,
        5 => factorization()?,
        6 => small_time(ctx)?,
        7 => large_time(ctx)?,
        8 => green(ctx)?,
        9 => jump(ctx)?,
        10 => axioms(ctx)?,
        _ => return Err(Error::Config(format!("no acceptance criterion {id}"))),
    };
    Ok(CriterionOutcome {
        id,
        title: title(id).to_string(),
        passed: checks.iter().all(|c| c.passed),
        checks,
        runtime: start.elapsed(),
        budget: budget(id),
    })
}

const BETAS: [f64; 3] = [0.3, 0.5, 0.7];

fn stable(beta: f64) -> Result<SubordinatorSpec> {
    SubordinatorSpec::stable(beta)
}

fn line(domain: Domain, c0: u8) -> Result<GeometrySpec> {
    GeometrySpec::line(domain, 2.0, c0)
}

fn spread_key(report: &RatioReport) -> f64 {
    if report.flagged.is_empty() {
        report.spread
    } else {
        f64::INFINITY
    }
}

// ---- 1 ----------------------------------------------------------------

fn identities() -> Result<Vec<Check>> {
    let geom = line(Domain::FullLine, 1)?;
    let mut worst_h = 0.0f64;
    let mut worst_psi = 0.0f64;
    for beta in BETAS {
        let sub = stable(beta)?;
        for k in -3..=2 {
            let t = 10f64.powi(k);
            let s = t * sub.b_of_t(t)?;
            let v = t * sub.big_h(sub.sigma(t, s)?)?;
            worst_h = worst_h.max((v - 1.0).abs());
            // ψ(ψ⁻¹(t)) goes through φ, the inverse through φ⁻¹
            let r = geom.psi_inverse(&sub, t)?;
            let direct = geom.big_phi_inverse(1.0 / sub.phi_inverse(1.0 / t)?);
            worst_psi = worst_psi
                .max((geom.psi(&sub, r)? / t - 1.0).abs())
                .max((r / direct - 1.0).abs());
        }
    }
    Ok(vec![
        Check::at_most("max |tH(sigma(t,tb(t))) - 1|", worst_h, 1e-10),
        Check::at_most("max rel. error of psi inverse", worst_psi, 1e-10),
    ])
}

// ---- 2 ----------------------------------------------------------------

fn left_tail() -> Result<Vec<Check>> {
    let sub = stable(0.5)?;
    let ts = LogRange::new(1e-3, 1e2, 100)?.values();
    let rel = LogRange::new(1e-4, 1e4, 100)?.values();
    let mut violations = 0usize;
    let mut checked = 0usize;
    for &t in &ts {
        for &k in &rel {
            let s = k * t * t;
            let cdf = sub.cdf(t, s)?;
            let upper = E * (-sub.t_h_sigma(t, s)?).exp();
            checked += 1;
            if cdf > upper {
                violations += 1;
            }
        }
    }
    Ok(vec![
        Check::at_least("grid points", checked as f64, 1e4),
        Check::at_most("violations of erfc <= e exp(-t^2/4s)", violations as f64, 0.0),
    ])
}

// ---- 3 ----------------------------------------------------------------

fn right_tail() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for beta in BETAS {
        let sub = stable(beta)?;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for t in [0.1, 1.0] {
            let start = 2.0 * sub.time_scale(t)?;
            for s in LogRange::new(start, 1e4 * start, 400)?.values() {
                let r = sub.survival(t, s)? / sub.right_tail_estimate(t, s)?;
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
        out.push(Check::at_most(format!("beta={beta} spread"), hi / lo, 4.0));
        out.push(Check::at_most(format!("beta={beta} max ratio"), hi, 1.05));
    }
    Ok(out)
}

// ---- 4 ----------------------------------------------------------------

fn cauchy_oracle(ctx: &Context) -> Result<Vec<Check>> {
    let sub = stable(0.5)?;
    let model = HeatKernelModel::FreeBm;
    let ts = LogRange::new(1e-3, 1e2, 20)?.values();
    let mut rhos = vec![0.0];
    rhos.extend(LogRange::new(1e-3, 1e2, 9)?.values());
    let pairs: Vec<(f64, f64)> = ts.iter().flat_map(|&t| rhos.iter().map(move |&r| (t, r))).collect();
    let errs: Vec<Result<f64>> = pairs
        .par_iter()
        .map(|&(t, r)| {
            let q = q_quadrature(&model, &sub, t, 0.0, r, &ctx.quad)?.value;
            Ok((q / (t / (PI * (t * t + r * r))) - 1.0).abs())
        })
        .collect();
    let mut worst = 0.0f64;
    for e in errs {
        worst = worst.max(e?);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut worst_z = 0.0f64;
    for i in 0..20 {
        let t = 10f64.powf(rng.random_range(-1.0..1.0));
        let r = rng.random_range(0.0..2.0);
        let mc = McConfig {
            seed: ctx.seed.wrapping_add(i),
            ..ctx.mc
        };
        let e = q_monte_carlo(&model, &sub, t, 0.0, r, &mc)?;
        let q = q_quadrature(&model, &sub, t, 0.0, r, &ctx.quad)?.value;
        worst_z = worst_z.max((e.estimate - q).abs() / e.stderr);
    }
    Ok(vec![
        Check::at_least("quadrature points", pairs.len() as f64, 200.0),
        Check::at_most("max rel. error against Cauchy", worst, 1e-6),
        Check::at_most("max |MC - quadrature| / stderr", worst_z, 3.0),
    ])
}

// ---- 5 ----------------------------------------------------------------

/// Parameters `(p, q, β)` reaching each case of the factorization table.
pub fn factorization_cases() -> [(BoundaryCase, f64, f64, f64); 9] {
    [
        (BoundaryCase::I, 0.1, 0.2, 0.3),
        (BoundaryCase::II, 0.3, 0.3, 0.55),
        (BoundaryCase::III, 0.1, 0.6, 0.6),
        (BoundaryCase::IV, 0.5, 0.5, 0.7),
        (BoundaryCase::V, 0.2, 0.3, 0.5),
        (BoundaryCase::VI, 0.0, 0.5, 0.5),
        (BoundaryCase::VII, 0.5, 0.5, 0.5),
        (BoundaryCase::VIII, 0.2, 0.5, 0.5),
        (BoundaryCase::IX, 0.3, 0.6, 0.7),
    ]
}

pub fn factorization_grid() -> GridSpec {
    GridSpec {
        t_range: LogRange {
            lo: 1e-6,
            hi: 1.0,
            n: 10,
        },
        time_scale: TimeScale::RelativeToPsi,
        points: PointSpec::Strata {
            rho: LogRange {
                lo: 1e-3,
                hi: 1.0,
                n: 10,
            },
            strata: boundary_strata(),
        },
        regimes: None,
    }
}

fn factorization() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (case, p, q, beta) in factorization_cases() {
        let s = Setting::new(line(Domain::HalfLine, 1)?, BoundaryFnSpec::new(p, q)?, stable(beta)?)?;
        if BoundaryCase::select(p, q, beta)? != case {
            return Err(Error::Dispatch(format!("parameters for case {} select another case", case.roman())));
        }
        let grid = factorization_grid().build(&s.geom, &s.sub)?;
        let rep = sweep("lemma7.1", &grid, |gp| {
            let env = s.a_pq_closed(gp.t, &gp.pd)?;
            let num = s.a_pq_quadrature(gp.t, &gp.pd)?;
            Ok(Evaluation::new(num, env.value, env.regime.label()))
        })?;
        out.push(Check::at_most(format!("case {} spread", case.roman()), spread_key(&rep), 20.0));
    }
    Ok(out)
}

// ---- 6 ----------------------------------------------------------------

fn small_time_models() -> Result<[(&'static str, HeatKernelModel, Vec<f64>); 2]> {
    let half = HeatKernelModel::HalflineBm;
    let interval = HeatKernelModel::interval_bm(1.0)?;
    let hp = boundary_layers(&half.geometry(), 8, 1e-3);
    let ip = boundary_layers(&interval.geometry(), 5, 1e-3);
    Ok([("halfline", half, hp), ("interval", interval, ip)])
}

fn small_time(ctx: &mut Context) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (name, model, pts) in small_time_models()? {
        for beta in BETAS {
            let sub = stable(beta)?;
            let s = Setting::new(model.geometry(), model.boundary(), sub.clone())?;
            let grid = GridSpec {
                t_range: LogRange::new(1e-3, 0.3, 10)?,
                time_scale: TimeScale::Absolute,
                points: PointSpec::Points {
                    x: pts.clone(),
                    y: pts.clone(),
                },
                regimes: None,
            }
            .build(&s.geom, &sub)?;
            let rep = sweep("thm4.3", &grid, |gp| {
                let env = s.hk_symmetric_power(gp.t, &gp.pd, MinArrangement::Outside)?;
                let q = q_quadrature(&model, &sub, gp.t, gp.x, gp.y, &ctx.quad)?;
                Ok(Evaluation::new(q.value, env.value, env.regime.label()).with_err(q.abs_err / q.value))
            })?;
            out.push(Check::at_least(format!("{name} beta={beta} points"), rep.n_points as f64, 500.0));
            let key = format!("c6/{name}/beta={beta}");
            out.push(ctx.frozen_check(&key, spread_key(&rep)));
        }
    }
    Ok(out)
}

// ---- 7 ----------------------------------------------------------------

fn large_time(ctx: &mut Context) -> Result<Vec<Check>> {
    let model = HeatKernelModel::interval_bm(1.0)?;
    let sub = stable(0.5)?;
    let s = Setting::new(model.geometry(), model.boundary(), sub.clone())?;
    let xs = [0.01, 0.1, 0.3, 0.5, 0.9];
    let ys = [0.02, 0.2, 0.45, 0.7, 0.99];
    let mut grid = Vec::new();
    for t in LogRange::new(1.0, 4.0, 7)?.values() {
        for x in xs {
            for y in ys {
                grid.push(GridPoint::at(&s.geom, t, x, y)?);
            }
        }
    }
    let rep = sweep("thm4.8", &grid, |gp| {
        let env = s.sub_hk_envelope(gp.t, &gp.pd, HkForm::LargeTime, GAUSS_C_LOWER)?;
        let q = q_quadrature(&model, &sub, gp.t, gp.x, gp.y, &ctx.quad)?;
        Ok(Evaluation::new(q.value, env.value, env.regime.label()))
    })?;
    let phi_l = sub.phi(PI * PI)?;
    Ok(vec![
        Check::at_most("|phi(lambda) - pi|", (phi_l - PI).abs(), 1e-12),
        ctx.frozen_check("c7/spread", spread_key(&rep)),
    ])
}

// ---- 8 ----------------------------------------------------------------

/// Configurations reaching each closed-form Green regime on `(0, 1)`.
pub fn green_regime_configs() -> [(&'static str, u8, f64, f64, f64); 7] {
    [
        ("d>ab", 1, 0.5, 0.5, 0.3),
        ("d=ab-log", 1, 0.25, 0.25, 0.5),
        ("d<ab", 1, 0.5, 0.5, 0.7),
        ("constant", 1, 0.0, 0.0, 0.7),
        ("boundary-log", 1, 0.1, 0.1, 0.7),
        ("anomalous-power", 1, 0.8, 0.8, 0.3),
        ("anomalous-log", 1, 0.75, 0.75, 0.5),
    ]
}

fn green(ctx: &mut Context) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    // (a) integral form against nested quadrature
    let model = HeatKernelModel::interval_bm(1.0)?;
    let xs = [0.01, 0.2, 0.5, 0.9];
    let ys = [0.05, 0.3, 0.6, 0.995];
    for beta in [0.3, 0.5] {
        let sub = stable(beta)?;
        let s = Setting::new(model.geometry(), model.boundary(), sub.clone())?;
        let mut grid = Vec::new();
        for x in xs {
            for y in ys {
                grid.push(GridPoint::at(&s.geom, 0.0, x, y)?);
            }
        }
        let cfg = ctx.quad.with_rel_tol(ctx.quad.rel_tol.max(1e-7));
        let rep = sweep("prop5.3", &grid, |gp| {
            let env = s.green_integral_envelope(&gp.pd)?;
            let g = green_quadrature(&model, &sub, gp.x, gp.y, &cfg)?;
            Ok(Evaluation::new(g.value, env.value, env.regime.label()))
        })?;
        out.push(ctx.frozen_check(&format!("c8a/beta={beta}"), spread_key(&rep)));
    }

    // (b) closed forms against the integral form, per regime
    let interval = line(Domain::Interval { length: 1.0 }, 1)?;
    let pts = boundary_layers(&interval, 6, 1e-3);
    for (name, c0, p, q, beta) in green_regime_configs() {
        let geom = line(Domain::Interval { length: 1.0 }, c0)?;
        let s = Setting::new(geom, BoundaryFnSpec::new(p, q)?, stable(beta)?)?;
        let mut grid = Vec::new();
        for &x in &pts {
            for &y in &pts {
                if x != y {
                    grid.push(GridPoint::at(&geom, 0.0, x, y)?);
                }
            }
        }
        let mut regimes = std::collections::BTreeSet::new();
        let rep = sweep("thm5.6", &grid, |gp| {
            let closed = s.green_closed(&gp.pd)?;
            let integral = s.green_integral_envelope(&gp.pd)?;
            Ok(Evaluation::new(closed.value, integral.value, closed.regime.label()))
        })?;
        regimes.extend(rep.regime_histogram.keys().cloned());
        let single = regimes.len() == 1 && !regimes.contains("divergent");
        out.push(Check::at_least(format!("{name}: one regime on the grid"), single as u8 as f64, 1.0));
        out.push(ctx.frozen_check(&format!("c8b/{name}"), spread_key(&rep)));
        let rep = sweep("ex7.2", &grid, |gp| {
            let explicit = s.green_explicit(&gp.pd)?;
            let integral = s.green_integral_envelope(&gp.pd)?;
            Ok(Evaluation::new(explicit.value, integral.value, explicit.regime.label()))
        })?;
        out.push(ctx.frozen_check(&format!("c8b/{name}/explicit"), spread_key(&rep)));
    }

    // the d = αβ log case with h ≡ 1 on the line, and a divergent case:
    // every evaluator must agree on +∞
    for beta in [0.5, 0.7] {
        let full = line(Domain::FullLine, 1)?;
        let s = Setting::new(full, BoundaryFnSpec::new(0.0, 0.0)?, stable(beta)?)?;
        let pd = full.pair(0.0, 0.1)?;
        let g = green_quadrature(&HeatKernelModel::FreeBm, &s.sub, 0.0, 0.1, &ctx.quad)?.value;
        let all = [
            s.green_integral_envelope(&pd)?.value,
            s.green_closed(&pd)?.value,
            s.green_explicit(&pd)?.value,
            g,
        ];
        let agree = all.iter().all(|v| *v == f64::INFINITY);
        out.push(Check::at_least(format!("line beta={beta}: all +inf"), agree as u8 as f64, 1.0));
    }
    Ok(out)
}

// ---- 9 ----------------------------------------------------------------

fn jump(ctx: &mut Context) -> Result<Vec<Check>> {
    let sub = stable(0.5)?;
    let mut worst = 0.0f64;
    for r in LogRange::new(1e-3, 1e2, 20)?.values() {
        let j = jump_quadrature(&HeatKernelModel::FreeBm, &sub, 0.0, r, &ctx.quad)?.value;
        worst = worst.max((j * PI * r * r - 1.0).abs());
    }

    let model = HeatKernelModel::HalflineBm;
    let s = Setting::new(model.geometry(), model.boundary(), sub.clone())?;
    let pts = boundary_layers(&s.geom, 21, 1e-3);
    let mut grid = Vec::new();
    for (i, &x) in pts.iter().enumerate() {
        for &y in &pts[i + 1..] {
            grid.push(GridPoint::at(&s.geom, 0.0, x, y)?);
        }
    }
    let rep = sweep("thm4.1", &grid, |gp| {
        let env = s.jump_envelope(&gp.pd)?;
        let j = jump_quadrature(&model, &sub, gp.x, gp.y, &ctx.quad)?;
        Ok(Evaluation::new(j.value, env.value, env.regime.label()))
    })?;

    let mut tail_worst = 0.0f64;
    let mut tail_points = 0usize;
    for x in LogRange::new(1e-2, 10.0, 10)?.values() {
        for frac in [0.01, 0.05, 0.2, 0.5, 0.9] {
            let r = frac * x;
            let m = s.tail_mass(x, r)?;
            tail_worst = tail_worst.max(m * s.geom.psi(&sub, r)?);
            tail_points += 1;
        }
    }
    Ok(vec![
        Check::at_most("max rel. error against 1/(pi rho^2)", worst, 1e-6),
        Check::at_least("half-line pairs", rep.n_points as f64, 200.0),
        ctx.frozen_check("c9/halfline-spread", spread_key(&rep)),
        Check::at_least("tail-mass points", tail_points as f64, 50.0),
        ctx.frozen_check("c9/tail-mass-constant", tail_worst),
    ])
}

// ---- 10 ---------------------------------------------------------------

fn axioms(ctx: &mut Context) -> Result<Vec<Check>> {
    let beta = 0.5;
    let mut out = Vec::new();
    let domains = [("halfline", Domain::HalfLine), ("interval", Domain::Interval { length: 1.0 })];
    for (dname, domain) in domains {
        let geom = line(domain, 1)?;
        let tuples = sample_axiom_tuples(&geom, 10_000, ctx.seed);
        for (p, q) in [(0.5, 0.5), (0.2, 0.7), (0.0, 1.0), (1.2, 0.3), (1.0, 1.0)] {
            let bfn = BoundaryFnSpec::new(p, q)?;
            let rep = check_boundary_axioms(&bfn, &geom, beta, &tuples)?;
            let tag = format!("{dname} p={p} q={q}");
            for c in [&rep.h1, &rep.h2, &rep.h2_star] {
                out.push(Check::at_most(format!("{tag} {} worst ratio", c.name), c.worst_ratio, 1.0 + 1e-12));
            }
            out.push(Check::at_least(format!("{tag} tuples"), rep.h2.checked as f64, 1e4));
            if let Some(c) = &rep.h2_star_star {
                out.push(Check::at_most(format!("{tag} {} worst ratio", c.name), c.worst_ratio, 1.0 + 1e-12));
            }
            out.push(ctx.frozen_check(&format!("c10/{dname}/p={p},q={q}/harnack"), rep.harnack.worst_ratio));
        }
    }
    Ok(out)
}
