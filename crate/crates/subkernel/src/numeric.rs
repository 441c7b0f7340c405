//! Independent numerical oracles: the subordination integral for the heat
//! kernel, the Lévy-measure integral for the jump kernel and the time
//! integral for the Green function.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::envelopes::Setting;
use crate::error::{domain, Error, Result};
use crate::geometry::PairDistances;
use crate::kernels::HeatKernelModel;
use crate::quad::{integrate_log, Estimate, QuadratureConfig};
use crate::subordinator::SubordinatorSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct McConfig {
    pub n_samples: usize,
    pub seed: u64,
    /// Draws per independent stream; batches run in parallel.
    pub batch: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_samples: 100_000,
            seed: 0,
            batch: 10_000,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 1000 {
            return Err(Error::Config(format!("n_samples must be at least 1000, got {}", self.n_samples)));
        }
        if self.batch < 2 {
            return Err(Error::Config("batch must hold at least one antithetic pair".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    /// Number of independent antithetic pairs averaged.
    pub pairs: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GreenEstimate {
    pub value: f64,
    pub abs_err: f64,
    /// Estimated contribution of `t > t_cut`, included in `value`.
    pub tail: f64,
    pub t_cut: f64,
}

/// Abscissae where `p_D(s,x,y)` changes behaviour: `Φ(ρ)`, `Φ(δ)` and the
/// domain's own scale.
fn kernel_scales(model: &HeatKernelModel, x: f64, y: f64) -> Result<Vec<f64>> {
    let g = model.geometry();
    let pd = g.pair(x, y)?;
    let mut v = vec![g.big_phi_dist(pd.dx), g.big_phi_dist(pd.dy)];
    if pd.rho > 0.0 {
        v.push(g.big_phi(pd.rho));
    }
    if let crate::geometry::Dist::Finite(l) = g.diam() {
        v.push(g.big_phi(l));
    }
    v.retain(|s| s.is_finite() && *s > 0.0);
    Ok(v)
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        domain(format!("time must be positive, got {t}"))
    }
}

/// `∫_0^∞ p_D(s,x,y) P(S_t ∈ ds)` against the density of a stable law.
pub fn q_quadrature(
    model: &HeatKernelModel,
    sub: &SubordinatorSpec,
    t: f64,
    x: f64,
    y: f64,
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    check_time(t)?;
    if !sub.is_stable() {
        return Err(Error::Unsupported("q_quadrature needs a stable subordinator (use Monte Carlo)".into()));
    }
    model.p_d(1.0, x, y)?;
    let mut breaks = kernel_scales(model, x, y)?;
    let mode = t.powf(1.0 / sub.beta());
    breaks.extend([mode, sub.time_scale(t)?, 0.1 * mode, 10.0 * mode]);
    let f = |s: f64| {
        let p = model.p_d(s, x, y).unwrap_or(f64::NAN);
        if p == 0.0 {
            return 0.0;
        }
        p * sub.density(t, s).unwrap_or(f64::NAN)
    };
    integrate_log(f, 0.0, f64::INFINITY, &breaks, cfg)
}

/// Mean of `p_D(S_t,x,y)` over antithetic pairs of draws of `S_t`.
pub fn q_monte_carlo(
    model: &HeatKernelModel,
    sub: &SubordinatorSpec,
    t: f64,
    x: f64,
    y: f64,
    mc: &McConfig,
) -> Result<McEstimate> {
    check_time(t)?;
    mc.validate()?;
    model.p_d(1.0, x, y)?;
    let pairs_total = mc.n_samples / 2;
    let per_batch = (mc.batch / 2).max(1);
    let n_batches = pairs_total.div_ceil(per_batch);
    let sums: Vec<Result<(f64, f64, usize)>> = (0..n_batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
            rng.set_stream(b as u64);
            let n = per_batch.min(pairs_total - b * per_batch);
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..n {
                let (a, c) = sub.sample_antithetic(t, &mut rng)?;
                let v = 0.5 * (kernel_at(model, a, x, y)? + kernel_at(model, c, x, y)?);
                s1 += v;
                s2 += v * v;
            }
            Ok((s1, s2, n))
        })
        .collect();
    let (mut s1, mut s2, mut n) = (0.0, 0.0, 0usize);
    for r in sums {
        let (a, b, c) = r?;
        s1 += a;
        s2 += b;
        n += c;
    }
    let nf = n as f64;
    let mean = s1 / nf;
    let var = ((s2 / nf - mean * mean) * nf / (nf - 1.0)).max(0.0);
    Ok(McEstimate {
        estimate: mean,
        stderr: (var / nf).sqrt(),
        pairs: n,
    })
}

/// `p_D(s,·,·)` with `s = 0` (a possible draw after underflow) mapped to 0
/// off the diagonal.
fn kernel_at(model: &HeatKernelModel, s: f64, x: f64, y: f64) -> Result<f64> {
    if s > 0.0 && s.is_finite() {
        model.p_d(s, x, y)
    } else if s == 0.0 && x != y {
        Ok(0.0)
    } else {
        domain(format!("sampled subordinator value {s} is unusable at x = y"))
    }
}

/// `∫_0^∞ p_D(s,x,y) ν(ds)`.
pub fn jump_quadrature(
    model: &HeatKernelModel,
    sub: &SubordinatorSpec,
    x: f64,
    y: f64,
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    if x == y {
        return Err(Error::Singular("jump kernel at x = y".into()));
    }
    let mut breaks = kernel_scales(model, x, y)?;
    if let crate::subordinator::SubordinatorKind::TruncatedStable { crossover, .. } = sub.kind() {
        breaks.push(crossover);
    }
    let f = |s: f64| {
        let p = model.p_d(s, x, y).unwrap_or(f64::NAN);
        if p == 0.0 {
            return 0.0;
        }
        p * sub.levy_density(s).unwrap_or(f64::NAN)
    };
    integrate_log(f, 0.0, f64::INFINITY, &breaks, cfg)
}

fn inner_config(cfg: &QuadratureConfig) -> QuadratureConfig {
    QuadratureConfig {
        rel_tol: (cfg.rel_tol * 1e-2).max(1e-12),
        ..*cfg
    }
}

fn model_setting(model: &HeatKernelModel, sub: &SubordinatorSpec) -> Result<Setting> {
    Setting::new(model.geometry(), model.boundary(), sub.clone())
}

/// `∫_0^{t_cut} q(t,x,y) dt` by nested quadrature.
pub fn green_quadrature_truncated(
    model: &HeatKernelModel,
    sub: &SubordinatorSpec,
    x: f64,
    y: f64,
    t_cut: f64,
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    if x == y {
        return Err(Error::Singular("Green function at x = y".into()));
    }
    check_time(t_cut)?;
    let g = model.geometry();
    let rho = (x - y).abs();
    let inner = inner_config(cfg);
    let f = |t: f64| q_quadrature(model, sub, t, x, y, &inner).map(|e| e.value).unwrap_or(f64::NAN);
    integrate_log(f, 0.0, t_cut, &[g.psi(sub, rho)?, 1.0], cfg)
}

/// `∫_0^∞ q(t,x,y) dt`. Divergent configurations return `+∞`. On bounded
/// domains the range is cut where the bottom mode has decayed by `e^{-40}`
/// and the rest is added as `q(t_cut)/φ(λ_D)`.
pub fn green_quadrature(
    model: &HeatKernelModel,
    sub: &SubordinatorSpec,
    x: f64,
    y: f64,
    cfg: &QuadratureConfig,
) -> Result<GreenEstimate> {
    if x == y {
        return Err(Error::Singular("Green function at x = y".into()));
    }
    let g = model.geometry();
    let pd: PairDistances = g.pair(x, y)?;
    let setting = model_setting(model, sub)?;
    if setting.green_diverges(&pd) {
        return Ok(GreenEstimate {
            value: f64::INFINITY,
            abs_err: 0.0,
            tail: f64::INFINITY,
            t_cut: f64::INFINITY,
        });
    }
    let inner = inner_config(cfg);
    match model.bottom_eigenvalue() {
        Some(lambda) => {
            let rate = sub.phi(lambda)?;
            let t_cut = (40.0 / rate).max(1.0);
            let body = green_quadrature_truncated(model, sub, x, y, t_cut, cfg)?;
            let tail = q_quadrature(model, sub, t_cut, x, y, &inner)?.value / rate;
            Ok(GreenEstimate {
                value: body.value + tail,
                abs_err: body.abs_err + tail,
                tail,
                t_cut,
            })
        }
        None => {
            let f = |t: f64| q_quadrature(model, sub, t, x, y, &inner).map(|e| e.value).unwrap_or(f64::NAN);
            let e = integrate_log(f, 0.0, f64::INFINITY, &[g.psi(sub, pd.rho)?, 1.0], cfg)?;
            Ok(GreenEstimate {
                value: e.value,
                abs_err: e.abs_err,
                tail: 0.0,
                t_cut: f64::INFINITY,
            })
        }
    }
}
