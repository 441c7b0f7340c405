//! Concrete transition densities `p_D(t,x,y)` of the underlying process,
//! each with the boundary/interior profile it satisfies. Generator is `Δ`,
//! so the free kernel is `(4πt)^{-1/2} e^{-(x-y)²/4t}`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::geometry::{BoundaryFnSpec, Domain, GeometrySpec, PairDistances};
use crate::harness::{sweep, Evaluation, GridPoint, RatioReport};

/// Gaussian constant of the synthetic kernel unless set explicitly.
pub const DEFAULT_C_GAUSS: f64 = 0.25;

/// A kernel defined as `h_{p,q}·I` with explicit constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticEnvelope {
    pub geom: GeometrySpec,
    pub bfn: BoundaryFnSpec,
    pub c_gauss: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kernel")]
pub enum HeatKernelModel {
    FreeBm,
    HalflineBm,
    IntervalBm { length: f64 },
    Synthetic(SyntheticEnvelope),
}

fn gauss(t: f64, u: f64) -> f64 {
    (-u * u / (4.0 * t)).exp() / (4.0 * PI * t).sqrt()
}

/// The interior factor `I(t,·,·,C₀)` at separation `r`: the Gaussian form
/// when `C₀ = 0`, and for `C₀ = 1` the two-branch form split at `t = Φ(r)`.
pub fn interior_term(geom: &GeometrySpec, t: f64, r: f64, c_gauss: f64) -> Result<f64> {
    if !(t > 0.0) || !(r >= 0.0) || !(c_gauss > 0.0) {
        return domain(format!("interior term needs t>0, r>=0, c>0; got t={t}, r={r}, c={c_gauss}"));
    }
    let scale = geom.big_phi_inverse(t);
    let on = 1.0 / geom.volume(scale);
    let gaussian = on * (-c_gauss * r * r / (scale * scale)).exp();
    if geom.c0 == 0 {
        return Ok(gaussian);
    }
    if t >= geom.big_phi(r) {
        Ok(on)
    } else {
        Ok(t / (geom.volume(r) * geom.big_psi(r)) + gaussian)
    }
}

/// `1/V(Φ⁻¹t) ∧ (C₀t/(V(r)Ψ(r)) + e^{−c r²/Φ⁻¹(t)²}/V(Φ⁻¹t))`, the min-form
/// of the interior factor.
pub fn interior_term_min_form(geom: &GeometrySpec, t: f64, r: f64, c_gauss: f64) -> Result<f64> {
    if !(t > 0.0) || !(r >= 0.0) || !(c_gauss > 0.0) {
        return domain(format!("interior term needs t>0, r>=0, c>0; got t={t}, r={r}, c={c_gauss}"));
    }
    let scale = geom.big_phi_inverse(t);
    let on = 1.0 / geom.volume(scale);
    let jump = if geom.c0 == 1 && r > 0.0 {
        t / (geom.volume(r) * geom.big_psi(r))
    } else {
        0.0
    };
    Ok(on.min(jump + on * (-c_gauss * r * r / (scale * scale)).exp()))
}

impl HeatKernelModel {
    pub fn synthetic(geom: GeometrySpec, bfn: BoundaryFnSpec, c_gauss: f64) -> Result<Self> {
        geom.validate()?;
        if !(c_gauss > 0.0) {
            return domain(format!("Gaussian constant must be positive, got {c_gauss}"));
        }
        Ok(Self::Synthetic(SyntheticEnvelope { geom, bfn, c_gauss }))
    }

    pub fn interval_bm(length: f64) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return domain(format!("interval length must be positive, got {length}"));
        }
        Ok(Self::IntervalBm { length })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::FreeBm => "free_bm",
            Self::HalflineBm => "halfline_bm",
            Self::IntervalBm { .. } => "interval_bm",
            Self::Synthetic(_) => "synthetic",
        }
    }

    /// The geometry the kernel lives on, with its declared `(Φ, Ψ, C₀)`.
    pub fn geometry(&self) -> GeometrySpec {
        let bm = |domain| GeometrySpec {
            domain,
            dim: 1,
            alpha: 2.0,
            kappa: 2.0,
            c0: 0,
        };
        match *self {
            Self::FreeBm => bm(Domain::FullLine),
            Self::HalflineBm => bm(Domain::HalfLine),
            Self::IntervalBm { length } => bm(Domain::Interval { length }),
            Self::Synthetic(s) => s.geom,
        }
    }

    /// Declared boundary function.
    pub fn boundary(&self) -> BoundaryFnSpec {
        match self {
            Self::FreeBm => BoundaryFnSpec { p: 0.0, q: 0.0 },
            Self::HalflineBm | Self::IntervalBm { .. } => BoundaryFnSpec { p: 0.5, q: 0.5 },
            Self::Synthetic(s) => s.bfn,
        }
    }

    /// Bottom of the Dirichlet spectrum for bounded domains.
    pub fn bottom_eigenvalue(&self) -> Option<f64> {
        match *self {
            Self::IntervalBm { length } => Some(PI * PI / (length * length)),
            _ => None,
        }
    }

    pub fn p_d(&self, t: f64, x: f64, y: f64) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return domain(format!("time must be positive, got {t}"));
        }
        let g = self.geometry();
        if !g.contains(x) || !g.contains(y) {
            return domain(format!("points ({x}, {y}) are not both in the domain"));
        }
        Ok(match *self {
            Self::FreeBm => gauss(t, x - y),
            Self::HalflineBm => gauss(t, x - y) * -(-x * y / t).exp_m1(),
            Self::IntervalBm { length } => {
                if t <= length * length / (PI * PI) {
                    interval_images(t, x, y, length)
                } else {
                    interval_eigen(t, x, y, length)
                }
            }
            Self::Synthetic(_) => self.p_d_pair(t, &g.pair(x, y)?)?,
        }
        .max(0.0))
    }

    /// Synthetic kernels depend on the points only through their distances.
    pub fn p_d_pair(&self, t: f64, pd: &PairDistances) -> Result<f64> {
        match self {
            Self::Synthetic(s) => Ok(s.bfn.h(&s.geom, t, pd) * interior_term(&s.geom, t, pd.rho, s.c_gauss)?),
            _ => domain("distance-only evaluation needs a synthetic kernel"),
        }
    }

    /// The declared profile: `h(t)·I(t)` (with the exact Gaussian constant
    /// `1/4` for the Brownian kinds) for `t < 1`, `e^{−λt} h(1)` for `t ≥ 1`
    /// on bounded domains.
    pub fn profile_envelope(&self, t: f64, x: f64, y: f64) -> Result<(f64, &'static str)> {
        let g = self.geometry();
        let b = self.boundary();
        let pd = g.pair(x, y)?;
        if let (Some(lambda), true) = (self.bottom_eigenvalue(), t >= 1.0) {
            return Ok(((-lambda * t).exp() * b.h(&g, 1.0, &pd), "large-time"));
        }
        let c = match self {
            Self::Synthetic(s) => s.c_gauss,
            _ => 0.25,
        };
        Ok((b.h(&g, t, &pd) * interior_term(&g, t, pd.rho, c)?, "small-time"))
    }
}

/// Image series regrouped so every addend is nonnegative: each image at
/// `y + 2nL` is paired with the nearer of its two reflected neighbours.
fn interval_images(t: f64, x: f64, y: f64, l: f64) -> f64 {
    let mut sum = gauss(t, x - y) * (-(-x * y / t).exp_m1() - (-(l - x) * (l - y) / t).exp());
    for n in 1..10_000 {
        let nf = n as f64;
        let right = gauss(t, x - y - 2.0 * nf * l) * -(-(l - y) * ((2.0 * nf + 1.0) * l - x) / t).exp_m1();
        let left = gauss(t, x - y + 2.0 * nf * l) * -(-y * (x + 2.0 * nf * l) / t).exp_m1();
        sum += right + left;
        if right + left <= 1e-17 * sum.abs() || (right + left == 0.0 && n > 2) {
            break;
        }
    }
    sum
}

/// `(2/L) Σ sin(nπx/L) sin(nπy/L) e^{−n²π²t/L²}`, truncated relative to the
/// running sum. Sines are taken from the nearer endpoint to keep accuracy
/// close to `x = L`.
fn interval_eigen(t: f64, x: f64, y: f64, l: f64) -> f64 {
    let (dx, fx) = if x <= l / 2.0 { (x, false) } else { (l - x, true) };
    let (dy, fy) = if y <= l / 2.0 { (y, false) } else { (l - y, true) };
    let mut sum = 0.0;
    for n in 1..100_000u64 {
        let nf = n as f64;
        let decay = (-nf * nf * PI * PI * t / (l * l)).exp();
        // sin(nπ(L−d)/L) = (−1)^{n+1} sin(nπd/L)
        let sign = if (fx ^ fy) && n % 2 == 0 { -1.0 } else { 1.0 };
        let term = sign * (nf * PI * dx / l).sin() * (nf * PI * dy / l).sin() * decay;
        sum += term;
        if decay <= 1e-17 * sum.abs() * l / 2.0 || decay == 0.0 {
            break;
        }
    }
    2.0 / l * sum
}

/// Ratio of `p_D` to its declared profile over a grid of `(t, x, y)`.
pub fn verify_hk_profile(model: &HeatKernelModel, grid: &[GridPoint]) -> Result<RatioReport> {
    sweep("hk-profile", grid, |gp| {
        let numeric = model.p_d(gp.t, gp.x, gp.y)?;
        let (envelope, regime) = model.profile_envelope(gp.t, gp.x, gp.y)?;
        Ok(Evaluation::new(numeric, envelope, regime))
    })
}
