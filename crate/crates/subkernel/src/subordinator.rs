//! Driftless subordinators: Laplace exponent calculus, Lévy tails, the
//! inverse-function machinery built on them, distribution of `S_t` and
//! sampling.

use std::f64::consts::{E, PI};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};
use libm::{erf, erfc, tgamma as gamma};

use crate::error::{domain, range, Error, Result};
use crate::quad::{integrate_breaks, integrate_log_rule, invert_monotone, MonotoneCubic, QuadratureConfig, Rule};

/// Precision used for the integrals that define φ and its derivatives.
const INNER: QuadratureConfig = QuadratureConfig {
    rel_tol: 1e-12,
    abs_tol: 1e-300,
    max_subdivisions: 4000,
};

/// Precision for the angular integrals behind `cdf` and `density`.
const ANGULAR: QuadratureConfig = QuadratureConfig {
    rel_tol: 1e-11,
    abs_tol: 1e-300,
    max_subdivisions: 2000,
};

/// Beyond this exponent the left tail of `S_1` underflows; rounding in
/// `A(u) − A(0)` would also swamp the quadrature there.
const UNDERFLOW: f64 = 720.0;

/// `x^{-β}` below which the far-tail expansion replaces the angular integral.
const SERIES_SWITCH: f64 = 0.05;

/// Relative width at which monotone inversions stop.
const INVERT_TOL: f64 = 1e-15;

/// Smallest jump kept by the truncated-stable shot-noise sampler.
pub const DEFAULT_SMALL_JUMP: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SubordinatorKind {
    Stable,
    TruncatedStable { ell: f64, crossover: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "SubordinatorRepr", into = "SubordinatorRepr")]
pub struct SubordinatorSpec {
    kind: SubordinatorKind,
    beta: f64,
    cache: Option<Arc<PhiCache>>,
}

impl PartialEq for SubordinatorSpec {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.beta == other.beta
    }
}

#[derive(Serialize, Deserialize)]
struct SubordinatorRepr {
    #[serde(flatten)]
    kind: SubordinatorKind,
    beta: f64,
}

impl TryFrom<SubordinatorRepr> for SubordinatorSpec {
    type Error = Error;
    fn try_from(r: SubordinatorRepr) -> Result<Self> {
        match r.kind {
            SubordinatorKind::Stable => Self::stable(r.beta),
            SubordinatorKind::TruncatedStable { ell, crossover } => Self::truncated_stable(r.beta, ell, crossover),
        }
    }
}

impl From<SubordinatorSpec> for SubordinatorRepr {
    fn from(s: SubordinatorSpec) -> Self {
        Self {
            kind: s.kind,
            beta: s.beta,
        }
    }
}

/// Constants of the lower left-tail bound `c_lower·exp(−c_exp·t·H(σ))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailBoundParams {
    pub kind: String,
    pub beta: f64,
    pub c_lower: f64,
    pub c_exp: f64,
    #[serde(default)]
    pub fitted_on_grid: serde_json::Value,
}

impl TailBoundParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_lower > 0.0 && self.c_lower <= 1.0) || !(self.c_exp >= 1.0) {
            return Err(Error::Config(format!(
                "tail bound constants out of range: c_lower={}, c_exp={}",
                self.c_lower, self.c_exp
            )));
        }
        Ok(())
    }
}

/// log-log interpolation tables for φ and φ′ of a truncated-stable law.
#[derive(Debug)]
struct PhiCache {
    phi: MonotoneCubic,
    dphi: MonotoneCubic,
}

fn check_pos(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        domain(format!("{name} must be positive and finite, got {v}"))
    }
}

impl SubordinatorSpec {
    pub fn stable(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return domain(format!("beta must lie in (0,1), got {beta}"));
        }
        Ok(Self {
            kind: SubordinatorKind::Stable,
            beta,
            cache: None,
        })
    }

    pub fn truncated_stable(beta: f64, ell: f64, crossover: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return domain(format!("beta must lie in (0,1), got {beta}"));
        }
        if !(ell > 1.0) || !ell.is_finite() {
            return domain(format!("second exponent must exceed 1, got {ell}"));
        }
        check_pos("crossover", crossover)?;
        Ok(Self {
            kind: SubordinatorKind::TruncatedStable { ell, crossover },
            beta,
            cache: None,
        })
    }

    /// Builds interpolation tables for φ and φ′ on `λ ∈ [1e-6, 1e6]`.
    /// Stable laws have closed forms and are returned unchanged.
    pub fn with_phi_cache(mut self) -> Result<Self> {
        if self.is_stable() {
            return Ok(self);
        }
        let n = 12 * 20 + 1;
        let mut xs = Vec::with_capacity(n);
        let mut lp = Vec::with_capacity(n);
        let mut ld = Vec::with_capacity(n);
        for i in 0..n {
            let x = (-6.0 + 12.0 * i as f64 / (n - 1) as f64) * std::f64::consts::LN_10;
            let lam = x.exp();
            xs.push(x);
            lp.push(self.phi_direct(lam)?.ln());
            // φ′ decreases; interpolate its negative log so the table increases
            ld.push(-self.phi_prime_direct(lam)?.ln());
        }
        self.cache = Some(Arc::new(PhiCache {
            phi: MonotoneCubic::new(xs.clone(), lp)?,
            dphi: MonotoneCubic::new(xs, ld)?,
        }));
        Ok(self)
    }

    pub fn kind(&self) -> SubordinatorKind {
        self.kind
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_stable(&self) -> bool {
        matches!(self.kind, SubordinatorKind::Stable)
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            SubordinatorKind::Stable => "stable",
            SubordinatorKind::TruncatedStable { .. } => "truncated_stable",
        }
    }

    fn require_stable(&self, what: &str) -> Result<()> {
        if self.is_stable() {
            Ok(())
        } else {
            Err(Error::Unsupported(format!("{what} is only available for stable subordinators")))
        }
    }

    // ---- Lévy measure -------------------------------------------------

    /// Tail `w(s) = ν(s, ∞)`.
    pub fn levy_tail(&self, s: f64) -> Result<f64> {
        check_pos("s", s)?;
        Ok(self.w(s))
    }

    fn w(&self, s: f64) -> f64 {
        let b = self.beta;
        match self.kind {
            SubordinatorKind::Stable => s.powf(-b) / gamma(1.0 - b),
            SubordinatorKind::TruncatedStable { ell, crossover } => {
                if s <= crossover {
                    s.powf(-b)
                } else {
                    crossover.powf(ell - b) * s.powf(-ell)
                }
            }
        }
    }

    /// Density of the Lévy measure, `−w′(s)`.
    pub fn levy_density(&self, s: f64) -> Result<f64> {
        check_pos("s", s)?;
        Ok(self.nu(s))
    }

    fn nu(&self, s: f64) -> f64 {
        self.nu_moment(s, 0.0)
    }

    /// `s^k·ν(s)`, with the powers combined so tiny `s` does not overflow.
    fn nu_moment(&self, s: f64, k: f64) -> f64 {
        let b = self.beta;
        match self.kind {
            SubordinatorKind::Stable => b / gamma(1.0 - b) * s.powf(k - 1.0 - b),
            SubordinatorKind::TruncatedStable { ell, crossover } => {
                if s <= crossover {
                    b * s.powf(k - 1.0 - b)
                } else {
                    ell * crossover.powf(ell - b) * s.powf(k - ell - 1.0)
                }
            }
        }
    }

    /// Inverse of the tail: the `s` with `w(s) = v`.
    fn w_inverse(&self, v: f64) -> f64 {
        let b = self.beta;
        match self.kind {
            SubordinatorKind::Stable => (v * gamma(1.0 - b)).powf(-1.0 / b),
            SubordinatorKind::TruncatedStable { ell, crossover } => {
                if v >= crossover.powf(-b) {
                    v.powf(-1.0 / b)
                } else {
                    (v / crossover.powf(ell - b)).powf(-1.0 / ell)
                }
            }
        }
    }

    // ---- Laplace exponent ---------------------------------------------

    pub fn phi(&self, lambda: f64) -> Result<f64> {
        check_pos("lambda", lambda)?;
        if let Some(c) = &self.cache {
            if let Some(v) = c.phi.eval(lambda.ln()) {
                return Ok(v.exp());
            }
        }
        self.phi_direct(lambda)
    }

    fn phi_direct(&self, lambda: f64) -> Result<f64> {
        match self.kind {
            SubordinatorKind::Stable => Ok(lambda.powf(self.beta)),
            SubordinatorKind::TruncatedStable { crossover, .. } => {
                let e = integrate_log_rule(
                    |s| (-lambda * s).exp() * self.w(s),
                    0.0,
                    f64::INFINITY,
                    &[crossover, 1.0 / lambda, 30.0 / lambda],
                    &INNER,
                    Rule::Gk61,
                )?;
                Ok(lambda * e.value)
            }
        }
    }

    pub fn phi_prime(&self, lambda: f64) -> Result<f64> {
        check_pos("lambda", lambda)?;
        if let Some(c) = &self.cache {
            if let Some(v) = c.dphi.eval(lambda.ln()) {
                return Ok((-v).exp());
            }
        }
        self.phi_prime_direct(lambda)
    }

    fn phi_prime_direct(&self, lambda: f64) -> Result<f64> {
        match self.kind {
            SubordinatorKind::Stable => Ok(self.beta * lambda.powf(self.beta - 1.0)),
            SubordinatorKind::TruncatedStable { crossover, .. } => Ok(integrate_log_rule(
                |s| (-lambda * s).exp() * self.nu_moment(s, 1.0),
                0.0,
                f64::INFINITY,
                &[crossover, 1.0 / lambda, 30.0 / lambda],
                &INNER,
                Rule::Gk61,
            )?
            .value),
        }
    }

    pub fn phi_second(&self, lambda: f64) -> Result<f64> {
        check_pos("lambda", lambda)?;
        match self.kind {
            SubordinatorKind::Stable => {
                let b = self.beta;
                Ok(b * (b - 1.0) * lambda.powf(b - 2.0))
            }
            SubordinatorKind::TruncatedStable { crossover, .. } => Ok(-integrate_log_rule(
                |s| (-lambda * s).exp() * self.nu_moment(s, 2.0),
                0.0,
                f64::INFINITY,
                &[crossover, 1.0 / lambda, 30.0 / lambda],
                &INNER,
                Rule::Gk61,
            )?
            .value),
        }
    }

    /// `φ′(0+)`; infinite for stable laws.
    pub fn phi_prime_at_zero(&self) -> f64 {
        match self.kind {
            SubordinatorKind::Stable => f64::INFINITY,
            SubordinatorKind::TruncatedStable { ell, crossover } => {
                let b = self.beta;
                let r = crossover.powf(1.0 - b);
                b * r / (1.0 - b) + ell * r / (ell - 1.0)
            }
        }
    }

    pub fn phi_inverse(&self, u: f64) -> Result<f64> {
        check_pos("u", u)?;
        match self.kind {
            SubordinatorKind::Stable => Ok(u.powf(1.0 / self.beta)),
            SubordinatorKind::TruncatedStable { .. } => {
                self.invert(|l| self.phi(l), u, u.powf(1.0 / self.beta), true)
            }
        }
    }

    /// `φ⁻¹(1/t)⁻¹`, the typical size of `S_t`.
    pub fn time_scale(&self, t: f64) -> Result<f64> {
        check_pos("t", t)?;
        Ok(1.0 / self.phi_inverse(1.0 / t)?)
    }

    fn invert<F: Fn(f64) -> Result<f64>>(&self, f: F, target: f64, guess: f64, increasing: bool) -> Result<f64> {
        // errors from the inner quadrature surface as NaN and then as a domain error
        let g = |x: f64| f(x).unwrap_or(f64::NAN);
        let x = invert_monotone(g, target, guess, increasing, INVERT_TOL)?;
        if x.is_finite() {
            Ok(x)
        } else {
            domain(format!("inversion failed at target {target:e}"))
        }
    }

    // ---- H, σ, b ------------------------------------------------------

    /// `H(λ) = φ(λ) − λφ′(λ)`.
    pub fn big_h(&self, lambda: f64) -> Result<f64> {
        check_pos("lambda", lambda)?;
        match self.kind {
            SubordinatorKind::Stable => Ok((1.0 - self.beta) * lambda.powf(self.beta)),
            SubordinatorKind::TruncatedStable { .. } => {
                // integrand form avoids the cancellation in φ − λφ′
                Ok(integrate_log_rule(
                    |s| {
                        // (1 − e^{−x} − x e^{−x})/x² stays O(1) as x → 0
                        let x = lambda * s;
                        let g = if x < 1e-3 {
                            0.5 - x / 3.0 + x * x / 8.0
                        } else {
                            (-(-x).exp_m1() - x * (-x).exp()) / (x * x)
                        };
                        g * lambda * lambda * self.nu_moment(s, 2.0)
                    },
                    0.0,
                    f64::INFINITY,
                    &[self.crossover(), 1.0 / lambda, 30.0 / lambda],
                    &INNER,
                    Rule::Gk61,
                )?
                .value)
            }
        }
    }

    fn crossover(&self) -> f64 {
        match self.kind {
            SubordinatorKind::Stable => f64::INFINITY,
            SubordinatorKind::TruncatedStable { crossover, .. } => crossover,
        }
    }

    /// Functional inverse of `H`, by bracketing and bisection.
    pub fn h_inverse(&self, u: f64) -> Result<f64> {
        check_pos("u", u)?;
        let guess = (u / (1.0 - self.beta)).powf(1.0 / self.beta);
        self.invert(|l| self.big_h(l), u, guess, true)
    }

    /// `(φ′)⁻¹(v)`, by bracketing and bisection.
    pub fn phi_prime_inverse(&self, v: f64) -> Result<f64> {
        check_pos("v", v)?;
        if v >= self.phi_prime_at_zero() {
            return range(format!("{v:e} is not below phi'(0+)"));
        }
        let guess = (v / self.beta).powf(1.0 / (self.beta - 1.0));
        self.invert(|l| self.phi_prime(l), v, guess, false)
    }

    /// `σ(t,s) = (φ′)⁻¹(s/t)`, or 0 once `s/t ≥ φ′(0+)`.
    pub fn sigma(&self, t: f64, s: f64) -> Result<f64> {
        check_pos("t", t)?;
        check_pos("s", s)?;
        if s / t >= self.phi_prime_at_zero() {
            return Ok(0.0);
        }
        self.phi_prime_inverse(s / t)
    }

    /// `t·H(σ(t,s))`, the exponent of the left-tail bounds.
    pub fn t_h_sigma(&self, t: f64, s: f64) -> Result<f64> {
        check_pos("t", t)?;
        check_pos("s", s)?;
        if self.is_stable() {
            let b = self.beta;
            let sigma = (b * t / s).powf(1.0 / (1.0 - b));
            return Ok(t * (1.0 - b) * sigma.powf(b));
        }
        let sigma = self.sigma(t, s)?;
        if sigma == 0.0 {
            return Ok(0.0);
        }
        Ok(t * self.big_h(sigma)?)
    }

    /// `b(t) = φ′(H⁻¹(1/t))`.
    pub fn b_of_t(&self, t: f64) -> Result<f64> {
        check_pos("t", t)?;
        self.phi_prime(self.h_inverse(1.0 / t)?)
    }

    // ---- distribution of S_t (stable only) -----------------------------

    pub fn cdf(&self, t: f64, s: f64) -> Result<f64> {
        self.require_stable("cdf")?;
        check_pos("t", t)?;
        if s.is_nan() || s < 0.0 {
            return domain(format!("s must be nonnegative, got {s}"));
        }
        if s == 0.0 {
            return Ok(0.0);
        }
        if s.is_infinite() {
            return Ok(1.0);
        }
        if self.beta == 0.5 {
            return Ok(erfc(t / (2.0 * s.sqrt())));
        }
        Ok(self.ln_cdf_unit(self.unit_arg(t, s))?.exp())
    }

    /// `P(S_t > s)`, computed without cancellation in the far tail.
    pub fn survival(&self, t: f64, s: f64) -> Result<f64> {
        self.require_stable("survival")?;
        check_pos("t", t)?;
        if s.is_nan() || s < 0.0 {
            return domain(format!("s must be nonnegative, got {s}"));
        }
        if s == 0.0 {
            return Ok(1.0);
        }
        if s.is_infinite() {
            return Ok(0.0);
        }
        if self.beta == 0.5 {
            return Ok(erf(t / (2.0 * s.sqrt())));
        }
        let x = self.unit_arg(t, s);
        if x.powf(-self.beta) < SERIES_SWITCH {
            return Ok(self.far_tail_series(x, false));
        }
        let z = self.angular_z(x);
        let a0 = self.angular_a0();
        if z * a0 > 1.0 {
            return Ok(-self.ln_cdf_unit(x)?.exp_m1());
        }
        if z == 0.0 {
            return Ok(0.0);
        }
        let v = self.angular_integral(z, |a| -(-a * z).exp_m1())?;
        Ok((v / PI).min(1.0))
    }

    pub fn density(&self, t: f64, s: f64) -> Result<f64> {
        self.require_stable("density")?;
        check_pos("t", t)?;
        if s.is_nan() || s < 0.0 {
            return domain(format!("s must be nonnegative, got {s}"));
        }
        if s == 0.0 || s.is_infinite() {
            return Ok(0.0);
        }
        if self.beta == 0.5 {
            let ln = (t / (2.0 * PI.sqrt())).ln() - 1.5 * s.ln() - t * t / (4.0 * s);
            return Ok(ln.exp());
        }
        // log space: t^{-1/β} overflows long before the density does
        let ln_scale = -t.ln() / self.beta;
        let ln_u = s.ln() + ln_scale;
        if ln_u > 700.0 {
            // leading tail term, exact to f64 precision this far out
            let b = self.beta;
            return Ok(b / gamma(1.0 - b) * (t.ln() - (1.0 + b) * s.ln()).exp());
        }
        let f = self.unit_density(ln_u.exp())?;
        if f == 0.0 {
            return Ok(0.0);
        }
        Ok((f.ln() + ln_scale).exp())
    }

    fn unit_arg(&self, t: f64, s: f64) -> f64 {
        s * t.powf(-1.0 / self.beta)
    }

    fn angular_k(&self) -> f64 {
        self.beta / (1.0 - self.beta)
    }

    fn angular_z(&self, x: f64) -> f64 {
        x.powf(-self.angular_k())
    }

    fn angular_a0(&self) -> f64 {
        let b = self.beta;
        (b.powf(b) * (1.0 - b).powf(1.0 - b)).powf(1.0 / (1.0 - b))
    }

    /// The angular integrand evaluated at `u`, given also `v = π − u`.
    fn angular_a(&self, u: f64, v: f64) -> f64 {
        let b = self.beta;
        let sin_u = if u <= v { u.sin() } else { v.sin() };
        let la = b * (b * u).sin().ln() + (1.0 - b) * ((1.0 - b) * u).sin().ln() - sin_u.ln();
        (la / (1.0 - b)).exp()
    }

    /// `∫_0^π g(A(u)) du`, split at `π/2` with the upper half integrated in
    /// `v = π − u`, and refined near the scales where `g` changes.
    fn angular_integral<G: Fn(f64) -> f64>(&self, z: f64, g: G) -> Result<f64> {
        let half = PI / 2.0;
        let za0 = z * self.angular_a0();
        let mut left = vec![0.0, half];
        if za0 > 1.0 {
            let w = za0.powf(-0.5);
            left.extend([0.25 * w, w, 4.0 * w, 16.0 * w].iter().filter(|p| **p < half));
        }
        let mut right = vec![0.0, half];
        let vw = (self.beta * PI).sin() * z.powf(1.0 - self.beta);
        right.extend([0.01 * vw, 0.1 * vw, vw, 10.0 * vw].iter().filter(|p| **p < half && **p > 0.0));
        let a = integrate_breaks(|u| g(self.angular_a(u, PI - u)), &left, &ANGULAR, Rule::Gk61)?;
        let b = integrate_breaks(|v| g(self.angular_a(PI - v, v)), &right, &ANGULAR, Rule::Gk61)?;
        Ok(a.value + b.value)
    }

    /// `ln P(S_1 ≤ x)`.
    fn ln_cdf_unit(&self, x: f64) -> Result<f64> {
        let z = self.angular_z(x);
        let a0 = self.angular_a0();
        if z * a0 > UNDERFLOW {
            return Ok(f64::NEG_INFINITY);
        }
        let v = self.angular_integral(z, |a| (-(a - a0) * z).exp())?;
        Ok(-z * a0 + (v / PI).ln())
    }

    fn unit_density(&self, x: f64) -> Result<f64> {
        if x.powf(-self.beta) < SERIES_SWITCH {
            return Ok(self.far_tail_series(x, true));
        }
        let z = self.angular_z(x);
        let a0 = self.angular_a0();
        if z * a0 > UNDERFLOW {
            return Ok(0.0);
        }
        if z == 0.0 {
            return Ok(0.0);
        }
        let v = self.angular_integral(z, |a| {
            let e = (-(a - a0) * z).exp();
            if e == 0.0 || a.is_infinite() {
                0.0
            } else {
                a * e
            }
        })?;
        let pref = self.angular_k() * z / x / PI;
        Ok(pref * v * (-z * a0).exp())
    }

    /// Convergent expansion in powers of `x^{-β}`: the survival function of
    /// `S_1`, or its density when `density` is set.
    fn far_tail_series(&self, x: f64, density: bool) -> f64 {
        let b = self.beta;
        let y = x.powf(-b);
        let mut sum = 0.0;
        let mut yk = 1.0;
        let mut kfact = 1.0;
        for k in 1..80 {
            let kf = k as f64;
            yk *= y;
            kfact *= kf;
            let g = if density { gamma(kf * b + 1.0) / x } else { gamma(kf * b) };
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            let bound = g / kfact * yk;
            sum += sign * bound * (PI * kf * b).sin();
            // the sine can vanish for single terms, so stop on the bound
            if bound <= 1e-17 * sum.abs() {
                break;
            }
        }
        sum / PI
    }

    /// `E[S_t^{-p}; S_t ≤ r]` by quadrature against the density.
    pub fn truncated_moment(&self, t: f64, r: f64, p: f64) -> Result<f64> {
        self.require_stable("truncated_moment")?;
        check_pos("r", r)?;
        let mode = t.powf(1.0 / self.beta);
        Ok(integrate_log_rule(
            |s| s.powf(-p) * self.density(t, s).unwrap_or(f64::NAN),
            0.0,
            r,
            &[mode, 0.1 * mode],
            &QuadratureConfig::default(),
            Rule::Gk21,
        )?
        .value)
    }

    // ---- sampling -------------------------------------------------------

    /// One draw of `S_t`.
    pub fn sample<R: Rng + ?Sized>(&self, t: f64, rng: &mut R) -> Result<f64> {
        check_pos("t", t)?;
        match self.kind {
            SubordinatorKind::Stable => {
                let u = PI * (1.0 - rng.random::<f64>());
                let e: f64 = Exp1.sample(rng);
                Ok(self.angular_draw(t, u, e))
            }
            SubordinatorKind::TruncatedStable { .. } => Ok(self.shot_noise(t, DEFAULT_SMALL_JUMP, rng)),
        }
    }

    /// Two draws of `S_t`; for stable laws they share the exponential variate
    /// and use the reflected angle `π − U`.
    pub fn sample_antithetic<R: Rng + ?Sized>(&self, t: f64, rng: &mut R) -> Result<(f64, f64)> {
        check_pos("t", t)?;
        match self.kind {
            SubordinatorKind::Stable => {
                let u = PI * (1.0 - rng.random::<f64>());
                let e: f64 = Exp1.sample(rng);
                Ok((self.angular_draw(t, u, e), self.angular_draw(t, PI - u, e)))
            }
            SubordinatorKind::TruncatedStable { .. } => Ok((
                self.shot_noise(t, DEFAULT_SMALL_JUMP, rng),
                self.shot_noise(t, DEFAULT_SMALL_JUMP, rng),
            )),
        }
    }

    pub fn sample_seeded(&self, t: f64, seed: u64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample(t, &mut rng)
    }

    fn angular_draw(&self, t: f64, u: f64, e: f64) -> f64 {
        let u = u.clamp(f64::MIN_POSITIVE, PI);
        let a = self.angular_a(u, PI - u);
        (a / e).powf((1.0 - self.beta) / self.beta) * t.powf(1.0 / self.beta)
    }

    /// Jumps `w⁻¹(Γ_i/t)` down to `eps`, plus the mean of the jumps below.
    pub fn shot_noise<R: Rng + ?Sized>(&self, t: f64, eps: f64, rng: &mut R) -> f64 {
        let mut gamma_i = 0.0;
        let mut total = 0.0;
        loop {
            let e: f64 = Exp1.sample(rng);
            gamma_i += e;
            let jump = self.w_inverse(gamma_i / t);
            if jump < eps {
                break;
            }
            total += jump;
        }
        total + t * self.small_jump_mean(eps)
    }

    /// `∫_0^eps s ν(ds)` for `eps` below the crossover.
    fn small_jump_mean(&self, eps: f64) -> f64 {
        let b = self.beta;
        match self.kind {
            SubordinatorKind::Stable => b / ((1.0 - b) * gamma(1.0 - b)) * eps.powf(1.0 - b),
            SubordinatorKind::TruncatedStable { .. } => b / (1.0 - b) * eps.powf(1.0 - b),
        }
    }

    // ---- tail estimates -----------------------------------------------

    /// `(c_lower·e^{−c_exp·tHσ}, e·e^{−tHσ})`.
    pub fn left_tail_bounds(&self, t: f64, s: f64, params: &TailBoundParams) -> Result<(f64, f64)> {
        let x = self.t_h_sigma(t, s)?;
        Ok((params.c_lower * (-params.c_exp * x).exp(), E * (-x).exp()))
    }

    /// `t·w(s)`, valid for `s ≥ 2φ⁻¹(1/t)⁻¹` (and below half the crossover).
    pub fn right_tail_estimate(&self, t: f64, s: f64) -> Result<f64> {
        check_pos("s", s)?;
        let lo = 2.0 * self.time_scale(t)?;
        if s < lo * (1.0 - 1e-12) {
            return range(format!("s={s:e} is below 2/phi^-1(1/t)={lo:e}"));
        }
        if let SubordinatorKind::TruncatedStable { crossover, .. } = self.kind {
            if s >= crossover / 2.0 {
                return range(format!("s={s:e} is not below half the crossover {crossover:e}"));
            }
        }
        Ok(t * self.w(s))
    }

    /// `P(ε·τ ≤ S_t ≤ τ)` with `τ = φ⁻¹(1/t)⁻¹`.
    pub fn mode_interval_probability(&self, t: f64, eps: f64) -> Result<f64> {
        self.require_stable("mode_interval_probability")?;
        if !(eps > 0.0 && eps < 1.0) {
            return domain(format!("eps must lie in (0,1), got {eps}"));
        }
        let tau = self.time_scale(t)?;
        Ok((self.cdf(t, tau)? - self.cdf(t, eps * tau)?).max(0.0))
    }

    /// `r^{-p}·exp(−(t/2)·H(σ(t,r)))` for `0 < r ≤ φ⁻¹(1/t)⁻¹`.
    pub fn truncated_moment_bound(&self, t: f64, r: f64, p: f64) -> Result<f64> {
        check_pos("r", r)?;
        check_pos("p", p)?;
        let tau = self.time_scale(t)?;
        if r > tau * (1.0 + 1e-12) {
            return range(format!("r={r:e} exceeds phi^-1(1/t)^-1={tau:e}"));
        }
        Ok(r.powf(-p) * (-0.5 * self.t_h_sigma(t, r)?).exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angular_cdf_matches_closed_form_at_one_half() {
        // force the general path by nudging beta off 1/2 is not exact, so
        // compare the integral directly at beta = 1/2
        let s = SubordinatorSpec::stable(0.5).unwrap();
        for &x in &[1e-3, 0.05, 0.3, 1.0, 7.0, 300.0, 1e5] {
            let exact = erfc(1.0 / (2.0 * f64::sqrt(x)));
            let got = s.ln_cdf_unit(x).unwrap().exp();
            assert!((got / exact - 1.0).abs() < 1e-9, "x={x}: {got} vs {exact}");
            let d = s.unit_density(x).unwrap();
            let de = 1.0 / (2.0 * PI.sqrt()) * x.powf(-1.5) * (-1.0 / (4.0 * x)).exp();
            assert!((d / de - 1.0).abs() < 1e-9, "density x={x}");
        }
    }
}
