//! Envelopes written directly in powers of distances for `Φ(r) = r^α`,
//! `ψ(r) ≍ r^{αβ}` and `V(r) ≍ r^d`.

use crate::error::{range, Error, Result};
use crate::geometry::{pow0, Dist, PairDistances};
use crate::subordinator::SubordinatorKind;

use super::{log_e, BoundaryCase, EnvelopeValue, Regime, Setting, CASE_TOL};

/// Which arrangement of the interior minimum to use in the power form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MinArrangement {
    /// `B·(t^{−d/αβ} ∧ t/ρ^{d+αβ})`.
    Outside,
    /// `t^{−d/αβ} ∧ tB/ρ^{d+αβ}`.
    Inside,
}

/// `δ ∨ s` capped against `r`, as `1 ∧ (δ∨s)/r`.
fn cap_reg(d: Dist, s: f64, r: f64) -> f64 {
    d.max_f(s).capped_ratio(r)
}

/// `(a ∧ r)/b` for possibly infinite `a`, `b`; zero when `b` is infinite.
fn min_ratio(a: Dist, r: f64, b: Dist) -> f64 {
    match b {
        Dist::Infinite => 0.0,
        Dist::Finite(bv) => a.min_f(r) / bv,
    }
}

impl Setting {
    /// `t^{1/(αβ)}`, the time regularization of the power form.
    fn power_scale(&self, t: f64) -> f64 {
        if t == 0.0 {
            0.0
        } else {
            t.powf(1.0 / (self.geom.alpha * self.sub.beta()))
        }
    }

    /// The boundary factor `B_{p,q}(t,x,y;C₀)` of the power form; `t = 0`
    /// gives the static factor of the jump kernel.
    pub fn b_pq_explicit(&self, t: f64, pd: &PairDistances) -> Result<EnvelopeValue> {
        Self::require_separated(pd)?;
        if !(t >= 0.0) {
            return range(format!("time must be nonnegative, got {t}"));
        }
        let (p, q) = (self.bfn.p, self.bfn.q);
        let a = self.geom.alpha;
        let beta = self.sub.beta();
        let s = self.power_scale(t);
        let r = pd.rho;
        let (dx, dy) = (pd.dx.max_f(s), pd.dy.max_f(s));
        let (dmin, dmax) = (dx.min(dy), dx.max(dy));
        let c = |d: Dist| d.capped_ratio(r);
        let product = pow0(c(dmin), a * p) * pow0(c(dmax), a * p) * pow0(c(dy), a * (q - p));
        if self.geom.c0 == 0 {
            if p > q + CASE_TOL {
                return Err(Error::Dispatch(format!("p={p} > q={q}: swap x and y")));
            }
            return Ok(EnvelopeValue::new(product, Regime::Product));
        }
        let case = BoundaryCase::select(p, q, beta)?;
        let e = 1.0 - beta;
        let v = match case {
            BoundaryCase::IV => pow0(c(dmin), a * e),
            BoundaryCase::IX => pow0(c(dmin), a * e) * log_e(min_ratio(dy, r, dx)),
            BoundaryCase::III => pow0(c(dmin), a * p) * pow0(c(dy), a * (e - p)),
            BoundaryCase::VII => pow0(c(dmin), a * e) * log_e(min_ratio(dmax, r, dmin)),
            BoundaryCase::VIII => {
                pow0(c(dmin), a * p) * pow0(c(dy), a * (e - p)) * log_e(min_ratio(dx, r, dy))
            }
            BoundaryCase::II => {
                pow0(c(dmin), a * p) * pow0(c(dmax), a * (e - q)) * pow0(c(dy), a * (q - p))
            }
            BoundaryCase::V => product * log_e(min_ratio(Dist::Finite(r), r, dmax)),
            BoundaryCase::VI => pow0(c(dy), a * q) * log_e(min_ratio(Dist::Finite(r), r, dy)),
            BoundaryCase::I => product,
        };
        Ok(EnvelopeValue::new(v, Regime::Case(case)))
    }

    /// The symmetric boundary factor `B^{α,β}` for `p = q = 1/2`; `α < 2`
    /// splits on `β` against `1/2`.
    pub fn b_alpha_beta(&self, t: f64, pd: &PairDistances) -> Result<EnvelopeValue> {
        Self::require_separated(pd)?;
        let a = self.geom.alpha;
        let beta = self.sub.beta();
        let r = pd.rho;
        let s = self.power_scale(t);
        if (a - 2.0).abs() <= CASE_TOL {
            let v = cap_reg(pd.dx, s, r) * cap_reg(pd.dy, s, r);
            return Ok(EnvelopeValue::new(v, Regime::Product));
        }
        if a > 2.0 {
            return Err(Error::Dispatch(format!("α={a} above 2 has no symmetric boundary factor")));
        }
        let lo = cap_reg(pd.dmin(), s, r);
        let hi = cap_reg(pd.dmax(), s, r);
        let (v, case) = if (beta - 0.5).abs() <= CASE_TOL {
            let num = pd.dmax().max_f(s).min_f(r);
            let den = pd.dmin().max_f(s).min_f(r);
            (lo.powf(a / 2.0) * log_e(num / den), BoundaryCase::VII)
        } else if beta > 0.5 {
            (lo.powf(a - a * beta), BoundaryCase::IV)
        } else {
            (lo.powf(a / 2.0) * hi.powf(a / 2.0 - a * beta), BoundaryCase::II)
        };
        Ok(EnvelopeValue::new(v, Regime::Case(case)))
    }

    /// Heat-kernel envelope with the symmetric boundary factor and
    /// `p = q = 1/2` boundary decay, in either arrangement of the minimum.
    pub fn hk_symmetric_power(&self, t: f64, pd: &PairDistances, arrangement: MinArrangement) -> Result<EnvelopeValue> {
        if !(t > 0.0) {
            return range(format!("time must be positive, got {t}"));
        }
        let a = self.geom.alpha;
        let s = self.power_scale(t);
        let lead = pd.dx.capped_ratio(s).powf(a / 2.0) * pd.dy.capped_ratio(s).powf(a / 2.0);
        let d = self.geom.dim as f64;
        let ab = a * self.sub.beta();
        let near = t.powf(-d / ab);
        let (b, far) = if pd.rho > 0.0 {
            (self.b_alpha_beta(t, pd)?, t / pd.rho.powf(d + ab))
        } else {
            (EnvelopeValue::new(1.0, Regime::Interior), f64::INFINITY)
        };
        let (v, regime) = match arrangement {
            MinArrangement::Outside => (
                lead * b.value * near.min(far),
                if near <= far { Regime::ExplicitNear } else { Regime::ExplicitFar },
            ),
            MinArrangement::Inside => {
                let farb = far * b.value;
                (
                    lead * near.min(farb),
                    if near <= farb { Regime::ExplicitNear } else { Regime::ExplicitFar },
                )
            }
        };
        Ok(EnvelopeValue::new(v, regime))
    }

    /// Small-time power form with general `h_{p,q}`:
    /// `(1∧δx/t^{1/αβ})^{αp}(1∧δy/t^{1/αβ})^{αq} B_{p,q}(t;C₀)(t^{−d/αβ} ∧ t/ρ^{d+αβ})`.
    pub(super) fn hk_explicit(&self, t: f64, pd: &PairDistances) -> Result<EnvelopeValue> {
        if !(t > 0.0) {
            return range(format!("time must be positive, got {t}"));
        }
        if let (true, true) = (t > 1.0 + 1e-12, self.geom.is_bounded()) {
            return range(format!("the power form on a bounded domain needs t <= 1, got {t}"));
        }
        let a = self.geom.alpha;
        let s = self.power_scale(t);
        let lead = pow0(pd.dx.capped_ratio(s), a * self.bfn.p) * pow0(pd.dy.capped_ratio(s), a * self.bfn.q);
        let d = self.geom.dim as f64;
        let ab = a * self.sub.beta();
        let near = t.powf(-d / ab);
        if pd.rho == 0.0 {
            return Ok(EnvelopeValue::new(lead * near, Regime::ExplicitNear));
        }
        let far = t / pd.rho.powf(d + ab);
        let b = self.b_pq_explicit(t, pd)?;
        let regime = if near <= far { Regime::ExplicitNear } else { Regime::ExplicitFar };
        Ok(EnvelopeValue::new(lead * b.value * near.min(far), regime))
    }

    /// `F_β`, the boundary factor of the jump part in the mixed regime.
    pub fn f_beta(&self, t: f64, pd: &PairDistances) -> f64 {
        let a = self.geom.alpha;
        let beta = self.sub.beta();
        let s = self.power_scale(t);
        let lo = pd.dmin().max_f(s).min_f(1.0);
        let hi = pd.dmax().max_f(s).min_f(1.0);
        if (beta - 0.5).abs() <= CASE_TOL {
            lo.powf(a / 2.0) * log_e(hi / lo)
        } else if beta < 0.5 {
            lo.powf(a / 2.0) * hi.powf(a / 2.0 - a * beta)
        } else {
            lo.powf(a - a * beta)
        }
    }

    /// Envelope for a Lévy tail that is `s^{−β}` at small and `s^{−ℓ}` at
    /// large scales, with `p = q = 1/2` on an unbounded domain. Small and
    /// large time split at `1/φ(4)`.
    pub(super) fn hk_mixed(&self, t: f64, pd: &PairDistances, gauss_c: f64) -> Result<EnvelopeValue> {
        let ell = match self.sub.kind() {
            SubordinatorKind::TruncatedStable { ell, .. } => ell,
            SubordinatorKind::Stable => {
                return range("the mixed regime needs a truncated-stable subordinator");
            }
        };
        if self.geom.is_bounded() {
            return range("the mixed regime needs an unbounded domain");
        }
        if (self.bfn.p - 0.5).abs() > CASE_TOL || (self.bfn.q - 0.5).abs() > CASE_TOL {
            return range("the mixed regime is stated for p = q = 1/2");
        }
        if !(t > 0.0) {
            return range(format!("time must be positive, got {t}"));
        }
        let g = &self.geom;
        let a = g.alpha;
        let beta = self.sub.beta();
        let r = pd.rho;
        let c0 = g.c0 as f64;
        let phi4 = self.sub.phi(4.0)?;
        if t <= 1.0 / phi4 {
            let s = self.power_scale(t);
            let lead = pd.dx.capped_ratio(s).powf(a / 2.0) * pd.dy.capped_ratio(s).powf(a / 2.0);
            if r <= phi4.powf(-1.0 / (a * beta)) {
                let near = 1.0 / g.volume(s);
                if r == 0.0 {
                    return Ok(EnvelopeValue::new(lead * near, Regime::MixedNear));
                }
                let b = self.b_pq_explicit(t, pd)?.value;
                let far = t / (g.volume(r) * r.powf(a * beta));
                return Ok(EnvelopeValue::new(lead * b * near.min(far), Regime::MixedNear));
            }
            let boundary = cap_reg(pd.dmin(), s, r).powf(a / 2.0) * cap_reg(pd.dmax(), s, r).powf(a / 2.0);
            let v = boundary * t / (g.volume(r) * r.powf(a * ell))
                + c0 * t * self.f_beta(t, pd) / (g.volume(r) * r.powf(g.kappa));
            return Ok(EnvelopeValue::new(lead * v, Regime::MixedFar));
        }
        let s = t.powf(1.0 / a);
        let lead = pd.dx.capped_ratio(s).powf(a / 2.0) * pd.dy.capped_ratio(s).powf(a / 2.0);
        if r < s {
            return Ok(EnvelopeValue::new(lead / g.volume(s), Regime::MixedLargeOn));
        }
        let jump = c0 * t / (g.volume(r) * r.powf(g.kappa));
        let gauss = (-gauss_c * r * r / (s * s)).exp() / g.volume(s);
        let tail = cap_reg(pd.dx, s, r).powf(a / 2.0) * cap_reg(pd.dy, s, r).powf(a / 2.0) * t
            / (g.volume(r) * r.powf(a * ell));
        Ok(EnvelopeValue::gaussian(lead * (jump + gauss + tail), Regime::MixedLargeOff, gauss_c))
    }
}
