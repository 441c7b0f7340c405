use crate::error::{Error, Result};
use crate::geometry::{pow0, Dist, PairDistances};
use crate::quad::integrate_log;
use crate::subordinator::SubordinatorKind;

use super::{log_e, phi_ratio, EnvelopeValue, FarGreenCase, GreenRegime, Regime, Setting, CASE_TOL, ENVELOPE_QUAD};

impl Setting {
    /// `1/φ(1/s)`.
    fn inv_phi_recip(&self, s: f64) -> Result<f64> {
        Ok(1.0 / self.sub.phi(1.0 / s)?)
    }

    /// Upper limit of the far integral: `2Φ(diam)`, infinite when unbounded.
    fn far_limit(&self) -> f64 {
        2.0 * self.phi_dist(self.geom.diam())
    }

    /// Growth exponent of `s^{-1}/φ(1/s)` at large `s`.
    fn large_scale_index(&self) -> f64 {
        match self.sub.kind() {
            SubordinatorKind::Stable => self.sub.beta(),
            SubordinatorKind::TruncatedStable { ell, .. } => ell.min(1.0),
        }
    }

    /// Whether the far integral diverges: on unbounded domains the integrand
    /// decays like `s^{β−1−d/α−γ}` with `γ` counting finite boundary
    /// distances only.
    pub fn green_diverges(&self, pd: &PairDistances) -> bool {
        if self.geom.is_bounded() {
            return false;
        }
        let mut gamma = 0.0;
        if !pd.dx.is_infinite() {
            gamma += self.bfn.p;
        }
        if !pd.dy.is_infinite() {
            gamma += self.bfn.q;
        }
        let d = self.geom.dim as f64;
        self.large_scale_index() - d / self.geom.alpha - gamma >= -1e-12
    }

    /// `∫_{Φ(ρ)}^{2Φ(diam)} h(s)/(s V(Φ⁻¹(s)) φ(1/s)) ds`, `+∞` when the
    /// integral diverges.
    pub fn far_green_quadrature(&self, pd: &PairDistances) -> Result<f64> {
        Self::require_separated(pd)?;
        if self.green_diverges(pd) {
            return Ok(f64::INFINITY);
        }
        let g = &self.geom;
        let f = |s: f64| {
            self.h(s, pd) * self.inv_phi_recip(s).unwrap_or(f64::NAN) / (s * g.volume(g.big_phi_inverse(s)))
        };
        Ok(integrate_log(f, g.big_phi(pd.rho), self.far_limit(), &self.kinks(pd), &ENVELOPE_QUAD)?.value)
    }

    /// Near part `∫_0^{Φ(ρ)} h(s)/φ(1/s) ds`.
    fn near_green_integral(&self, pd: &PairDistances) -> Result<f64> {
        let f = |s: f64| self.h(s, pd) * self.inv_phi_recip(s).unwrap_or(f64::NAN);
        Ok(integrate_log(f, 0.0, self.geom.big_phi(pd.rho), &self.kinks(pd), &ENVELOPE_QUAD)?.value)
    }

    /// `C₀/(V(ρ)Ψ(ρ)) ∫_0^{Φ(ρ)} h/φ(1/s) ds + G̃`.
    pub fn green_integral_envelope(&self, pd: &PairDistances) -> Result<EnvelopeValue> {
        Self::require_separated(pd)?;
        let far = self.far_green_quadrature(pd)?;
        if far.is_infinite() {
            return Ok(EnvelopeValue::divergent());
        }
        let near = if self.geom.c0 == 0 {
            0.0
        } else {
            let r = pd.rho;
            self.near_green_integral(pd)? / (self.geom.volume(r) * self.geom.big_psi(r))
        };
        Ok(EnvelopeValue::new(near + far, Regime::GreenIntegral))
    }

    /// `ψ(r)/V(r)` for a possibly infinite radius, where it is `0` or `∞`
    /// according to the sign of `αβ − d`.
    fn psi_over_volume(&self, r: Dist) -> Result<f64> {
        match r {
            Dist::Finite(v) => Ok(self.psi(v)? / self.geom.volume(v)),
            Dist::Infinite => {
                let d = self.geom.dim as f64;
                Ok(if self.geom.alpha * self.large_scale_index() > d { f64::INFINITY } else { 0.0 })
            }
        }
    }

    /// The interior Green factor `g₀`.
    pub fn g0(&self, pd: &PairDistances) -> Result<f64> {
        Self::require_separated(pd)?;
        let (b1, b2) = self.scaling_indices();
        let a = self.geom.alpha;
        let d = self.geom.dim as f64;
        let r = pd.rho;
        if d > a * b2.min(1.0) + CASE_TOL {
            self.psi_over_volume(Dist::Finite(r))
        } else if (b1 - b2).abs() <= CASE_TOL && (d - a * b1).abs() <= CASE_TOL {
            Ok(log_e(pd.dmax().value() / r))
        } else if d < a * b1 - CASE_TOL {
            self.psi_over_volume(pd.dmax().max_f(r))
        } else {
            Err(Error::Dispatch(format!(
                "g0: none of d > α(β₂∧1) = {}, d = αβ, d < αβ₁ = {} holds for d = {d}",
                a * b2.min(1.0),
                a * b1
            )))
        }
    }

    /// `[h](x,y) = h(Φ(ρ∧δ∨)) (1 ∧ Φ(δ∨)ψ(δ∨)/(Φ(ρ)ψ(ρ)))`.
    pub fn bracket(&self, pd: &PairDistances) -> Result<f64> {
        Self::require_separated(pd)?;
        let r = pd.rho;
        let dv = pd.dmax();
        let h = self.h(self.geom.big_phi(dv.min_f(r)), pd);
        let cap = match dv {
            Dist::Infinite => 1.0,
            Dist::Finite(v) => {
                let num = self.geom.big_phi(v) * self.psi(v)?;
                (num / (self.geom.big_phi(r) * self.psi(r)?)).min(1.0)
            }
        };
        Ok(h * cap)
    }

    /// The four-factor product form of the bracket for `h_{p,q}`.
    pub fn bracket_product(&self, pd: &PairDistances) -> Result<f64> {
        Self::require_separated(pd)?;
        let r = pd.rho;
        let (p, q) = (self.bfn.p, self.bfn.q);
        let dv = pd.dmax();
        Ok(pow0(self.phi_cap(pd.dx, r), p)
            * pow0(self.phi_cap(pd.dy, r), q)
            * pow0(self.phi_cap(dv, r), 1.0 - p - q)
            * self.psi_cap(dv, r)?)
    }

    /// Closed forms of the far part `G̃`.
    pub fn g_tilde_cases(&self, pd: &PairDistances) -> Result<EnvelopeValue> {
        Self::require_separated(pd)?;
        let (b1, b2) = self.scaling_indices();
        let a = self.geom.alpha;
        let d = self.geom.dim as f64;
        let gamma = self.gamma_eff();
        let r = pd.rho;
        let h_r = self.h(self.geom.big_phi(r), pd);
        let bounded = self.geom.is_bounded();
        let same = (b1 - b2).abs() <= CASE_TOL;
        let tag = |c| Regime::FarGreen(c);
        let finite = |v: f64, c| {
            if v.is_finite() {
                EnvelopeValue::new(v, tag(c))
            } else {
                EnvelopeValue::divergent()
            }
        };
        if d < a * (b1 - gamma) - CASE_TOL {
            return Ok(if bounded { finite(self.h(1.0, pd), FarGreenCase::II) } else { EnvelopeValue::divergent() });
        }
        if same && (d - a * (b1 - gamma)).abs() <= CASE_TOL && gamma > 0.0 {
            if !bounded {
                return Ok(EnvelopeValue::divergent());
            }
            let diam = self.geom.diam().value();
            let v = self.h(1.0, pd) * log_e(diam / pd.dmax().max_f(r).value());
            return Ok(finite(v, FarGreenCase::V));
        }
        if same && (d - a * b1).abs() <= CASE_TOL {
            return Ok(finite(h_r * log_e(pd.dmax().value() / r), FarGreenCase::IV));
        }
        if d > a * b2.min(1.0) + CASE_TOL {
            return Ok(finite(h_r * self.psi_over_volume(Dist::Finite(r))?, FarGreenCase::I));
        }
        if d < a * b1 - CASE_TOL && d > a * (b2.min(1.0) - gamma) + CASE_TOL {
            return Ok(finite(h_r * self.psi_over_volume(pd.dmax().max_f(r))?, FarGreenCase::III));
        }
        Err(Error::Dispatch(format!(
            "far Green part: checked d < α(β₁−γ) = {}, d = α(β−γ), d = αβ = {}, d > α(β₂∧1) = {}, \
             α((β₂∧1)−γ) < d < αβ₁; none holds for d = {d}",
            a * (b1 - gamma),
            a * b1,
            a * b2.min(1.0)
        )))
    }

    /// Closed-form Green envelope with its regime.
    pub fn green_closed(&self, pd: &PairDistances) -> Result<EnvelopeValue> {
        Self::require_separated(pd)?;
        let (b1, b2) = self.scaling_indices();
        let a = self.geom.alpha;
        let d = self.geom.dim as f64;
        let gamma = self.gamma_eff();
        let r = pd.rho;
        let g = &self.geom;
        let big = g.big_phi(r);
        let h_r = self.h(big, pd);
        let bounded = g.is_bounded();
        let wrap = |v: f64, reg| {
            if v.is_finite() {
                EnvelopeValue::new(v, Regime::Green(reg))
            } else {
                EnvelopeValue::divergent()
            }
        };
        let interior_regime = || {
            if (d - a * b1).abs() <= CASE_TOL && (b1 - b2).abs() <= CASE_TOL {
                GreenRegime::AtIndex
            } else if d > a * b1 {
                GreenRegime::AboveIndex
            } else {
                GreenRegime::BelowIndex
            }
        };
        let q_max = self.bfn.p.max(self.bfn.q);
        if g.c0 == 0 || gamma < b1 + 1.0 - CASE_TOL {
            let edge = a * (b1 - gamma);
            if d > edge + CASE_TOL {
                return Ok(wrap(h_r * self.g0(pd)?, interior_regime()));
            }
            if !bounded {
                return Ok(EnvelopeValue::divergent());
            }
            let h1 = self.h(1.0, pd);
            if (d - edge).abs() <= CASE_TOL {
                let diam = g.diam().value();
                return Ok(wrap(h1 * log_e(diam / pd.dmax().max_f(r).value()), GreenRegime::BoundaryLog));
            }
            return Ok(wrap(h1, GreenRegime::Constant));
        }
        if q_max >= b1 + 1.0 - CASE_TOL {
            return Err(Error::Dispatch(format!(
                "jump part with γ = {gamma} >= β+1 needs p ∨ q < β+1 = {}",
                b1 + 1.0
            )));
        }
        let jump_shape = big / g.big_psi(r) / g.volume(r);
        if (gamma - (b1 + 1.0)).abs() <= CASE_TOL {
            if (b1 - b2).abs() > CASE_TOL {
                return Err(Error::Dispatch("γ = β+1 needs equal scaling indices".into()));
            }
            let log = log_e(phi_ratio(g, big, pd.dmax()));
            let v = h_r * (jump_shape * big.powf(gamma - 1.0) * log + self.g0(pd)?);
            return Ok(wrap(v, GreenRegime::AnomalousLog));
        }
        if gamma > b2.min(1.0) + 1.0 + CASE_TOL {
            let v = self.bracket(pd)? * jump_shape * self.psi(r)? + h_r * self.g0(pd)?;
            return Ok(wrap(v, GreenRegime::AnomalousPower));
        }
        Err(Error::Dispatch(format!(
            "jump part: checked γ < β₁+1, γ = β+1, γ > (β₂∧1)+1; none holds for γ = {gamma}"
        )))
    }

    /// Green envelope in distance powers: `𝔤` and its boundary variants.
    pub fn green_explicit(&self, pd: &PairDistances) -> Result<EnvelopeValue> {
        Self::require_separated(pd)?;
        if !self.sub.is_stable() {
            return Err(Error::Unsupported("the power-form Green envelope needs a stable subordinator".into()));
        }
        let a = self.geom.alpha;
        let beta = self.sub.beta();
        let d = self.geom.dim as f64;
        let (p, q) = (self.bfn.p, self.bfn.q);
        let gamma = self.gamma_eff();
        let r = pd.rho;
        let lead = pow0(pd.dx.capped_ratio(r), a * p) * pow0(pd.dy.capped_ratio(r), a * q);
        let interior = if (d - a * beta).abs() <= CASE_TOL {
            (log_e(pd.dmax().value() / r), GreenRegime::AtIndex)
        } else if d > a * beta {
            (r.powf(a * beta - d), GreenRegime::AboveIndex)
        } else {
            (pd.dmax().max_f(r).value().powf(a * beta - d), GreenRegime::BelowIndex)
        };
        let frak = lead * interior.0;
        let wrap = |v: f64, reg| {
            if v.is_finite() && v > 0.0 {
                EnvelopeValue::new(v, Regime::Green(reg))
            } else {
                EnvelopeValue::divergent()
            }
        };
        if self.geom.c0 == 0 || gamma < beta + 1.0 - CASE_TOL {
            let edge = a * (beta - gamma);
            if d > edge + CASE_TOL {
                return Ok(wrap(frak, interior.1));
            }
            if !self.geom.is_bounded() {
                return Ok(EnvelopeValue::divergent());
            }
            let corner = pow0(pd.dx.value(), a * p) * pow0(pd.dy.value(), a * q);
            if (d - edge).abs() <= CASE_TOL {
                let diam = self.geom.diam().value();
                return Ok(wrap(corner * log_e(diam / pd.dmax().max_f(r).value()), GreenRegime::BoundaryLog));
            }
            return Ok(wrap(corner, GreenRegime::Constant));
        }
        if q.max(p) >= beta + 1.0 - CASE_TOL {
            return Err(Error::Dispatch(format!("needs p ∨ q < β+1 = {}", beta + 1.0)));
        }
        if (gamma - (beta + 1.0)).abs() <= CASE_TOL {
            return Ok(wrap(frak * log_e(r / pd.dmax().value()), GreenRegime::AnomalousLog));
        }
        let boost = pd.dmax().capped_ratio(r).powf(-a * (gamma - beta - 1.0));
        Ok(wrap(boost * frak, GreenRegime::AnomalousPower))
    }
}
