use serde::{Deserialize, Serialize};

use crate::error::{range, Result};
use crate::geometry::PairDistances;

use super::{EnvelopeValue, Regime, Setting, CASE_TOL};

/// Which heat-kernel estimate to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HkForm {
    /// On- or off-diagonal form chosen by comparing `t` with `ψ(ρ)`.
    SmallTime,
    OnDiag,
    OffGeneral,
    OffSimple,
    RoughUpper,
    LargeTime,
    ExplicitStable,
    MixedRegime,
}

/// The four addends of the general off-diagonal form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OffDiagonalTerms {
    /// Boundary-integral term `C₀ t 𝖡_h/(VΨ)`.
    pub boundary_integral: f64,
    /// `C₀ τ h(τ)/(VΨ)` with `τ = φ⁻¹(1/t)⁻¹`.
    pub time_scale: f64,
    /// `h(τ)/V(ψ⁻¹t) · e^{−cρ²/ψ⁻¹(t)²}`.
    pub gaussian: f64,
    /// `t h(Φ(ρ)) w(Φ(ρ))/V(ρ)`.
    pub tail: f64,
}

impl OffDiagonalTerms {
    pub fn sum(&self) -> f64 {
        self.boundary_integral + self.time_scale + self.gaussian + self.tail
    }
}

impl Setting {
    pub fn sub_hk_envelope(&self, t: f64, pd: &PairDistances, form: HkForm, gauss_c: f64) -> Result<EnvelopeValue> {
        if !(t > 0.0) || !t.is_finite() {
            return range(format!("time must be positive, got {t}"));
        }
        if !(gauss_c > 0.0) {
            return range(format!("Gaussian constant must be positive, got {gauss_c}"));
        }
        match form {
            HkForm::SmallTime => {
                if self.is_on_diagonal(t, pd)? {
                    self.sub_hk_envelope(t, pd, HkForm::OnDiag, gauss_c)
                } else {
                    self.sub_hk_envelope(t, pd, HkForm::OffGeneral, gauss_c)
                }
            }
            HkForm::OnDiag => {
                if !self.is_on_diagonal(t, pd)? {
                    return range("on-diagonal form needs ψ(ρ) <= t");
                }
                let tau = self.sub.time_scale(t)?;
                let scale = self.geom.psi_inverse(&self.sub, t)?;
                Ok(EnvelopeValue::new(self.h(tau, pd) / self.geom.volume(scale), Regime::OnDiagonal))
            }
            HkForm::OffGeneral => {
                let terms = self.off_diagonal_terms(t, pd, gauss_c)?;
                Ok(EnvelopeValue::gaussian(terms.sum(), Regime::OffDiagonal, gauss_c))
            }
            HkForm::OffSimple => {
                self.require_off_diagonal(t, pd)?;
                if !self.psi_like_phi() {
                    return range("simplified off-diagonal form needs Ψ comparable to Φ");
                }
                let (_, upper) = self.scaling_indices();
                if upper >= 1.0 {
                    return range("simplified off-diagonal form needs an upper index below 1");
                }
                let r = pd.rho;
                let big = self.geom.big_phi(r);
                let v = if self.geom.c0 == 0 {
                    t * self.h(big, pd) / (self.geom.volume(r) * self.psi(r)?)
                } else {
                    t * self.b_h(t, pd)? / (self.geom.volume(r) * big)
                };
                Ok(EnvelopeValue::new(v, Regime::OffSimple))
            }
            HkForm::RoughUpper => {
                let tau = self.sub.time_scale(t)?;
                let on = 1.0 / self.geom.volume(self.geom.psi_inverse(&self.sub, t)?);
                let off = if pd.rho > 0.0 {
                    t / (self.geom.volume(pd.rho) * self.psi(pd.rho)?)
                } else {
                    f64::INFINITY
                };
                Ok(EnvelopeValue::new(self.h(tau, pd) * on.min(off), Regime::RoughUpper))
            }
            HkForm::LargeTime => {
                if !self.geom.is_bounded() {
                    return range("large-time form needs a bounded domain");
                }
                let lambda = self.bottom_eigenvalue.ok_or_else(|| {
                    crate::error::Error::Range("large-time form needs the bottom eigenvalue".into())
                })?;
                let v = (-t * self.sub.phi(lambda)?).exp() * self.h(1.0, pd);
                Ok(EnvelopeValue::new(v, Regime::LargeTime))
            }
            HkForm::ExplicitStable => self.hk_explicit(t, pd),
            HkForm::MixedRegime => self.hk_mixed(t, pd, gauss_c),
        }
    }

    /// The four addends of the off-diagonal form, valid for `ψ(ρ) ≥ t`.
    pub fn off_diagonal_terms(&self, t: f64, pd: &PairDistances, gauss_c: f64) -> Result<OffDiagonalTerms> {
        self.require_off_diagonal(t, pd)?;
        let g = &self.geom;
        let r = pd.rho;
        let tau = self.sub.time_scale(t)?;
        let h_tau = self.h(tau, pd);
        let scale = g.psi_inverse(&self.sub, t)?;
        let jump_scale = g.volume(r) * g.big_psi(r);
        let c0 = g.c0 as f64;
        let boundary_integral = if g.c0 == 0 { 0.0 } else { c0 * t * self.b_h(t, pd)? / jump_scale };
        let big = g.big_phi(r);
        Ok(OffDiagonalTerms {
            boundary_integral,
            time_scale: c0 * tau * h_tau / jump_scale,
            gaussian: h_tau / g.volume(scale) * (-gauss_c * r * r / (scale * scale)).exp(),
            tail: t * self.h(big, pd) * self.w(big)? / g.volume(r),
        })
    }

    fn is_on_diagonal(&self, t: f64, pd: &PairDistances) -> Result<bool> {
        Ok(pd.rho == 0.0 || self.psi(pd.rho)? <= t)
    }

    fn require_off_diagonal(&self, t: f64, pd: &PairDistances) -> Result<()> {
        Self::require_separated(pd)?;
        let psi_r = self.psi(pd.rho)?;
        if psi_r < t * (1.0 - 1e-12) {
            return range(format!("off-diagonal form needs ψ(ρ) = {psi_r:e} >= t = {t:e}"));
        }
        Ok(())
    }

    /// `Ψ ≍ Φ` on the scales of the domain.
    fn psi_like_phi(&self) -> bool {
        (self.geom.kappa - self.geom.alpha).abs() <= CASE_TOL || self.geom.is_bounded()
    }
}
