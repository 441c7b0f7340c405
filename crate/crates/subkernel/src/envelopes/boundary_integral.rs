use crate::error::{range, Error, Result};
use crate::geometry::{pow0, PairDistances};
use crate::quad::integrate_log;
use crate::subordinator::SubordinatorKind;

use super::{log_e, phi_ratio, BoundaryCase, EnvelopeValue, Regime, Setting, ENVELOPE_QUAD};

impl Setting {
    /// `∫ h(s,x,y) w(s) ds` over `[2φ⁻¹(1/t)⁻¹, 4Φ(ρ)]`; `t = 0` starts the
    /// range at 0.
    pub fn b_h(&self, t: f64, pd: &PairDistances) -> Result<f64> {
        Self::require_separated(pd)?;
        let top = self.geom.big_phi(pd.rho);
        let lower = if t == 0.0 {
            0.0
        } else {
            let tau = self.sub.time_scale(t)?;
            if tau > top * (1.0 + 1e-12) {
                return range(format!(
                    "time scale {tau:e} exceeds Φ(ρ) = {top:e}: the boundary integral needs ψ(ρ) ≥ t"
                ));
            }
            2.0 * tau
        };
        self.integrate_hw(lower, 4.0 * top, pd)
    }

    /// `∫_0^{Φ(ρ)} h(s,x,y) w(s) ds`.
    pub fn b_h_star(&self, pd: &PairDistances) -> Result<f64> {
        Self::require_separated(pd)?;
        self.integrate_hw(0.0, self.geom.big_phi(pd.rho), pd)
    }

    fn integrate_hw(&self, a: f64, b: f64, pd: &PairDistances) -> Result<f64> {
        if !(b > a) {
            return range(format!("empty integration range [{a:e}, {b:e}]"));
        }
        let f = |s: f64| self.h(s, pd) * self.w(s).unwrap_or(f64::NAN);
        Ok(integrate_log(f, a, b, &self.kinks(pd), &ENVELOPE_QUAD)?.value)
    }

    /// Quadrature side of the factorization: `ψ(ρ)/Φ(ρ) · 𝖡_h / h(φ⁻¹(1/t)⁻¹)`.
    pub fn a_pq_quadrature(&self, t: f64, pd: &PairDistances) -> Result<f64> {
        let b = self.b_h(t, pd)?;
        let tau = self.sub.time_scale(t)?;
        let r = pd.rho;
        Ok(self.psi(r)? / self.geom.big_phi(r) * b / self.h(tau, pd))
    }

    fn check_factorization(&self, t: f64, pd: &PairDistances) -> Result<BoundaryCase> {
        Self::require_separated(pd)?;
        let (p, q) = (self.bfn.p, self.bfn.q);
        if !(p + q > 0.0) {
            return Err(Error::Dispatch("factorization needs p + q > 0".into()));
        }
        let case = BoundaryCase::select(p, q, self.sub.beta())?;
        if !(t > 0.0) {
            return range(format!("time must be positive, got {t}"));
        }
        let psi_r = self.psi(pd.rho)?;
        if t > psi_r * (1.0 + 1e-12) {
            return range(format!("t = {t:e} exceeds ψ(ρ) = {psi_r:e}"));
        }
        if let SubordinatorKind::TruncatedStable { crossover, .. } = self.sub.kind() {
            if 8.0 * self.geom.big_phi(pd.rho) >= crossover {
                return range(format!(
                    "Φ(ρ) must stay below crossover/8 = {:e} for a single scaling index",
                    crossover / 8.0
                ));
            }
        }
        Ok(case)
    }

    /// Closed form of `ψ(ρ)/Φ(ρ) · 𝖡_h / h(φ⁻¹(1/t)⁻¹)` for `h = h_{p,q}`,
    /// dispatched over the nine cases.
    pub fn a_pq_closed(&self, t: f64, pd: &PairDistances) -> Result<EnvelopeValue> {
        let case = self.check_factorization(t, pd)?;
        if let crate::geometry::Dist::Finite(dv) = pd.dmax() {
            if dv >= 2.0 * pd.rho {
                return Ok(EnvelopeValue::new(1.0, Regime::Interior));
            }
        } else {
            return Ok(EnvelopeValue::new(1.0, Regime::Interior));
        }
        let (p, q) = (self.bfn.p, self.bfn.q);
        let r = pd.rho;
        let big = self.geom.big_phi(r);
        let tr = self.geom.time_regularized(&self.sub, t, pd)?;
        let cap = |d| self.phi_cap(d, r);
        let (ry, rmin, rmax) = (cap(tr.dy), cap(tr.min), cap(tr.max));
        let base_i = pow0(ry, q - p) * pow0(rmin, p) * pow0(rmax, p);
        let g = &self.geom;
        let v = match case {
            BoundaryCase::I => base_i,
            BoundaryCase::II => {
                pow0(ry, q - p) * pow0(rmin, p) * pow0(rmax, 1.0 - q) / self.psi_cap(tr.max, r)?
            }
            BoundaryCase::III => pow0(ry, 1.0 - p) * pow0(rmin, p) / self.psi_cap(tr.dy, r)?,
            BoundaryCase::IV => rmin / self.psi_cap(tr.min, r)?,
            BoundaryCase::V => base_i * log_e(phi_ratio(g, big, tr.max)),
            BoundaryCase::VI => pow0(ry, q) * log_e(phi_ratio(g, big, tr.dy)),
            BoundaryCase::VII => {
                pow0(rmin, p) * log_e(phi_ratio(g, big.min(self.phi_dist(tr.max)), tr.min))
            }
            BoundaryCase::VIII => {
                pow0(ry, q - p)
                    * pow0(rmin, p)
                    * log_e(phi_ratio(g, big.min(self.phi_dist(tr.dx)), tr.dy))
            }
            BoundaryCase::IX => {
                pow0(rmin, p) * log_e(phi_ratio(g, big.min(self.phi_dist(tr.dy)), tr.dx))
            }
        };
        Ok(EnvelopeValue::new(v, Regime::Case(case)))
    }
}
