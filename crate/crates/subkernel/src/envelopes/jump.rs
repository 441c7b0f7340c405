use crate::error::{range, Error, Result};
use crate::geometry::{Dist, Domain, PairDistances};
use crate::quad::integrate_log;

use super::{EnvelopeValue, Regime, Setting, ENVELOPE_QUAD};

impl Setting {
    /// `C₀ 𝖡*_h/(V(ρ)Ψ(ρ)) + h(Φ(ρ)) w(Φ(ρ))/V(ρ)`.
    pub fn jump_envelope(&self, pd: &PairDistances) -> Result<EnvelopeValue> {
        Self::require_separated(pd)?;
        let g = &self.geom;
        let r = pd.rho;
        let big = g.big_phi(r);
        let tail = self.h(big, pd) * self.w(big)? / g.volume(r);
        let jump = if g.c0 == 0 {
            0.0
        } else {
            self.b_h_star(pd)? / (g.volume(r) * g.big_psi(r))
        };
        Ok(EnvelopeValue::new(jump + tail, Regime::Jump))
    }

    /// `B_{p,q}(0,x,y;C₀)/ρ^{d+αβ}`.
    pub fn jump_explicit(&self, pd: &PairDistances) -> Result<EnvelopeValue> {
        let b = self.b_pq_explicit(0.0, pd)?;
        let d = self.geom.dim as f64;
        let v = b.value / pd.rho.powf(d + self.geom.alpha * self.sub.beta());
        Ok(EnvelopeValue::new(v, Regime::JumpExplicit))
    }

    /// Mass of the jump envelope outside the ball `B(x, r)`, for
    /// one-dimensional domains.
    pub fn tail_mass(&self, x: f64, r: f64) -> Result<f64> {
        if self.geom.dim != 1 {
            return Err(Error::Unsupported("tail mass is integrated on one-dimensional domains only".into()));
        }
        let dx = self.geom.delta(x)?;
        let inside = match dx {
            Dist::Infinite => true,
            Dist::Finite(d) => r < d,
        };
        if !(r > 0.0) || !inside {
            return range(format!("radius must lie in (0, δ(x)), got r={r}, δ(x)={dx:?}"));
        }
        let (lo, hi) = match self.geom.domain {
            Domain::FullLine => (f64::NEG_INFINITY, f64::INFINITY),
            Domain::HalfLine => (0.0, f64::INFINITY),
            Domain::Interval { length } => (0.0, length),
        };
        let side = |sign: f64, reach: f64| -> Result<f64> {
            if reach <= r {
                return Ok(0.0);
            }
            let f = |u: f64| {
                let y = x + sign * u;
                self.geom
                    .pair(x, y)
                    .and_then(|pd| self.jump_envelope(&pd))
                    .map(|e| e.value)
                    .unwrap_or(0.0)
            };
            let mut breaks = vec![2.0 * r];
            if reach.is_finite() {
                breaks.extend([reach / 2.0, reach - r.min(reach / 4.0)]);
            }
            Ok(integrate_log(f, r, reach, &breaks, &ENVELOPE_QUAD)?.value)
        };
        Ok(side(-1.0, x - lo)? + side(1.0, hi - x)?)
    }
}
