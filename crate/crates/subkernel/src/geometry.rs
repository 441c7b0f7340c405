//! Domains, boundary distances, volume and scaling functions, and the
//! `h_{p,q}` boundary functions with checkers for their structural axioms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::subordinator::SubordinatorSpec;

/// Tolerance for inequalities that hold with constant one.
pub const AXIOM_TOL: f64 = 1e-12;

/// A distance that may be infinite. The infinite case never takes part in
/// float arithmetic: every capped ratio against it is exactly 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Dist {
    Finite(f64),
    Infinite,
}

impl Dist {
    pub fn is_infinite(self) -> bool {
        matches!(self, Dist::Infinite)
    }

    /// The value as a float, `+∞` for the infinite case.
    pub fn value(self) -> f64 {
        match self {
            Dist::Finite(v) => v,
            Dist::Infinite => f64::INFINITY,
        }
    }

    pub fn min(self, other: Dist) -> Dist {
        match (self, other) {
            (Dist::Infinite, o) | (o, Dist::Infinite) => o,
            (Dist::Finite(a), Dist::Finite(b)) => Dist::Finite(a.min(b)),
        }
    }

    pub fn max(self, other: Dist) -> Dist {
        match (self, other) {
            (Dist::Infinite, _) | (_, Dist::Infinite) => Dist::Infinite,
            (Dist::Finite(a), Dist::Finite(b)) => Dist::Finite(a.max(b)),
        }
    }

    pub fn max_f(self, r: f64) -> Dist {
        self.max(Dist::Finite(r))
    }

    pub fn min_f(self, r: f64) -> f64 {
        match self {
            Dist::Infinite => r,
            Dist::Finite(a) => a.min(r),
        }
    }

    /// `1 ∧ (self/r)`.
    pub fn capped_ratio(self, r: f64) -> f64 {
        match self {
            Dist::Infinite => 1.0,
            Dist::Finite(a) => (a / r).min(1.0),
        }
    }

    /// `1 ∧ (f(self)/r)` with `f` applied only to finite values.
    pub fn capped_with<F: Fn(f64) -> f64>(self, r: f64, f: F) -> f64 {
        match self {
            Dist::Infinite => 1.0,
            Dist::Finite(a) => (f(a) / r).min(1.0),
        }
    }
}

impl Serialize for Dist {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Dist::Finite(v) => s.serialize_f64(*v),
            Dist::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Dist {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) if v.is_finite() && v >= 0.0 => Ok(Dist::Finite(v)),
            Raw::Str(s) if s == "inf" => Ok(Dist::Infinite),
            _ => Err(serde::de::Error::custom("distance must be a nonnegative number or \"inf\"")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "domain")]
pub enum Domain {
    FullLine,
    HalfLine,
    Interval { length: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometrySpec {
    pub domain: Domain,
    pub dim: u32,
    pub alpha: f64,
    pub kappa: f64,
    pub c0: u8,
}

impl GeometrySpec {
    pub fn new(domain: Domain, dim: u32, alpha: f64, kappa: f64, c0: u8) -> Result<Self> {
        let g = Self {
            domain,
            dim,
            alpha,
            kappa,
            c0,
        };
        g.validate()?;
        Ok(g)
    }

    /// `d = 1`, `Ψ = Φ = r^α`.
    pub fn line(domain: Domain, alpha: f64, c0: u8) -> Result<Self> {
        Self::new(domain, 1, alpha, alpha, c0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return domain("dimension must be positive");
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return domain(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.kappa >= self.alpha) || !self.kappa.is_finite() {
            return domain(format!("kappa must be at least alpha, got {}", self.kappa));
        }
        if self.c0 > 1 {
            return domain(format!("c0 must be 0 or 1, got {}", self.c0));
        }
        if let Domain::Interval { length } = self.domain {
            if !(length > 0.0) || !length.is_finite() {
                return domain(format!("interval length must be positive, got {length}"));
            }
        }
        Ok(())
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self.domain, Domain::Interval { .. })
    }

    pub fn contains(&self, x: f64) -> bool {
        match self.domain {
            Domain::FullLine => x.is_finite(),
            Domain::HalfLine => x > 0.0 && x.is_finite(),
            Domain::Interval { length } => x > 0.0 && x < length,
        }
    }

    /// Distance from `x` to the complement of the domain.
    pub fn delta(&self, x: f64) -> Result<Dist> {
        if !self.contains(x) {
            return domain(format!("point {x} is outside the domain"));
        }
        Ok(match self.domain {
            Domain::FullLine => Dist::Infinite,
            Domain::HalfLine => Dist::Finite(x),
            Domain::Interval { length } => Dist::Finite(x.min(length - x)),
        })
    }

    pub fn diam(&self) -> Dist {
        match self.domain {
            Domain::Interval { length } => Dist::Finite(length),
            _ => Dist::Infinite,
        }
    }

    /// Volume of the unit ball in `ℝ^d`.
    pub fn unit_ball_volume(&self) -> f64 {
        let d = self.dim as f64;
        std::f64::consts::PI.powf(d / 2.0) / libm::tgamma(d / 2.0 + 1.0)
    }

    /// Lebesgue volume of a ball of radius `r`.
    pub fn volume(&self, r: f64) -> f64 {
        self.unit_ball_volume() * r.powi(self.dim as i32)
    }

    /// `Φ(r) = r^α`.
    pub fn big_phi(&self, r: f64) -> f64 {
        r.powf(self.alpha)
    }

    pub fn big_phi_inverse(&self, t: f64) -> f64 {
        t.powf(1.0 / self.alpha)
    }

    /// `Ψ(r) = r^α ∨ r^κ`.
    pub fn big_psi(&self, r: f64) -> f64 {
        r.powf(self.alpha).max(r.powf(self.kappa))
    }

    /// `Φ` applied to a possibly infinite distance.
    pub fn big_phi_dist(&self, d: Dist) -> f64 {
        match d {
            Dist::Infinite => f64::INFINITY,
            Dist::Finite(r) => self.big_phi(r),
        }
    }

    /// `ψ(r) = 1/φ(1/Φ(r))`.
    pub fn psi(&self, sub: &SubordinatorSpec, r: f64) -> Result<f64> {
        if !(r > 0.0) || !r.is_finite() {
            return domain(format!("radius must be positive, got {r}"));
        }
        Ok(1.0 / sub.phi(1.0 / self.big_phi(r))?)
    }

    /// `ψ⁻¹(t) = Φ⁻¹(φ⁻¹(1/t)⁻¹)`.
    pub fn psi_inverse(&self, sub: &SubordinatorSpec, t: f64) -> Result<f64> {
        Ok(self.big_phi_inverse(sub.time_scale(t)?))
    }

    /// End of the time window on which the boundary-function axioms are
    /// required: `4Φ(diam)+1`, infinite for unbounded domains.
    pub fn time_cutoff(&self) -> f64 {
        match self.diam() {
            Dist::Infinite => f64::INFINITY,
            Dist::Finite(l) => 4.0 * self.big_phi(l) + 1.0,
        }
    }

    pub fn pair(&self, x: f64, y: f64) -> Result<PairDistances> {
        PairDistances::from_points(self, x, y)
    }

    /// `δ^t = δ ∨ ψ⁻¹(t)` for both points, with their min and max.
    pub fn time_regularized(&self, sub: &SubordinatorSpec, t: f64, pd: &PairDistances) -> Result<TimeRegularized> {
        let r = self.psi_inverse(sub, t)?;
        let dx = pd.dx.max_f(r);
        let dy = pd.dy.max_f(r);
        Ok(TimeRegularized {
            dx,
            dy,
            min: dx.min(dy),
            max: dx.max(dy),
        })
    }
}

/// The distances an envelope needs: separation and both boundary distances.
/// Building these directly (rather than from points) allows envelope-only
/// evaluation in any dimension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairDistances {
    pub rho: f64,
    pub dx: Dist,
    pub dy: Dist,
}

impl PairDistances {
    pub fn new(rho: f64, dx: Dist, dy: Dist) -> Result<Self> {
        if !(rho >= 0.0) || !rho.is_finite() {
            return domain(format!("separation must be nonnegative, got {rho}"));
        }
        for d in [dx, dy] {
            if let Dist::Finite(v) = d {
                if !(v > 0.0) || !v.is_finite() {
                    return domain(format!("boundary distance must be positive, got {v}"));
                }
            }
        }
        Ok(Self { rho, dx, dy })
    }

    pub fn from_points(geom: &GeometrySpec, x: f64, y: f64) -> Result<Self> {
        Self::new((x - y).abs(), geom.delta(x)?, geom.delta(y)?)
    }

    pub fn swapped(&self) -> Self {
        Self {
            rho: self.rho,
            dx: self.dy,
            dy: self.dx,
        }
    }

    /// `δ_∧`.
    pub fn dmin(&self) -> Dist {
        self.dx.min(self.dy)
    }

    /// `δ_∨`.
    pub fn dmax(&self) -> Dist {
        self.dx.max(self.dy)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TimeRegularized {
    pub dx: Dist,
    pub dy: Dist,
    pub min: Dist,
    pub max: Dist,
}

/// Exponents of `h_{p,q}(t,x,y) = (1∧Φ(δ(x))/t)^p (1∧Φ(δ(y))/t)^q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFnSpec {
    pub p: f64,
    pub q: f64,
}

impl BoundaryFnSpec {
    /// `p = q = 0` is allowed and gives `h ≡ 1`.
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p >= 0.0 && q >= 0.0) || !p.is_finite() || !q.is_finite() {
            return domain(format!("boundary exponents must be nonnegative, got p={p}, q={q}"));
        }
        Ok(Self { p, q })
    }

    pub fn symmetric(p: f64) -> Result<Self> {
        Self::new(p, p)
    }

    /// `γ = p + q`.
    pub fn gamma(&self) -> f64 {
        self.p + self.q
    }

    pub fn swapped(&self) -> Self {
        Self { p: self.q, q: self.p }
    }

    pub fn h(&self, geom: &GeometrySpec, t: f64, pd: &PairDistances) -> f64 {
        let a = pd.dx.capped_with(t, |d| geom.big_phi(d));
        let b = pd.dy.capped_with(t, |d| geom.big_phi(d));
        pow0(a, self.p) * pow0(b, self.q)
    }

    pub fn h_value(&self, geom: &GeometrySpec, t: f64, x: f64, y: f64) -> Result<f64> {
        if !(t > 0.0) {
            return domain(format!("time must be positive, got {t}"));
        }
        Ok(self.h(geom, t, &PairDistances::from_points(geom, x, y)?))
    }
}

/// `a^e` with `0^0 = 1` and no NaN for `a = ∞, e = 0`.
pub(crate) fn pow0(a: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else {
        a.powf(e)
    }
}

/// Flat configuration record for a domain together with its boundary function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryConfig {
    pub domain: DomainName,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default = "one")]
    pub d: u32,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub c0: u8,
    #[serde(default)]
    pub p: f64,
    #[serde(default)]
    pub q: f64,
}

fn one() -> u32 {
    1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainName {
    Full,
    Halfline,
    Interval,
}

impl GeometryConfig {
    pub fn build(&self) -> Result<(GeometrySpec, BoundaryFnSpec)> {
        let domain = match self.domain {
            DomainName::Full => Domain::FullLine,
            DomainName::Halfline => Domain::HalfLine,
            DomainName::Interval => Domain::Interval {
                length: self
                    .length
                    .ok_or_else(|| Error::Config("interval domain needs \"L\"".into()))?,
            },
        };
        let g = GeometrySpec::new(domain, self.d, self.alpha, self.kappa.unwrap_or(self.alpha), self.c0)?;
        Ok((g, BoundaryFnSpec::new(self.p, self.q)?))
    }

    pub fn from_specs(g: &GeometrySpec, b: &BoundaryFnSpec) -> Self {
        let (domain, length) = match g.domain {
            Domain::FullLine => (DomainName::Full, None),
            Domain::HalfLine => (DomainName::Halfline, None),
            Domain::Interval { length } => (DomainName::Interval, Some(length)),
        };
        Self {
            domain,
            length,
            d: g.dim,
            alpha: g.alpha,
            kappa: Some(g.kappa),
            c0: g.c0,
            p: b.p,
            q: b.q,
        }
    }
}

// ---- axiom checks ------------------------------------------------------

/// Points and two uniform fractions; each axiom maps the fractions into its
/// own admissible time window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AxiomTuple {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub u1: f64,
    pub u2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomCheck {
    pub name: String,
    pub checked: usize,
    /// Largest value of the ratio that the axiom bounds by its constant.
    pub worst_ratio: f64,
    pub worst_tuple: Option<AxiomTuple>,
}

impl AxiomCheck {
    fn new(name: &str) -> Self {
        Self {
            name: name.into(),
            checked: 0,
            worst_ratio: 0.0,
            worst_tuple: None,
        }
    }

    fn record(&mut self, ratio: f64, tuple: &AxiomTuple) {
        self.checked += 1;
        if ratio > self.worst_ratio || ratio.is_nan() {
            self.worst_ratio = ratio;
            self.worst_tuple = Some(*tuple);
        }
    }

    /// Whether the worst ratio stays within `constant·(1 + AXIOM_TOL)`.
    pub fn holds_with(&self, constant: f64) -> bool {
        self.checked > 0 && self.worst_ratio <= constant * (1.0 + AXIOM_TOL)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomReport {
    pub h1: AxiomCheck,
    pub h2: AxiomCheck,
    pub h2_star: AxiomCheck,
    /// Only checked when `p ∨ q < 1 + β`.
    pub h2_star_star: Option<AxiomCheck>,
    pub harnack: AxiomCheck,
}

/// Log-uniform pair `lo ≤ s ≤ t < hi` from two fractions.
fn window(lo: f64, hi: f64, u1: f64, u2: f64) -> (f64, f64) {
    let (a, b) = if u1 <= u2 { (u1, u2) } else { (u2, u1) };
    let (llo, lhi) = (lo.ln(), hi.ln());
    let s = (llo + a * (lhi - llo)).exp();
    let t = (llo + b * (lhi - llo)).exp();
    (s.max(lo), t.min(hi * (1.0 - 1e-15)))
}

/// Stand-in for an infinite window edge.
const FAR: f64 = 1e8;

pub fn check_boundary_axioms(
    bfn: &BoundaryFnSpec,
    geom: &GeometrySpec,
    beta: f64,
    tuples: &[AxiomTuple],
) -> Result<AxiomReport> {
    let gamma = bfn.gamma();
    let mut h1 = AxiomCheck::new("H1");
    let mut h2 = AxiomCheck::new("H2");
    let mut h2s = AxiomCheck::new("H2*");
    let use_h2ss = bfn.p.max(bfn.q) < 1.0 + beta;
    let mut h2ss = AxiomCheck::new("H2**");
    let mut harnack = AxiomCheck::new("Harnack");
    let cutoff = geom.time_cutoff().min(FAR);
    let two_diam = match geom.diam() {
        Dist::Infinite => f64::INFINITY,
        Dist::Finite(l) => 2.0 * geom.big_phi(l),
    };

    for tp in tuples {
        let pd = geom.pair(tp.x, tp.y)?;
        let h = |t: f64| bfn.h(geom, t, &pd);

        let (s, t) = window(1e-8, cutoff, tp.u1, tp.u2);
        if s < t {
            h1.record(h(t) / h(s), tp);
        }
        h2.record(s.powf(gamma) * h(s) / (t.powf(gamma) * h(t)), tp);

        // H2*: Φ(δ∨) ≤ s ≤ t < 2Φ(diam)
        let lo = geom.big_phi_dist(pd.dmax());
        let hi = two_diam.min(lo * FAR);
        if lo.is_finite() && lo < hi {
            let (s, t) = window(lo, hi, tp.u1, tp.u2);
            h2s.record(t.powf(gamma) * h(t) / (s.powf(gamma) * h(s)), tp);
        }

        // H2**: Φ(δ∧) ≤ s ≤ t < Φ(δ∨)
        if use_h2ss {
            let lo = geom.big_phi_dist(pd.dmin());
            let hi = geom.big_phi_dist(pd.dmax());
            if lo.is_finite() && lo < hi {
                let g = bfn.p.max(bfn.q);
                let (s, t) = window(lo, hi, tp.u1, tp.u2);
                h2ss.record(s.powf(g) * h(s) / (t.powf(g) * h(t)), tp);
            }
        }

        // Harnack: |x−z| ≤ (ρ∧δ(x))/2, t < Φ(ρ)
        let rad = pd.dx.min_f(pd.rho) / 2.0;
        if pd.rho > 0.0 && rad > 0.0 {
            let z = tp.x + (2.0 * tp.z - 1.0) * rad;
            if geom.contains(z) {
                let pz = geom.pair(z, tp.y)?;
                let (_, t) = window(1e-8, geom.big_phi(pd.rho), tp.u1, tp.u2);
                harnack.record(h(t) / bfn.h(geom, t, &pz), tp);
            }
        }
    }
    Ok(AxiomReport {
        h1,
        h2,
        h2_star: h2s,
        h2_star_star: use_h2ss.then_some(h2ss),
        harnack,
    })
}

/// Random points of the domain, biased toward the boundary, with fractions
/// for the time windows.
pub fn sample_axiom_tuples(geom: &GeometrySpec, n: usize, seed: u64) -> Vec<AxiomTuple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point = |rng: &mut ChaCha8Rng| -> f64 {
        match geom.domain {
            Domain::FullLine => rng.random_range(-5.0..5.0),
            Domain::HalfLine => 10f64.powf(rng.random_range(-4.0..1.0)),
            Domain::Interval { length } => {
                let d = length * 10f64.powf(rng.random_range(-4.0..0.0)) / 2.0;
                let d = d.min(length / 2.0);
                if rng.random_bool(0.5) {
                    d
                } else {
                    length - d
                }
            }
        }
    };
    (0..n)
        .map(|_| {
            let x = point(&mut rng);
            let y = point(&mut rng);
            AxiomTuple {
                x,
                y,
                z: rng.random(),
                u1: rng.random(),
                u2: rng.random(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinite_distance_short_circuits() {
        assert_eq!(Dist::Infinite.capped_ratio(1e-300), 1.0);
        assert_eq!(Dist::Infinite.max_f(3.0), Dist::Infinite);
        assert_eq!(Dist::Infinite.min(Dist::Finite(2.0)), Dist::Finite(2.0));
        assert_eq!(Dist::Finite(2.0).capped_ratio(4.0), 0.5);
    }
}
