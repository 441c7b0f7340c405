//! Closed-form two-sided envelopes for the subordinate heat kernel, the jump
//! kernel and the Green function, with the regime dispatch behind each.
//!
//! Every evaluator lives on [`Setting`], the triple (geometry, boundary
//! function, subordinator) the estimates are stated for. Points enter as
//! [`PairDistances`], so envelopes can be evaluated in any dimension.

mod boundary_integral;
mod explicit;
mod green;
mod heat;
mod jump;

use std::fmt;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{domain, Error, Result};
use crate::geometry::{BoundaryFnSpec, Dist, Domain, GeometrySpec, PairDistances};
use crate::quad::QuadratureConfig;
use crate::subordinator::{SubordinatorKind, SubordinatorSpec};

pub use explicit::MinArrangement;
pub use heat::{HkForm, OffDiagonalTerms};

/// Gaussian constant for upper envelopes.
pub const GAUSS_C_UPPER: f64 = 0.25;
/// Gaussian constant for lower envelopes.
pub const GAUSS_C_LOWER: f64 = 4.0;

/// Tolerance for the parameter equalities that select log-corrected cases.
pub const CASE_TOL: f64 = 1e-9;

const ENVELOPE_QUAD: QuadratureConfig = QuadratureConfig {
    rel_tol: 1e-10,
    abs_tol: 1e-300,
    max_subdivisions: 4000,
};

/// The nine factorization cases of the boundary integral, named by the
/// relation between `β` and `1−p−q`, `1−q`, `1−p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryCase {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
    VIII,
    IX,
}

impl BoundaryCase {
    pub const ALL: [BoundaryCase; 9] = [
        Self::I,
        Self::II,
        Self::III,
        Self::IV,
        Self::V,
        Self::VI,
        Self::VII,
        Self::VIII,
        Self::IX,
    ];

    pub fn roman(self) -> &'static str {
        match self {
            Self::I => "i",
            Self::II => "ii",
            Self::III => "iii",
            Self::IV => "iv",
            Self::V => "v",
            Self::VI => "vi",
            Self::VII => "vii",
            Self::VIII => "viii",
            Self::IX => "ix",
        }
    }

    pub fn is_log(self) -> bool {
        matches!(self, Self::V | Self::VI | Self::VII | Self::VIII | Self::IX)
    }

    /// Selects the case for `q ≥ p ≥ 0` and `β ∈ (0,1)`. Equalities are
    /// tested to [`CASE_TOL`].
    pub fn select(p: f64, q: f64, beta: f64) -> Result<Self> {
        let eq = |a: f64, b: f64| (a - b).abs() <= CASE_TOL;
        if !(p >= 0.0) || !(q >= 0.0) {
            return Err(Error::Dispatch(format!("exponents must be nonnegative, got p={p}, q={q}")));
        }
        if p > q + CASE_TOL {
            return Err(Error::Dispatch(format!(
                "p={p} > q={q}: swap x and y (and p, q) so that q >= p"
            )));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::Dispatch(format!("index β={beta} outside (0,1)")));
        }
        let q_eq_p = eq(q, p);
        let p_pos = p > CASE_TOL;
        Ok(if eq(beta, 1.0 - p - q) {
            if p_pos {
                Self::V
            } else {
                Self::VI
            }
        } else if eq(beta, 1.0 - q) {
            if q_eq_p {
                Self::VII
            } else {
                Self::VIII
            }
        } else if eq(beta, 1.0 - p) && !q_eq_p {
            Self::IX
        } else if beta < 1.0 - p - q {
            Self::I
        } else if beta < 1.0 - q {
            Self::II
        } else if beta < 1.0 - p {
            Self::III
        } else {
            Self::IV
        })
    }
}

/// Green-function regimes of the closed forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GreenRegime {
    /// `d > αβ`.
    AboveIndex,
    /// `d = αβ`, logarithmic.
    AtIndex,
    /// `d < αβ`, boundary-controlled.
    BelowIndex,
    /// `d < α(β−γ)` on a bounded domain.
    Constant,
    /// `d = α(β−γ)` on a bounded domain.
    BoundaryLog,
    /// `γ > β+1`.
    AnomalousPower,
    /// `γ = β+1`.
    AnomalousLog,
}

/// The closed-form cases of the far part `G̃`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FarGreenCase {
    I,
    II,
    III,
    IV,
    V,
}

/// Label of the branch an envelope evaluation used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Both points deep inside relative to their separation.
    Interior,
    Case(BoundaryCase),
    /// Three-factor product form without jump contribution.
    Product,
    OnDiagonal,
    OffDiagonal,
    OffSimple,
    RoughUpper,
    LargeTime,
    ExplicitNear,
    ExplicitFar,
    MixedNear,
    MixedFar,
    MixedLargeOn,
    MixedLargeOff,
    Jump,
    JumpExplicit,
    GreenIntegral,
    Green(GreenRegime),
    FarGreen(FarGreenCase),
    /// The quantity is infinite.
    Divergent,
}

impl Regime {
    pub fn label(&self) -> String {
        match self {
            Self::Interior => "interior".into(),
            Self::Case(c) => format!("case-{}", c.roman()),
            Self::Product => "product".into(),
            Self::OnDiagonal => "on-diagonal".into(),
            Self::OffDiagonal => "off-diagonal".into(),
            Self::OffSimple => "off-diagonal-simple".into(),
            Self::RoughUpper => "rough-upper".into(),
            Self::LargeTime => "large-time".into(),
            Self::ExplicitNear => "explicit-near".into(),
            Self::ExplicitFar => "explicit-far".into(),
            Self::MixedNear => "mixed-near".into(),
            Self::MixedFar => "mixed-far".into(),
            Self::MixedLargeOn => "mixed-large-on".into(),
            Self::MixedLargeOff => "mixed-large-off".into(),
            Self::Jump => "jump".into(),
            Self::JumpExplicit => "jump-explicit".into(),
            Self::GreenIntegral => "green-integral".into(),
            Self::Green(g) => match g {
                GreenRegime::AboveIndex => "green d>αβ",
                GreenRegime::AtIndex => "green d=αβ log",
                GreenRegime::BelowIndex => "green d<αβ",
                GreenRegime::Constant => "green constant",
                GreenRegime::BoundaryLog => "green boundary-log",
                GreenRegime::AnomalousPower => "green anomalous-power",
                GreenRegime::AnomalousLog => "green anomalous-log",
            }
            .into(),
            Self::FarGreen(c) => format!(
                "far-green-{}",
                match c {
                    FarGreenCase::I => "i",
                    FarGreenCase::II => "ii",
                    FarGreenCase::III => "iii",
                    FarGreenCase::IV => "iv",
                    FarGreenCase::V => "v",
                }
            ),
            Self::Divergent => "divergent".into(),
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl Serialize for Regime {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnvelopeValue {
    pub value: f64,
    pub regime: Regime,
    /// Set whenever a Gaussian term entered the value.
    pub gauss_c: Option<f64>,
}

impl EnvelopeValue {
    fn new(value: f64, regime: Regime) -> Self {
        Self {
            value,
            regime,
            gauss_c: None,
        }
    }

    fn gaussian(value: f64, regime: Regime, c: f64) -> Self {
        Self {
            value,
            regime,
            gauss_c: Some(c),
        }
    }

    fn divergent() -> Self {
        Self::new(f64::INFINITY, Regime::Divergent)
    }

    pub fn is_divergent(&self) -> bool {
        self.value.is_infinite()
    }
}

/// Envelope selection ids accepted by configs and the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TheoremId {
    #[serde(rename = "thm4.3")]
    SmallTime,
    #[serde(rename = "cor4.6")]
    OffSimple,
    #[serde(rename = "thm4.8")]
    LargeTime,
    #[serde(rename = "lemma7.1")]
    Factorization,
    #[serde(rename = "ex7.2")]
    ExplicitStable,
    #[serde(rename = "ex7.4")]
    Mixed,
    #[serde(rename = "prop5.3")]
    GreenIntegral,
    #[serde(rename = "thm5.6")]
    GreenClosed,
    #[serde(rename = "thm5.7")]
    GreenAnomalousPower,
    #[serde(rename = "thm5.8")]
    GreenAnomalousLog,
}

impl TheoremId {
    pub const ALL: [TheoremId; 10] = [
        Self::SmallTime,
        Self::OffSimple,
        Self::LargeTime,
        Self::Factorization,
        Self::ExplicitStable,
        Self::Mixed,
        Self::GreenIntegral,
        Self::GreenClosed,
        Self::GreenAnomalousPower,
        Self::GreenAnomalousLog,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::SmallTime => "thm4.3",
            Self::OffSimple => "cor4.6",
            Self::LargeTime => "thm4.8",
            Self::Factorization => "lemma7.1",
            Self::ExplicitStable => "ex7.2",
            Self::Mixed => "ex7.4",
            Self::GreenIntegral => "prop5.3",
            Self::GreenClosed => "thm5.6",
            Self::GreenAnomalousPower => "thm5.7",
            Self::GreenAnomalousLog => "thm5.8",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|id| id.as_str() == s).ok_or_else(|| {
            let valid: Vec<&str> = Self::ALL.iter().map(|id| id.as_str()).collect();
            Error::Config(format!("unknown theorem id {s:?}; valid ids: {}", valid.join(", ")))
        })
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Geometry, boundary function and subordinator of one estimate.
#[derive(Clone, Debug)]
pub struct Setting {
    pub geom: GeometrySpec,
    pub bfn: BoundaryFnSpec,
    pub sub: SubordinatorSpec,
    /// Bottom of the Dirichlet spectrum of the underlying process, needed
    /// only by large-time envelopes.
    pub bottom_eigenvalue: Option<f64>,
}

impl Setting {
    /// For intervals with `α = 2` the bottom eigenvalue defaults to that of
    /// `Δ`, `π²/L²`.
    pub fn new(geom: GeometrySpec, bfn: BoundaryFnSpec, sub: SubordinatorSpec) -> Result<Self> {
        geom.validate()?;
        BoundaryFnSpec::new(bfn.p, bfn.q)?;
        let bottom_eigenvalue = match geom.domain {
            Domain::Interval { length } if geom.alpha == 2.0 => {
                Some(std::f64::consts::PI.powi(2) / (length * length))
            }
            _ => None,
        };
        Ok(Self {
            geom,
            bfn,
            sub,
            bottom_eigenvalue,
        })
    }

    pub fn with_bottom_eigenvalue(mut self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return domain(format!("eigenvalue must be positive, got {lambda}"));
        }
        self.bottom_eigenvalue = Some(lambda);
        Ok(self)
    }

    /// The same setting with `x` and `y` exchanged in the boundary function.
    pub fn swapped(&self) -> Self {
        Self {
            bfn: self.bfn.swapped(),
            ..self.clone()
        }
    }

    fn h(&self, s: f64, pd: &PairDistances) -> f64 {
        self.bfn.h(&self.geom, s, pd)
    }

    fn w(&self, s: f64) -> Result<f64> {
        self.sub.levy_tail(s)
    }

    fn phi_dist(&self, d: Dist) -> f64 {
        self.geom.big_phi_dist(d)
    }

    /// `1 ∧ Φ(d)/Φ(r)`.
    fn phi_cap(&self, d: Dist, r: f64) -> f64 {
        d.capped_with(self.geom.big_phi(r), |v| self.geom.big_phi(v))
    }

    fn psi(&self, r: f64) -> Result<f64> {
        self.geom.psi(&self.sub, r)
    }

    /// `1 ∧ ψ(d)/ψ(r)`.
    fn psi_cap(&self, d: Dist, r: f64) -> Result<f64> {
        match d {
            Dist::Infinite => Ok(1.0),
            Dist::Finite(v) => Ok((self.psi(v)? / self.psi(r)?).min(1.0)),
        }
    }

    /// Abscissae where the boundary function or the Lévy tail has a kink.
    fn kinks(&self, pd: &PairDistances) -> Vec<f64> {
        let mut v = vec![self.phi_dist(pd.dx), self.phi_dist(pd.dy)];
        if let SubordinatorKind::TruncatedStable { crossover, .. } = self.sub.kind() {
            v.push(crossover);
        }
        v.retain(|s| s.is_finite());
        v
    }

    /// Lower and upper scaling indices of the Lévy tail on the scales the
    /// domain can see.
    fn scaling_indices(&self) -> (f64, f64) {
        let b = self.sub.beta();
        match self.sub.kind() {
            SubordinatorKind::Stable => (b, b),
            SubordinatorKind::TruncatedStable { ell, crossover } => match self.geom.diam() {
                Dist::Finite(l) if 4.0 * self.geom.big_phi(l) <= crossover => (b, b),
                _ => (b, ell),
            },
        }
    }

    /// Effective boundary exponent sum: zero when there is no boundary.
    fn gamma_eff(&self) -> f64 {
        match self.geom.domain {
            Domain::FullLine => 0.0,
            _ => self.bfn.gamma(),
        }
    }

    fn require_separated(pd: &PairDistances) -> Result<()> {
        if pd.rho > 0.0 {
            Ok(())
        } else {
            Err(Error::Singular("x = y".into()))
        }
    }
}

fn log_e(x: f64) -> f64 {
    (std::f64::consts::E + x).ln()
}

/// `Φ(a)/Φ(b)` for possibly infinite distances, where `Φ(∞) = ∞` and only
/// finite-over-infinite (= 0) can occur.
fn phi_ratio(geom: &GeometrySpec, num: f64, den: Dist) -> f64 {
    match den {
        Dist::Infinite => 0.0,
        Dist::Finite(d) => num / geom.big_phi(d),
    }
}
