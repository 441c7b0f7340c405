use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::envelopes::{Setting, TheoremId, GAUSS_C_UPPER};
use crate::error::{Error, Result};
use crate::geometry::{Dist, GeometryConfig, GeometrySpec, PairDistances};
use crate::harness::GridPoint;
use crate::kernels::HeatKernelModel;
use crate::numeric::McConfig;
use crate::quad::QuadratureConfig;
use crate::subordinator::SubordinatorSpec;

/// `n` log-spaced values from `lo` to `hi`; written `lo:hi:n` on the
/// command line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRange {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl LogRange {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        let r = Self { lo, hi, n };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!("range needs at least 2 points, got {}", self.n)));
        }
        if !(self.lo > 0.0 && self.hi >= self.lo && self.hi.is_finite()) {
            return Err(Error::Config(format!("range needs 0 < lo <= hi, got {}:{}", self.lo, self.hi)));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let (a, b) = (self.lo.ln(), self.hi.ln());
        (0..self.n)
            .map(|i| (a + (b - a) * i as f64 / (self.n - 1) as f64).exp())
            .collect()
    }

    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::Config(format!("expected lo:hi:n, got {s:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo = parts[0].trim().parse().map_err(|_| bad())?;
        let hi = parts[1].trim().parse().map_err(|_| bad())?;
        let n = parts[2].trim().parse().map_err(|_| bad())?;
        Self::new(lo, hi, n)
    }
}

/// Boundary distance of one point of a stratum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// A multiple of the separation `ρ`.
    Relative(f64),
    /// `ψ⁻¹(t)`, where the time regularization starts to act.
    Pinned,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stratum {
    pub dx: Placement,
    pub dy: Placement,
}

/// Whether grid times are absolute or multiples of `ψ(ρ)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeScale {
    #[default]
    Absolute,
    RelativeToPsi,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "placement")]
pub enum PointSpec {
    /// Every pair `(x, y)` with `x ≠ y` inside the domain.
    Points { x: Vec<f64>, y: Vec<f64> },
    /// Distances only: separations from `rho`, boundary distances from the
    /// strata. Usable by envelopes, not by kernels.
    Strata { rho: LogRange, strata: Vec<Stratum> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t_range: LogRange,
    #[serde(default)]
    pub time_scale: TimeScale,
    pub points: PointSpec,
    /// Keep only points whose regime label is listed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regimes: Option<Vec<String>>,
}

/// The relative boundary placements `{0.5, 1, 2, 10}·ρ` combined so that
/// every branch of the boundary factor is reached, plus points pinned at
/// `ψ⁻¹(t)`.
pub fn boundary_strata() -> Vec<Stratum> {
    use Placement::{Pinned, Relative as R};
    [
        (R(0.5), R(0.5)),
        (R(0.5), R(1.0)),
        (R(1.0), R(0.5)),
        (R(1.0), R(1.0)),
        (R(1.0), R(2.0)),
        (R(2.0), R(1.0)),
        (R(10.0), R(10.0)),
        (Pinned, Pinned),
        (Pinned, R(0.5)),
        (R(0.5), Pinned),
    ]
    .into_iter()
    .map(|(dx, dy)| Stratum { dx, dy })
    .collect()
}

/// `n` points per side of each boundary, log-spaced in distance from
/// `min_dist` up to the middle (or `10` on the half-line), for use as both
/// `x` and `y` grids.
pub fn boundary_layers(geom: &GeometrySpec, n: usize, min_dist: f64) -> Vec<f64> {
    use crate::geometry::Domain;
    let spread = |hi: f64| LogRange {
        lo: min_dist,
        hi,
        n: n.max(2),
    }
    .values();
    match geom.domain {
        Domain::FullLine => spread(10.0).into_iter().flat_map(|d| [-d, d]).collect(),
        Domain::HalfLine => spread(10.0),
        Domain::Interval { length } => {
            let mut v = spread(length / 2.0);
            let right: Vec<f64> = v.iter().rev().skip(1).map(|d| length - d).collect();
            v.extend(right);
            v
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        self.t_range.validate()?;
        match &self.points {
            PointSpec::Points { x, y } => {
                if x.is_empty() || y.is_empty() {
                    return Err(Error::Config("point grid needs x and y values".into()));
                }
            }
            PointSpec::Strata { rho, strata } => {
                rho.validate()?;
                if strata.is_empty() {
                    return Err(Error::Config("strata list is empty".into()));
                }
            }
        }
        Ok(())
    }

    pub fn needs_points(&self) -> bool {
        matches!(self.points, PointSpec::Points { .. })
    }

    /// Expand to grid points. Pairs outside the domain or on the diagonal
    /// are skipped.
    pub fn build(&self, geom: &GeometrySpec, sub: &SubordinatorSpec) -> Result<Vec<GridPoint>> {
        self.validate()?;
        let times = self.t_range.values();
        let mut out = Vec::new();
        match &self.points {
            PointSpec::Points { x, y } => {
                for &xv in x {
                    for &yv in y {
                        if xv == yv || !geom.contains(xv) || !geom.contains(yv) {
                            continue;
                        }
                        let pd = geom.pair(xv, yv)?;
                        for &t in &times {
                            let t = self.scale_time(geom, sub, t, pd.rho)?;
                            out.push(GridPoint::at(geom, t, xv, yv)?);
                        }
                    }
                }
            }
            PointSpec::Strata { rho, strata } => {
                for r in rho.values() {
                    for &t in &times {
                        let t = self.scale_time(geom, sub, t, r)?;
                        let pin = geom.psi_inverse(sub, t)?;
                        let place = |p: Placement| match p {
                            Placement::Relative(k) => Dist::Finite(k * r),
                            Placement::Pinned => Dist::Finite(pin),
                        };
                        for s in strata {
                            let pd = PairDistances::new(r, place(s.dx), place(s.dy))?;
                            out.push(GridPoint::from_distances(t, pd));
                        }
                    }
                }
            }
        }
        if out.is_empty() {
            return Err(Error::Config("grid has no admissible points".into()));
        }
        Ok(out)
    }

    fn scale_time(&self, geom: &GeometrySpec, sub: &SubordinatorSpec, t: f64, rho: f64) -> Result<f64> {
        Ok(match self.time_scale {
            TimeScale::Absolute => t,
            TimeScale::RelativeToPsi => t * geom.psi(sub, rho)?,
        })
    }
}

/// One sweep of a run: an envelope against its numerical oracle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub name: String,
    pub theorem: TheoremId,
    /// Kernel of the underlying process; its geometry and boundary function
    /// are used unless `geometry` is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<HeatKernelModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryConfig>,
    pub subordinator: SubordinatorSpec,
    pub grid: GridSpec,
    #[serde(default = "default_gauss_c")]
    pub gauss_c: f64,
    /// Fail the run if the spread exceeds this.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_spread: Option<f64>,
}

fn default_gauss_c() -> f64 {
    GAUSS_C_UPPER
}

impl SweepConfig {
    pub fn setting(&self) -> Result<Setting> {
        let (geom, bfn) = match (&self.geometry, &self.kernel) {
            (Some(g), _) => g.build()?,
            (None, Some(k)) => (k.geometry(), k.boundary()),
            (None, None) => {
                return Err(Error::Config(format!("sweep {:?} needs a kernel or a geometry", self.name)));
            }
        };
        let s = Setting::new(geom, bfn, self.subordinator.clone())?;
        match self.kernel.as_ref().and_then(|k| k.bottom_eigenvalue()) {
            Some(l) => s.with_bottom_eigenvalue(l),
            None => Ok(s),
        }
    }
}

/// A run: acceptance criteria and/or ad-hoc sweeps, with output location.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    /// Acceptance criteria to evaluate, by number.
    pub criteria: Vec<u32>,
    pub sweeps: Vec<SweepConfig>,
    pub out_dir: Option<PathBuf>,
    pub quadrature: QuadratureConfig,
    pub monte_carlo: McConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    /// Parse and validate. Unknown theorem ids are reported with the list
    /// of valid ones.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            if msg.contains("unknown variant") && TheoremId::ALL.iter().any(|id| msg.contains(id.as_str())) {
                let ids: Vec<&str> = TheoremId::ALL.iter().map(|i| i.as_str()).collect();
                Error::Config(format!("{msg}; valid theorem ids: {}", ids.join(", ")))
            } else {
                Error::Config(msg)
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.quadrature.validate()?;
        self.monte_carlo.validate()?;
        for c in &self.criteria {
            if !(1..=10).contains(c) {
                return Err(Error::Config(format!("no acceptance criterion {c}; valid are 1..=10")));
            }
        }
        for s in &self.sweeps {
            s.grid.validate()?;
            if s.grid.needs_points() && s.kernel.is_none() {
                return Err(Error::Config(format!("sweep {:?} uses point grids and needs a kernel", s.name)));
            }
        }
        Ok(())
    }
}
