use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Dist, GeometrySpec, PairDistances};

/// One evaluation site. `x`, `y` are NaN when the point was built from
/// distances alone.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub pd: PairDistances,
}

impl GridPoint {
    pub fn at(geom: &GeometrySpec, t: f64, x: f64, y: f64) -> Result<Self> {
        Ok(Self {
            t,
            x,
            y,
            pd: geom.pair(x, y)?,
        })
    }

    pub fn from_distances(t: f64, pd: PairDistances) -> Self {
        Self {
            t,
            x: f64::NAN,
            y: f64::NAN,
            pd,
        }
    }
}

/// What a sweep callback returns for one point.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub numeric: f64,
    pub envelope: f64,
    pub regime: String,
    /// Relative error estimate of the numeric oracle, 0 if exact.
    pub oracle_err: f64,
}

impl Evaluation {
    pub fn new(numeric: f64, envelope: f64, regime: impl Into<String>) -> Self {
        Self {
            numeric,
            envelope,
            regime: regime.into(),
            oracle_err: 0.0,
        }
    }

    pub fn with_err(mut self, rel: f64) -> Self {
        self.oracle_err = rel;
        self
    }
}

/// A row of the pointwise CSV. Column order is fixed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub theorem_id: String,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub rho: f64,
    pub delta_x: Dist,
    pub delta_y: Dist,
    pub regime: String,
    pub numeric: f64,
    pub envelope: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeStats {
    pub count: usize,
    pub sup_ratio: f64,
    pub inf_ratio: f64,
    pub spread: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlaggedPoint {
    pub index: usize,
    pub reason: String,
}

/// Ratio statistics of one sweep. Points where both sides are `+∞` (a
/// declared-divergent regime) are bucketed but take no part in the ratio
/// extremes; points whose envelope is zero or non-finite, or whose
/// evaluation failed, are flagged and excluded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub theorem_id: String,
    pub n_points: usize,
    pub sup_ratio: f64,
    pub inf_ratio: f64,
    pub spread: f64,
    pub argmax: Option<PointRecord>,
    pub argmin: Option<PointRecord>,
    pub regime_histogram: BTreeMap<String, usize>,
    pub regime_spreads: BTreeMap<String, RegimeStats>,
    pub divergent: usize,
    pub flagged: Vec<FlaggedPoint>,
    pub max_oracle_err: f64,
    #[serde(skip)]
    pub points: Vec<PointRecord>,
}

impl RatioReport {
    pub fn is_finite(&self) -> bool {
        self.spread.is_finite() && self.inf_ratio > 0.0
    }

    pub fn regime(&self, name: &str) -> Option<&RegimeStats> {
        self.regime_spreads.get(name)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for p in &self.points {
            w.serialize(p)?;
        }
        w.flush()?;
        Ok(())
    }

    /// `t, rho, ratio` columns for plotting.
    pub fn write_plot_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["t", "rho", "ratio"])?;
        for p in &self.points {
            w.write_record([p.t.to_string(), p.rho.to_string(), p.ratio.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(&mut f, self)?;
        f.write_all(b"\n")?;
        Ok(())
    }
}

/// Evaluate `f` at every grid point (in parallel) and fold the ratios
/// `numeric/envelope` into a report. The fold runs in grid order, so the
/// result does not depend on the worker count.
pub fn sweep<F>(theorem_id: &str, grid: &[GridPoint], f: F) -> Result<RatioReport>
where
    F: Fn(&GridPoint) -> Result<Evaluation> + Sync,
{
    if grid.is_empty() {
        return Err(Error::Range(format!("empty grid for {theorem_id}")));
    }
    let evals: Vec<Result<Evaluation>> = grid.par_iter().map(&f).collect();
    Ok(fold(theorem_id, grid, evals))
}

/// Single-threaded [`sweep`].
pub fn sweep_serial<F>(theorem_id: &str, grid: &[GridPoint], f: F) -> Result<RatioReport>
where
    F: Fn(&GridPoint) -> Result<Evaluation>,
{
    if grid.is_empty() {
        return Err(Error::Range(format!("empty grid for {theorem_id}")));
    }
    let evals: Vec<Result<Evaluation>> = grid.iter().map(f).collect();
    Ok(fold(theorem_id, grid, evals))
}

fn fold(theorem_id: &str, grid: &[GridPoint], evals: Vec<Result<Evaluation>>) -> RatioReport {
    let mut rep = RatioReport {
        theorem_id: theorem_id.to_string(),
        n_points: grid.len(),
        sup_ratio: f64::NAN,
        inf_ratio: f64::NAN,
        spread: f64::NAN,
        argmax: None,
        argmin: None,
        regime_histogram: BTreeMap::new(),
        regime_spreads: BTreeMap::new(),
        divergent: 0,
        flagged: Vec::new(),
        max_oracle_err: 0.0,
        points: Vec::with_capacity(grid.len()),
    };
    let mut sup = f64::NEG_INFINITY;
    let mut inf = f64::INFINITY;
    for (i, (gp, ev)) in grid.iter().zip(evals).enumerate() {
        let ev = match ev {
            Ok(ev) => ev,
            Err(e) => {
                rep.flagged.push(FlaggedPoint {
                    index: i,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let both_infinite = ev.numeric == f64::INFINITY && ev.envelope == f64::INFINITY;
        let ratio = if both_infinite { f64::INFINITY } else { ev.numeric / ev.envelope };
        let reason = if both_infinite {
            None
        } else if !(ev.envelope > 0.0) || !ev.envelope.is_finite() {
            Some(format!("envelope {} is not positive and finite", ev.envelope))
        } else if !ratio.is_finite() || ratio < 0.0 {
            Some(format!("numeric value {} gives ratio {}", ev.numeric, ratio))
        } else {
            None
        };
        if let Some(reason) = reason {
            rep.flagged.push(FlaggedPoint { index: i, reason });
            continue;
        }
        let rec = PointRecord {
            theorem_id: theorem_id.to_string(),
            t: gp.t,
            x: gp.x,
            y: gp.y,
            rho: gp.pd.rho,
            delta_x: gp.pd.dx,
            delta_y: gp.pd.dy,
            regime: ev.regime.clone(),
            numeric: ev.numeric,
            envelope: ev.envelope,
            ratio,
        };
        *rep.regime_histogram.entry(ev.regime.clone()).or_insert(0) += 1;
        rep.max_oracle_err = rep.max_oracle_err.max(ev.oracle_err);
        if both_infinite {
            rep.divergent += 1;
        } else {
            let st = rep.regime_spreads.entry(ev.regime).or_insert(RegimeStats {
                count: 0,
                sup_ratio: f64::NEG_INFINITY,
                inf_ratio: f64::INFINITY,
                spread: f64::NAN,
            });
            st.count += 1;
            st.sup_ratio = st.sup_ratio.max(ratio);
            st.inf_ratio = st.inf_ratio.min(ratio);
            st.spread = st.sup_ratio / st.inf_ratio;
            if ratio > sup {
                sup = ratio;
                rep.argmax = Some(rec.clone());
            }
            if ratio < inf {
                inf = ratio;
                rep.argmin = Some(rec.clone());
            }
        }
        rep.points.push(rec);
    }
    if rep.argmax.is_some() {
        rep.sup_ratio = sup;
        rep.inf_ratio = inf;
        rep.spread = sup / inf;
    }
    rep
}
