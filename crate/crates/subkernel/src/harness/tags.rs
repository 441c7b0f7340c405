use crate::envelopes::{BoundaryCase, HkForm, Setting, TheoremId, GAUSS_C_LOWER};
use crate::error::{Error, Result};
use crate::harness::GridPoint;

/// Label of the branch the evaluator for `theorem` takes at `point`.
/// Branches that fail their preconditions are labelled `"inadmissible"`.
pub fn regime_tag(setting: &Setting, theorem: TheoremId, point: &GridPoint) -> String {
    let pd = &point.pd;
    let t = point.t;
    let v = match theorem {
        TheoremId::SmallTime => setting.sub_hk_envelope(t, pd, HkForm::SmallTime, GAUSS_C_LOWER),
        TheoremId::OffSimple => setting.sub_hk_envelope(t, pd, HkForm::OffSimple, GAUSS_C_LOWER),
        TheoremId::LargeTime => setting.sub_hk_envelope(t, pd, HkForm::LargeTime, GAUSS_C_LOWER),
        TheoremId::Factorization => setting.a_pq_closed(t, pd),
        TheoremId::ExplicitStable => setting.sub_hk_envelope(t, pd, HkForm::ExplicitStable, GAUSS_C_LOWER),
        TheoremId::Mixed => setting.sub_hk_envelope(t, pd, HkForm::MixedRegime, GAUSS_C_LOWER),
        TheoremId::GreenIntegral => setting.green_integral_envelope(pd),
        TheoremId::GreenClosed | TheoremId::GreenAnomalousPower | TheoremId::GreenAnomalousLog => {
            setting.green_closed(pd)
        }
    };
    v.map(|v| v.regime.label()).unwrap_or_else(|_| "inadmissible".into())
}

/// Case of the nine-case factorization table for `(p, q, β)`.
pub fn factorization_case(p: f64, q: f64, beta: f64) -> Result<BoundaryCase> {
    BoundaryCase::select(p, q, beta)
}

/// Bounds on the local power-law index of `f` over `[lo, hi]`.
///
/// Least-squares slopes of `log f` against `log r` are fitted over sliding
/// windows one decade wide; the result is the smallest and largest absolute
/// slope.
pub fn scaling_index_fit<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> Result<(f64, f64)> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::Range(format!("need 0 < lo < hi, got [{lo}, {hi}]")));
    }
    const PER_DECADE: usize = 20;
    let decades = (hi / lo).log10();
    let n = ((decades * PER_DECADE as f64).ceil() as usize).max(PER_DECADE) + 1;
    let (llo, lhi) = (lo.ln(), hi.ln());
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for i in 0..n {
        let lx = llo + (lhi - llo) * i as f64 / (n - 1) as f64;
        let v = f(lx.exp());
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Domain(format!("f is not positive at r={:e}: {v}", lx.exp())));
        }
        xs.push(lx);
        ys.push(v.ln());
    }
    let width = if decades >= 1.0 { PER_DECADE + 1 } else { n };
    let mut lower = f64::INFINITY;
    let mut upper = 0.0f64;
    for start in 0..=(n - width) {
        let s = slope(&xs[start..start + width], &ys[start..start + width]).abs();
        lower = lower.min(s);
        upper = upper.max(s);
    }
    Ok((lower, upper))
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}
