use num_complex::Complex64 as C64;
use rand::Rng;
use rayon::prelude::*;

use super::{build_transfer, GaudinError, GaudinProblem};
use crate::diffop::{degree, DiffOperator};
use crate::liealg::RootSystem;

/// Per-sample outcome of the commutativity check.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleResidual {
    pub h: Vec<C64>,
    /// `max_β ‖coefficient_β‖_∞` of the commutator.
    pub raw: f64,
    /// `raw / (‖τ̂(u)‖ ‖τ̂(u′)‖)`.
    pub normalized: f64,
    /// Same as `normalized`, restricted to `|β| ≥ 3`.
    pub top_order: f64,
    pub norm_u: f64,
    pub norm_v: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommutativityReport {
    pub samples: Vec<SampleResidual>,
    pub max_normalized: f64,
    pub max_top_order: f64,
}

/// Largest absolute matrix entry among the coefficient values at `h`.
pub fn operator_norm_at(op: &DiffOperator, h: &[C64]) -> Result<f64, GaudinError> {
    Ok(op
        .coefficients_at(h, 0)?
        .iter()
        .flat_map(|(_, j)| j.value().iter().map(|v| v.norm()).collect::<Vec<_>>())
        .fold(0.0, f64::max))
}

/// `[τ̂(u), τ̂(u′)]` evaluated at each sample point.
pub fn commutativity_residual(
    p: &GaudinProblem,
    u: C64,
    u2: C64,
    samples: &[Vec<C64>],
) -> Result<CommutativityReport, GaudinError> {
    let a = build_transfer(p, u)?;
    let b = build_transfer(p, u2)?;
    let comm = a.commutator(&b)?;
    let samples: Vec<SampleResidual> = samples
        .par_iter()
        .map(|h| {
            p.check_point(h)?;
            let norm_u = operator_norm_at(&a, h)?;
            let norm_v = operator_norm_at(&b, h)?;
            let mut raw: f64 = 0.0;
            let mut top: f64 = 0.0;
            for (beta, jet) in comm.coefficients_at(h, 0)? {
                let m = jet.value().iter().map(|v| v.norm()).fold(0.0, f64::max);
                raw = raw.max(m);
                if degree(&beta) >= 3 {
                    top = top.max(m);
                }
            }
            let scale = norm_u * norm_v;
            let scale = if scale > 0.0 { scale } else { 1.0 };
            Ok(SampleResidual {
                h: h.clone(),
                raw,
                normalized: raw / scale,
                top_order: top / scale,
                norm_u,
                norm_v,
            })
        })
        .collect::<Result<_, GaudinError>>()?;
    let max_normalized = samples.iter().map(|s| s.normalized).fold(0.0, f64::max);
    let max_top_order = samples.iter().map(|s| s.top_order).fold(0.0, f64::max);
    Ok(CommutativityReport {
        samples,
        max_normalized,
        max_top_order,
    })
}

/// Box in the ξ-chart from which sample points are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleBox {
    pub re: (f64, f64),
    pub im: (f64, f64),
    /// Minimum distance of every `α(H)` from the integers.
    pub margin: f64,
}

impl Default for SampleBox {
    fn default() -> Self {
        Self {
            re: (-1.0, 1.0),
            im: (-0.25, 0.25),
            margin: 0.05,
        }
    }
}

/// Draws `count` points of `S` uniformly from the box, rejecting those near root hyperplanes.
pub fn sample_points<R: Rng>(rs: &RootSystem, count: usize, bx: &SampleBox, rng: &mut R) -> Vec<Vec<C64>> {
    try_sample_points(rs, count, bx, rng, usize::MAX).expect("unbounded sampling always fills")
}

/// Like [`sample_points`], giving up after `max_draws` candidates.
pub fn try_sample_points<R: Rng>(
    rs: &RootSystem,
    count: usize,
    bx: &SampleBox,
    rng: &mut R,
    max_draws: usize,
) -> Option<Vec<Vec<C64>>> {
    let mut out = Vec::with_capacity(count);
    let mut draws = 0usize;
    while out.len() < count {
        if draws == max_draws {
            return None;
        }
        draws += 1;
        let h: Vec<C64> = (0..rs.rank())
            .map(|_| C64::new(rng.random_range(bx.re.0..bx.re.1), rng.random_range(bx.im.0..bx.im.1)))
            .collect();
        let ok = (0..rs.roots().len()).all(|k| {
            let v = rs.root_value(k, &h);
            (v - C64::new(v.re.round(), 0.0)).norm() >= bx.margin
        });
        if ok {
            out.push(h);
        }
    }
    Some(out)
}
