//! Homogeneous norm, group distance, and grid Holder functionals.
//!
//! The homogeneous norm is the sum over levels of the Euclidean norm of the
//! level-m log block raised to 1/m. It is 1-homogeneous under dilation and
//! equivalent to (not equal to) the geodesic Carnot-Caratheodory norm.
//!
//! Holder functionals take the supremum of d(x_{s,t}, y_{s,t}) / (t-s)^alpha
//! over all pairs s < t drawn from the grid plus optional dyadic refinement
//! points inside each segment. The result is a lower bound for the
//! continuous-time supremum that is exact in the mesh limit; deeper
//! refinement can only grow it.

use alloc::vec::Vec;
use core::fmt;

use crate::fmath::{powf, sqrt};
use crate::group::{GroupElement, LieElement};
use crate::lift::{LiftError, LiftedPath};
use crate::series::AlgebraError;

pub const DEFAULT_REFINEMENT_DEPTH: u32 = 4;
/// Pairs closer in time than this are skipped (degenerate denominators).
pub const MIN_PAIR_GAP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum MetricError {
    BadAlpha { alpha: f64 },
    NoAlphas,
    RefinementTooDeep { depth: u32 },
    SpanMismatch { left: (f64, f64), right: (f64, f64) },
    NonFiniteCoordinate,
    Lift(LiftError),
    Algebra(AlgebraError),
}

impl fmt::Display for MetricError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricError::BadAlpha { alpha } => {
                write!(f, "alpha must lie strictly between 0 and 1, got {alpha}")
            }
            MetricError::NoAlphas => write!(f, "need at least one alpha"),
            MetricError::RefinementTooDeep { depth } => {
                write!(f, "refinement depth {depth} exceeds the supported maximum")
            }
            MetricError::SpanMismatch { left, right } => {
                write!(f, "paths cover different spans {left:?} vs {right:?}")
            }
            MetricError::NonFiniteCoordinate => write!(f, "non-finite path coordinate"),
            MetricError::Lift(e) => write!(f, "{e}"),
            MetricError::Algebra(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for MetricError {}

impl From<LiftError> for MetricError {
    fn from(e: LiftError) -> Self {
        MetricError::Lift(e)
    }
}

impl From<AlgebraError> for MetricError {
    fn from(e: AlgebraError) -> Self {
        MetricError::Algebra(e)
    }
}

/// Result of a Holder scan: the supremum, where it was attained (ties keep
/// the lexicographically smallest pair), and how many pairs were evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct HolderEvaluation {
    pub alpha: f64,
    pub value: f64,
    pub attained_at: (f64, f64),
    pub pairs_scanned: u64,
}

/// Sum over levels of |level-m log block|^(1/m).
pub fn homogeneous_norm(g: &GroupElement) -> f64 {
    lie_homogeneous_norm(&g.log())
}

/// Same norm evaluated directly on log coordinates.
pub fn lie_homogeneous_norm(l: &LieElement) -> f64 {
    let mut total = 0.0;
    for m in 1..=l.depth() {
        let block = l.level(m).expect("level in range");
        let sumsq: f64 = block.iter().map(|c| c * c).sum();
        let norm = sqrt(sumsq);
        total += match m {
            1 => norm,
            2 => sqrt(norm),
            _ => powf(norm, 1.0 / m as f64),
        };
    }
    total
}

/// Left-invariant distance |g^{-1} h| in the homogeneous norm.
pub fn cc_distance(g: &GroupElement, h: &GroupElement) -> Result<f64, AlgebraError> {
    Ok(homogeneous_norm(&g.inverse().mul(h)?))
}

/// Holder functional of one path against the constant unit path.
pub fn holder_norm(
    path: &LiftedPath,
    alpha: f64,
    refinement: u32,
) -> Result<HolderEvaluation, MetricError> {
    let mut evals = holder_norms_multi(path, &[alpha], refinement)?;
    Ok(evals.pop().expect("one alpha"))
}

/// Holder functionals for several exponents in a single pair scan.
pub fn holder_norms_multi(
    path: &LiftedPath,
    alphas: &[f64],
    refinement: u32,
) -> Result<Vec<HolderEvaluation>, MetricError> {
    check_alphas(alphas)?;
    let times = refined_times(&[path.times()], refinement)?;
    let points = materialize(path, &times)?;
    scan(&times, alphas, |i, j| increment_norm(&points, i, j))
}

/// Holder distance between two paths over the union of their grids.
pub fn holder_distance(
    x: &LiftedPath,
    y: &LiftedPath,
    alpha: f64,
    refinement: u32,
) -> Result<HolderEvaluation, MetricError> {
    check_alphas(&[alpha])?;
    if (x.dim(), x.depth()) != (y.dim(), y.depth()) {
        return Err(MetricError::Algebra(AlgebraError::DimensionMismatch {
            left: (x.dim(), x.depth()),
            right: (y.dim(), y.depth()),
        }));
    }
    let span_x = (x.start_time(), x.end_time());
    let span_y = (y.start_time(), y.end_time());
    if span_x != span_y {
        return Err(MetricError::SpanMismatch { left: span_x, right: span_y });
    }
    let times = refined_times(&[x.times(), y.times()], refinement)?;
    let px = materialize_general(x, &times)?;
    let py = materialize_general(y, &times)?;
    let mut evals = scan(&times, &[alpha], |i, j| {
        let gx = px[i].inverse().mul(&px[j]).expect("same shape");
        let gy = py[i].inverse().mul(&py[j]).expect("same shape");
        cc_distance(&gx, &gy).expect("same shape")
    })?;
    Ok(evals.pop().expect("one alpha"))
}

fn check_alphas(alphas: &[f64]) -> Result<(), MetricError> {
    if alphas.is_empty() {
        return Err(MetricError::NoAlphas);
    }
    for &alpha in alphas {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(MetricError::BadAlpha { alpha });
        }
    }
    Ok(())
}

const MAX_REFINEMENT_DEPTH: u32 = 16;

/// Sorted union of the given grids plus 2^depth - 1 dyadic points inside
/// each union segment.
fn refined_times(grids: &[&[f64]], depth: u32) -> Result<Vec<f64>, MetricError> {
    if depth > MAX_REFINEMENT_DEPTH {
        return Err(MetricError::RefinementTooDeep { depth });
    }
    let mut base: Vec<f64> = grids.iter().flat_map(|g| g.iter().copied()).collect();
    base.sort_by(f64::total_cmp);
    base.dedup();
    if depth == 0 {
        return Ok(base);
    }
    let pieces = 1usize << depth;
    let mut out = Vec::with_capacity(base.len() * pieces);
    for w in base.windows(2) {
        out.push(w[0]);
        for i in 1..pieces {
            out.push(w[0] + (w[1] - w[0]) * (i as f64 / pieces as f64));
        }
    }
    out.push(*base.last().expect("nonempty"));
    Ok(out)
}

/// Per-point data for the pair scan. Depth <= 2 stores raw log coordinates
/// for the closed-form step-2 increment; deeper paths store group elements.
enum Materialized {
    Depth1 { dim: usize, a: Vec<f64> },
    Depth2 { dim: usize, a: Vec<f64>, c: Vec<f64> },
    General(Vec<GroupElement>),
}

fn materialize(path: &LiftedPath, times: &[f64]) -> Result<Materialized, MetricError> {
    let dim = path.dim();
    match path.depth() {
        1 => {
            let mut a = Vec::with_capacity(times.len() * dim);
            for &t in times {
                a.extend_from_slice(path.interpolate(t)?.series().level(1)?);
            }
            if a.iter().any(|c| !c.is_finite()) {
                return Err(MetricError::NonFiniteCoordinate);
            }
            Ok(Materialized::Depth1 { dim, a })
        }
        2 => {
            let mut a = Vec::with_capacity(times.len() * dim);
            let mut c = Vec::with_capacity(times.len() * dim * dim);
            for &t in times {
                let p = path.interpolate(t)?;
                let lvl1 = p.series().level(1)?;
                let lvl2 = p.series().level(2)?;
                a.extend_from_slice(lvl1);
                // log level 2 block: stored level 2 minus half the square of level 1
                for r in 0..dim {
                    for s in 0..dim {
                        c.push(lvl2[r * dim + s] - 0.5 * lvl1[r] * lvl1[s]);
                    }
                }
            }
            if a.iter().chain(c.iter()).any(|v| !v.is_finite()) {
                return Err(MetricError::NonFiniteCoordinate);
            }
            Ok(Materialized::Depth2 { dim, a, c })
        }
        _ => Ok(Materialized::General(materialize_general(path, times)?)),
    }
}

fn materialize_general(
    path: &LiftedPath,
    times: &[f64],
) -> Result<Vec<GroupElement>, MetricError> {
    let mut pts = Vec::with_capacity(times.len());
    for &t in times {
        let p = path.interpolate(t)?;
        if !p.is_finite() {
            return Err(MetricError::NonFiniteCoordinate);
        }
        pts.push(p);
    }
    Ok(pts)
}

/// Homogeneous norm of the increment between materialized points i < j.
fn increment_norm(m: &Materialized, i: usize, j: usize) -> f64 {
    match m {
        Materialized::Depth1 { dim, a } => {
            let (ai, aj) = (&a[i * dim..(i + 1) * dim], &a[j * dim..(j + 1) * dim]);
            let mut s1 = 0.0;
            for k in 0..*dim {
                let u = aj[k] - ai[k];
                s1 += u * u;
            }
            sqrt(s1)
        }
        Materialized::Depth2 { dim, a, c } => {
            let d = *dim;
            let (ai, aj) = (&a[i * d..(i + 1) * d], &a[j * d..(j + 1) * d]);
            let (ci, cj) = (&c[i * d * d..(i + 1) * d * d], &c[j * d * d..(j + 1) * d * d]);
            let mut s1 = 0.0;
            for k in 0..d {
                let u = aj[k] - ai[k];
                s1 += u * u;
            }
            // step-2 closed form: log2(x_i^{-1} x_j) = c_j - c_i - 1/2 [a_i, a_j]
            let mut s2 = 0.0;
            for r in 0..d {
                for s in 0..d {
                    let l = cj[r * d + s] - ci[r * d + s] - 0.5 * (ai[r] * aj[s] - aj[r] * ai[s]);
                    s2 += l * l;
                }
            }
            sqrt(s1) + sqrt(sqrt(s2))
        }
        Materialized::General(pts) => {
            homogeneous_norm(&pts[i].inverse().mul(&pts[j]).expect("same shape"))
        }
    }
}

/// Pair scan over all i < j, by gap so that (t_j - t_i)^{-alpha} is reused
/// across runs of bitwise-equal gaps (exact on dyadic grids).
fn scan(
    times: &[f64],
    alphas: &[f64],
    mut distance: impl FnMut(usize, usize) -> f64,
) -> Result<Vec<HolderEvaluation>, MetricError> {
    let n = times.len();
    let mut best: Vec<f64> = alphas.iter().map(|_| 0.0).collect();
    let mut attained: Vec<(f64, f64)> = alphas.iter().map(|_| (times[0], times[0])).collect();
    let mut pairs = 0u64;
    let mut last_tau = f64::NAN;
    let mut inv_w: Vec<f64> = alphas.iter().map(|_| 0.0).collect();
    for gap in 1..n {
        for i in 0..n - gap {
            let j = i + gap;
            let tau = times[j] - times[i];
            if tau < MIN_PAIR_GAP {
                continue;
            }
            if tau != last_tau {
                for (w, &alpha) in inv_w.iter_mut().zip(alphas) {
                    *w = powf(tau, -alpha);
                }
                last_tau = tau;
            }
            let d = distance(i, j);
            if !d.is_finite() {
                return Err(MetricError::NonFiniteCoordinate);
            }
            pairs += 1;
            for (k, w) in inv_w.iter().enumerate() {
                let val = d * w;
                let better = val > best[k]
                    || (val == best[k] && (times[i], times[j]) < attained[k]);
                if better {
                    best[k] = val;
                    attained[k] = (times[i], times[j]);
                }
            }
        }
    }
    Ok(alphas
        .iter()
        .zip(best)
        .zip(attained)
        .map(|((&alpha, value), attained_at)| HolderEvaluation {
            alpha,
            value,
            attained_at,
            pairs_scanned: pairs,
        })
        .collect())
}
