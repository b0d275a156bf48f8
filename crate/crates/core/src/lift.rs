//! Group-valued paths on a time grid with two interpolation rules.
//!
//! A lifted path stores group elements at strictly increasing times, with
//! the first point equal to the unit. `lift_linear_chords` builds the
//! canonical lift of a piecewise linear path: grid point k carries
//! exp(v_1) * ... * exp(v_k) for the chords v_j. Increments are defined by
//! x_{s,t} = x_s^{-1} * x_t, so the multiplicative Chen identity
//! x_{s,t} * x_{t,u} = x_{s,u} holds on arbitrary triples by construction.

use alloc::vec::Vec;
use core::fmt;

use crate::group::{GroupElement, LieElement};
use crate::series::AlgebraError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    /// Geodesic through the chord: x_s = x_{t_k} * exp(theta * v_{k+1}).
    LinearLift,
    /// Linear in log coordinates of the segment increment.
    LogLinear,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LiftError {
    Empty,
    LengthMismatch { times: usize, points: usize },
    NonIncreasingTimes { index: usize },
    NonFiniteTime { index: usize },
    BasePointNotUnit { distance: f64 },
    QueryOutOfRange { t: f64, start: f64, end: f64 },
    ReversedInterval { s: f64, t: f64 },
    BadSamples { len: usize, dim: usize },
    Algebra(AlgebraError),
}

impl fmt::Display for LiftError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LiftError::Empty => write!(f, "path needs at least one grid point"),
            LiftError::LengthMismatch { times, points } => {
                write!(f, "{times} times vs {points} points")
            }
            LiftError::NonIncreasingTimes { index } => {
                write!(f, "times must be strictly increasing (violation at index {index})")
            }
            LiftError::NonFiniteTime { index } => write!(f, "non-finite time at index {index}"),
            LiftError::BasePointNotUnit { distance } => {
                write!(f, "first point must be the unit (coefficient distance {distance:e})")
            }
            LiftError::QueryOutOfRange { t, start, end } => {
                write!(f, "time {t} outside [{start}, {end}]")
            }
            LiftError::ReversedInterval { s, t } => write!(f, "reversed interval [{s}, {t}]"),
            LiftError::BadSamples { len, dim } => {
                write!(f, "sample buffer of length {len} is not a multiple of dim {dim}")
            }
            LiftError::Algebra(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for LiftError {}

impl From<AlgebraError> for LiftError {
    fn from(e: AlgebraError) -> Self {
        LiftError::Algebra(e)
    }
}

const UNIT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LiftedPath {
    times: Vec<f64>,
    points: Vec<GroupElement>,
    interpolation: Interpolation,
}

impl LiftedPath {
    pub fn new(
        times: Vec<f64>,
        points: Vec<GroupElement>,
        interpolation: Interpolation,
    ) -> Result<Self, LiftError> {
        if times.is_empty() {
            return Err(LiftError::Empty);
        }
        if times.len() != points.len() {
            return Err(LiftError::LengthMismatch { times: times.len(), points: points.len() });
        }
        for (i, w) in times.windows(2).enumerate() {
            if !w[0].is_finite() || !w[1].is_finite() {
                return Err(LiftError::NonFiniteTime { index: i });
            }
            if w[1] <= w[0] {
                return Err(LiftError::NonIncreasingTimes { index: i + 1 });
            }
        }
        if !times[0].is_finite() {
            return Err(LiftError::NonFiniteTime { index: 0 });
        }
        let shape = (points[0].dim(), points[0].depth());
        for p in &points[1..] {
            if (p.dim(), p.depth()) != shape {
                return Err(LiftError::Algebra(AlgebraError::DimensionMismatch {
                    left: shape,
                    right: (p.dim(), p.depth()),
                }));
            }
        }
        let unit = GroupElement::unit(shape.0, shape.1)?;
        let distance = points[0].max_abs_diff(&unit)?;
        if distance.is_nan() || distance > UNIT_TOLERANCE {
            return Err(LiftError::BasePointNotUnit { distance });
        }
        Ok(LiftedPath { times, points, interpolation })
    }

    /// Lift of the piecewise linear path through `samples` ((K+1) x dim,
    /// row-major) on the uniform grid over [0, 1].
    pub fn lift_linear_chords(
        dim: usize,
        depth: usize,
        samples: &[f64],
    ) -> Result<Self, LiftError> {
        let rows = sample_rows(dim, samples)?;
        let times = uniform_times(rows);
        Self::lift_linear_chords_at(dim, depth, &times, samples)
    }

    /// Same lift on an explicit strictly increasing grid.
    pub fn lift_linear_chords_at(
        dim: usize,
        depth: usize,
        times: &[f64],
        samples: &[f64],
    ) -> Result<Self, LiftError> {
        let rows = sample_rows(dim, samples)?;
        if times.len() != rows {
            return Err(LiftError::LengthMismatch { times: times.len(), points: rows });
        }
        let mut points = Vec::with_capacity(rows);
        let mut current = GroupElement::unit(dim, depth)?;
        points.push(current.clone());
        let mut chord = alloc::vec![0.0; dim];
        for k in 1..rows {
            for i in 0..dim {
                chord[i] = samples[k * dim + i] - samples[(k - 1) * dim + i];
            }
            let step = LieElement::from_level1(dim, depth, &chord)?.exp();
            current = current.mul(&step)?;
            points.push(current.clone());
        }
        Self::new(times.to_vec(), points, Interpolation::LinearLift)
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn depth(&self) -> usize {
        self.points[0].depth()
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[GroupElement] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn start_time(&self) -> f64 {
        self.times[0]
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().expect("nonempty")
    }

    /// Signature over the whole grid; equals the last point since the path
    /// starts at the unit.
    pub fn signature(&self) -> GroupElement {
        self.points.last().expect("nonempty").clone()
    }

    /// Level-1 coordinates of every grid point ((K+1) x dim, row-major).
    pub fn level1_samples(&self) -> Vec<f64> {
        let dim = self.dim();
        let mut out = Vec::with_capacity(self.points.len() * dim);
        for p in &self.points {
            out.extend_from_slice(p.series().level(1).expect("level 1"));
        }
        out
    }

    fn locate(&self, t: f64) -> Result<usize, LiftError> {
        if !t.is_finite() || t < self.start_time() || t > self.end_time() {
            return Err(LiftError::QueryOutOfRange {
                t,
                start: self.start_time(),
                end: self.end_time(),
            });
        }
        if self.times.len() == 1 {
            return Ok(0);
        }
        // index of the segment [t_k, t_{k+1}] containing t
        let k = self.times.partition_point(|&u| u <= t);
        Ok(if k == self.times.len() { k - 2 } else { k - 1 })
    }

    pub fn interpolate(&self, t: f64) -> Result<GroupElement, LiftError> {
        let k = self.locate(t)?;
        if t == self.times[k] {
            return Ok(self.points[k].clone());
        }
        if t == self.times[k + 1] {
            return Ok(self.points[k + 1].clone());
        }
        let theta = (t - self.times[k]) / (self.times[k + 1] - self.times[k]);
        let partial = match self.interpolation {
            Interpolation::LinearLift => {
                let a0 = self.points[k].series().level(1)?;
                let a1 = self.points[k + 1].series().level(1)?;
                let chord: Vec<f64> =
                    a0.iter().zip(a1).map(|(x, y)| theta * (y - x)).collect();
                LieElement::from_level1(self.dim(), self.depth(), &chord)?.exp()
            }
            Interpolation::LogLinear => {
                let inc = self.points[k].inverse().mul(&self.points[k + 1])?;
                inc.log().scale(theta).exp()
            }
        };
        Ok(self.points[k].mul(&partial)?)
    }

    /// Increment x_s^{-1} * x_t for s <= t inside the grid span.
    pub fn increment(&self, s: f64, t: f64) -> Result<GroupElement, LiftError> {
        if t < s {
            return Err(LiftError::ReversedInterval { s, t });
        }
        if s == t {
            self.locate(s)?;
            return Ok(GroupElement::unit(self.dim(), self.depth())?);
        }
        let left = self.interpolate(s)?;
        let right = self.interpolate(t)?;
        Ok(left.inverse().mul(&right)?)
    }
}

fn sample_rows(dim: usize, samples: &[f64]) -> Result<usize, LiftError> {
    if dim == 0 || samples.is_empty() || samples.len() % dim != 0 {
        return Err(LiftError::BadSamples { len: samples.len(), dim });
    }
    Ok(samples.len() / dim)
}

fn uniform_times(rows: usize) -> Vec<f64> {
    if rows == 1 {
        return alloc::vec![0.0];
    }
    (0..rows).map(|k| k as f64 / (rows - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_walk_path(
        dim: usize,
        depth: usize,
        rows: usize,
        rng: &mut ChaCha8Rng,
    ) -> LiftedPath {
        let mut samples = alloc::vec![0.0; rows * dim];
        for k in 1..rows {
            for i in 0..dim {
                samples[k * dim + i] =
                    samples[(k - 1) * dim + i] + rng.random_range(-1.0..1.0);
            }
        }
        LiftedPath::lift_linear_chords(dim, depth, &samples).unwrap()
    }

    #[test]
    fn unit_square_loop_has_area_one() {
        let samples = [0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0];
        let path = LiftedPath::lift_linear_chords(2, 2, &samples).unwrap();
        let sig = path.signature();
        let log = sig.log();
        assert!(log.level(1).unwrap().iter().all(|&c| c.abs() < 1e-14));
        assert!((log.bracket_coordinate(0, 1).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn straight_segment_lifts_to_one_exponential() {
        let samples = [0.0, 0.0, 0.25, -0.5, 0.5, -1.0, 0.75, -1.5, 1.0, -2.0];
        let path = LiftedPath::lift_linear_chords(2, 3, &samples).unwrap();
        let expected = LieElement::from_level1(2, 3, &[1.0, -2.0]).unwrap().exp();
        assert!(path.signature().max_abs_diff(&expected).unwrap() < 1e-12);
    }

    #[test]
    fn signature_ignores_time_parametrization() {
        let samples = [0.0, 1.0, -0.5, 2.0];
        let a = LiftedPath::lift_linear_chords(1, 3, &samples).unwrap();
        let times = [0.0, 0.1, 0.2, 1.0];
        let b = LiftedPath::lift_linear_chords_at(1, 3, &times, &samples).unwrap();
        assert_eq!(a.signature(), b.signature());
    }

    #[test]
    fn chen_identity_on_arbitrary_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for mode in [Interpolation::LinearLift, Interpolation::LogLinear] {
            let base = random_walk_path(2, 3, 9, &mut rng);
            let path =
                LiftedPath::new(base.times().to_vec(), base.points().to_vec(), mode).unwrap();
            for _ in 0..40 {
                let mut ts = [(); 3].map(|_| rng.random_range(0.0..1.0));
                ts.sort_by(f64::total_cmp);
                let [s, t, u] = ts;
                let lhs = path.increment(s, t).unwrap().mul(&path.increment(t, u).unwrap());
                let rhs = path.increment(s, u).unwrap();
                assert!(lhs.unwrap().max_abs_diff(&rhs).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn interpolation_modes_agree_on_chord_exponentials() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let base = random_walk_path(2, 4, 6, &mut rng);
        let log_linear =
            LiftedPath::new(base.times().to_vec(), base.points().to_vec(), Interpolation::LogLinear)
                .unwrap();
        for _ in 0..30 {
            let t = rng.random_range(0.0..1.0);
            let a = base.interpolate(t).unwrap();
            let b = log_linear.interpolate(t).unwrap();
            assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
        }
    }

    #[test]
    fn interpolation_hits_grid_points_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let path = random_walk_path(3, 2, 7, &mut rng);
        for (k, &t) in path.times().iter().enumerate() {
            assert_eq!(&path.interpolate(t).unwrap(), &path.points()[k]);
        }
    }

    #[test]
    fn rejects_bad_grids_and_queries() {
        let path = random_walk_path(2, 2, 4, &mut ChaCha8Rng::seed_from_u64(1));
        assert!(matches!(path.increment(0.5, 0.2), Err(LiftError::ReversedInterval { .. })));
        assert!(matches!(path.interpolate(1.5), Err(LiftError::QueryOutOfRange { .. })));
        let times = alloc::vec![0.0, 0.0, 1.0];
        let unit = GroupElement::unit(2, 2).unwrap();
        let pts = alloc::vec![unit.clone(), unit.clone(), unit.clone()];
        assert!(matches!(
            LiftedPath::new(times, pts, Interpolation::LinearLift),
            Err(LiftError::NonIncreasingTimes { .. })
        ));
        let shifted = LieElement::from_level1(2, 2, &[1.0, 0.0]).unwrap().exp();
        assert!(matches!(
            LiftedPath::new(
                alloc::vec![0.0, 1.0],
                alloc::vec![shifted.clone(), shifted],
                Interpolation::LinearLift
            ),
            Err(LiftError::BasePointNotUnit { .. })
        ));
    }

    #[test]
    fn increment_at_coincident_times_is_unit() {
        let path = random_walk_path(2, 2, 4, &mut ChaCha8Rng::seed_from_u64(2));
        let unit = GroupElement::unit(2, 2).unwrap();
        assert_eq!(path.increment(0.4, 0.4).unwrap(), unit);
    }
}
