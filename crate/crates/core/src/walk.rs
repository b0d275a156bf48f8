//! Rescaled lifts of d-dimensional random walks.
//!
//! `sample_walk` draws n i.i.d. increments, forms the partial-sum path
//! rescaled by n^{-1/2}, and lifts its chords to depth N on the uniform grid
//! {k/n}. Increment components are i.i.d. with mean zero and unit variance
//! unless normalization is explicitly disabled, so walk laws are directly
//! comparable across distribution kinds.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};

use crate::fmath::sqrt;
use crate::group::GroupElement;
use crate::lift::{Interpolation, LiftError, LiftedPath};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IncrementKind {
    Rademacher,
    Gaussian,
    Uniform,
    StudentT { dof: f64 },
    TwoPointAsymmetric,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WalkError {
    /// Student-t with dof <= 2 has no (finite) variance to normalize.
    HeavyTailVariance { dof: f64 },
    ConflictingNormalization,
    BadDimension { dim: usize },
    EmptyWalk,
    Lift(LiftError),
}

impl fmt::Display for WalkError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WalkError::HeavyTailVariance { dof } => {
                write!(f, "student-t tail index {dof} <= 2 has infinite variance")
            }
            WalkError::ConflictingNormalization => {
                write!(f, "scale/offset require normalization to be disabled")
            }
            WalkError::BadDimension { dim } => write!(f, "bad dimension {dim}"),
            WalkError::EmptyWalk => write!(f, "walk needs at least one increment"),
            WalkError::Lift(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for WalkError {}

impl From<LiftError> for WalkError {
    fn from(e: LiftError) -> Self {
        WalkError::Lift(e)
    }
}

/// Increment law with i.i.d. components; standardized unless stated.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementDistribution {
    kind: IncrementKind,
    dim: usize,
    normalize: bool,
    scale: f64,
    offset: f64,
}

impl IncrementDistribution {
    /// Mean zero, identity covariance (the default normalization).
    pub fn standardized(kind: IncrementKind, dim: usize) -> Result<Self, WalkError> {
        Self::build(kind, dim, true, 1.0, 0.0)
    }

    /// Components scale * xi + offset for a standardized xi; records the
    /// resulting mean/variance instead of normalizing.
    pub fn with_affine(
        kind: IncrementKind,
        dim: usize,
        scale: f64,
        offset: f64,
    ) -> Result<Self, WalkError> {
        Self::build(kind, dim, false, scale, offset)
    }

    fn build(
        kind: IncrementKind,
        dim: usize,
        normalize: bool,
        scale: f64,
        offset: f64,
    ) -> Result<Self, WalkError> {
        if dim == 0 {
            return Err(WalkError::BadDimension { dim });
        }
        if let IncrementKind::StudentT { dof } = kind {
            if dof.is_nan() || dof <= 2.0 {
                return Err(WalkError::HeavyTailVariance { dof });
            }
        }
        if normalize && (scale != 1.0 || offset != 0.0) {
            return Err(WalkError::ConflictingNormalization);
        }
        Ok(IncrementDistribution { kind, dim, normalize, scale, offset })
    }

    pub fn kind(&self) -> IncrementKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_normalized(&self) -> bool {
        self.normalize
    }

    /// Per-component mean and variance of the sampled increments.
    pub fn component_moments(&self) -> (f64, f64) {
        (self.offset, self.scale * self.scale)
    }

    /// Largest r with E|xi|^r finite, if not all moments exist.
    pub fn tail_index(&self) -> Option<f64> {
        match self.kind {
            IncrementKind::StudentT { dof } => Some(dof),
            _ => None,
        }
    }

    /// True when the component law has finitely many atoms (exact moment
    /// tables exist).
    pub fn has_finite_support(&self) -> bool {
        matches!(
            self.kind,
            IncrementKind::Rademacher | IncrementKind::TwoPointAsymmetric
        )
    }

    fn prepared(&self) -> Prepared {
        match self.kind {
            IncrementKind::Rademacher => Prepared::Rademacher,
            IncrementKind::Gaussian => Prepared::Gaussian,
            IncrementKind::Uniform => Prepared::Uniform,
            IncrementKind::StudentT { dof } => Prepared::StudentT {
                law: StudentT::new(dof).expect("dof > 2 checked at construction"),
                rescale: sqrt((dof - 2.0) / dof),
            },
            IncrementKind::TwoPointAsymmetric => Prepared::TwoPoint,
        }
    }

    /// Fills `out` (length dim) with one increment.
    pub fn sample_increment<R: Rng>(&self, rng: &mut R, out: &mut [f64]) {
        let prep = self.prepared();
        self.sample_with(&prep, rng, out);
    }

    fn sample_with<R: Rng>(&self, prep: &Prepared, rng: &mut R, out: &mut [f64]) {
        for slot in out.iter_mut() {
            let standardized = match prep {
                Prepared::Rademacher => {
                    if rng.random::<bool>() {
                        1.0
                    } else {
                        -1.0
                    }
                }
                Prepared::Gaussian => StandardNormal.sample(rng),
                // U(-sqrt 3, sqrt 3) has unit variance
                Prepared::Uniform => rng.random_range(-SQRT_3..SQRT_3),
                Prepared::StudentT { law, rescale } => rescale * law.sample(rng),
                // atoms 2 (prob 1/5) and -1/2 (prob 4/5): mean 0, variance 1,
                // third moment 3/2
                Prepared::TwoPoint => {
                    if rng.random::<f64>() < 0.2 {
                        2.0
                    } else {
                        -0.5
                    }
                }
            };
            *slot = self.scale * standardized + self.offset;
        }
    }
}

const SQRT_3: f64 = 1.7320508075688772;

enum Prepared {
    Rademacher,
    Gaussian,
    Uniform,
    StudentT { law: StudentT<f64>, rescale: f64 },
    TwoPoint,
}

/// Parameters of one rescaled lifted walk.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkSpec {
    pub n: usize,
    pub depth: usize,
    pub distribution: IncrementDistribution,
    pub interpolation: Interpolation,
}

impl WalkSpec {
    pub fn new(
        n: usize,
        depth: usize,
        distribution: IncrementDistribution,
    ) -> Result<Self, WalkError> {
        if n == 0 {
            return Err(WalkError::EmptyWalk);
        }
        Ok(WalkSpec { n, depth, distribution, interpolation: Interpolation::LinearLift })
    }
}

/// Lift of the rescaled walk: grid point k carries the signature of the
/// piecewise linear path through n^{-1/2} (xi_1 + ... + xi_k).
pub fn sample_walk<R: Rng>(spec: &WalkSpec, rng: &mut R) -> Result<LiftedPath, WalkError> {
    let dim = spec.distribution.dim();
    let rescale = 1.0 / sqrt(spec.n as f64);
    let prep = spec.distribution.prepared();
    let mut samples = vec![0.0; (spec.n + 1) * dim];
    let mut xi = vec![0.0; dim];
    for k in 1..=spec.n {
        spec.distribution.sample_with(&prep, rng, &mut xi);
        for i in 0..dim {
            samples[k * dim + i] = samples[(k - 1) * dim + i] + rescale * xi[i];
        }
    }
    let path = LiftedPath::lift_linear_chords(dim, spec.depth, &samples)?;
    match spec.interpolation {
        Interpolation::LinearLift => Ok(path),
        Interpolation::LogLinear => Ok(LiftedPath::new(
            path.times().to_vec(),
            path.points().to_vec(),
            Interpolation::LogLinear,
        )?),
    }
}

/// Walk whose increments are arbitrary group elements: grid point k carries
/// the product of the first k increments, each dilated by n^{-1/2}.
pub fn sample_group_walk<R: Rng>(
    n: usize,
    interpolation: Interpolation,
    rng: &mut R,
    mut increment: impl FnMut(&mut R) -> GroupElement,
) -> Result<LiftedPath, WalkError> {
    if n == 0 {
        return Err(WalkError::EmptyWalk);
    }
    let rescale = 1.0 / sqrt(n as f64);
    let first = increment(rng).dilate(rescale);
    let (dim, depth) = (first.dim(), first.depth());
    let mut points = Vec::with_capacity(n + 1);
    points.push(GroupElement::unit(dim, depth).map_err(LiftError::from)?);
    points.push(first);
    for _ in 2..=n {
        let step = increment(rng).dilate(rescale);
        let next = points.last().expect("nonempty").mul(&step).map_err(LiftError::from)?;
        points.push(next);
    }
    let times: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
    Ok(LiftedPath::new(times, points, interpolation)?)
}

/// Independent, reproducible stream for one replica of an experiment.
///
/// All replicas share the master seed and differ only in the stream id, so
/// any subset can be regenerated without sampling the others.
pub fn replica_rng(master_seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replica);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::LieElement;
    use crate::series::TensorSeries;

    fn dist(kind: IncrementKind) -> IncrementDistribution {
        IncrementDistribution::standardized(kind, 1).unwrap()
    }

    #[test]
    fn component_laws_are_standardized() {
        let kinds = [
            IncrementKind::Rademacher,
            IncrementKind::Gaussian,
            IncrementKind::Uniform,
            IncrementKind::StudentT { dof: 7.0 },
            IncrementKind::TwoPointAsymmetric,
        ];
        for kind in kinds {
            let d = dist(kind);
            let mut rng = replica_rng(100, 0);
            let mut x = [0.0];
            let (mut sum, mut sumsq) = (0.0, 0.0);
            let reps = 200_000;
            for _ in 0..reps {
                d.sample_increment(&mut rng, &mut x);
                sum += x[0];
                sumsq += x[0] * x[0];
            }
            let mean = sum / reps as f64;
            let var = sumsq / reps as f64 - mean * mean;
            assert!(mean.abs() < 0.02, "{kind:?}: mean {mean}");
            assert!((var - 1.0).abs() < 0.05, "{kind:?}: variance {var}");
        }
    }

    #[test]
    fn student_t_with_small_dof_is_refused() {
        assert!(matches!(
            IncrementDistribution::standardized(IncrementKind::StudentT { dof: 2.0 }, 1),
            Err(WalkError::HeavyTailVariance { .. })
        ));
    }

    #[test]
    fn affine_form_requires_disabled_normalization() {
        assert!(matches!(
            IncrementDistribution::build(IncrementKind::Gaussian, 1, true, 2.0, 0.0),
            Err(WalkError::ConflictingNormalization)
        ));
        let d = IncrementDistribution::with_affine(IncrementKind::Gaussian, 1, 2.0, 0.5).unwrap();
        assert_eq!(d.component_moments(), (0.5, 4.0));
    }

    #[test]
    fn walks_are_deterministic_in_the_seed() {
        let spec = WalkSpec::new(
            64,
            2,
            IncrementDistribution::standardized(IncrementKind::Gaussian, 2).unwrap(),
        )
        .unwrap();
        let a = sample_walk(&spec, &mut replica_rng(7, 3)).unwrap();
        let b = sample_walk(&spec, &mut replica_rng(7, 3)).unwrap();
        assert_eq!(a, b);
        let c = sample_walk(&spec, &mut replica_rng(7, 4)).unwrap();
        assert!(a.signature().max_abs_diff(&c.signature()).unwrap() > 1e-6);
    }

    #[test]
    fn walk_equals_product_of_dilated_exponentials() {
        let spec = WalkSpec::new(
            16,
            3,
            IncrementDistribution::standardized(IncrementKind::Rademacher, 2).unwrap(),
        )
        .unwrap();
        let path = sample_walk(&spec, &mut replica_rng(11, 0)).unwrap();

        // regenerate the same increments and multiply exponentials directly
        let mut rng = replica_rng(11, 0);
        let dist = &spec.distribution;
        let mut xi = [0.0; 2];
        let mut g = GroupElement::unit(2, 3).unwrap();
        let rescale = 1.0 / sqrt(16.0);
        for k in 1..=16 {
            dist.sample_increment(&mut rng, &mut xi);
            let step = LieElement::from_level1(2, 3, &[rescale * xi[0], rescale * xi[1]])
                .unwrap()
                .exp();
            g = g.mul(&step).unwrap();
            assert!(path.points()[k].max_abs_diff(&g).unwrap() < 1e-12);
        }
    }

    #[test]
    fn endpoint_covariance_matches_brownian_scaling() {
        let spec = WalkSpec::new(
            32,
            2,
            IncrementDistribution::standardized(IncrementKind::Uniform, 2).unwrap(),
        )
        .unwrap();
        let reps = 4000;
        let mut sumsq = 0.0;
        for r in 0..reps {
            let path = sample_walk(&spec, &mut replica_rng(13, r)).unwrap();
            let lvl1 = path.signature().series().level(1).unwrap().to_vec();
            sumsq += lvl1.iter().map(|c| c * c).sum::<f64>();
        }
        // E |level-1 endpoint|^2 = dim regardless of n
        let mean = sumsq / reps as f64;
        assert!((mean - 2.0).abs() < 0.15, "mean square {mean}");
    }

    #[test]
    fn group_walk_accumulates_extra_area() {
        // two deterministic increments exp(xi + eta [e1, e2])
        let make = |v: [f64; 2], eta: f64| {
            let mut s = TensorSeries::zero(2, 2).unwrap();
            s.level_mut(1).unwrap().copy_from_slice(&v);
            *s.coeff_mut(2, &[0, 1]).unwrap() = eta;
            *s.coeff_mut(2, &[1, 0]).unwrap() = -eta;
            LieElement::from_series(s).unwrap().exp()
        };
        let incs = [make([1.0, 0.0], 0.3), make([0.0, 1.0], -0.1)];
        let mut idx = 0usize;
        let mut rng = replica_rng(0, 0);
        let path = sample_group_walk(2, Interpolation::LogLinear, &mut rng, |_| {
            idx += 1;
            incs[idx - 1].clone()
        })
        .unwrap();
        // log of exp(a) exp(b): bracket part (0.3 - 0.1) + 1/2, then dilation
        // by (2^{-1/2})^2 = 1/2 on level 2
        let got = path.signature().log().bracket_coordinate(0, 1).unwrap();
        assert!((got - 0.35).abs() < 1e-14);
        assert_eq!(path.interpolation(), Interpolation::LogLinear);
    }

    #[test]
    fn replica_streams_do_not_collide() {
        use alloc::collections::BTreeSet;
        let mut seen = BTreeSet::new();
        for replica in 0..10_000u64 {
            let mut rng = replica_rng(42, replica);
            assert!(seen.insert(rng.random::<u64>()));
        }
    }
}
