//! Dense truncated tensor series over R^d up to a fixed level.
//!
//! A series stores one coefficient array per level m = 0..=N, the level-m
//! array holding d^m entries indexed by words (i_1, ..., i_m) in row-major
//! order. Multiplication truncates beyond level N, which makes elements
//! with zero scalar part nilpotent and keeps exp/log finite sums.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::scalar::Coeff;

/// Hard caps keeping coefficient storage bounded; sized for d <= 4, N <= 5
/// with headroom for deep d = 1 or wide shallow cases.
pub const MAX_DIM: usize = 8;
pub const MAX_DEPTH: usize = 16;
const MAX_TOTAL_COEFFS: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    UnsupportedShape { dim: usize, depth: usize },
    DimensionMismatch { left: (usize, usize), right: (usize, usize) },
    LevelOutOfRange { level: usize, depth: usize },
    BadWord { level: usize, word_len: usize, letter: usize, dim: usize },
    ExpectedZeroScalar,
    ExpectedUnitScalar,
}

impl fmt::Display for AlgebraError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgebraError::UnsupportedShape { dim, depth } => {
                write!(f, "unsupported shape: dim {dim}, depth {depth}")
            }
            AlgebraError::DimensionMismatch { left, right } => write!(
                f,
                "dimension mismatch: (d, N) = ({}, {}) vs ({}, {})",
                left.0, left.1, right.0, right.1
            ),
            AlgebraError::LevelOutOfRange { level, depth } => {
                write!(f, "level {level} out of range for depth {depth}")
            }
            AlgebraError::BadWord { level, word_len, letter, dim } => write!(
                f,
                "bad word for level {level}: length {word_len}, letter {letter}, dim {dim}"
            ),
            AlgebraError::ExpectedZeroScalar => write!(f, "series must have zero scalar part"),
            AlgebraError::ExpectedUnitScalar => write!(f, "series must have unit scalar part"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for AlgebraError {}

/// Truncated tensor series with coefficients in `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorSeries<C> {
    dim: usize,
    depth: usize,
    levels: Vec<Vec<C>>,
}

fn check_shape(dim: usize, depth: usize) -> Result<(), AlgebraError> {
    if dim == 0 || depth == 0 || dim > MAX_DIM || depth > MAX_DEPTH {
        return Err(AlgebraError::UnsupportedShape { dim, depth });
    }
    let mut total = 1usize;
    let mut size = 1usize;
    for _ in 1..=depth {
        size = size
            .checked_mul(dim)
            .ok_or(AlgebraError::UnsupportedShape { dim, depth })?;
        total = total
            .checked_add(size)
            .ok_or(AlgebraError::UnsupportedShape { dim, depth })?;
        if total > MAX_TOTAL_COEFFS {
            return Err(AlgebraError::UnsupportedShape { dim, depth });
        }
    }
    Ok(())
}

/// Row-major position of the word `multi` inside its level block.
pub fn word_index(dim: usize, multi: &[usize]) -> usize {
    let mut idx = 0;
    for &letter in multi {
        idx = idx * dim + letter;
    }
    idx
}

impl<C: Coeff> TensorSeries<C> {
    pub fn zero(dim: usize, depth: usize) -> Result<Self, AlgebraError> {
        check_shape(dim, depth)?;
        let mut levels = Vec::with_capacity(depth + 1);
        let mut size = 1usize;
        for m in 0..=depth {
            if m > 0 {
                size *= dim;
            }
            levels.push(vec![C::zero(); size]);
        }
        Ok(TensorSeries { dim, depth, levels })
    }

    pub fn unit(dim: usize, depth: usize) -> Result<Self, AlgebraError> {
        let mut out = Self::zero(dim, depth)?;
        out.levels[0][0] = C::one();
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn scalar(&self) -> &C {
        &self.levels[0][0]
    }

    pub fn level(&self, m: usize) -> Result<&[C], AlgebraError> {
        self.levels
            .get(m)
            .map(Vec::as_slice)
            .ok_or(AlgebraError::LevelOutOfRange { level: m, depth: self.depth })
    }

    pub fn level_mut(&mut self, m: usize) -> Result<&mut [C], AlgebraError> {
        let depth = self.depth;
        self.levels
            .get_mut(m)
            .map(Vec::as_mut_slice)
            .ok_or(AlgebraError::LevelOutOfRange { level: m, depth })
    }

    fn check_word(&self, m: usize, multi: &[usize]) -> Result<usize, AlgebraError> {
        if m > self.depth {
            return Err(AlgebraError::LevelOutOfRange { level: m, depth: self.depth });
        }
        if multi.len() != m || multi.iter().any(|&l| l >= self.dim) {
            return Err(AlgebraError::BadWord {
                level: m,
                word_len: multi.len(),
                letter: multi.iter().copied().find(|&l| l >= self.dim).unwrap_or(0),
                dim: self.dim,
            });
        }
        Ok(word_index(self.dim, multi))
    }

    pub fn coeff(&self, m: usize, multi: &[usize]) -> Result<&C, AlgebraError> {
        let idx = self.check_word(m, multi)?;
        Ok(&self.levels[m][idx])
    }

    pub fn coeff_mut(&mut self, m: usize, multi: &[usize]) -> Result<&mut C, AlgebraError> {
        let idx = self.check_word(m, multi)?;
        Ok(&mut self.levels[m][idx])
    }

    pub fn is_zero(&self) -> bool {
        self.levels.iter().all(|lvl| lvl.iter().all(C::is_zero))
    }

    /// Lowest level carrying a nonzero coefficient; `None` for the zero series.
    fn lowest_level(&self) -> Option<usize> {
        self.levels
            .iter()
            .position(|lvl| lvl.iter().any(|c| !c.is_zero()))
    }

    fn same_shape(&self, rhs: &Self) -> Result<(), AlgebraError> {
        if self.dim != rhs.dim || self.depth != rhs.depth {
            return Err(AlgebraError::DimensionMismatch {
                left: (self.dim, self.depth),
                right: (rhs.dim, rhs.depth),
            });
        }
        Ok(())
    }

    pub fn add(&self, rhs: &Self) -> Result<Self, AlgebraError> {
        self.same_shape(rhs)?;
        let mut out = self.clone();
        out.add_assign(rhs);
        Ok(out)
    }

    fn add_assign(&mut self, rhs: &Self) {
        for (lvl, rlvl) in self.levels.iter_mut().zip(&rhs.levels) {
            for (c, r) in lvl.iter_mut().zip(rlvl) {
                if !r.is_zero() {
                    *c = c.clone() + r.clone();
                }
            }
        }
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self, AlgebraError> {
        self.same_shape(rhs)?;
        let mut out = self.clone();
        for (lvl, rlvl) in out.levels.iter_mut().zip(&rhs.levels) {
            for (c, r) in lvl.iter_mut().zip(rlvl) {
                if !r.is_zero() {
                    *c = c.clone() - r.clone();
                }
            }
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        self.map(|c| -c.clone())
    }

    pub fn scale(&self, factor: &C) -> Self {
        self.map(|c| c.clone() * factor.clone())
    }

    fn map(&self, f: impl Fn(&C) -> C) -> Self {
        let levels = self
            .levels
            .iter()
            .map(|lvl| lvl.iter().map(|c| if c.is_zero() { C::zero() } else { f(c) }).collect())
            .collect();
        TensorSeries { dim: self.dim, depth: self.depth, levels }
    }

    /// Dilation: multiplies level m by `factor^m`.
    pub fn dilate(&self, factor: &C) -> Self {
        let mut out = self.clone();
        let mut power = C::one();
        for m in 1..=self.depth {
            power = power * factor.clone();
            for c in out.levels[m].iter_mut() {
                if !c.is_zero() {
                    *c = c.clone() * power.clone();
                }
            }
        }
        out
    }

    /// Truncated tensor product.
    pub fn mul(&self, rhs: &Self) -> Result<Self, AlgebraError> {
        self.same_shape(rhs)?;
        let d = self.dim;
        let mut out = Self::zero(d, self.depth)?;
        for m in 0..=self.depth {
            let mut rhs_size = d.pow(m as u32);
            for j in 0..=m {
                if j > 0 {
                    rhs_size /= d;
                }
                let left = &self.levels[j];
                let right = &rhs.levels[m - j];
                let target = &mut out.levels[m];
                for (i1, a) in left.iter().enumerate() {
                    if a.is_zero() {
                        continue;
                    }
                    let base = i1 * rhs_size;
                    for (i2, b) in right.iter().enumerate() {
                        if b.is_zero() {
                            continue;
                        }
                        let t = &mut target[base + i2];
                        *t = t.clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        Ok(out)
    }

    /// Truncated exponential of a series with zero scalar part.
    pub fn exp(&self) -> Result<Self, AlgebraError> {
        if !self.scalar().is_zero() {
            return Err(AlgebraError::ExpectedZeroScalar);
        }
        let mut acc = Self::unit(self.dim, self.depth)?;
        let lowest = match self.lowest_level() {
            Some(l) => l.max(1),
            None => return Ok(acc),
        };
        let mut term = self.clone();
        acc.add_assign(&term);
        for k in 2..=self.depth {
            if k * lowest > self.depth {
                break;
            }
            term = term.mul(self)?.scale(&C::from_ratio(1, k as u64));
            acc.add_assign(&term);
        }
        Ok(acc)
    }

    /// Truncated logarithm of a series with unit scalar part.
    pub fn log(&self) -> Result<Self, AlgebraError> {
        if *self.scalar() != C::one() {
            return Err(AlgebraError::ExpectedUnitScalar);
        }
        let mut u = self.clone();
        u.levels[0][0] = C::zero();
        let lowest = match u.lowest_level() {
            Some(l) => l,
            None => return TensorSeries::zero(self.dim, self.depth),
        };
        let mut acc = u.clone();
        let mut power = u.clone();
        for k in 2..=self.depth {
            if k * lowest > self.depth {
                break;
            }
            power = power.mul(&u)?;
            let sign = if k % 2 == 0 { -1 } else { 1 };
            acc.add_assign(&power.scale(&C::from_ratio(sign, k as u64)));
        }
        Ok(acc)
    }

    /// Group inverse exp(-log self); requires unit scalar part.
    pub fn inverse(&self) -> Result<Self, AlgebraError> {
        self.log()?.neg().exp()
    }
}

impl TensorSeries<f64> {
    /// Largest absolute coefficient difference across all levels.
    pub fn max_abs_diff(&self, rhs: &Self) -> Result<f64, AlgebraError> {
        self.same_shape(rhs)?;
        let mut worst = 0.0f64;
        for (lvl, rlvl) in self.levels.iter().zip(&rhs.levels) {
            for (a, b) in lvl.iter().zip(rlvl) {
                let diff = (a - b).abs();
                if diff > worst {
                    worst = diff;
                }
            }
        }
        Ok(worst)
    }

    pub fn max_abs(&self) -> f64 {
        let mut worst = 0.0f64;
        for lvl in &self.levels {
            for c in lvl {
                if c.abs() > worst {
                    worst = c.abs();
                }
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.levels.iter().all(|lvl| lvl.iter().all(|c| c.is_finite()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn basis(dim: usize, depth: usize, letter: usize) -> TensorSeries<f64> {
        let mut v = TensorSeries::zero(dim, depth).unwrap();
        *v.coeff_mut(1, &[letter]).unwrap() = 1.0;
        v
    }

    fn random_lie(dim: usize, depth: usize, rng: &mut ChaCha8Rng) -> TensorSeries<f64> {
        let mut s = TensorSeries::zero(dim, depth).unwrap();
        for m in 1..=depth {
            for c in s.level_mut(m).unwrap() {
                *c = rng.random_range(-1.0..1.0);
            }
        }
        s
    }

    #[test]
    fn product_of_two_exponentials_matches_hand_expansion() {
        let g = basis(2, 2, 0).exp().unwrap().mul(&basis(2, 2, 1).exp().unwrap()).unwrap();
        assert_eq!(*g.scalar(), 1.0);
        assert_eq!(g.level(1).unwrap(), &[1.0, 1.0]);
        // level 2 of (1 + e1 + e1e1/2)(1 + e2 + e2e2/2): e1e1/2 + e1e2 + e2e2/2
        assert_eq!(g.level(2).unwrap(), &[0.5, 1.0, 0.0, 0.5]);
    }

    #[test]
    fn log_of_exponential_product_gives_half_area() {
        let g = basis(2, 2, 0).exp().unwrap().mul(&basis(2, 2, 1).exp().unwrap()).unwrap();
        let l = g.log().unwrap();
        assert_eq!(l.level(1).unwrap(), &[1.0, 1.0]);
        // antisymmetric level 2: +1/2 e1e2 - 1/2 e2e1
        assert_eq!(l.level(2).unwrap(), &[0.0, 0.5, -0.5, 0.0]);
    }

    #[test]
    fn exact_rational_half_area() {
        let one = BigRational::from(BigInt::from(1));
        let mut e1 = TensorSeries::<BigRational>::zero(2, 3).unwrap();
        *e1.coeff_mut(1, &[0]).unwrap() = one.clone();
        let mut e2 = TensorSeries::<BigRational>::zero(2, 3).unwrap();
        *e2.coeff_mut(1, &[1]).unwrap() = one.clone();
        let l = e1.exp().unwrap().mul(&e2.exp().unwrap()).unwrap().log().unwrap();
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        assert_eq!(*l.coeff(2, &[0, 1]).unwrap(), half);
        assert_eq!(*l.coeff(2, &[1, 0]).unwrap(), -half);
        // depth 3: [e1,[e1,e2]]/12 has coefficient 1/12 on word (0,0,1)
        let twelfth = BigRational::new(BigInt::from(1), BigInt::from(12));
        assert_eq!(*l.coeff(3, &[0, 0, 1]).unwrap(), twelfth);
    }

    #[test]
    fn exp_log_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let a = random_lie(2, 4, &mut rng);
            let back = a.exp().unwrap().log().unwrap();
            assert!(a.max_abs_diff(&back).unwrap() < 1e-12);
        }
    }

    #[test]
    fn multiplication_is_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let a = random_lie(3, 3, &mut rng).exp().unwrap();
            let b = random_lie(3, 3, &mut rng).exp().unwrap();
            let c = random_lie(3, 3, &mut rng).exp().unwrap();
            let left = a.mul(&b).unwrap().mul(&c).unwrap();
            let right = a.mul(&b.mul(&c).unwrap()).unwrap();
            assert!(left.max_abs_diff(&right).unwrap() < 1e-12);
        }
    }

    #[test]
    fn dilation_is_a_morphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let lambda = rng.random_range(-2.0..2.0);
            let a = random_lie(2, 4, &mut rng).exp().unwrap();
            let b = random_lie(2, 4, &mut rng).exp().unwrap();
            let lhs = a.mul(&b).unwrap().dilate(&lambda);
            let rhs = a.dilate(&lambda).mul(&b.dilate(&lambda)).unwrap();
            assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12);
        }
    }

    #[test]
    fn dilation_commutes_with_exp() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let lambda = rng.random_range(-2.0..2.0);
            let a = random_lie(2, 4, &mut rng);
            let lhs = a.exp().unwrap().dilate(&lambda);
            let rhs = a.dilate(&lambda).exp().unwrap();
            assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12);
        }
    }

    #[test]
    fn inverse_multiplies_to_unit() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let g = random_lie(2, 4, &mut rng).exp().unwrap();
            let prod = g.mul(&g.inverse().unwrap()).unwrap();
            let unit = TensorSeries::unit(2, 4).unwrap();
            assert!(prod.max_abs_diff(&unit).unwrap() < 1e-12);
        }
    }

    #[test]
    fn shape_errors() {
        let a = TensorSeries::<f64>::zero(2, 2).unwrap();
        let b = TensorSeries::<f64>::zero(3, 2).unwrap();
        assert!(matches!(a.mul(&b), Err(AlgebraError::DimensionMismatch { .. })));
        assert!(matches!(a.level(3), Err(AlgebraError::LevelOutOfRange { .. })));
        assert!(matches!(a.coeff(1, &[2]), Err(AlgebraError::BadWord { .. })));
        assert!(matches!(
            TensorSeries::<f64>::zero(0, 2),
            Err(AlgebraError::UnsupportedShape { .. })
        ));
        assert!(TensorSeries::<f64>::unit(2, 2).unwrap().exp().is_err());
        assert!(TensorSeries::<f64>::zero(2, 2).unwrap().log().is_err());
    }
}
