//! Group-like and Lie views of float tensor series.
//!
//! `GroupElement` wraps a series with scalar part exactly 1 (the chart in
//! which lifted paths and signatures live); `LieElement` wraps a series with
//! zero scalar part (log coordinates). The wrappers keep the full dense
//! level arrays; the level-2 bracket coordinates are exposed as the
//! antisymmetric part, which for logarithms of group elements is the level-2
//! block itself.

use alloc::vec::Vec;

use crate::series::{AlgebraError, TensorSeries};

#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    series: TensorSeries<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LieElement {
    series: TensorSeries<f64>,
}

impl GroupElement {
    pub fn unit(dim: usize, depth: usize) -> Result<Self, AlgebraError> {
        Ok(GroupElement { series: TensorSeries::unit(dim, depth)? })
    }

    /// Wraps a series after checking the scalar part is exactly 1.
    pub fn from_series(series: TensorSeries<f64>) -> Result<Self, AlgebraError> {
        if *series.scalar() != 1.0 {
            return Err(AlgebraError::ExpectedUnitScalar);
        }
        Ok(GroupElement { series })
    }

    pub fn series(&self) -> &TensorSeries<f64> {
        &self.series
    }

    pub fn dim(&self) -> usize {
        self.series.dim()
    }

    pub fn depth(&self) -> usize {
        self.series.depth()
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self, AlgebraError> {
        Ok(GroupElement { series: self.series.mul(&rhs.series)? })
    }

    pub fn inverse(&self) -> Self {
        // scalar part is 1 by construction, so log/exp cannot fail
        GroupElement { series: self.series.inverse().expect("group element") }
    }

    pub fn log(&self) -> LieElement {
        LieElement { series: self.series.log().expect("group element") }
    }

    pub fn dilate(&self, factor: f64) -> Self {
        GroupElement { series: self.series.dilate(&factor) }
    }

    /// Level-m log coordinates (dense block of d^m values).
    pub fn project(&self, m: usize) -> Result<Vec<f64>, AlgebraError> {
        Ok(self.log().series.level(m)?.to_vec())
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> Result<f64, AlgebraError> {
        self.series.max_abs_diff(&rhs.series)
    }

    pub fn is_finite(&self) -> bool {
        self.series.is_finite()
    }
}

impl LieElement {
    pub fn zero(dim: usize, depth: usize) -> Result<Self, AlgebraError> {
        Ok(LieElement { series: TensorSeries::zero(dim, depth)? })
    }

    pub fn from_series(series: TensorSeries<f64>) -> Result<Self, AlgebraError> {
        if *series.scalar() != 0.0 {
            return Err(AlgebraError::ExpectedZeroScalar);
        }
        Ok(LieElement { series })
    }

    pub fn from_level1(dim: usize, depth: usize, v: &[f64]) -> Result<Self, AlgebraError> {
        let mut series = TensorSeries::zero(dim, depth)?;
        if v.len() != dim {
            return Err(AlgebraError::BadWord { level: 1, word_len: v.len(), letter: 0, dim });
        }
        series.level_mut(1)?.copy_from_slice(v);
        Ok(LieElement { series })
    }

    pub fn series(&self) -> &TensorSeries<f64> {
        &self.series
    }

    pub fn dim(&self) -> usize {
        self.series.dim()
    }

    pub fn depth(&self) -> usize {
        self.series.depth()
    }

    pub fn level(&self, m: usize) -> Result<&[f64], AlgebraError> {
        self.series.level(m)
    }

    pub fn coeff(&self, m: usize, word: &[usize]) -> Result<f64, AlgebraError> {
        self.series.coeff(m, word).copied()
    }

    pub fn coeff_mut(&mut self, m: usize, word: &[usize]) -> Result<&mut f64, AlgebraError> {
        self.series.coeff_mut(m, word)
    }

    /// Antisymmetric level-2 coordinate (a[i,j] - a[j,i]) / 2 for i < j.
    pub fn bracket_coordinate(&self, i: usize, j: usize) -> Result<f64, AlgebraError> {
        if i >= j {
            return Err(AlgebraError::BadWord {
                level: 2,
                word_len: 2,
                letter: i,
                dim: self.dim(),
            });
        }
        let upper = self.series.coeff(2, &[i, j])?;
        let lower = self.series.coeff(2, &[j, i])?;
        Ok((upper - lower) / 2.0)
    }

    pub fn exp(&self) -> GroupElement {
        // scalar part is 0 by construction, so exp cannot fail
        GroupElement { series: self.series.exp().expect("lie element") }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self, AlgebraError> {
        Ok(LieElement { series: self.series.add(&rhs.series)? })
    }

    pub fn neg(&self) -> Self {
        LieElement { series: self.series.neg() }
    }

    pub fn dilate(&self, factor: f64) -> Self {
        LieElement { series: self.series.dilate(&factor) }
    }

    pub fn scale(&self, factor: f64) -> Self {
        LieElement { series: self.series.scale(&factor) }
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> Result<f64, AlgebraError> {
        self.series.max_abs_diff(&rhs.series)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_lie(dim: usize, depth: usize, rng: &mut ChaCha8Rng) -> LieElement {
        let mut s = TensorSeries::zero(dim, depth).unwrap();
        for m in 1..=depth {
            for c in s.level_mut(m).unwrap() {
                *c = rng.random_range(-1.0..1.0);
            }
        }
        LieElement::from_series(s).unwrap()
    }

    #[test]
    fn project_gives_log_coordinates() {
        let e1 = LieElement::from_level1(2, 2, &[1.0, 0.0]).unwrap();
        let e2 = LieElement::from_level1(2, 2, &[0.0, 1.0]).unwrap();
        let g = e1.exp().mul(&e2.exp()).unwrap();
        assert_eq!(g.project(1).unwrap(), &[1.0, 1.0]);
        assert_eq!(g.project(2).unwrap(), &[0.0, 0.5, -0.5, 0.0]);
        let l = g.log();
        assert_eq!(l.bracket_coordinate(0, 1).unwrap(), 0.5);
        assert!(l.bracket_coordinate(1, 1).is_err());
    }

    #[test]
    fn inverse_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let g = random_lie(3, 3, &mut rng).exp();
            let unit = GroupElement::unit(3, 3).unwrap();
            let prod = g.mul(&g.inverse()).unwrap();
            assert!(prod.max_abs_diff(&unit).unwrap() < 1e-12);
        }
    }

    #[test]
    fn scalar_part_is_enforced() {
        let zero = TensorSeries::<f64>::zero(2, 2).unwrap();
        assert!(GroupElement::from_series(zero.clone()).is_err());
        assert!(LieElement::from_series(TensorSeries::unit(2, 2).unwrap()).is_err());
        assert!(LieElement::from_series(zero).is_ok());
    }
}
