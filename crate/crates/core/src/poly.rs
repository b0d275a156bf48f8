//! Exact polynomials in the log-chart coordinates of the truncated tensor
//! group.
//!
//! Variables are the dense log coordinates a^{m;w} (level m, word w), graded
//! so that a level-m variable counts m toward the degree of a monomial.
//! Coefficients are exact rationals: the degree bookkeeping downstream (the
//! averaging operator dropping the degree by two, the binomial moment
//! identity) is an exact algebraic statement that floating point would blur.
//!
//! Polynomials in a single variable group describe functions on the group;
//! `cbh_compose` rewrites such a function of a product of two group elements
//! as a polynomial in two variable groups (left factor `g`, right factor
//! `x`), computed mechanically by truncated exp/log with rational
//! coefficients rather than by hand-expanded commutator formulas.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::scalar::Coeff;
use crate::series::{AlgebraError, TensorSeries, MAX_DEPTH, MAX_DIM};

/// Which copy of the log coordinates a variable refers to.
///
/// `Base` is the single-argument chart; `Left`/`Right` are the two factors
/// produced by `cbh_compose` (printed `g` and `x`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VariableGroup {
    Base,
    Left,
    Right,
}

impl VariableGroup {
    fn letter(self) -> &'static str {
        match self {
            VariableGroup::Base => "a",
            VariableGroup::Left => "g",
            VariableGroup::Right => "x",
        }
    }
}

/// One log coordinate: level m in 1..=N, flat word index in 0..d^m.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable {
    pub group: VariableGroup,
    pub level: u8,
    pub index: u32,
}

impl Variable {
    pub fn new(group: VariableGroup, level: usize, index: usize) -> Self {
        Variable { group, level: level as u8, index: index as u32 }
    }

    /// Word letters (0-based) of this variable's index for dimension `dim`.
    pub fn word(&self, dim: usize) -> Vec<usize> {
        let mut letters = vec![0usize; self.level as usize];
        let mut rest = self.index as usize;
        for slot in letters.iter_mut().rev() {
            *slot = rest % dim;
            rest /= dim;
        }
        letters
    }
}

fn write_variable(f: &mut fmt::Formatter<'_>, var: &Variable, dim: usize) -> fmt::Result {
    write!(f, "{}^{{{};", var.group.letter(), var.level)?;
    for letter in var.word(dim) {
        write!(f, "{}", letter + 1)?;
    }
    write!(f, "}}")
}

/// Product of variables with positive exponents, kept sorted by variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial {
    factors: Vec<(Variable, u32)>,
}

impl Monomial {
    pub fn unit() -> Self {
        Monomial { factors: Vec::new() }
    }

    /// Builds a monomial from (variable, exponent) pairs; sorts, merges
    /// repeats, and drops zero exponents.
    pub fn new(mut factors: Vec<(Variable, u32)>) -> Self {
        factors.retain(|&(_, e)| e > 0);
        factors.sort_by_key(|&(v, _)| v);
        let mut merged: Vec<(Variable, u32)> = Vec::with_capacity(factors.len());
        for (v, e) in factors {
            match merged.last_mut() {
                Some((last, exp)) if *last == v => *exp += e,
                _ => merged.push((v, e)),
            }
        }
        Monomial { factors: merged }
    }

    pub fn factors(&self) -> &[(Variable, u32)] {
        &self.factors
    }

    pub fn is_unit(&self) -> bool {
        self.factors.is_empty()
    }

    /// Graded degree: level-m variables count m per power.
    pub fn degree(&self) -> u64 {
        self.factors.iter().map(|&(v, e)| v.level as u64 * e as u64).sum()
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&rhs.factors);
        Monomial::new(factors)
    }

    /// Keeps only factors from `group`, relabelled to `as_group`.
    pub fn restrict(&self, group: VariableGroup, as_group: VariableGroup) -> Self {
        let factors = self
            .factors
            .iter()
            .filter(|(v, _)| v.group == group)
            .map(|&(v, e)| (Variable { group: as_group, ..v }, e))
            .collect();
        Monomial::new(factors)
    }

    /// Display adapter carrying the dimension needed to decode word indices.
    pub fn display(&self, dim: usize) -> MonomialDisplay<'_> {
        MonomialDisplay { monomial: self, dim }
    }
}

pub struct MonomialDisplay<'a> {
    monomial: &'a Monomial,
    dim: usize,
}

impl fmt::Display for MonomialDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.monomial.is_unit() {
            return write!(f, "1");
        }
        for (pos, (var, exp)) in self.monomial.factors.iter().enumerate() {
            if pos > 0 {
                write!(f, " ")?;
            }
            if *exp == 1 {
                write_variable(f, var, self.dim)?;
            } else {
                write!(f, "(")?;
                write_variable(f, var, self.dim)?;
                write!(f, ")^{exp}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PolyError {
    ShapeMismatch { left: (usize, usize), right: (usize, usize) },
    BadVariable { level: usize, index: usize, dim: usize, depth: usize },
    BadLevel { level: usize, depth: usize },
    BadMomentOrder { p: f64 },
    ExpectedBaseVariables,
    ExpectedSplitVariables,
    Algebra(AlgebraError),
}

impl fmt::Display for PolyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolyError::ShapeMismatch { left, right } => write!(
                f,
                "polynomial shape mismatch: (d, N) = ({}, {}) vs ({}, {})",
                left.0, left.1, right.0, right.1
            ),
            PolyError::BadVariable { level, index, dim, depth } => write!(
                f,
                "no variable at level {level}, index {index} for dim {dim}, depth {depth}"
            ),
            PolyError::BadLevel { level, depth } => {
                write!(f, "level {level} out of range 1..={depth}")
            }
            PolyError::BadMomentOrder { p } => {
                write!(f, "moment order {p} must be finite and nonnegative")
            }
            PolyError::ExpectedBaseVariables => {
                write!(f, "polynomial must use base-group variables only")
            }
            PolyError::ExpectedSplitVariables => {
                write!(f, "polynomial must use left/right-group variables only")
            }
            PolyError::Algebra(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for PolyError {}

impl From<AlgebraError> for PolyError {
    fn from(e: AlgebraError) -> Self {
        PolyError::Algebra(e)
    }
}

/// Polynomial with exact rational coefficients in graded log coordinates.
///
/// The shape (dim, depth) fixes which variables exist; polynomials without
/// variables carry the trivial shape (0, 0) and combine with any shape, so
/// constants behave like ring scalars.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedPolynomial {
    dim: usize,
    depth: usize,
    terms: BTreeMap<Monomial, BigRational>,
}

fn valid_shape(dim: usize, depth: usize) -> bool {
    (1..=MAX_DIM).contains(&dim) && (1..=MAX_DEPTH).contains(&depth)
}

fn level_size(dim: usize, level: usize) -> u64 {
    (dim as u64).pow(level as u32)
}

impl GradedPolynomial {
    /// Constant polynomial (trivial shape).
    pub fn constant(value: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !value.is_zero() {
            terms.insert(Monomial::unit(), value);
        }
        GradedPolynomial { dim: 0, depth: 0, terms }
    }

    pub fn from_integer(value: i64) -> Self {
        Self::constant(BigRational::from_integer(BigInt::from(value)))
    }

    /// Single variable a^{level;word} (or g/x for the split groups).
    pub fn variable(
        dim: usize,
        depth: usize,
        group: VariableGroup,
        level: usize,
        word: &[usize],
    ) -> Result<Self, PolyError> {
        if !valid_shape(dim, depth) || level == 0 || level > depth || word.len() != level {
            return Err(PolyError::BadVariable { level, index: 0, dim, depth });
        }
        let mut index = 0usize;
        for &letter in word {
            if letter >= dim {
                return Err(PolyError::BadVariable { level, index: letter, dim, depth });
            }
            index = index * dim + letter;
        }
        Self::variable_by_index(dim, depth, group, level, index)
    }

    /// Single variable addressed by its flat word index.
    pub fn variable_by_index(
        dim: usize,
        depth: usize,
        group: VariableGroup,
        level: usize,
        index: usize,
    ) -> Result<Self, PolyError> {
        if !valid_shape(dim, depth)
            || level == 0
            || level > depth
            || (index as u64) >= level_size(dim, level)
        {
            return Err(PolyError::BadVariable { level, index, dim, depth });
        }
        let mono = Monomial::new(vec![(Variable::new(group, level, index), 1)]);
        let mut terms = BTreeMap::new();
        terms.insert(mono, BigRational::one());
        Ok(GradedPolynomial { dim, depth, terms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn constant_term(&self) -> BigRational {
        self.terms.get(&Monomial::unit()).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Max graded degree over monomials; `None` for the zero polynomial
    /// (standing in for degree minus infinity).
    pub fn degree(&self) -> Option<u64> {
        self.terms.keys().map(Monomial::degree).max()
    }

    fn unify_shape(&self, rhs: &Self) -> Result<(usize, usize), PolyError> {
        match ((self.dim, self.depth), (rhs.dim, rhs.depth)) {
            ((0, 0), s) | (s, (0, 0)) => Ok(s),
            (a, b) if a == b => Ok(a),
            (a, b) => Err(PolyError::ShapeMismatch { left: a, right: b }),
        }
    }

    fn with_terms(shape: (usize, usize), terms: BTreeMap<Monomial, BigRational>) -> Self {
        // constants stay shapeless so they compare equal across contexts
        let has_vars = terms.keys().any(|m| !m.is_unit());
        let (dim, depth) = if has_vars { shape } else { (0, 0) };
        GradedPolynomial { dim, depth, terms }
    }

    fn insert(terms: &mut BTreeMap<Monomial, BigRational>, mono: Monomial, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        match terms.entry(mono) {
            alloc::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert(coeff);
            }
            alloc::collections::btree_map::Entry::Occupied(mut slot) => {
                *slot.get_mut() += coeff;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self, PolyError> {
        let shape = self.unify_shape(rhs)?;
        let mut terms = self.terms.clone();
        for (mono, coeff) in &rhs.terms {
            Self::insert(&mut terms, mono.clone(), coeff.clone());
        }
        Ok(Self::with_terms(shape, terms))
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self, PolyError> {
        self.try_add(&rhs.clone().neg())
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self, PolyError> {
        let shape = self.unify_shape(rhs)?;
        let mut terms = BTreeMap::new();
        for (ml, cl) in &self.terms {
            for (mr, cr) in &rhs.terms {
                Self::insert(&mut terms, ml.mul(mr), cl * cr);
            }
        }
        Ok(Self::with_terms(shape, terms))
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        if factor.is_zero() {
            return GradedPolynomial::constant(BigRational::zero());
        }
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), c * factor)).collect();
        Self::with_terms((self.dim, self.depth), terms)
    }

    pub fn pow(&self, exponent: u32) -> Self {
        let mut acc = GradedPolynomial::constant(BigRational::one());
        for _ in 0..exponent {
            acc = acc.try_mul(self).expect("same shape");
        }
        acc
    }

    fn only_group(&self, group: VariableGroup) -> bool {
        self.terms
            .keys()
            .all(|m| m.factors().iter().all(|(v, _)| v.group == group))
    }

    /// Rewrites a base-variable polynomial P as the polynomial in (g, x)
    /// representing P evaluated at the product of two group elements with
    /// log coordinates g and x.
    ///
    /// Computed by substituting the coordinates of log(exp(g) exp(x)),
    /// expanded symbolically in the truncated tensor algebra, into P.
    pub fn cbh_compose(&self) -> Result<Self, PolyError> {
        if !self.only_group(VariableGroup::Base) {
            return Err(PolyError::ExpectedBaseVariables);
        }
        if self.dim == 0 {
            return Ok(self.clone());
        }
        let (dim, depth) = (self.dim, self.depth);
        let mut left = TensorSeries::<GradedPolynomial>::zero(dim, depth)?;
        let mut right = TensorSeries::<GradedPolynomial>::zero(dim, depth)?;
        for m in 1..=depth {
            for i in 0..level_size(dim, m) as usize {
                left.level_mut(m)?[i] =
                    Self::variable_by_index(dim, depth, VariableGroup::Left, m, i)?;
                right.level_mut(m)?[i] =
                    Self::variable_by_index(dim, depth, VariableGroup::Right, m, i)?;
            }
        }
        let product_log = left.exp()?.mul(&right.exp()?)?.log()?;
        let mut out = GradedPolynomial::constant(BigRational::zero());
        for (mono, coeff) in &self.terms {
            let mut term = GradedPolynomial::constant(coeff.clone());
            for &(var, exp) in mono.factors() {
                let substituted = product_log.level(var.level as usize)?[var.index as usize]
                    .clone()
                    .pow(exp);
                term = term.try_mul(&substituted)?;
            }
            out = out.try_add(&term)?;
        }
        Ok(out)
    }

    fn eval_generic<C: Coeff>(
        &self,
        convert: &dyn Fn(&BigRational) -> C,
        lookup: &mut dyn FnMut(Variable) -> Result<C, PolyError>,
    ) -> Result<C, PolyError> {
        let mut acc = C::zero();
        for (mono, coeff) in &self.terms {
            let mut term = convert(coeff);
            for &(var, exp) in mono.factors() {
                let value = lookup(var)?;
                for _ in 0..exp {
                    term = term * value.clone();
                }
            }
            acc = acc + term;
        }
        Ok(acc)
    }

    fn check_series_shape<C: Coeff>(&self, series: &TensorSeries<C>) -> Result<(), PolyError> {
        if self.dim != 0 && (series.dim(), series.depth()) != (self.dim, self.depth) {
            return Err(PolyError::ShapeMismatch {
                left: (self.dim, self.depth),
                right: (series.dim(), series.depth()),
            });
        }
        Ok(())
    }

    /// Exact value at base log coordinates taken from `point`.
    pub fn eval_exact(&self, point: &TensorSeries<BigRational>) -> Result<BigRational, PolyError> {
        self.check_series_shape(point)?;
        self.eval_generic(&Clone::clone, &mut |var| {
            if var.group != VariableGroup::Base {
                return Err(PolyError::ExpectedBaseVariables);
            }
            Ok(point.level(var.level as usize)?[var.index as usize].clone())
        })
    }

    /// Exact value of a two-group polynomial at (left, right) log coordinates.
    pub fn eval_exact_pair(
        &self,
        left: &TensorSeries<BigRational>,
        right: &TensorSeries<BigRational>,
    ) -> Result<BigRational, PolyError> {
        self.check_series_shape(left)?;
        self.check_series_shape(right)?;
        self.eval_generic(&Clone::clone, &mut |var| {
            let point = match var.group {
                VariableGroup::Left => left,
                VariableGroup::Right => right,
                VariableGroup::Base => return Err(PolyError::ExpectedSplitVariables),
            };
            Ok(point.level(var.level as usize)?[var.index as usize].clone())
        })
    }

    fn to_f64(value: &BigRational) -> f64 {
        value.to_f64().unwrap_or(f64::NAN)
    }

    /// Float value at base log coordinates.
    pub fn eval_f64(&self, point: &TensorSeries<f64>) -> Result<f64, PolyError> {
        self.check_series_shape(point)?;
        self.eval_generic(&Self::to_f64, &mut |var| {
            if var.group != VariableGroup::Base {
                return Err(PolyError::ExpectedBaseVariables);
            }
            Ok(point.level(var.level as usize)?[var.index as usize])
        })
    }

    /// Float value of a two-group polynomial at (left, right) log coordinates.
    pub fn eval_f64_pair(
        &self,
        left: &TensorSeries<f64>,
        right: &TensorSeries<f64>,
    ) -> Result<f64, PolyError> {
        self.check_series_shape(left)?;
        self.check_series_shape(right)?;
        self.eval_generic(&Self::to_f64, &mut |var| {
            let point = match var.group {
                VariableGroup::Left => left,
                VariableGroup::Right => right,
                VariableGroup::Base => return Err(PolyError::ExpectedSplitVariables),
            };
            Ok(point.level(var.level as usize)?[var.index as usize])
        })
    }
}

/// Sum over all level-m words w of (a^{m;w})^(2 floor(p/m)).
///
/// These are the homogeneous test polynomials whose walk moments control
/// level-m tightness; their graded degree is 2 m floor(p/m) <= 2p.
pub fn level_polynomial(
    dim: usize,
    depth: usize,
    m: usize,
    p: f64,
) -> Result<GradedPolynomial, PolyError> {
    if !valid_shape(dim, depth) {
        return Err(PolyError::BadVariable { level: m, index: 0, dim, depth });
    }
    if m == 0 || m > depth {
        return Err(PolyError::BadLevel { level: m, depth });
    }
    if !(0.0..=1e6).contains(&p) {
        return Err(PolyError::BadMomentOrder { p });
    }
    let exponent = crate::fmath::floor(p / m as f64) as u32 * 2;
    let mut acc = GradedPolynomial::constant(BigRational::zero());
    for i in 0..level_size(dim, m) as usize {
        let var = GradedPolynomial::variable_by_index(dim, depth, VariableGroup::Base, m, i)?;
        acc = acc.try_add(&var.pow(exponent))?;
    }
    Ok(acc)
}

impl fmt::Display for GradedPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // canonical order: by graded degree, then monomial order
        let mut terms: Vec<(&Monomial, &BigRational)> = self.terms.iter().collect();
        terms.sort_by_key(|(m, _)| (m.degree(), (*m).clone()));
        for (pos, (mono, coeff)) in terms.iter().enumerate() {
            let negative = coeff.is_negative();
            if pos == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let magnitude = coeff.abs();
            let skip_coeff = magnitude.is_one() && !mono.is_unit();
            if !skip_coeff {
                let (numer, denom) = (magnitude.numer(), magnitude.denom());
                if denom.is_one() {
                    write!(f, "{numer}")?;
                } else {
                    write!(f, "{numer}/{denom}")?;
                }
                if !mono.is_unit() {
                    write!(f, " ")?;
                }
            }
            if !mono.is_unit() {
                write!(f, "{}", mono.display(self.dim))?;
            }
        }
        Ok(())
    }
}

impl Add for GradedPolynomial {
    type Output = GradedPolynomial;
    fn add(self, rhs: Self) -> Self {
        self.try_add(&rhs).expect("polynomial shapes must match")
    }
}

impl Sub for GradedPolynomial {
    type Output = GradedPolynomial;
    fn sub(self, rhs: Self) -> Self {
        self.try_sub(&rhs).expect("polynomial shapes must match")
    }
}

impl Mul for GradedPolynomial {
    type Output = GradedPolynomial;
    fn mul(self, rhs: Self) -> Self {
        self.try_mul(&rhs).expect("polynomial shapes must match")
    }
}

impl Neg for GradedPolynomial {
    type Output = GradedPolynomial;
    fn neg(self) -> Self {
        let terms = self.terms.into_iter().map(|(m, c)| (m, -c)).collect();
        GradedPolynomial { dim: self.dim, depth: self.depth, terms }
    }
}

impl Zero for GradedPolynomial {
    fn zero() -> Self {
        GradedPolynomial::constant(BigRational::zero())
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for GradedPolynomial {
    fn one() -> Self {
        GradedPolynomial::constant(BigRational::one())
    }
}

impl Coeff for GradedPolynomial {
    fn from_ratio(num: i64, den: u64) -> Self {
        GradedPolynomial::constant(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }
}
