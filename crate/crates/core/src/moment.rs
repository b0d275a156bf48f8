//! Exact increment-moment oracles and the averaging operator on log-chart
//! polynomials.
//!
//! For a polynomial P on the group and an increment law xi, the operator
//!
//! ```text
//! (T P)(g) = E[ P(g xi) ] - P(g)
//! ```
//!
//! is computed exactly: `cbh_compose` splits P(g xi) into (g, xi) variables,
//! the oracle substitutes each xi-monomial's expectation, and P is
//! subtracted. For centered laws T drops the graded degree by at least two,
//! which makes the binomial identity
//!
//! ```text
//! E[ P(xi_1 ... xi_k) ] = sum_l  C(k, l) (T^l P)(unit)
//! ```
//!
//! a finite, exactly computable sum — a polynomial in k whose degree is half
//! the degree of P.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::poly::{GradedPolynomial, Monomial, PolyError, Variable, VariableGroup};
use crate::series::{AlgebraError, TensorSeries};

#[derive(Debug, Clone, PartialEq)]
pub enum MomentError {
    Poly(PolyError),
    /// The oracle covers the required degree but has no entry for this
    /// xi-multi-index.
    UnresolvedMoment { monomial: Monomial, dim: usize },
    /// The required moment's graded degree exceeds what the law declares
    /// finite.
    DegreeExceeded { monomial: Monomial, dim: usize, degree: u64, cap: u64 },
    /// A first-order level-1 moment is nonzero: the law is not centered.
    NotCentered { level: usize, index: usize },
    /// Two table rows (or a row and a fixed normalization) disagree.
    ConflictingEntry { monomial: Monomial, dim: usize },
    /// Atom weights must be positive and sum to one.
    BadWeights,
    /// Atom log coordinates must have zero scalar part and a common shape.
    BadAtom(AlgebraError),
    ShapeMismatch { left: (usize, usize), right: (usize, usize) },
    /// Iterating T failed to reach zero within the degree bound; the oracle
    /// does not satisfy the degree-reduction contract.
    DegreeReductionFailed { initial_degree: u64 },
    /// Brute-force enumeration requires a finite-support law.
    NeedsFiniteSupport,
    /// Refusal guard for enumeration blowup: atoms^k tuples.
    EnumerationTooLarge { tuples: u128, limit: u128 },
}

impl fmt::Display for MomentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MomentError::Poly(e) => write!(f, "{e}"),
            MomentError::UnresolvedMoment { monomial, dim } => {
                write!(f, "no moment declared for E[{}]", monomial.display(*dim))
            }
            MomentError::DegreeExceeded { monomial, dim, degree, cap } => write!(
                f,
                "moment E[{}] has graded degree {degree} beyond the declared finite degree {cap}",
                monomial.display(*dim)
            ),
            MomentError::NotCentered { level, index } => {
                write!(f, "law is not centered: nonzero mean at level {level}, index {index}")
            }
            MomentError::ConflictingEntry { monomial, dim } => {
                write!(f, "conflicting table entries for E[{}]", monomial.display(*dim))
            }
            MomentError::BadWeights => write!(f, "atom weights must be positive and sum to 1"),
            MomentError::BadAtom(e) => write!(f, "bad atom: {e}"),
            MomentError::ShapeMismatch { left, right } => write!(
                f,
                "shape mismatch: (d, N) = ({}, {}) vs ({}, {})",
                left.0, left.1, right.0, right.1
            ),
            MomentError::DegreeReductionFailed { initial_degree } => write!(
                f,
                "averaging operator failed to annihilate a degree-{initial_degree} polynomial"
            ),
            MomentError::NeedsFiniteSupport => {
                write!(f, "enumeration requires a finite-support law")
            }
            MomentError::EnumerationTooLarge { tuples, limit } => {
                write!(f, "enumeration over {tuples} tuples exceeds the limit {limit}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for MomentError {}

impl From<PolyError> for MomentError {
    fn from(e: PolyError) -> Self {
        MomentError::Poly(e)
    }
}

impl From<AlgebraError> for MomentError {
    fn from(e: AlgebraError) -> Self {
        MomentError::Poly(PolyError::Algebra(e))
    }
}

/// A weighted atom of a finite-support law, stored in log coordinates.
pub type Atom = (BigRational, TensorSeries<BigRational>);

enum Backend {
    /// Explicit multi-index -> moment table (keys use base-group variables).
    Table(BTreeMap<Monomial, BigRational>),
    /// Finitely many weighted atoms; moments are exact weighted sums.
    FiniteSupport(Vec<Atom>),
    /// Independent standard normal level-1 coordinates, zero higher levels;
    /// moments via the pairing rule E[z^e] = (e-1)!! for even e.
    GaussianLevel1,
}

/// Exact expectations E[ prod (log xi)^multi-index ] for one increment law.
///
/// Always centered: every first-order level-1 moment is zero by contract,
/// validated (table, finite support) or automatic (Gaussian).
pub struct MomentOracle {
    dim: usize,
    depth: usize,
    backend: Backend,
    degree_cap: Option<u64>,
}

const ENUMERATION_LIMIT: u128 = 1 << 22;

impl MomentOracle {
    /// Law given by an explicit moment table, finite up to `degree_cap`.
    ///
    /// Entries use base-group variables. First-order level-1 entries default
    /// to zero and may not be overridden with nonzero values; the empty
    /// multi-index defaults to E[1] = 1.
    pub fn table(
        dim: usize,
        depth: usize,
        degree_cap: u64,
        entries: Vec<(Monomial, BigRational)>,
    ) -> Result<Self, MomentError> {
        let mut table = BTreeMap::new();
        for (mono, value) in entries {
            for &(var, _) in mono.factors() {
                if var.group != VariableGroup::Base {
                    return Err(PolyError::ExpectedBaseVariables.into());
                }
                check_var(dim, depth, var)?;
            }
            if mono.degree() > degree_cap {
                return Err(MomentError::DegreeExceeded {
                    degree: mono.degree(),
                    cap: degree_cap,
                    monomial: mono,
                    dim,
                });
            }
            if mono.is_unit() && !value.is_one() {
                return Err(MomentError::ConflictingEntry { monomial: mono, dim });
            }
            if let [(var, 1)] = mono.factors() {
                if var.level == 1 && !value.is_zero() {
                    return Err(MomentError::NotCentered {
                        level: 1,
                        index: var.index as usize,
                    });
                }
            }
            match table.entry(mono) {
                alloc::collections::btree_map::Entry::Vacant(slot) => {
                    slot.insert(value);
                }
                alloc::collections::btree_map::Entry::Occupied(slot) => {
                    if *slot.get() != value {
                        return Err(MomentError::ConflictingEntry {
                            monomial: slot.key().clone(),
                            dim,
                        });
                    }
                }
            }
        }
        table.insert(Monomial::unit(), BigRational::one());
        for index in 0..dim {
            let first = Monomial::new(vec![(
                Variable::new(VariableGroup::Base, 1, index),
                1,
            )]);
            table.entry(first).or_insert_with(BigRational::zero);
        }
        Ok(MomentOracle { dim, depth, backend: Backend::Table(table), degree_cap: Some(degree_cap) })
    }

    /// Law with finitely many atoms; all moments exist and are exact sums.
    pub fn finite_support(
        dim: usize,
        depth: usize,
        atoms: Vec<Atom>,
    ) -> Result<Self, MomentError> {
        if atoms.is_empty() {
            return Err(MomentError::BadWeights);
        }
        let mut total = BigRational::zero();
        for (weight, point) in &atoms {
            if !weight.is_positive() {
                return Err(MomentError::BadWeights);
            }
            total += weight;
            if (point.dim(), point.depth()) != (dim, depth) {
                return Err(MomentError::ShapeMismatch {
                    left: (dim, depth),
                    right: (point.dim(), point.depth()),
                });
            }
            if !point.scalar().is_zero() {
                return Err(MomentError::BadAtom(AlgebraError::ExpectedZeroScalar));
            }
        }
        if !total.is_one() {
            return Err(MomentError::BadWeights);
        }
        for index in 0..dim {
            let mut mean = BigRational::zero();
            for (weight, point) in &atoms {
                mean += weight * &point.level(1)?[index];
            }
            if !mean.is_zero() {
                return Err(MomentError::NotCentered { level: 1, index });
            }
        }
        Ok(MomentOracle { dim, depth, backend: Backend::FiniteSupport(atoms), degree_cap: None })
    }

    /// Standard Gaussian level-1 law: independent N(0,1) coordinates, zero
    /// higher-level log coordinates.
    pub fn gaussian_level1(dim: usize, depth: usize) -> Self {
        MomentOracle { dim, depth, backend: Backend::GaussianLevel1, degree_cap: None }
    }

    /// Coordinatewise independent law from scalar atoms (weight, value);
    /// the product law has atom count `scalar_atoms.len()^dim`.
    pub fn coordinatewise(
        dim: usize,
        depth: usize,
        scalar_atoms: &[(BigRational, BigRational)],
    ) -> Result<Self, MomentError> {
        let count = scalar_atoms.len();
        if count == 0 {
            return Err(MomentError::BadWeights);
        }
        let mut atoms = Vec::new();
        let mut choice = vec![0usize; dim];
        loop {
            let mut weight = BigRational::one();
            let mut point = TensorSeries::<BigRational>::zero(dim, depth)?;
            for (coord, &pick) in choice.iter().enumerate() {
                let (w, v) = &scalar_atoms[pick];
                weight *= w;
                point.level_mut(1)?[coord] = v.clone();
            }
            atoms.push((weight, point));
            // odometer over atom choices per coordinate
            let mut carry = 0;
            loop {
                if carry == dim {
                    return Self::finite_support(dim, depth, atoms);
                }
                choice[carry] += 1;
                if choice[carry] < count {
                    break;
                }
                choice[carry] = 0;
                carry += 1;
            }
        }
    }

    /// Fair coin on {+1, -1} in each coordinate, independently.
    pub fn rademacher(dim: usize, depth: usize) -> Result<Self, MomentError> {
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let one = BigRational::one();
        Self::coordinatewise(dim, depth, &[(half.clone(), one.clone()), (half, -one)])
    }

    /// Two-point law with atoms 2 (probability 1/5) and -1/2 (probability
    /// 4/5) per coordinate: centered, unit variance, third moment 3/2 —
    /// a finite-support law that is genuinely asymmetric.
    pub fn two_point_asymmetric(dim: usize, depth: usize) -> Result<Self, MomentError> {
        let r = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        Self::coordinatewise(
            dim,
            depth,
            &[(r(1, 5), r(2, 1)), (r(4, 5), r(-1, 2))],
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Graded degree up to which moments are declared finite; `None` means
    /// all moments exist.
    pub fn degree_cap(&self) -> Option<u64> {
        self.degree_cap
    }

    /// The atoms of a finite-support law, if this oracle has one.
    pub fn atoms(&self) -> Option<&[Atom]> {
        match &self.backend {
            Backend::FiniteSupport(atoms) => Some(atoms),
            _ => None,
        }
    }

    /// E[ prod coord^exp ] for a multi-index over base-group variables.
    pub fn moment(&self, multi_index: &Monomial) -> Result<BigRational, MomentError> {
        if multi_index.is_unit() {
            return Ok(BigRational::one());
        }
        for &(var, _) in multi_index.factors() {
            if var.group != VariableGroup::Base {
                return Err(PolyError::ExpectedBaseVariables.into());
            }
            check_var(self.dim, self.depth, var)?;
        }
        let degree = multi_index.degree();
        if let Some(cap) = self.degree_cap {
            if degree > cap {
                return Err(MomentError::DegreeExceeded {
                    monomial: multi_index.clone(),
                    dim: self.dim,
                    degree,
                    cap,
                });
            }
        }
        match &self.backend {
            Backend::Table(table) => table.get(multi_index).cloned().ok_or_else(|| {
                MomentError::UnresolvedMoment { monomial: multi_index.clone(), dim: self.dim }
            }),
            Backend::FiniteSupport(atoms) => {
                let mut acc = BigRational::zero();
                for (weight, point) in atoms {
                    let mut value = weight.clone();
                    for &(var, exp) in multi_index.factors() {
                        let coord = &point.level(var.level as usize)?[var.index as usize];
                        value *= coord.pow(exp as i32);
                    }
                    acc += value;
                }
                Ok(acc)
            }
            Backend::GaussianLevel1 => {
                let mut acc = BigRational::one();
                for &(var, exp) in multi_index.factors() {
                    if var.level >= 2 {
                        // higher-level log coordinates are identically zero
                        return Ok(BigRational::zero());
                    }
                    if exp % 2 == 1 {
                        return Ok(BigRational::zero());
                    }
                    acc *= BigRational::from_integer(double_factorial_odd(exp));
                }
                Ok(acc)
            }
        }
    }
}

fn check_var(dim: usize, depth: usize, var: Variable) -> Result<(), MomentError> {
    let level = var.level as usize;
    let index = var.index as u64;
    if level == 0 || level > depth || index >= (dim as u64).pow(level as u32) {
        return Err(PolyError::BadVariable {
            level,
            index: var.index as usize,
            dim,
            depth,
        }
        .into());
    }
    Ok(())
}

/// (e - 1)!! for even e: the number of pairings of e items.
fn double_factorial_odd(e: u32) -> BigInt {
    let mut acc = BigInt::one();
    let mut odd = 1u32;
    while odd < e {
        acc *= BigInt::from(odd);
        odd += 2;
    }
    acc
}

/// The averaging operator: (T P)(g) = E[P(g xi)] - P(g), exactly.
///
/// For centered laws the graded degree drops by at least two.
pub fn t_apply(p: &GradedPolynomial, oracle: &MomentOracle) -> Result<GradedPolynomial, MomentError> {
    if p.dim() != 0 && (p.dim(), p.depth()) != (oracle.dim, oracle.depth) {
        return Err(MomentError::ShapeMismatch {
            left: (p.dim(), p.depth()),
            right: (oracle.dim, oracle.depth),
        });
    }
    let composed = p.cbh_compose()?;
    let mut averaged = GradedPolynomial::constant(BigRational::zero());
    for (mono, coeff) in composed.terms() {
        let g_part = mono.restrict(VariableGroup::Left, VariableGroup::Base);
        let xi_part = mono.restrict(VariableGroup::Right, VariableGroup::Base);
        let moment = oracle.moment(&xi_part)?;
        if moment.is_zero() {
            continue;
        }
        let term = if g_part.is_unit() {
            GradedPolynomial::constant(coeff * &moment)
        } else {
            let mut poly = GradedPolynomial::constant(coeff * &moment);
            for &(var, exp) in g_part.factors() {
                let v = GradedPolynomial::variable_by_index(
                    oracle.dim,
                    oracle.depth,
                    VariableGroup::Base,
                    var.level as usize,
                    var.index as usize,
                )?;
                poly = poly.try_mul(&v.pow(exp))?;
            }
            poly
        };
        averaged = averaged.try_add(&term)?;
    }
    Ok(averaged.try_sub(p)?)
}

/// E[ P(xi_1 xi_2 ... xi_k) ] via the binomial identity
/// sum_l C(k, l) (T^l P)(unit), evaluated exactly.
pub fn walk_moment(
    p: &GradedPolynomial,
    oracle: &MomentOracle,
    k: u64,
) -> Result<BigRational, MomentError> {
    let mut acc = BigRational::zero();
    for (l, constant) in t_iteration_constants(p, oracle)?.into_iter().enumerate() {
        let l = l as u64;
        if l > k {
            break;
        }
        let choose = binomial(BigInt::from(k), BigInt::from(l));
        acc += BigRational::from_integer(choose) * constant;
    }
    Ok(acc)
}

/// Coefficients c_0..c_L of E[ P(xi_1 ... xi_k) ] as a polynomial
/// sum_i c_i k^i in the walk length k; the last entry is the leading
/// coefficient governing the growth order.
pub fn walk_moment_polynomial(
    p: &GradedPolynomial,
    oracle: &MomentOracle,
) -> Result<Vec<BigRational>, MomentError> {
    let constants = t_iteration_constants(p, oracle)?;
    // binomial basis to monomial basis: C(k, l) = C(k, l-1) (k - l + 1) / l
    let mut acc = vec![BigRational::zero()];
    let mut basis = vec![BigRational::one()];
    for (l, constant) in constants.into_iter().enumerate() {
        if l > 0 {
            let shift = BigRational::from_integer(BigInt::from(l as i64 - 1));
            let div = BigRational::from_integer(BigInt::from(l as i64));
            let mut next = vec![BigRational::zero(); basis.len() + 1];
            for (i, c) in basis.iter().enumerate() {
                // multiply by k
                next[i + 1] += c;
                // subtract (l - 1), divide by l
                next[i] -= c * &shift;
            }
            for c in next.iter_mut() {
                *c /= &div;
            }
            basis = next;
        }
        if acc.len() < basis.len() {
            acc.resize(basis.len(), BigRational::zero());
        }
        for (slot, c) in acc.iter_mut().zip(basis.iter()) {
            *slot += c * &constant;
        }
    }
    while acc.len() > 1 && acc.last().is_some_and(Zero::is_zero) {
        acc.pop();
    }
    Ok(acc)
}

/// (T^l P)(unit) for l = 0, 1, ... until the iterate vanishes.
fn t_iteration_constants(
    p: &GradedPolynomial,
    oracle: &MomentOracle,
) -> Result<Vec<BigRational>, MomentError> {
    let initial_degree = p.degree().unwrap_or(0);
    let mut constants = Vec::new();
    let mut current = p.clone();
    let mut l = 0u64;
    while !current.is_zero() {
        if l > initial_degree {
            return Err(MomentError::DegreeReductionFailed { initial_degree });
        }
        constants.push(current.constant_term());
        current = t_apply(&current, oracle)?;
        l += 1;
    }
    Ok(constants)
}

/// Brute-force oracle: E[ P(xi_1 ... xi_k) ] by enumerating every atom
/// tuple of a finite-support law and multiplying out the group products in
/// exact arithmetic. Exponential in k; guarded, intended for cross-checks.
pub fn walk_moment_by_enumeration(
    p: &GradedPolynomial,
    oracle: &MomentOracle,
    k: u32,
) -> Result<BigRational, MomentError> {
    let atoms = oracle.atoms().ok_or(MomentError::NeedsFiniteSupport)?;
    if p.dim() != 0 && (p.dim(), p.depth()) != (oracle.dim, oracle.depth) {
        return Err(MomentError::ShapeMismatch {
            left: (p.dim(), p.depth()),
            right: (oracle.dim, oracle.depth),
        });
    }
    let tuples = (atoms.len() as u128).pow(k);
    if tuples > ENUMERATION_LIMIT {
        return Err(MomentError::EnumerationTooLarge { tuples, limit: ENUMERATION_LIMIT });
    }
    let exp_atoms: Vec<(BigRational, TensorSeries<BigRational>)> = atoms
        .iter()
        .map(|(w, a)| Ok((w.clone(), a.exp()?)))
        .collect::<Result<_, AlgebraError>>()?;
    let mut acc = BigRational::zero();
    let mut choice = vec![0usize; k as usize];
    loop {
        let mut weight = BigRational::one();
        let mut product = TensorSeries::<BigRational>::unit(oracle.dim, oracle.depth)?;
        for &pick in &choice {
            let (w, g) = &exp_atoms[pick];
            weight *= w;
            product = product.mul(g)?;
        }
        acc += weight * p.eval_exact(&product.log()?)?;
        let mut carry = 0usize;
        loop {
            if carry == choice.len() {
                return Ok(acc);
            }
            choice[carry] += 1;
            if choice[carry] < exp_atoms.len() {
                break;
            }
            choice[carry] = 0;
            carry += 1;
        }
    }
}
