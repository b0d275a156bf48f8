//! Integer exponent calculus for walk tightness and limit regularity.
//!
//! For an increment law with 2p finite moments and a depth-N lift, the
//! governing quantities are
//!
//! * q0 = min over m = 1..=N of m * floor(p/m) — the worst moment growth
//!   order across levels (level m contributes the exponent floor(p/m));
//! * p_star = min(floor(p), 2 floor(p/2)) — the effective even moment order
//!   of the limit statement;
//! * alpha_star = (p_star - 1) / (2 p_star) — the Holder exponent below
//!   which convergence holds.
//!
//! Everything here is exact integer arithmetic on floors; the only float is
//! the final alpha ratio.

use crate::fmath::floor;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentSummary {
    /// min over m = 1..=depth of m * floor(p/m).
    pub q0: u64,
    /// min(floor(p), 2 floor(p/2)); always even unless it degenerates to 0.
    pub p_star: u64,
    /// (p_star - 1) / (2 p_star); `None` when p_star = 0.
    pub alpha_star: Option<f64>,
    /// Whether q0 > (depth + 1)/(depth - 1), the threshold for the scaled
    /// walks to be tight in the rough-path topology at this depth; `None`
    /// for depth 1, where the question does not arise.
    pub rough_path_admissible: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExponentError {
    /// Needs p > 1 (finite): below that no moment bound is available.
    BadMomentOrder { p: f64 },
    BadDepth { depth: usize },
}

impl core::fmt::Display for ExponentError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ExponentError::BadMomentOrder { p } => {
                write!(f, "moment order p = {p} must be finite and > 1")
            }
            ExponentError::BadDepth { depth } => write!(f, "depth {depth} must be >= 1"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ExponentError {}

/// Exponent summary for moment order p and lift depth N.
pub fn tightness_exponents(p: f64, depth: usize) -> Result<ExponentSummary, ExponentError> {
    if !p.is_finite() || p <= 1.0 {
        return Err(ExponentError::BadMomentOrder { p });
    }
    if depth == 0 {
        return Err(ExponentError::BadDepth { depth });
    }
    let level_weight = |m: usize| m as u64 * floor(p / m as f64) as u64;
    let q0 = (1..=depth).map(level_weight).min().expect("depth >= 1");
    let p_star = (floor(p) as u64).min(2 * floor(p / 2.0) as u64);
    let alpha_star = if p_star == 0 {
        None
    } else {
        Some((p_star - 1) as f64 / (2 * p_star) as f64)
    };
    let rough_path_admissible = if depth >= 2 {
        // q0 > (N + 1)/(N - 1), compared exactly in integers
        Some(q0 * (depth as u64 - 1) > depth as u64 + 1)
    } else {
        None
    };
    Ok(ExponentSummary { q0, p_star, alpha_star, rough_path_admissible })
}
