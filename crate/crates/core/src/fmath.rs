//! Float intrinsics routed through `num_traits::Float` so the same code
//! compiles with and without `std` (libm supplies the no_std impls).

#![allow(dead_code)]

#[inline(always)]
pub(crate) fn sqrt(x: f64) -> f64 {
    num_traits::Float::sqrt(x)
}

#[inline(always)]
pub(crate) fn powf(x: f64, p: f64) -> f64 {
    num_traits::Float::powf(x, p)
}

#[inline(always)]
pub(crate) fn abs(x: f64) -> f64 {
    num_traits::Float::abs(x)
}

#[inline(always)]
pub(crate) fn floor(x: f64) -> f64 {
    num_traits::Float::floor(x)
}

#[inline(always)]
pub(crate) fn ln(x: f64) -> f64 {
    num_traits::Float::ln(x)
}

#[inline(always)]
pub(crate) fn exp(x: f64) -> f64 {
    num_traits::Float::exp(x)
}

#[inline(always)]
pub(crate) fn tanh(x: f64) -> f64 {
    num_traits::Float::tanh(x)
}
