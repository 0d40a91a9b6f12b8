//! Exact linear algebra: rational simplex with column generation, and integer
//! lattice routines (Hermite normal form, kernels, congruence solving).
//!
//! Everything here is generic over the scalar. The simplex runs over any
//! [`Field`] (exact rationals of any integer width); the lattice code runs
//! over any [`Ring`] of integers.

mod lattice;
mod lp;

use std::fmt::{Debug, Display};

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Num, Signed};

pub use lattice::{
    determinant, hermite_normal_form, integer_rank, kernel_lattice_basis, kernel_mod_prime,
    solve_integer_system, solve_mod_n, IntMatrix,
};
pub use lp::{
    solve_lp, solve_lp_generated, Bound, CertificateError, Column, ColumnGenerator, Constraint,
    LinearProgram, LpSolution, LpStatus, Phase, PricingContext, Relation, Sense,
};

/// Exact ordered field. Implemented for [`Ratio`] over any integer type, so
/// the solver never compares against a tolerance.
pub trait Field: Clone + Ord + Num + Signed + Debug + Display + Send + Sync + 'static {
    fn from_i64(v: i64) -> Self;
    fn add_ref(&self, rhs: &Self) -> Self;
    fn sub_ref(&self, rhs: &Self) -> Self;
    fn mul_ref(&self, rhs: &Self) -> Self;
    fn div_ref(&self, rhs: &Self) -> Self;
}

impl<I> Field for Ratio<I>
where
    I: Clone + Integer + Signed + Debug + Display + Send + Sync + From<i64> + 'static,
{
    fn from_i64(v: i64) -> Self {
        Ratio::from_integer(I::from(v))
    }
    fn add_ref(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub_ref(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn div_ref(&self, rhs: &Self) -> Self {
        self / rhs
    }
}

/// Integers with Euclidean division; `BigInt`, `i64` and `i128` qualify.
pub trait Ring: Clone + Integer + Signed + Debug + Display + Send + Sync + From<i64> + 'static {}

impl<T> Ring for T where T: Clone + Integer + Signed + Debug + Display + Send + Sync + From<i64> + 'static {}
