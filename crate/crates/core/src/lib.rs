//! Exact stable commutator length in free groups, and the Gromov–Thurston
//! norm on second homology of graphs of free groups with cyclic edge groups.

pub mod checks;
pub mod exact;
pub mod gluing;
pub mod graph;
pub mod oracle;
pub mod scl;
pub mod surface;
pub mod words;

/// Exact rational scalar used throughout the public API.
pub type Rational = num_rational::BigRational;
/// Arbitrary-precision integer scalar.
pub type Integer = num_bigint::BigInt;
/// Linear program over [`Rational`].
pub type RationalProgram = exact::LinearProgram<Rational>;
/// Integer matrix over [`Integer`].
pub type IntegerMatrix = exact::IntMatrix<Integer>;
