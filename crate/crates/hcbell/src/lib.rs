//! Hypercomplex Bell-type inequalities.
//!
//! The toolkit builds multipartite Bell-type inequalities from the four
//! normed composition algebras (reals, complex numbers, quaternions,
//! octonions): exact structure-constant arithmetic, enumeration of the
//! Catalan-many product groupings, symbolic expansion of the grouped product
//! into signed multilinear forms, numerical evaluation on quantum states,
//! Monte-Carlo certification that separable states satisfy the bounds, and a
//! derivative-free search for entangled states that violate them.

pub mod bell;
pub mod forms;
pub mod hypercomplex;
pub mod problem;
pub mod quantum;
