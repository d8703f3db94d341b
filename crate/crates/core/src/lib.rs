//! Exact symbolic engine for braided free unitary quantum groups over the
//! circle: graded presentations, braided tensor products, relation-driven
//! verification, KMS states on finite graphs and the fusion rules of the
//! bosonized quantum group.

#![allow(clippy::needless_range_loop)]

pub mod algebra;
pub mod braided;
pub mod fusion;
pub mod graphalg;
pub mod linalg;
pub mod matrix;
pub mod scalars;
pub mod simplify;
pub mod uqf;

pub use algebra::{Degree, GradedPoly, Index, Letter, Presentation};
pub use braided::{LegLayout, LeggedLetter, LeggedPoly};
pub use matrix::Matrix;
pub use scalars::{Scalar, ZetaSpec};
pub use simplify::{RelationSet, SuiteReport, Verdict, VerificationReport};
