//! Ideal triangulations of cusped 3-manifolds built from polyhedral
//! decompositions, together with exact deciders for angle structures and the
//! vertical normal classes that obstruct them.
//!
//! Angles are measured in units of π everywhere in the exact code, so every
//! linear system is rational: tetrahedron rows sum to `1`, edge rows to `2`.

pub mod alternating;
pub mod angles;
pub mod exact;
pub mod homology;
pub mod normal;
pub mod ppp;
pub mod triangulation;

pub use angles::{AngleAssignment, AngleKind};
pub use exact::{LpOutcome, LpProblem, LpStatus, Rational, RationalMatrixSystem};
pub use normal::{NormalClass, NormalVector};
pub use triangulation::{GluingTable, Perm4, QuadType, Triangulation, TriangulationError};
