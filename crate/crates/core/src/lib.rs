//! Fell bundles over finite inverse semigroups and their cross sectional
//! C*-algebras, computed exactly at finite scale.
//!
//! The pipeline runs from a multiplication table ([`isg`]) and fiber
//! structure tensors ([`bundle`]) through the convolution algebra ([`conv`])
//! and the left regular representation ([`regrep`]) to the algebras,
//! ideals, quotient norms and oracles in [`algebras`]. Every unit fiber is a
//! finite-dimensional C*-algebra handled by [`fdalg`].

pub mod algebras;
pub mod bundle;
pub mod conv;
pub mod corpus;
pub mod fdalg;
pub mod io;
pub mod isg;
pub mod linalg;
pub mod regrep;

pub use algebras::{
    faithfulness, group_grading_decomposition, AlgebraError, CrossSectional, CrossSectionalReport, ExelOracle,
    GradingDecomposition, OperatorSubspace, Quotient, ReportOptions, SemilatticeCharacters,
};
pub use bundle::{
    bundle_from_partial_action, is_saturated, restrict_to_idempotents, trivial_line_bundle, validate_bundle, Axiom,
    BundleError, BundleReport, FellBundle, PartialActionSpec, ValidationOptions, ZeroFiber,
};
pub use conv::{convolve, involute, Section, SectionFile};
pub use fdalg::{AlgIdeal, FdCStar, FdError};
pub use io::{resolve_group, BundleSpecFile, GroupFile, SpecError};
pub use isg::{search_idempotent_pure_grading, Filter, Grading, Group, InverseSemigroup, IsgError, MulTable};
pub use linalg::{CMat, CVec, Tolerances, C64};
pub use regrep::{BlockOperator, RegularRepresentation, WordinghamReport};
