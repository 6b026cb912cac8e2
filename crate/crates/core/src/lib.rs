//! Signatures, eliminators, term models and finite algebras for quotient
//! inductive-inductive types.
//!
//! The pipeline is: parse a `.qiit` file into a [`Signature`], check it
//! with [`validate`], then either derive its elimination principle
//! ([`eliminator::derive_eliminator`]), build a depth-bounded initial
//! algebra ([`model::build_model`]), or compare that model against finite
//! algebras ([`algebra`]).

pub mod algebra;
pub mod bundled;
pub mod check;
pub mod diagnostic;
pub mod elaborate;
pub mod eliminator;
pub mod model;
pub mod parser;
pub mod props;
pub mod schema;
pub mod syntax;

pub use check::validate;
pub use diagnostic::{Diagnostic, Severity, Span};
pub use parser::{parse_signature, parse_str, print_signature, SourceFile};
pub use schema::{Schema, Value};
pub use syntax::{Decl, Entry, ExternalSet, IndexExpr, ParamType, PathDecl, PointDecl, Signature, SortDecl, SortRef};
pub use algebra::{FiniteAlgebra, Homomorphism};
pub use elaborate::elaborate;
pub use eliminator::{derive_eliminator, EliminatorSpec};
pub use model::{build_model, BuildOptions, TermModel};
