//! Exact workbench for forbidden-subposet problems in the linear lattice.
//!
//! The linear lattice `L(n, q)` is the poset of all subspaces of an
//! `n`-dimensional vector space over `F_q`, ordered by inclusion. This crate
//! materializes the lattice at desk scale, computes the extremal functions
//! `La_q(n, P)` / `La_q*(n, P)` by exact search, and checks the supporting
//! machinery: Gaussian binomials, Hall-matching pushdowns, small-subspace
//! `M(A)` constructions, and LYM-type double counts over simple families.
//!
//! Modules mirror the layers of the problem:
//!
//! - [`gfq`]: finite field tables for prime powers `q <= 16`
//! - [`qarith`]: exact q-analog arithmetic (`[n]_q`, Gaussian binomials, bounds)
//! - [`lattice`]: canonical RREF subspace enumeration and the containment order
//! - [`posets`]: forbidden patterns and (induced) subposet embedding
//! - [`families`]: subspace families, canonical constructions, structure lemmas
//! - [`search`]: exact branch-and-bound optimization of `La_q` with extremal
//!   enumeration and theorem verification pipelines
//! - [`transforms`]: Hall-matching pushdown/pushup of top/bottom levels
//! - [`lym`]: simple families, chain structures, alpha values, LYM verdicts
//! - [`report`]: machine-readable run documents for the CLI

pub mod bits;
pub mod exec;
pub mod families;
pub mod gfq;
pub mod lattice;
pub mod lym;
pub mod posets;
pub mod qarith;
pub mod report;
pub mod search;
pub mod transforms;

pub use bits::BitSet;
pub use families::Family;
pub use gfq::FieldSpec;
pub use lattice::{LinearLattice, Subspace};
pub use posets::PosetSpec;
