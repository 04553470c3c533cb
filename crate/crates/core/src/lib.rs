//! Mod-p Chern numbers, the mod-p cobordism ring and fixed-locus bounds for
//! actions of diagonalizable p-groups.

pub mod actions;
pub mod bounds;
pub mod chow;
pub mod cobordism;
pub mod dim;
pub mod error;
pub mod equivariant;
pub mod expr;
pub mod fpring;
pub mod partitions;
pub mod ring;
pub mod selftest;

pub use chow::{Atom, ChernCalculator, ChowModel, KClass};
pub use dim::Dim;
pub use error::{Error, Result};
pub use expr::{parse_bpoly, parse_expr, VarietyExpr};
pub use fpring::{BPoly, Fp, GenPoly};
pub use partitions::{IndexSet, Partition};
