//! Crossed modules of finite groupoids over finite topological spaces, their
//! associated double groupoids, free derivations, local linear sections and
//! the holonomy groupoid built from them.

pub mod corpus;
pub mod dgpd;
pub mod error;
pub mod fintop;
pub mod groupoid;
pub mod holonomy;
pub mod homotopy;
pub mod report;
pub mod scenario;
pub mod xmod;

pub use dgpd::{DoubleGroupoid, Square};
pub use error::{Error, Result};
pub use fintop::{FiniteTopSpace, PartialMap, PointSet};
pub use groupoid::{Groupoid, GroupoidMorphism};
pub use holonomy::{HolonomyGroupoid, HolonomyOptions, UniversalOptions, WStructure};
pub use homotopy::{FreeDerivation, LinearSection};
pub use report::{Verdict, Violation};
pub use scenario::{Scenario, ScenarioFile, TaskKind};
pub use xmod::{CrossedModule, XModMorphism};
