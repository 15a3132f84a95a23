//! Local sections over topologized crossed modules and the holonomy
//! groupoid they generate.
//!
//! Continuity plays the role of smoothness throughout, and partial
//! homeomorphisms that of partial diffeomorphisms. Sections are enumerated
//! only on minimal domains: every germ, every section through a square and
//! every generator of `J^r` is the restriction of one of them.

pub mod axioms;
pub mod germ;
pub mod hol;
pub mod section;
pub mod universal;
pub mod wg;

pub use axioms::{check_locally_lie_xmod, check_v_locally_lie, generation, has_enough_sections, SectionCatalogue};
pub use germ::{agree_near, build_j0, germ_inv, germ_mul, Germ, GermGroupoid};
pub use hol::{holonomy_groupoid, Chart, HolonomyGroupoid, HolonomyOptions};
pub use section::{enumerate_minimal, Frame, LocalSection};
pub use universal::{induced_square_map, universal_morphism, UniversalMorphism, UniversalOptions};
pub use wg::{build_wg, WGSquares, WStructure};
