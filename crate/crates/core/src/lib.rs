//! Shadowing for expansive systems with one-jump shadowing, with exact
//! arithmetic and verifiable certificates.
//!
//! Two systems are provided: the full shift on eventually periodic
//! sequences ([`systems::ShiftSystem`]) and the cat map on points of the
//! torus with coordinates in `Q[√5]` ([`systems::ToralSystem`]). For a
//! target `ε`, [`certify::derive_constants`] produces the constant chain,
//! [`shadow::inductive_shadow`] glues one-jump shadows into a full shadow,
//! and [`shadow::verify_certificate`] re-checks the result independently.

pub mod certify;
pub mod error;
pub mod experiment;
pub mod gen;
pub mod orbit;
pub mod quadratic;
pub mod shadow;
pub mod systems;

pub use error::{ParseError, Result, ShadowError};
pub use orbit::{PseudoOrbit, Window};
pub use quadratic::{Distance, QuadraticNumber};

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
struct ReadmeDoctests;
