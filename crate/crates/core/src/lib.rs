//! First-order interacting particle dynamics confined to an implicit 2D
//! domain by an impenetrable boundary.
//!
//! The crate provides the confining geometry ([`geometry`]), the interaction
//! energy and its force field ([`energy`]), projected and penalty time
//! integrators ([`dynamics`]), numerical checks of the flow's proved
//! properties ([`diagnostics`]) and reproducible experiment scenarios with
//! persistence and rendering ([`scenarios`]).

pub mod diagnostics;
pub mod dynamics;
pub mod energy;
pub mod geometry;
pub mod scenarios;
pub mod vec2;

pub use vec2::Vec2;
