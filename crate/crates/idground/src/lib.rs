//! Grounding for first-order logic with inductive definitions.
//!
//! A theory and a finite input structure are reduced to a ground
//! (propositional) theory. Certainly-true and certainly-false bounds,
//! derived symbolically and represented as first-order decision diagrams,
//! cut away instances whose truth value is already known.

pub mod bounds;
pub mod fobdd;
pub mod gen;
pub mod ground;
pub mod logic;
pub mod oracle;
pub mod pipeline;
pub mod structure;
pub mod wfs;
