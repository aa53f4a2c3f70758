//! Knot Floer `τ`, truncated surgery mapping cones and satellite `τ` bounds.
//!
//! All homology is over GF(2). Knots are given by a reduced model of
//! `CFK^∞`: generators with Alexander and Maslov gradings, and arrows
//! labelled by their drop in the two filtrations.

pub mod bounds;
pub mod cone;
pub mod gf2;
pub mod knot;

pub use bounds::{BoundReport, CompanionStats, Correction, Interval, PatternStats};
pub use cone::{build_cone, cobordism_verdict, correction, predicted_verdict, verdict_grid, PredictedVerdict, Verdict};
pub use gf2::{Gf2Complex, Gf2Matrix, Gf2Vec};
pub use knot::{builtin, connect_sum, mirror, tau, validate_knot, Builtin, KnotComplex};
