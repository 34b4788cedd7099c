//! Tent maps with finite critical orbit, their preimage combinatorics, and a
//! Denjoy-type surgery that blows every preimage of the periodic critical value
//! up into an interval.
//!
//! Exact work happens in ℚ(β); anything involving infinite sums is returned as
//! an [`Interval`] enclosure.

#![cfg_attr(not(test), no_std)]
// Matrix and recurrence loops index several arrays at once; `!(a <= b)` also
// rejects NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod enclosure;
pub mod markov;
pub mod preimage;
pub mod surgery;
pub mod tent_core;
pub mod verify;

pub use enclosure::Interval;
pub use tent_core::{
    AlgebraicParameter, AlgebraicPoint, Catalog, CriticalOrbitData, FieldError, ItineraryWord,
    OrbitResult, Symbol,
};
