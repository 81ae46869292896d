//! Scalar abstraction for the scoring math.
//!
//! Learnability, replay mixture weights and the bonus schedule are plain
//! floating point formulas, so they are written once over this trait and
//! instantiated at `f64` (the crate-wide [`crate::Real`]) by the engine and at
//! `f32` in tests that check the two agree.

use num_traits::{Float, FromPrimitive};

pub trait Scalar: Float + FromPrimitive + std::fmt::Debug + 'static {
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
