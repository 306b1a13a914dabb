//! Scalar abstractions shared by the channel and trellis code.
//!
//! Two tiers are used. [`Prob`] covers anything that can hold a probability
//! and support field arithmetic, including exact rationals, so per-symbol
//! statistics can be computed without rounding. [`Real`] adds the
//! transcendental functions needed for log-domain work and is satisfied by
//! `f32` and `f64`.

use std::fmt::Debug;

use num_traits::{Float, Num, ToPrimitive};

/// Probability-valued scalar: `f32`, `f64` or an exact rational.
pub trait Prob: Num + Copy + PartialOrd + ToPrimitive + Debug + Send + Sync + 'static {
    fn two() -> Self {
        Self::one() + Self::one()
    }

    fn half() -> Self {
        Self::one() / Self::two()
    }

    /// Lossy view used by samplers and error messages.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Prob for T where T: Num + Copy + PartialOrd + ToPrimitive + Debug + Send + Sync + 'static {}

/// Floating-point scalar.
pub trait Real: Prob + Float {
    fn from_f64(v: f64) -> Self {
        <Self as num_traits::NumCast>::from(v).expect("f64 is representable")
    }
}

impl<T: Prob + Float> Real for T {}

pub(crate) fn min_of<T: Prob>(a: T, b: T) -> T {
    if b < a {
        b
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    #[test]
    fn rational_half() {
        assert_eq!(Ratio::<i64>::half(), Ratio::new(1, 2));
        assert_eq!(<f32 as Prob>::two(), 2.0);
    }
}
