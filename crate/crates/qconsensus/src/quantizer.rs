//! Rounding quantizer, range projection, and the finite-bit bounded
//! quantizer obtained by composing the two.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum QuantizerError {
    #[error("resolution delta must be positive and finite, got {0}")]
    BadDelta(f64),
    #[error("half-range L must be positive and finite, got {0}")]
    BadRange(f64),
    #[error("L must be an integer multiple of delta (L={l}, delta={delta})")]
    RangeNotMultiple { l: f64, delta: f64 },
    #[error("non-finite input {0}")]
    NonFinite(f64),
}

/// Bounded quantizer parameters: resolution `delta` and half-range `range_l`,
/// with `range_l` an integer multiple of `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizerSpec {
    pub delta: f64,
    pub range_l: f64,
}

impl QuantizerSpec {
    pub fn new(delta: f64, range_l: f64) -> Result<Self, QuantizerError> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(QuantizerError::BadDelta(delta));
        }
        if !(range_l > 0.0 && range_l.is_finite()) {
            return Err(QuantizerError::BadRange(range_l));
        }
        let ratio = range_l / delta;
        if (ratio - ratio.round()).abs() > 1e-9 || ratio.round() < 1.0 {
            return Err(QuantizerError::RangeNotMultiple {
                l: range_l,
                delta,
            });
        }
        Ok(QuantizerSpec { delta, range_l })
    }

    /// `L / delta` as an exact integer; the lattice spans levels `-max_level ..= max_level`.
    pub fn max_level(&self) -> i64 {
        (self.range_l / self.delta).round() as i64
    }

    /// Number of lattice points in `[-L, L]`.
    pub fn level_count(&self) -> u64 {
        2 * self.max_level() as u64 + 1
    }

    /// Bits needed to index a lattice point: `ceil(log2(2L/delta + 1))`.
    pub fn bit_width(&self) -> u32 {
        let levels = self.level_count();
        (u64::BITS - (levels - 1).leading_zeros()).max(1)
    }

    /// Quantize onto the bounded lattice, returning the level index `t`
    /// (output value is `t * delta`, with `|t| <= L/delta`).
    pub fn bounded_level(&self, x: f64) -> Result<i64, QuantizerError> {
        let projected = project(x, self.range_l)?;
        let t = round_level(projected, self.delta)?;
        // projection keeps |projected| <= L, and rounding a point of [-L, L]
        // cannot leave the lattice range since L is a multiple of delta
        debug_assert!(t.abs() <= self.max_level());
        Ok(t.clamp(-self.max_level(), self.max_level()))
    }

    /// `Q_b(x) = Q(T_X(x))` as a real value.
    pub fn bounded_quantize(&self, x: f64) -> Result<f64, QuantizerError> {
        Ok(self.bounded_level(x)? as f64 * self.delta)
    }
}

/// Level index of the rounding quantizer: the unique `t` with
/// `(t - 1/2) delta < x <= (t + 1/2) delta` (ties round down).
pub fn round_level(x: f64, delta: f64) -> Result<i64, QuantizerError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(QuantizerError::BadDelta(delta));
    }
    if !x.is_finite() {
        return Err(QuantizerError::NonFinite(x));
    }
    Ok((x / delta - 0.5).ceil() as i64)
}

/// `Q(x)` as a real value.
pub fn round_quantize(x: f64, delta: f64) -> Result<f64, QuantizerError> {
    Ok(round_level(x, delta)? as f64 * delta)
}

/// Projection onto `[-L, L]`.
pub fn project(x: f64, range_l: f64) -> Result<f64, QuantizerError> {
    if !(range_l > 0.0 && range_l.is_finite()) {
        return Err(QuantizerError::BadRange(range_l));
    }
    if !x.is_finite() {
        return Err(QuantizerError::NonFinite(x));
    }
    Ok(x.clamp(-range_l, range_l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rounding_interval_rule() {
        // 0.5 is in (-0.5, 0.5], so it rounds down to 0
        assert_eq!(round_quantize(0.5, 1.0).unwrap(), 0.0);
        // -0.5 is in (-1.5, -0.5], so it rounds down to -1
        assert_eq!(round_quantize(-0.5, 1.0).unwrap(), -1.0);
        assert_eq!(round_quantize(0.500_000_01, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn projection_clamps() {
        assert_eq!(project(7.3, 5.0).unwrap(), 5.0);
        assert_eq!(project(-0.2, 5.0).unwrap(), -0.2);
        assert_eq!(project(-9.0, 5.0).unwrap(), -5.0);
    }

    #[test]
    fn bounded_quantize_examples() {
        let spec = QuantizerSpec::new(1.0, 5.0).unwrap();
        assert_eq!(spec.bounded_quantize(7.3).unwrap(), 5.0);
        assert_eq!(spec.bounded_quantize(-0.2).unwrap(), 0.0);
        assert_eq!(spec.bounded_quantize(4.4).unwrap(), 4.0);
    }

    #[test]
    fn bit_widths() {
        assert_eq!(QuantizerSpec::new(1.0, 25.0).unwrap().level_count(), 51);
        assert_eq!(QuantizerSpec::new(1.0, 25.0).unwrap().bit_width(), 6);
        assert_eq!(QuantizerSpec::new(1.0, 1.0).unwrap().bit_width(), 2);
        assert_eq!(QuantizerSpec::new(0.5, 2.0).unwrap().level_count(), 9);
        assert_eq!(QuantizerSpec::new(0.5, 2.0).unwrap().bit_width(), 4);
    }

    #[test]
    fn spec_validation() {
        assert!(QuantizerSpec::new(0.0, 5.0).is_err());
        assert!(QuantizerSpec::new(1.0, -5.0).is_err());
        assert!(matches!(
            QuantizerSpec::new(0.4, 5.0),
            Err(QuantizerError::RangeNotMultiple { .. })
        ));
    }

    #[test]
    fn non_finite_rejected() {
        assert!(round_quantize(f64::NAN, 1.0).is_err());
        assert!(project(f64::INFINITY, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn rounding_error_at_most_half_delta(x in -1e6f64..1e6, d in 1e-3f64..10.0) {
            let q = round_quantize(x, d).unwrap();
            prop_assert!((q - x).abs() <= d / 2.0 + 1e-9 * d);
        }

        #[test]
        fn bounded_quantize_idempotent_and_in_range(x in -1e6f64..1e6) {
            let spec = QuantizerSpec::new(0.5, 10.0).unwrap();
            let q = spec.bounded_quantize(x).unwrap();
            prop_assert!(q.abs() <= spec.range_l);
            prop_assert_eq!(spec.bounded_quantize(q).unwrap(), q);
        }

        #[test]
        fn bounded_quantize_monotone(x in -100.0f64..100.0, y in -100.0f64..100.0) {
            let spec = QuantizerSpec::new(0.25, 8.0).unwrap();
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            prop_assert!(
                spec.bounded_quantize(lo).unwrap() <= spec.bounded_quantize(hi).unwrap()
            );
        }

        #[test]
        fn interior_points_match_plain_rounding(x in -100.0f64..100.0) {
            let spec = QuantizerSpec::new(1.0, 200.0).unwrap();
            prop_assert_eq!(
                spec.bounded_quantize(x).unwrap(),
                round_quantize(x, 1.0).unwrap()
            );
        }
    }
}
