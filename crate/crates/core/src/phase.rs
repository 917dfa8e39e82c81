//! Helpers for quantities that live on the unit circle (gait phase as a
//! cycle fraction).

use std::f64::consts::TAU;

/// Wraps `x` into `[0, 1)`.
pub fn wrap_unit(x: f64) -> f64 {
    let w = x.rem_euclid(1.0);
    // rem_euclid returns 1.0 for tiny negative inputs.
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

/// Wraps `x` into `(-0.5, 0.5]`.
pub fn wrap_half(x: f64) -> f64 {
    let w = wrap_unit(x);
    if w > 0.5 {
        w - 1.0
    } else {
        w
    }
}

/// Circular mean of phases given as cycle fractions, returned in `[0, 1)`.
///
/// Returns `None` for an empty input or when the phases cancel out exactly.
pub fn circular_mean(phases: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (mut s, mut c, mut n) = (0.0, 0.0, 0usize);
    for p in phases {
        let (ps, pc) = (TAU * p).sin_cos();
        s += ps;
        c += pc;
        n += 1;
    }
    if n == 0 || (s.abs() < 1e-12 && c.abs() < 1e-12) {
        return None;
    }
    Some(wrap_unit(s.atan2(c) / TAU))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_ranges() {
        assert_eq!(wrap_unit(-1e-18), 0.0);
        assert!((wrap_unit(1.25) - 0.25).abs() < 1e-15);
        assert_eq!(wrap_half(0.5), 0.5);
        assert!((wrap_half(-0.5) - 0.5).abs() < 1e-15);
        assert!((wrap_half(-0.97) - 0.03).abs() < 1e-12);
    }

    #[test]
    fn circular_mean_across_wrap() {
        let m = circular_mean([0.98, 0.0, 0.02]).unwrap();
        assert!(wrap_half(m).abs() < 1e-12, "{m}");
        assert!(circular_mean([]).is_none());
        assert!(circular_mean([0.0, 0.5]).is_none());
    }
}
