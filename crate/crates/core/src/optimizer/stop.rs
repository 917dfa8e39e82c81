//! Convergence test on the sequence of selected gains.

use super::region::Region;
use crate::controller::GainSet;

pub const STOP_THRESHOLD: f64 = 0.03;
pub const STOP_WINDOW: usize = 3;

/// Max-norm change between two gain sets after scaling each gain to the unit
/// interval of its feasible range.
pub fn normalized_change(region: &Region, a: GainSet, b: GainSet) -> f64 {
    let (ua, ub) = (region.normalize(a), region.normalize(b));
    (ua[0] - ub[0]).abs().max((ua[1] - ub[1]).abs())
}

/// True when each of the last three consecutive changes is below the
/// threshold.
pub fn check_stop(history: &[GainSet], region: &Region) -> bool {
    check_stop_with(history, region, STOP_THRESHOLD, STOP_WINDOW)
}

pub fn check_stop_with(history: &[GainSet], region: &Region, threshold: f64, window: usize) -> bool {
    if window == 0 || history.len() < window + 1 {
        return false;
    }
    history[history.len() - window - 1..].windows(2).all(|w| normalized_change(region, w[0], w[1]) < threshold)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn walk(deltas: &[f64]) -> Vec<GainSet> {
        let r = Region::default();
        let mut u = 0.2;
        let mut out = vec![r.denormalize([u, 0.5])];
        for d in deltas {
            u += d;
            out.push(r.denormalize([u, 0.5]));
        }
        out
    }

    #[test]
    fn stop_examples() {
        let r = Region::default();
        let x = r.center();
        assert!(check_stop(&[x, x, x, x], &r));
        assert!(check_stop(&walk(&[0.02, 0.01, 0.029]), &r));
        assert!(!check_stop(&walk(&[0.02, 0.05, 0.01]), &r));
        assert!(!check_stop(&[x, x, x], &r));
        assert!(check_stop(&walk(&[0.4, 0.02, 0.01, 0.029]), &r));
    }
}
