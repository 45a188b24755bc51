//! Piecewise-constant functions of a threshold.

use serde::{Deserialize, Serialize};

/// Which side of a breakpoint owns the value at the breakpoint itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Continuity {
    /// `f(b_k)` equals the value on `[b_k, b_{k+1})`.
    Right,
    /// `f(b_k)` equals the value on `(b_{k-1}, b_k]`.
    Left,
}

/// A step function with strictly increasing `breakpoints`.
///
/// `values` has one more entry than `breakpoints`: `values[0]` applies
/// below the first breakpoint and `values[k]` between breakpoints `k - 1`
/// and `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepCurve {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
    pub continuity: Continuity,
}

impl StepCurve {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>, continuity: Continuity) -> Self {
        assert_eq!(
            values.len(),
            breakpoints.len() + 1,
            "values must bracket breakpoints"
        );
        debug_assert!(breakpoints.windows(2).all(|w| w[0] < w[1]));
        StepCurve {
            breakpoints,
            values,
            continuity,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = match self.continuity {
            Continuity::Right => self.breakpoints.partition_point(|&b| b <= t),
            Continuity::Left => self.breakpoints.partition_point(|&b| b < t),
        };
        self.values[k]
    }

    pub fn len(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.breakpoints.is_empty()
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] <= w[1])
    }

    /// Breakpoints where the value actually changes.
    pub fn jumps(&self) -> Vec<f64> {
        self.breakpoints
            .iter()
            .enumerate()
            .filter(|(k, _)| self.values[*k] != self.values[k + 1])
            .map(|(_, &b)| b)
            .collect()
    }

    /// `(t, value)` pairs, one per breakpoint, for tabular export.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.breakpoints
            .iter()
            .map(|&b| (b, self.eval(b)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn continuity_at_breakpoints() {
        let r = StepCurve::new(vec![1.0, 2.0], vec![0.0, 1.0, 2.0], Continuity::Right);
        assert_eq!(r.eval(0.5), 0.0);
        assert_eq!(r.eval(1.0), 1.0);
        assert_eq!(r.eval(2.0), 2.0);
        let l = StepCurve::new(vec![1.0, 2.0], vec![0.0, 1.0, 2.0], Continuity::Left);
        assert_eq!(l.eval(1.0), 0.0);
        assert_eq!(l.eval(1.5), 1.0);
        assert_eq!(l.eval(2.0), 1.0);
        assert_eq!(l.eval(2.1), 2.0);
        assert!(l.is_nondecreasing());
    }

    #[test]
    fn jumps_skip_flat_breakpoints() {
        let c = StepCurve::new(
            vec![1.0, 2.0, 3.0],
            vec![0.0, 0.0, 1.0, 1.0],
            Continuity::Right,
        );
        assert_eq!(c.jumps(), vec![2.0]);
        assert_eq!(c.points(), vec![(1.0, 0.0), (2.0, 1.0), (3.0, 1.0)]);
    }
}
