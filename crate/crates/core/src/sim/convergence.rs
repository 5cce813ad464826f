use serde::{Deserialize, Serialize};

use crate::graph::NodeId;
use crate::protocol::{consensus_reached, Ratio, StateVars};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergenceVerdict {
    pub converged: bool,
    /// First step of the final uninterrupted consensus stretch.
    pub steps: Option<u64>,
    /// `n / z_s` per node; integral when the state is the average scaled
    /// by a natural number.
    pub alpha_per_node: Vec<Ratio>,
    /// Nodes whose `n / z_s` is not an integer.
    pub non_integer_alpha: Vec<NodeId>,
}

/// Tracks how long every state has matched the exact average.
#[derive(Debug, Clone)]
pub struct ConvergenceDetector {
    exact_sum: i64,
    n: usize,
    window: u64,
    since: Option<u64>,
}

impl ConvergenceDetector {
    pub fn new(exact_sum: i64, n: usize, window: u64) -> Self {
        ConvergenceDetector { exact_sum, n, window: window.max(1), since: None }
    }

    /// Records the states after `step`; returns whether consensus holds now.
    pub fn observe(&mut self, step: u64, states: &[StateVars]) -> bool {
        if consensus_reached(states, self.exact_sum, self.n) {
            self.since.get_or_insert(step);
            true
        } else {
            self.since = None;
            false
        }
    }

    pub fn since(&self) -> Option<u64> {
        self.since
    }

    /// Consensus has held for at least `window` consecutive steps.
    pub fn stable(&self, step: u64) -> bool {
        self.since.is_some_and(|s| step + 1 - s >= self.window)
    }

    pub fn verdict(&self, step: u64, certified: bool, states: &[StateVars]) -> ConvergenceVerdict {
        detect_convergence(states, self.exact_sum, self.n, self.since, certified || self.stable(step))
    }
}

/// Builds the verdict from the final states. `confirmed` says whether the
/// stability requirement (window or certificate) was met.
pub fn detect_convergence(
    states: &[StateVars],
    exact_sum: i64,
    n: usize,
    since: Option<u64>,
    confirmed: bool,
) -> ConvergenceVerdict {
    let holds = consensus_reached(states, exact_sum, n);
    let alpha_per_node: Vec<Ratio> = states.iter().map(|s| Ratio::new(n as i64, s.z_s)).collect();
    let non_integer_alpha = alpha_per_node
        .iter()
        .enumerate()
        .filter(|(_, a)| !a.is_integer())
        .map(|(j, _)| NodeId(j))
        .collect();
    let converged = holds && since.is_some() && confirmed;
    ConvergenceVerdict { converged, steps: if converged { since } else { None }, alpha_per_node, non_integer_alpha }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(y: i64, z: u64) -> StateVars {
        StateVars { y_s: y, z_s: z }
    }

    #[test]
    fn integer_alpha() {
        let v = detect_convergence(&[s(9, 1), s(9, 1)], 18, 2, Some(3), true);
        assert!(v.converged);
        assert_eq!(v.steps, Some(3));
        assert_eq!(v.alpha_per_node, vec![Ratio::new(2, 1); 2]);
        assert!(v.non_integer_alpha.is_empty());
    }

    #[test]
    fn non_integer_alpha_is_flagged_not_fatal() {
        let v = detect_convergence(&[s(10, 2), s(5, 1), s(5, 1)], 15, 3, Some(0), true);
        assert!(v.converged);
        assert_eq!(v.alpha_per_node[0], Ratio::new(3, 2));
        assert_eq!(v.non_integer_alpha, vec![NodeId(0)]);
    }

    #[test]
    fn mixed_estimates_not_converged() {
        let v = detect_convergence(&[s(10, 1), s(5, 1)], 15, 2, None, false);
        assert!(!v.converged);
    }

    #[test]
    fn window_resets_on_break() {
        let mut d = ConvergenceDetector::new(10, 2, 3);
        assert!(d.observe(0, &[s(5, 1), s(5, 1)]));
        assert!(!d.stable(1));
        assert!(!d.observe(1, &[s(4, 1), s(5, 1)]));
        assert!(d.observe(2, &[s(5, 1), s(10, 2)]));
        d.observe(3, &[s(5, 1), s(10, 2)]);
        assert!(!d.stable(3));
        d.observe(4, &[s(5, 1), s(10, 2)]);
        assert!(d.stable(4));
        assert_eq!(d.since(), Some(2));
    }
}
