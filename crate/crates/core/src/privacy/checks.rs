//! Topological sufficient conditions for privacy.

use serde::{Deserialize, Serialize};

use crate::graph::{Digraph, NodeId, Role, RoleMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrivacyCondition {
    /// An in- or out-neighbor also masks its value.
    PrivateNeighbor,
    /// A plain, non-curious in-neighbor sends its initial mass to the
    /// target first.
    PlainFirstSender,
    /// Some out-neighbor is not curious.
    NonCuriousOutNeighbor,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrivacyVerdict {
    pub node: NodeId,
    pub guaranteed: bool,
    pub condition: Option<PrivacyCondition>,
    pub witness: Option<NodeId>,
    pub detail: String,
}

impl PrivacyVerdict {
    fn holds(node: NodeId, condition: PrivacyCondition, witness: NodeId, detail: String) -> Self {
        PrivacyVerdict { node, guaranteed: true, condition: Some(condition), witness: Some(witness), detail }
    }

    fn fails(node: NodeId, detail: String) -> Self {
        PrivacyVerdict { node, guaranteed: false, condition: None, witness: None, detail }
    }
}

/// Condition for nodes running the event-based offsets: a privacy-seeking
/// in- or out-neighbor, or a plain in-neighbor whose first transmission
/// goes to the target.
pub fn event_offset_privacy(g: &Digraph, roles: &RoleMap, target: NodeId) -> PrivacyVerdict {
    if roles.role(target) != Role::PrivacySeeking {
        return PrivacyVerdict::fails(target, format!("{target} does not mask its value"));
    }
    let neighbors = g.in_neighbors(target).iter().chain(g.out_neighbors(target));
    if let Some(&w) = neighbors.into_iter().find(|&&l| roles.role(l) == Role::PrivacySeeking) {
        return PrivacyVerdict::holds(
            target,
            PrivacyCondition::PrivateNeighbor,
            w,
            format!("{w} is a privacy-seeking neighbor of {target}"),
        );
    }
    if let Some(&w) = g
        .in_neighbors(target)
        .iter()
        .find(|&&i| roles.role(i) == Role::Plain && g.order_of(i, target) == Some(0))
    {
        return PrivacyVerdict::holds(
            target,
            PrivacyCondition::PlainFirstSender,
            w,
            format!("{w} is plain and transmits to {target} first"),
        );
    }
    PrivacyVerdict::fails(target, format!("no neighbor of {target} shields it"))
}

/// Condition for nodes running the zero-sum offsets: some out-neighbor is
/// not curious.
pub fn zero_sum_privacy(g: &Digraph, roles: &RoleMap, target: NodeId) -> PrivacyVerdict {
    if roles.role(target) != Role::PrivacySeeking {
        return PrivacyVerdict::fails(target, format!("{target} does not mask its value"));
    }
    match g.out_neighbors(target).iter().find(|&&l| roles.role(l) != Role::Curious) {
        Some(&w) => PrivacyVerdict::holds(
            target,
            PrivacyCondition::NonCuriousOutNeighbor,
            w,
            format!("out-neighbor {w} of {target} is not curious"),
        ),
        None => PrivacyVerdict::fails(target, format!("every out-neighbor of {target} is curious")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // 0 <-> 1, 0 <-> 2, 0 <-> 3
    fn star() -> Digraph {
        Digraph::new(4, [(1, 0), (0, 1), (2, 0), (0, 2), (3, 0), (0, 3)]).unwrap()
    }

    #[test]
    fn adjacent_private_nodes_shield_each_other() {
        let g = star();
        let roles = RoleMap::from_sets(4, &[0, 1], &[2, 3]).unwrap();
        for t in [0, 1] {
            let v = event_offset_privacy(&g, &roles, NodeId(t));
            assert!(v.guaranteed);
            assert_eq!(v.condition, Some(PrivacyCondition::PrivateNeighbor));
        }
    }

    #[test]
    fn all_curious_neighbors_leave_no_guarantee() {
        let g = star();
        let roles = RoleMap::from_sets(4, &[0], &[1, 2, 3]).unwrap();
        let v = event_offset_privacy(&g, &roles, NodeId(0));
        assert!(!v.guaranteed);
        assert_eq!(v.condition, None);
        assert!(!zero_sum_privacy(&g, &roles, NodeId(0)).guaranteed);
    }

    #[test]
    fn plain_first_sender() {
        let g = star();
        let roles = RoleMap::from_sets(4, &[0], &[2, 3]).unwrap();
        // node 1 has a single out-neighbor, so the target is first
        let v = event_offset_privacy(&g, &roles, NodeId(0));
        assert_eq!(v.condition, Some(PrivacyCondition::PlainFirstSender));
        assert_eq!(v.witness, Some(NodeId(1)));

        // a plain in-neighbor that transmits elsewhere first does not count
        let g = Digraph::new(4, [(1, 0), (0, 1), (2, 1), (1, 2), (0, 2), (2, 0), (3, 0), (0, 3)]).unwrap();
        let g = g.with_out_order(NodeId(1), vec![NodeId(2), NodeId(0)]).unwrap();
        let roles = RoleMap::from_sets(4, &[0], &[2, 3]).unwrap();
        assert!(!event_offset_privacy(&g, &roles, NodeId(0)).guaranteed);
        let g = g.with_out_order(NodeId(1), vec![NodeId(0), NodeId(2)]).unwrap();
        assert!(event_offset_privacy(&g, &roles, NodeId(0)).guaranteed);
    }

    #[test]
    fn zero_sum_needs_a_non_curious_out_neighbor() {
        let g = star();
        let roles = RoleMap::from_sets(4, &[0], &[2, 3]).unwrap();
        let v = zero_sum_privacy(&g, &roles, NodeId(0));
        assert!(v.guaranteed);
        assert_eq!(v.witness, Some(NodeId(1)));
        let roles = RoleMap::from_sets(4, &[0, 1], &[2, 3]).unwrap();
        assert!(zero_sum_privacy(&g, &roles, NodeId(0)).guaranteed);
    }

    #[test]
    fn target_outside_private_set() {
        let g = star();
        let roles = RoleMap::from_sets(4, &[1], &[2]).unwrap();
        for v in [event_offset_privacy(&g, &roles, NodeId(0)), zero_sum_privacy(&g, &roles, NodeId(0))] {
            assert!(!v.guaranteed);
            assert_eq!(v.condition, None);
        }
    }
}
