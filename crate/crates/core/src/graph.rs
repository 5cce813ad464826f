//! Directed communication graphs.
//!
//! An edge is stored as the ordered pair `(receiver, sender)`: the pair
//! `(j, i)` means node `j` can receive from node `i`. Every node also carries
//! a round-robin order over its out-neighbors; `out_neighbors(j)[k]` is the
//! neighbor whose order is `k`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from, STREAM_GRAPH, STREAM_ORDER};

/// Default number of regeneration attempts when sampling a strongly
/// connected digraph.
pub const DEFAULT_RETRY_BUDGET: u32 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphFile", into = "GraphFile")]
pub struct Digraph {
    n: usize,
    // (receiver, sender)
    edges: BTreeSet<(NodeId, NodeId)>,
    // out_order[j][k] is the out-neighbor of j with order k
    out_order: Vec<Vec<NodeId>>,
    in_neighbors: Vec<Vec<NodeId>>,
}

impl Digraph {
    /// Builds a digraph with out-neighbors ordered by ascending index.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGraph(format!("need at least 2 nodes, got {n}")));
        }
        let mut set = BTreeSet::new();
        for (r, s) in edges {
            if r >= n || s >= n {
                return Err(Error::InvalidGraph(format!("edge ({r},{s}) out of range")));
            }
            if r == s {
                return Err(Error::InvalidGraph(format!("self-loop at node {r}")));
            }
            set.insert((NodeId(r), NodeId(s)));
        }
        let mut out_order = vec![Vec::new(); n];
        for &(r, s) in &set {
            out_order[s.0].push(r);
        }
        for list in &mut out_order {
            list.sort();
        }
        Ok(Self::from_parts(n, set, out_order))
    }

    fn from_parts(n: usize, edges: BTreeSet<(NodeId, NodeId)>, out_order: Vec<Vec<NodeId>>) -> Self {
        let mut in_neighbors = vec![Vec::new(); n];
        for &(r, s) in &edges {
            in_neighbors[r.0].push(s);
        }
        Digraph { n, edges, out_order, in_neighbors }
    }

    /// Directed cycle `0 -> 1 -> ... -> n-1 -> 0`.
    pub fn cycle(n: usize) -> Result<Self> {
        Self::new(n, (0..n).map(|i| ((i + 1) % n, i)))
    }

    /// Complete digraph on `n` nodes.
    pub fn complete(n: usize) -> Result<Self> {
        Self::new(n, (0..n).flat_map(|r| (0..n).filter(move |&s| s != r).map(move |s| (r, s))))
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.n).map(NodeId)
    }

    /// Edges as `(receiver, sender)` pairs.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, receiver: NodeId, sender: NodeId) -> bool {
        self.edges.contains(&(receiver, sender))
    }

    /// Out-neighbors of `j` in round-robin order.
    pub fn out_neighbors(&self, j: NodeId) -> &[NodeId] {
        &self.out_order[j.0]
    }

    pub fn in_neighbors(&self, j: NodeId) -> &[NodeId] {
        &self.in_neighbors[j.0]
    }

    pub fn out_degree(&self, j: NodeId) -> usize {
        self.out_order[j.0].len()
    }

    pub fn in_degree(&self, j: NodeId) -> usize {
        self.in_neighbors[j.0].len()
    }

    /// The order `sender` assigned to its edge towards `receiver`.
    pub fn order_of(&self, sender: NodeId, receiver: NodeId) -> Option<usize> {
        self.out_order[sender.0].iter().position(|&l| l == receiver)
    }

    /// The out-neighbor of `sender` with the given order.
    pub fn target_at(&self, sender: NodeId, order: usize) -> NodeId {
        self.out_order[sender.0][order]
    }

    /// Returns a copy with `sender`'s out-neighbors in the given order.
    pub fn with_out_order(&self, sender: NodeId, order: Vec<NodeId>) -> Result<Self> {
        let mut expected: Vec<NodeId> = self.out_order[sender.0].clone();
        let mut given = order.clone();
        expected.sort();
        given.sort();
        if expected != given {
            return Err(Error::InvalidGraph(format!(
                "order for {sender} is not a permutation of its out-neighbors"
            )));
        }
        let mut g = self.clone();
        g.out_order[sender.0] = order;
        Ok(g)
    }

    /// Strongly connected components (iterative Tarjan). Returns the
    /// component index of every node; components are numbered in the order
    /// Tarjan completes them.
    pub fn strongly_connected_components(&self) -> Vec<usize> {
        const UNVISITED: usize = usize::MAX;
        let n = self.n;
        let mut index = vec![UNVISITED; n];
        let mut low = vec![0; n];
        let mut on_stack = vec![false; n];
        let mut comp = vec![UNVISITED; n];
        let mut stack = Vec::new();
        let mut next_index = 0;
        let mut next_comp = 0;

        for root in 0..n {
            if index[root] != UNVISITED {
                continue;
            }
            // (node, position in its successor list)
            let mut call: Vec<(usize, usize)> = vec![(root, 0)];
            index[root] = next_index;
            low[root] = next_index;
            next_index += 1;
            stack.push(root);
            on_stack[root] = true;

            while let Some(&(v, pos)) = call.last() {
                let succ = &self.out_order[v];
                if pos < succ.len() {
                    let w = succ[pos].0;
                    if let Some(top) = call.last_mut() {
                        top.1 += 1;
                    }
                    if index[w] == UNVISITED {
                        index[w] = next_index;
                        low[w] = next_index;
                        next_index += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        call.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                } else {
                    call.pop();
                    if let Some(&(parent, _)) = call.last() {
                        low[parent] = low[parent].min(low[v]);
                    }
                    if low[v] == index[v] {
                        while let Some(w) = stack.pop() {
                            on_stack[w] = false;
                            comp[w] = next_comp;
                            if w == v {
                                break;
                            }
                        }
                        next_comp += 1;
                    }
                }
            }
        }
        comp
    }

    pub fn is_strongly_connected(&self) -> bool {
        let comp = self.strongly_connected_components();
        comp.iter().all(|&c| c == comp[0])
    }
}

/// Samples a digraph where each ordered pair carries an edge with
/// probability `p`, regenerating until it is strongly connected. Out-orders
/// are a seeded random permutation per node.
pub fn generate_random_digraph(n: usize, p: f64, seed: u64) -> Result<Digraph> {
    generate_random_digraph_with_budget(n, p, seed, DEFAULT_RETRY_BUDGET)
}

pub fn generate_random_digraph_with_budget(n: usize, p: f64, seed: u64, budget: u32) -> Result<Digraph> {
    if n < 2 {
        return Err(Error::InvalidGraph(format!("need at least 2 nodes, got {n}")));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidGraph(format!("edge probability {p} outside (0,1]")));
    }
    for attempt in 0..budget {
        let mut rng = rng_from(derive_seed(derive_seed(seed, STREAM_GRAPH), attempt as u64));
        let mut edges = Vec::new();
        for r in 0..n {
            for s in 0..n {
                if r != s && rng.gen_bool(p) {
                    edges.push((r, s));
                }
            }
        }
        let g = Digraph::new(n, edges)?;
        if g.is_strongly_connected() {
            return assign_out_orders(&g, seed, &[]);
        }
    }
    Err(Error::RetryBudgetExhausted { n, p, attempts: budget })
}

/// Assigns every node a seeded random round-robin order over its
/// out-neighbors. Each `(sender, receiver)` override forces `receiver` to
/// order 0 for `sender`.
pub fn assign_out_orders(g: &Digraph, seed: u64, overrides: &[(NodeId, NodeId)]) -> Result<Digraph> {
    let mut rng = rng_from(derive_seed(seed, STREAM_ORDER));
    let mut out_order = Vec::with_capacity(g.n);
    for j in g.nodes() {
        let mut list: Vec<NodeId> = g.out_order[j.0].clone();
        list.sort();
        list.shuffle(&mut rng);
        out_order.push(list);
    }
    for &(sender, receiver) in overrides {
        let list = out_order
            .get_mut(sender.0)
            .ok_or_else(|| Error::InvalidGraph(format!("override names unknown node {sender}")))?;
        let pos = list
            .iter()
            .position(|&l| l == receiver)
            .ok_or(Error::NotAnOutNeighbor { node: receiver, of: sender })?;
        list.swap(0, pos);
    }
    Ok(Digraph::from_parts(g.n, g.edges.clone(), out_order))
}

/// Exchange format: `{n, edges: [[receiver, sender], ...], out_order: {node: [...]}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default)]
    pub out_order: BTreeMap<usize, Vec<usize>>,
}

impl TryFrom<GraphFile> for Digraph {
    type Error = Error;

    fn try_from(file: GraphFile) -> Result<Self> {
        let mut g = Digraph::new(file.n, file.edges.iter().map(|e| (e[0], e[1])))?;
        if g.edges.len() != file.edges.len() {
            return Err(Error::InvalidGraph("duplicate edges".into()));
        }
        for (node, order) in file.out_order {
            if node >= g.n {
                return Err(Error::InvalidGraph(format!("out_order names unknown node {node}")));
            }
            g = g.with_out_order(NodeId(node), order.into_iter().map(NodeId).collect())?;
        }
        Ok(g)
    }
}

impl From<Digraph> for GraphFile {
    fn from(g: Digraph) -> Self {
        GraphFile {
            n: g.n,
            edges: g.edges.iter().map(|&(r, s)| [r.0, s.0]).collect(),
            out_order: g
                .out_order
                .iter()
                .enumerate()
                .map(|(j, l)| (j, l.iter().map(|v| v.0).collect()))
                .collect(),
        }
    }
}

/// Node categories for privacy analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// Wants to keep its initial state private.
    PrivacySeeking,
    /// Honest-but-curious; colludes with other curious nodes.
    Curious,
    /// Neither.
    Plain,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RoleMap(Vec<Role>);

impl RoleMap {
    pub fn new(roles: Vec<Role>) -> Self {
        RoleMap(roles)
    }

    pub fn uniform(n: usize, role: Role) -> Self {
        RoleMap(vec![role; n])
    }

    /// Builds a map where listed nodes get the given roles and the rest are plain.
    pub fn from_sets(n: usize, private: &[usize], curious: &[usize]) -> Result<Self> {
        let mut roles = vec![Role::Plain; n];
        for &p in private {
            *roles
                .get_mut(p)
                .ok_or_else(|| Error::InvalidConfig(format!("node {p} out of range")))? = Role::PrivacySeeking;
        }
        for &c in curious {
            let slot = roles
                .get_mut(c)
                .ok_or_else(|| Error::InvalidConfig(format!("node {c} out of range")))?;
            if *slot == Role::PrivacySeeking {
                return Err(Error::InvalidConfig(format!("node {c} cannot be both private and curious")));
            }
            *slot = Role::Curious;
        }
        Ok(RoleMap(roles))
    }

    pub fn role(&self, j: NodeId) -> Role {
        self.0[j.0]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn members(&self, role: Role) -> impl Iterator<Item = NodeId> + '_ {
        self.0.iter().enumerate().filter(move |(_, &r)| r == role).map(|(i, _)| NodeId(i))
    }

    pub fn as_slice(&self) -> &[Role] {
        &self.0
    }
}
