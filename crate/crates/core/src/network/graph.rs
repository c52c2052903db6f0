//! Small undirected simple graphs backed by 128-bit adjacency masks.

pub const MAX_NODES: usize = 128;

pub type NodeSet = u128;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<NodeSet>,
}

fn members(mut set: NodeSet) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if set == 0 {
            None
        } else {
            let i = set.trailing_zeros() as usize;
            set &= set - 1;
            Some(i)
        }
    })
}

fn bit(i: usize) -> NodeSet {
    1u128 << i
}

impl Graph {
    /// Edgeless graph on `n` nodes. Panics when `n > MAX_NODES`.
    pub fn new(n: usize) -> Self {
        assert!(n <= MAX_NODES, "graph supports at most {MAX_NODES} nodes, got {n}");
        Graph { adj: vec![0; n] }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Graph::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    /// Adds an undirected edge; self-loops and repeats are ignored.
    /// Returns whether the edge is new.
    pub fn add_edge(&mut self, u: usize, v: usize) -> bool {
        if u == v || self.has_edge(u, v) {
            return false;
        }
        self.adj[u] |= bit(v);
        self.adj[v] |= bit(u);
        true
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u] & bit(v) != 0
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count_ones() as usize
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|a| a.count_ones() as usize).sum::<usize>() / 2
    }

    /// Edges as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, &a)| {
                let above = (!0u128).checked_shl(u as u32 + 1).unwrap_or(0);
                members(a & above).map(move |v| (u, v))
            })
            .collect()
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> {
        members(self.adj[v])
    }

    pub fn is_clique(&self, nodes: &[usize]) -> bool {
        nodes
            .iter()
            .enumerate()
            .all(|(i, &u)| nodes[i + 1..].iter().all(|&v| self.has_edge(u, v)))
    }

    /// `degree / (n - 1)` per node; `None` for graphs with fewer than two nodes.
    pub fn degree_centrality(&self) -> Option<Vec<f64>> {
        let n = self.node_count();
        if n < 2 {
            return None;
        }
        Some((0..n).map(|v| self.degree(v) as f64 / (n - 1) as f64).collect())
    }

    /// A maximum clique, found by Bron–Kerbosch with pivoting.
    ///
    /// The pivot is the vertex of `P ∪ X` with the most neighbours in `P`.
    /// Among maximum cliques the lexicographically smallest sorted index list
    /// is returned. Empty graphs yield an empty clique.
    pub fn maximum_clique(&self) -> Vec<usize> {
        let n = self.node_count();
        if n == 0 {
            return Vec::new();
        }
        let all = if n == MAX_NODES { !0 } else { bit(n) - 1 };
        let mut best: NodeSet = 0;
        self.expand(0, all, 0, &mut best);
        members(best).collect()
    }

    fn expand(&self, r: NodeSet, p: NodeSet, x: NodeSet, best: &mut NodeSet) {
        if p == 0 {
            if x == 0 && beats(r, *best) {
                *best = r;
            }
            return;
        }
        if r.count_ones() + p.count_ones() < best.count_ones() {
            return;
        }
        let pivot = members(p | x)
            .max_by(|&a, &b| {
                let da = (self.adj[a] & p).count_ones();
                let db = (self.adj[b] & p).count_ones();
                // prefer the lower index on ties
                da.cmp(&db).then(b.cmp(&a))
            })
            .expect("p is non-empty");
        let (mut p, mut x) = (p, x);
        for v in members(p & !self.adj[pivot]) {
            let nv = self.adj[v];
            self.expand(r | bit(v), p & nv, x & nv, best);
            p &= !bit(v);
            x |= bit(v);
        }
    }
}

/// Larger wins; equal sizes compare as sorted index lists.
fn beats(candidate: NodeSet, best: NodeSet) -> bool {
    let (c, b) = (candidate.count_ones(), best.count_ones());
    if c != b {
        return c > b;
    }
    let diff = candidate ^ best;
    diff != 0 && candidate & (diff & diff.wrapping_neg()) != 0
}
