//! Chordal extension of the network graph and its maximal cliques.
//!
//! The extension is the fill pattern of a symbolic Cholesky factorization
//! under a minimum-degree ordering. Its maximal cliques index the PSD blocks of
//! the chordal relaxation.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::case_io::Network;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChordalError {
    #[error("ordering is not a permutation of the {0} vertices")]
    BadOrdering(usize),
    #[error("vertex {0} violates the perfect elimination property")]
    NotChordal(usize),
}

/// Simple undirected graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityGraph {
    adj: Vec<BTreeSet<usize>>,
}

impl SparsityGraph {
    pub fn new(n: usize) -> Self {
        Self {
            adj: vec![BTreeSet::new(); n],
        }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut g = Self::new(n);
        for (a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    /// Adds `{a, b}`; self-loops and duplicates are ignored.
    pub fn add_edge(&mut self, a: usize, b: usize) {
        if a != b {
            self.adj[a].insert(b);
            self.adj[b].insert(a);
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: usize) -> &BTreeSet<usize> {
        &self.adj[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(&b)
    }

    /// Edges `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (a, nb) in self.adj.iter().enumerate() {
            out.extend(nb.iter().filter(|&&b| b > a).map(|&b| (a, b)));
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        let n = self.num_vertices();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Graph with one vertex per bus and one edge per connected bus pair.
pub fn build_graph(network: &Network) -> SparsityGraph {
    SparsityGraph::from_edges(
        network.num_buses(),
        network.branches.iter().map(|b| (b.from, b.to)),
    )
}

/// Minimum-degree elimination ordering; ties go to the smallest vertex.
///
/// `ordering[i]` is the vertex eliminated at step `i`.
pub fn order_vertices(g: &SparsityGraph) -> Vec<usize> {
    let n = g.num_vertices();
    let mut adj = g.adj.clone();
    let mut alive = vec![true; n];
    let mut ordering = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| alive[v])
            .min_by_key(|&v| (adj[v].len(), v))
            .expect("a vertex remains");
        eliminate(&mut adj, v);
        alive[v] = false;
        ordering.push(v);
    }
    ordering
}

/// Removes `v`, turning its neighborhood into a clique. Returns the added edges.
fn eliminate(adj: &mut [BTreeSet<usize>], v: usize) -> Vec<(usize, usize)> {
    let nb: Vec<usize> = adj[v].iter().copied().collect();
    let mut fill = Vec::new();
    for (i, &a) in nb.iter().enumerate() {
        adj[a].remove(&v);
        for &b in &nb[i + 1..] {
            if adj[a].insert(b) {
                adj[b].insert(a);
                fill.push((a.min(b), a.max(b)));
            }
        }
    }
    adj[v].clear();
    fill
}

fn check_permutation(n: usize, ordering: &[usize]) -> Result<Vec<usize>, ChordalError> {
    if ordering.len() != n {
        return Err(ChordalError::BadOrdering(n));
    }
    let mut position = vec![usize::MAX; n];
    for (i, &v) in ordering.iter().enumerate() {
        if v >= n || position[v] != usize::MAX {
            return Err(ChordalError::BadOrdering(n));
        }
        position[v] = i;
    }
    Ok(position)
}

/// Fill edges produced by eliminating vertices in `ordering`, as `(a, b)` with `a < b`.
pub fn symbolic_factorization(
    g: &SparsityGraph,
    ordering: &[usize],
) -> Result<BTreeSet<(usize, usize)>, ChordalError> {
    check_permutation(g.num_vertices(), ordering)?;
    let mut adj = g.adj.clone();
    let mut fill = BTreeSet::new();
    for &v in ordering {
        fill.extend(eliminate(&mut adj, v));
    }
    Ok(fill)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueDecomposition {
    pub ordering: Vec<usize>,
    pub fill_edges: BTreeSet<(usize, usize)>,
    /// Maximal cliques of the extension, each sorted ascending.
    pub cliques: Vec<Vec<usize>>,
}

impl CliqueDecomposition {
    /// Union of the original edges and the fill.
    pub fn extension(&self, g: &SparsityGraph) -> SparsityGraph {
        let mut ext = g.clone();
        for &(a, b) in &self.fill_edges {
            ext.add_edge(a, b);
        }
        ext
    }

    /// Plain-text dump of the ordering, fill and cliques.
    pub fn to_text(&self, labels: Option<&[usize]>) -> String {
        let name = |v: usize| labels.map_or(v, |l| l[v]);
        let mut out = String::new();
        let ord: Vec<String> = self.ordering.iter().map(|&v| name(v).to_string()).collect();
        let _ = writeln!(out, "ordering: {}", ord.join(" "));
        let _ = writeln!(out, "fill edges: {}", self.fill_edges.len());
        for &(a, b) in &self.fill_edges {
            let _ = writeln!(out, "  {} -- {}", name(a), name(b));
        }
        let _ = writeln!(out, "cliques: {}", self.cliques.len());
        for (i, c) in self.cliques.iter().enumerate() {
            let members: Vec<String> = c.iter().map(|&v| name(v).to_string()).collect();
            let _ = writeln!(out, "  K{} (size {}): {}", i + 1, c.len(), members.join(" "));
        }
        out
    }

    /// Graphviz rendering of the extension; fill edges are dashed.
    pub fn to_dot(&self, g: &SparsityGraph, labels: Option<&[usize]>) -> String {
        let name = |v: usize| labels.map_or(v, |l| l[v]);
        let mut out = String::from("graph extension {\n");
        for (a, b) in g.edges() {
            let _ = writeln!(out, "  {} -- {};", name(a), name(b));
        }
        for &(a, b) in &self.fill_edges {
            let _ = writeln!(out, "  {} -- {} [style=dashed];", name(a), name(b));
        }
        out.push_str("}\n");
        out
    }
}

/// Checks that each vertex's later neighbors form a clique in `g`.
pub fn is_perfect_elimination_ordering(g: &SparsityGraph, ordering: &[usize]) -> Result<(), ChordalError> {
    let position = check_permutation(g.num_vertices(), ordering)?;
    for &v in ordering {
        let later: Vec<usize> = g.adj[v].iter().copied().filter(|&w| position[w] > position[v]).collect();
        for (i, &a) in later.iter().enumerate() {
            for &b in &later[i + 1..] {
                if !g.has_edge(a, b) {
                    return Err(ChordalError::NotChordal(v));
                }
            }
        }
    }
    Ok(())
}

/// Maximal cliques of the extension `g ∪ fill`, which must be chordal under `ordering`.
pub fn maximal_cliques(
    g: &SparsityGraph,
    fill_edges: &BTreeSet<(usize, usize)>,
    ordering: &[usize],
) -> Result<CliqueDecomposition, ChordalError> {
    let mut dec = CliqueDecomposition {
        ordering: ordering.to_vec(),
        fill_edges: fill_edges.clone(),
        cliques: Vec::new(),
    };
    let ext = dec.extension(g);
    is_perfect_elimination_ordering(&ext, ordering)?;
    let position = check_permutation(g.num_vertices(), ordering)?;
    let candidates: Vec<BTreeSet<usize>> = ordering
        .iter()
        .map(|&v| {
            let mut c: BTreeSet<usize> = ext.adj[v].iter().copied().filter(|&w| position[w] > position[v]).collect();
            c.insert(v);
            c
        })
        .collect();
    for (i, c) in candidates.iter().enumerate() {
        let dominated = candidates
            .iter()
            .enumerate()
            .any(|(j, d)| j != i && d.len() >= c.len() && c.is_subset(d) && (d.len() > c.len() || j < i));
        if !dominated {
            dec.cliques.push(c.iter().copied().collect());
        }
    }
    Ok(dec)
}

/// Ordering, fill and cliques in one call.
pub fn decompose(g: &SparsityGraph) -> CliqueDecomposition {
    let ordering = order_vertices(g);
    let fill = symbolic_factorization(g, &ordering).expect("ordering is a permutation");
    maximal_cliques(g, &fill, &ordering).expect("elimination fill is chordal")
}

/// Decomposition with an explicit ordering, e.g. to compare extensions.
pub fn decompose_with(g: &SparsityGraph, ordering: &[usize]) -> Result<CliqueDecomposition, ChordalError> {
    let fill = symbolic_factorization(g, ordering)?;
    maximal_cliques(g, &fill, ordering)
}
