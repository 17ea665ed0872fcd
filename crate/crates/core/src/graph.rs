//! Support-digraph queries built on strongly connected components.

use nalgebra::DMatrix;
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

/// Directed graph on `0..n` with an edge `i -> j` wherever `i != j` and
/// `matrix[(i, j)] > 0`.
pub(crate) fn support_digraph(matrix: &DMatrix<f64>) -> DiGraph<(), ()> {
    let n = matrix.nrows();
    let mut g = DiGraph::with_capacity(n, n * n);
    for _ in 0..n {
        g.add_node(());
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && matrix[(i, j)] > 0.0 {
                g.add_edge(NodeIndex::new(i), NodeIndex::new(j), ());
            }
        }
    }
    g
}

pub(crate) fn edges_digraph(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> DiGraph<(), ()> {
    let mut g = DiGraph::new();
    for _ in 0..n {
        g.add_node(());
    }
    for (i, j) in edges {
        if i != j {
            g.add_edge(NodeIndex::new(i), NodeIndex::new(j), ());
        }
    }
    g
}

/// A graph with at most one node counts as strongly connected.
pub(crate) fn is_strongly_connected(g: &DiGraph<(), ()>) -> bool {
    g.node_count() <= 1 || tarjan_scc(g).len() == 1
}

/// Strongly connected components with no edge leaving them, i.e. the sinks
/// of the condensation. Members are sorted ascending.
pub(crate) fn closed_classes(g: &DiGraph<(), ()>) -> Vec<Vec<usize>> {
    let sccs = tarjan_scc(g);
    let mut component = vec![0usize; g.node_count()];
    for (c, members) in sccs.iter().enumerate() {
        for v in members {
            component[v.index()] = c;
        }
    }
    let mut out: Vec<Vec<usize>> = sccs
        .iter()
        .enumerate()
        .filter(|(c, members)| {
            members
                .iter()
                .all(|v| g.neighbors(*v).all(|w| component[w.index()] == *c))
        })
        .map(|(_, members)| {
            let mut m: Vec<usize> = members.iter().map(|v| v.index()).collect();
            m.sort_unstable();
            m
        })
        .collect();
    out.sort();
    out
}
