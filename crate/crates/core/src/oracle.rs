//! Brute-force reference implementations, kept deliberately naive.

use crate::action::{GGraph, PermGroup};

/// Every rigidity found by trying all subgroups of the acting group.
///
/// Returns `(vertices, rigidifier, singular)` sorted by vertices.
pub fn rigidities_all_subgroups(gg: &GGraph) -> Vec<(Vec<usize>, PermGroup, bool)> {
    let group = gg.group();
    let n = gg.graph().vertex_count();
    let mut out = Vec::new();
    for h in group.subgroups(usize::MAX) {
        let fixed: Vec<usize> = (0..n).filter(|&v| h.elements().iter().all(|p| p.fixes(v))).collect();
        let sub = gg.graph().full_subgraph_idx(&fixed);
        for block in sub.component_indices() {
            let vertices: Vec<usize> = block.iter().map(|&i| fixed[i]).collect();
            if vertices.iter().all(|&v| group.stabilizer(v) == h) {
                let singular = vertices.len() == 1;
                out.push((vertices, h.clone(), singular));
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// Cycle detection by union-find, independent of the Betti computation.
pub fn has_cycle(graph: &crate::MultiGraph) -> bool {
    let mut parent: Vec<usize> = (0..graph.vertex_count()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for ((i, j), m) in graph.edges() {
        if m > 1 {
            return true;
        }
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        if a == b {
            return true;
        }
        parent[a] = b;
    }
    false
}
