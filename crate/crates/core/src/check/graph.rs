use std::collections::VecDeque;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

/// One concrete cycle per cyclic strongly connected component, each
/// starting and ending at the smallest node of its component. Cycles are
/// ordered by that node.
pub(crate) fn cycles(edges: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut g: DiGraph<(), ()> = DiGraph::new();
    let nodes: Vec<NodeIndex> = (0..edges.len()).map(|_| g.add_node(())).collect();
    for (a, succ) in edges.iter().enumerate() {
        for &b in succ {
            g.add_edge(nodes[a], nodes[b], ());
        }
    }
    let mut out = Vec::new();
    for scc in tarjan_scc(&g) {
        let members: Vec<usize> = scc.iter().map(|n| n.index()).collect();
        let start = *members.iter().min().expect("non-empty component");
        let cyclic = members.len() > 1 || edges[start].contains(&start);
        if !cyclic {
            continue;
        }
        // shortest path start -> ... -> start inside the component
        let mut prev = vec![usize::MAX; edges.len()];
        let mut queue = VecDeque::from([start]);
        let mut closing = None;
        'bfs: while let Some(v) = queue.pop_front() {
            let mut succ = edges[v].clone();
            succ.sort_unstable();
            for w in succ {
                if !members.contains(&w) {
                    continue;
                }
                if w == start {
                    closing = Some(v);
                    break 'bfs;
                }
                if prev[w] == usize::MAX {
                    prev[w] = v;
                    queue.push_back(w);
                }
            }
        }
        let mut path = vec![start];
        let mut v = closing.expect("cyclic component has a cycle through every member");
        while v != start {
            path.push(v);
            v = prev[v];
        }
        path[1..].reverse();
        path.push(start);
        out.push(path);
    }
    out.sort_by_key(|c| c[0]);
    out
}

/// Nodes ordered so that every node comes after all of its successors,
/// or `None` if the graph is cyclic.
pub(crate) fn successors_first(edges: &[Vec<usize>]) -> Option<Vec<usize>> {
    fn visit(v: usize, edges: &[Vec<usize>], mark: &mut [u8], out: &mut Vec<usize>) -> bool {
        match mark[v] {
            1 => return false,
            2 => return true,
            _ => {}
        }
        mark[v] = 1;
        for &w in &edges[v] {
            if !visit(w, edges, mark, out) {
                return false;
            }
        }
        mark[v] = 2;
        out.push(v);
        true
    }
    let mut mark = vec![0u8; edges.len()];
    let mut out = Vec::new();
    for v in 0..edges.len() {
        if !visit(v, edges, &mut mark, &mut out) {
            return None;
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_self_loops_and_longer_cycles() {
        let edges = vec![vec![0], vec![2], vec![3], vec![1], vec![]];
        assert_eq!(cycles(&edges), vec![vec![0, 0], vec![1, 2, 3, 1]]);
        assert_eq!(successors_first(&edges), None);
    }

    #[test]
    fn acyclic_order() {
        let edges = vec![vec![1], vec![2], vec![]];
        assert!(cycles(&edges).is_empty());
        assert_eq!(successors_first(&edges), Some(vec![2, 1, 0]));
    }
}
