use std::cmp::Ordering;
use std::collections::BinaryHeap;

pub(crate) const NO_PRED: usize = usize::MAX;

#[derive(Clone, Copy, Debug)]
struct Entry {
    dist: f64,
    node: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl Ord for Entry {
    // min-heap on (dist, node)
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.total_cmp(&self.dist).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub(crate) struct ShortestPaths {
    pub dist: Vec<f64>,
    pub pred: Vec<usize>,
    pub settled: usize,
}

impl ShortestPaths {
    /// Node sequence from a source to `node`.
    pub fn trace(&self, node: usize) -> Vec<usize> {
        let mut out = vec![node];
        let mut cur = node;
        while self.pred[cur] != NO_PRED {
            cur = self.pred[cur];
            out.push(cur);
        }
        out.reverse();
        out
    }
}

/// Dijkstra over an implicit graph with positive edge weights.
///
/// Nodes are settled in `(distance, index)` order; a predecessor is replaced on an exact
/// distance tie only by a smaller index. `visit(node, dist)` runs as each node settles and
/// ends the search by returning true.
pub(crate) fn dijkstra(
    num_nodes: usize,
    sources: &[usize],
    mut visit: impl FnMut(usize, f64) -> bool,
    mut expand: impl FnMut(usize, &mut Vec<(usize, f64)>),
) -> ShortestPaths {
    let mut dist = vec![f64::INFINITY; num_nodes];
    let mut pred = vec![NO_PRED; num_nodes];
    let mut done = vec![false; num_nodes];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        if dist[s] != 0.0 {
            dist[s] = 0.0;
            heap.push(Entry { dist: 0.0, node: s });
        }
    }
    let mut settled = 0;
    let mut nbrs = Vec::with_capacity(8);
    while let Some(Entry { dist: d, node: u }) = heap.pop() {
        if done[u] || d > dist[u] {
            continue;
        }
        done[u] = true;
        settled += 1;
        if visit(u, d) {
            break;
        }
        nbrs.clear();
        expand(u, &mut nbrs);
        for &(v, w) in &nbrs {
            if done[v] {
                continue;
            }
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                pred[v] = u;
                heap.push(Entry { dist: nd, node: v });
            } else if nd == dist[v] && u < pred[v] {
                pred[v] = u;
            }
        }
    }
    ShortestPaths { dist, pred, settled }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_graph_distances() {
        // 0 - 1 - 2 - 3 with weights 1, 2, 3
        let w = [1.0, 2.0, 3.0];
        let sp = dijkstra(
            4,
            &[0],
            |_, _| false,
            |u, out| {
                if u > 0 {
                    out.push((u - 1, w[u - 1]));
                }
                if u < 3 {
                    out.push((u + 1, w[u]));
                }
            },
        );
        assert_eq!(sp.dist, vec![0.0, 1.0, 3.0, 6.0]);
        assert_eq!(sp.trace(3), vec![0, 1, 2, 3]);
        assert_eq!(sp.settled, 4);
    }

    #[test]
    fn tie_prefers_smaller_predecessor() {
        // 0 -> {1, 2} -> 3, all weights 1: pred of 3 is 1
        let sp = dijkstra(
            4,
            &[0],
            |n, _| n == 3,
            |u, out| match u {
                0 => out.extend([(2, 1.0), (1, 1.0)]),
                1 | 2 => out.push((3, 1.0)),
                _ => {}
            },
        );
        assert_eq!(sp.dist[3], 2.0);
        assert_eq!(sp.pred[3], 1);
    }
}
