//! Connected unweighted graphs with a precomputed all-pairs distance table
//! and lazy geodesic enumeration through the next-hop DAG.

use crate::bits::Bits;
use crate::error::{Error, Result};
use std::collections::VecDeque;

pub struct MetricGraph {
    n: usize,
    adj: Vec<Vec<usize>>,
    /// Row-major n×n shortest-path distances.
    dist: Vec<u32>,
}

/// A geodesic vertex sequence: consecutive vertices adjacent and
/// `d(v0, v_l) = l`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Geodesic {
    pub vertices: Vec<usize>,
}

impl Geodesic {
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() <= 1
    }

    pub fn start(&self) -> usize {
        self.vertices[0]
    }

    pub fn end(&self) -> usize {
        *self.vertices.last().unwrap()
    }
}

impl MetricGraph {
    pub fn from_edges<I: IntoIterator<Item = (usize, usize)>>(n: usize, edges: I) -> Result<MetricGraph> {
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            assert!(u < n && v < n && u != v, "bad edge ({u},{v})");
            if !adj[u].contains(&v) {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        for a in adj.iter_mut() {
            a.sort_unstable();
        }
        let mut dist = vec![u32::MAX; n * n];
        for s in 0..n {
            let mut q = VecDeque::new();
            dist[s * n + s] = 0;
            q.push_back(s);
            while let Some(u) = q.pop_front() {
                let du = dist[s * n + u];
                for &v in &adj[u] {
                    if dist[s * n + v] == u32::MAX {
                        dist[s * n + v] = du + 1;
                        q.push_back(v);
                    }
                }
            }
        }
        if n > 0 {
            for v in 0..n {
                if dist[v] == u32::MAX {
                    return Err(Error::Disconnected(v));
                }
            }
        }
        Ok(MetricGraph { n, adj, dist })
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    pub fn dist(&self, u: usize, v: usize) -> usize {
        self.dist[u * self.n + v] as usize
    }

    pub fn diameter(&self) -> usize {
        self.dist.iter().copied().max().unwrap_or(0) as usize
    }

    /// Neighbors of `u` one step closer to `v`.
    pub fn next_hops(&self, u: usize, v: usize) -> impl Iterator<Item = usize> + '_ {
        let d = self.dist(u, v);
        self.adj[u]
            .iter()
            .copied()
            .filter(move |&w| self.dist(w, v) + 1 == d)
    }

    /// Enumerates geodesics from `u` to `v` in lexicographic next-hop order,
    /// stopping once `budget` geodesics have been produced. Returns the
    /// geodesics and whether the enumeration was exhaustive.
    pub fn geodesics_between(&self, u: usize, v: usize, budget: usize) -> (Vec<Geodesic>, bool) {
        let mut out = Vec::new();
        let mut complete = true;
        let mut stack = vec![u];
        self.geodesic_dfs(v, &mut stack, &mut out, budget, &mut complete);
        (out, complete)
    }

    fn geodesic_dfs(
        &self,
        target: usize,
        stack: &mut Vec<usize>,
        out: &mut Vec<Geodesic>,
        budget: usize,
        complete: &mut bool,
    ) {
        if out.len() >= budget {
            *complete = false;
            return;
        }
        let u = *stack.last().unwrap();
        if u == target {
            out.push(Geodesic {
                vertices: stack.clone(),
            });
            return;
        }
        let hops: Vec<usize> = self.next_hops(u, target).collect();
        for w in hops {
            stack.push(w);
            self.geodesic_dfs(target, stack, out, budget, complete);
            stack.pop();
            if out.len() >= budget && *stack.first().unwrap() != target {
                // budget exhausted somewhere below
            }
        }
    }

    /// One arbitrary (lexicographically first) geodesic from `u` to `v`.
    pub fn some_geodesic(&self, u: usize, v: usize) -> Geodesic {
        let mut vertices = vec![u];
        let mut cur = u;
        while cur != v {
            cur = self.next_hops(cur, v).next().expect("connected graph");
            vertices.push(cur);
        }
        Geodesic { vertices }
    }

    pub fn is_geodesic(&self, g: &Geodesic) -> bool {
        g.vertices
            .windows(2)
            .all(|w| self.dist(w[0], w[1]) == 1)
            && self.dist(g.start(), g.end()) == g.len()
    }

    /// Combinatorial ball as a vertex set.
    pub fn ball(&self, center: usize, radius: usize) -> Bits {
        Bits::from_indices(self.n, (0..self.n).filter(|&v| self.dist(center, v) <= radius))
    }

    /// BFS distances from `start` in the graph with `blocked` vertices
    /// removed. `u32::MAX` marks unreachable. `start` must not be blocked.
    pub fn dist_avoiding(&self, start: usize, blocked: &Bits) -> Vec<u32> {
        debug_assert!(!blocked.get(start));
        let mut d = vec![u32::MAX; self.n];
        let mut q = VecDeque::new();
        d[start] = 0;
        q.push_back(start);
        while let Some(u) = q.pop_front() {
            for &v in &self.adj[u] {
                if !blocked.get(v) && d[v] == u32::MAX {
                    d[v] = d[u] + 1;
                    q.push_back(v);
                }
            }
        }
        d
    }

    /// All vertices sorted by distance from `center`, bucketed by radius.
    pub fn by_distance(&self, center: usize) -> Vec<Vec<usize>> {
        let ecc = (0..self.n).map(|v| self.dist(center, v)).max().unwrap_or(0);
        let mut buckets = vec![Vec::new(); ecc + 1];
        for v in 0..self.n {
            buckets[self.dist(center, v)].push(v);
        }
        buckets
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn grid_distances() {
        let g = fixtures::grid_graph(4, 3);
        assert_eq!(g.dist(0, 3), 3);
        assert_eq!(g.dist(0, 11), 5);
        assert_eq!(g.diameter(), 5);
    }

    #[test]
    fn geodesic_enumeration_counts_lattice_paths() {
        let g = fixtures::grid_graph(4, 4);
        let (geos, complete) = g.geodesics_between(0, 15, 1000);
        assert!(complete);
        assert_eq!(geos.len(), 20); // C(6,3)
        for geo in &geos {
            assert!(g.is_geodesic(geo));
        }
        let (geos, complete) = g.geodesics_between(0, 15, 5);
        assert!(!complete);
        assert_eq!(geos.len(), 5);
    }

    #[test]
    fn dist_avoiding_blocks() {
        let g = fixtures::ladder_graph(4);
        // Bottom row 0..=4, top row 5..=9. Blocking a full column cuts it.
        let blocked = crate::bits::Bits::from_indices(10, [2, 7]);
        let d = g.dist_avoiding(0, &blocked);
        assert_eq!(d[4], u32::MAX);
        let blocked = crate::bits::Bits::from_indices(10, [2]);
        let d = g.dist_avoiding(0, &blocked);
        assert_eq!(d[4], 6); // detour over the top row
    }
}
