//! Shared desk-scale fixtures: small wallspaces and graphs with known
//! structure, plus a seeded random wallspace generator. Tests, examples,
//! and the acceptance suite all draw from here.

use crate::bits::Bits;
use crate::graph::MetricGraph;
use crate::wallspace::Wallspace;
use rand::Rng;

/// Path with `n` edges: n+1 points, n nested edge-walls. Wall `j` has minus
/// side `{v0..vj}`.
pub fn path_wallspace(n: usize) -> Wallspace {
    let pts = n + 1;
    let walls = (0..n)
        .map(|j| Bits::from_indices(pts, 0..=j))
        .collect();
    let labels = (0..pts).map(|i| format!("v{i}")).collect();
    Wallspace::new(pts, Some(labels), walls).unwrap()
}

/// nx × ny vertex grid with (nx-1) vertical and (ny-1) horizontal cut walls.
/// Point (x, y) has index `y * nx + x`; vertical cuts come first.
pub fn grid_wallspace(nx: usize, ny: usize) -> Wallspace {
    let pts = nx * ny;
    let mut walls = Vec::new();
    for c in 0..nx - 1 {
        walls.push(Bits::from_indices(
            pts,
            (0..pts).filter(|p| p % nx <= c),
        ));
    }
    for r in 0..ny - 1 {
        walls.push(Bits::from_indices(
            pts,
            (0..pts).filter(|p| p / nx <= r),
        ));
    }
    let labels = (0..pts).map(|p| format!("({},{})", p % nx, p / nx)).collect();
    Wallspace::new(pts, Some(labels), walls).unwrap()
}

/// Center point 0 and leaves 1, 2, 3; wall `i` has plus side `{leaf i+1}`.
pub fn tripod_wallspace() -> Wallspace {
    let walls = (1..=3)
        .map(|leaf| Bits::from_indices(4, (0..4).filter(move |&p| p != leaf)))
        .collect();
    let labels = vec!["c".into(), "a".into(), "b".into(), "d".into()];
    Wallspace::new(4, Some(labels), walls).unwrap()
}

/// Two crossing walls over four points, one per quarterspace. Point index is
/// `s0 + 2*s1` with sign bits 0 = minus.
pub fn square_wallspace() -> Wallspace {
    let w0 = Bits::from_indices(4, [0, 2]);
    let w1 = Bits::from_indices(4, [0, 1]);
    Wallspace::new(4, None, vec![w0, w1]).unwrap()
}

/// `dim` pairwise-crossing walls over 2^dim points (one per orthant). Its
/// full dual is the dim-cube.
pub fn cube_wallspace(dim: usize) -> Wallspace {
    let pts = 1 << dim;
    let walls = (0..dim)
        .map(|i| Bits::from_indices(pts, (0..pts).filter(move |p| p & (1 << i) == 0)))
        .collect();
    Wallspace::new(pts, None, walls).unwrap()
}

/// Seeded random wallspace with at most `max_points` points and `max_walls`
/// walls. Redraws colliding bipartitions, so wall count can come out lower.
pub fn random_wallspace<R: Rng>(rng: &mut R, max_points: usize, max_walls: usize) -> Wallspace {
    let n = rng.gen_range(3..=max_points);
    let target = rng.gen_range(3..=max_walls);
    let mut minus_sides: Vec<Bits> = Vec::new();
    let mut attempts = 0;
    while minus_sides.len() < target && attempts < 200 {
        attempts += 1;
        let mut m = Bits::new(n);
        for p in 0..n {
            if rng.gen_bool(0.5) {
                m.set(p);
            }
        }
        if m.is_empty() || m.complement().is_empty() {
            continue;
        }
        let dup = minus_sides
            .iter()
            .any(|old| *old == m || *old == m.complement());
        if !dup {
            minus_sides.push(m);
        }
    }
    if minus_sides.is_empty() {
        minus_sides.push(Bits::from_indices(n, [0]));
    }
    Wallspace::new(n, None, minus_sides).unwrap()
}

// ---------------------------------------------------------------------------
// Graphs
// ---------------------------------------------------------------------------

/// Path with `n` edges.
pub fn path_graph(n: usize) -> MetricGraph {
    MetricGraph::from_edges(n + 1, (0..n).map(|i| (i, i + 1))).unwrap()
}

/// nx × ny vertex grid graph; vertex (x, y) has index `y * nx + x`.
pub fn grid_graph(nx: usize, ny: usize) -> MetricGraph {
    let mut edges = Vec::new();
    for y in 0..ny {
        for x in 0..nx {
            let p = y * nx + x;
            if x + 1 < nx {
                edges.push((p, p + 1));
            }
            if y + 1 < ny {
                edges.push((p, p + nx));
            }
        }
    }
    MetricGraph::from_edges(nx * ny, edges).unwrap()
}

/// Star with `k` rays of length 1 around vertex 0.
pub fn star_graph(k: usize) -> MetricGraph {
    MetricGraph::from_edges(k + 1, (1..=k).map(|i| (0, i))).unwrap()
}

/// Tripod: three rays of length `arm` glued at vertex 0. Ray `r` occupies
/// vertices `1 + r*arm .. 1 + (r+1)*arm - 1` outward.
pub fn tripod_graph(arm: usize) -> MetricGraph {
    let mut edges = Vec::new();
    for r in 0..3 {
        let base = 1 + r * arm;
        edges.push((0, base));
        for i in 0..arm - 1 {
            edges.push((base + i, base + i + 1));
        }
    }
    MetricGraph::from_edges(1 + 3 * arm, edges).unwrap()
}

/// 2 × (n+1) ladder: bottom row 0..=n, top row n+1..=2n+1, rungs between.
pub fn ladder_graph(n: usize) -> MetricGraph {
    let cols = n + 1;
    let mut edges = Vec::new();
    for i in 0..n {
        edges.push((i, i + 1));
        edges.push((cols + i, cols + i + 1));
    }
    for i in 0..cols {
        edges.push((i, cols + i));
    }
    MetricGraph::from_edges(2 * cols, edges).unwrap()
}

/// A binary tree shaped as a spine 0..=len with a leaf child attached to
/// every `branch_every`-th interior spine vertex. Every vertex has at most
/// two children, and the deepest leaf is at depth `len`.
pub fn spine_tree(len: usize, branch_every: usize) -> MetricGraph {
    let mut edges: Vec<(usize, usize)> = (0..len).map(|i| (i, i + 1)).collect();
    let mut next = len + 1;
    if branch_every > 0 {
        let mut at = branch_every;
        while at < len {
            edges.push((at, next));
            next += 1;
            at += branch_every;
        }
    }
    MetricGraph::from_edges(next, edges).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_shapes() {
        assert_eq!(path_wallspace(10).n_walls(), 10);
        assert_eq!(grid_wallspace(3, 3).n_walls(), 4);
        assert_eq!(tripod_wallspace().n_walls(), 3);
        assert_eq!(cube_wallspace(3).n_points(), 8);
    }

    #[test]
    fn random_wallspaces_are_valid() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        for _ in 0..20 {
            let ws = random_wallspace(&mut rng, 8, 10);
            assert!(ws.n_walls() >= 1);
        }
    }

    #[test]
    fn graph_shapes() {
        assert_eq!(path_graph(40).n_vertices(), 41);
        assert_eq!(grid_graph(8, 8).diameter(), 14);
        assert_eq!(ladder_graph(30).n_vertices(), 62);
        let t = spine_tree(60, 5);
        assert_eq!(t.dist(0, 60), 60);
    }
}
