//! File formats: wallspaces and graphs in, dual spaces and curtain dumps
//! out. Wallspaces are JSON objects with a `points` label array and a
//! `walls` array listing each wall's minus side as point indices. Graphs
//! are either edge-list text (one `u v` per line, `#` comments) or JSON.

use crate::bits::Bits;
use crate::curtains::CurtainWallspace;
use crate::dual::DualSpace;
use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::wallspace::Wallspace;
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize)]
struct WallspaceFile {
    points: Vec<String>,
    walls: Vec<Vec<usize>>,
}

pub fn parse_wallspace(text: &str) -> Result<Wallspace> {
    let file: WallspaceFile =
        serde_json::from_str(text).map_err(|e| Error::Invalid(format!("wallspace parse error: {e}")))?;
    let n = file.points.len();
    let mut walls = Vec::with_capacity(file.walls.len());
    for (i, minus) in file.walls.iter().enumerate() {
        let mut bits = Bits::new(n);
        for &p in minus {
            if p >= n {
                return Err(Error::Invalid(format!("wall {i} references point {p} out of range")));
            }
            bits.set(p);
        }
        walls.push(bits);
    }
    Wallspace::new(n, Some(file.points), walls)
}

pub fn wallspace_to_json(ws: &Wallspace) -> serde_json::Value {
    serde_json::json!({
        "points": ws.labels(),
        "walls": ws.walls().iter().map(|w| w.minus.iter().collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    #[serde(default)]
    vertices: Option<usize>,
    edges: Vec<(usize, usize)>,
}

/// Accepts JSON (`{"edges": [[u,v],...]}`) or edge-list text.
pub fn parse_graph(text: &str) -> Result<MetricGraph> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let file: GraphFile =
            serde_json::from_str(text).map_err(|e| Error::Invalid(format!("graph parse error: {e}")))?;
        let n = file
            .vertices
            .unwrap_or_else(|| file.edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0));
        return MetricGraph::from_edges(n, file.edges);
    }
    let mut edges = Vec::new();
    let mut max_v = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<usize> {
            tok.ok_or_else(|| Error::Invalid(format!("line {}: expected `u v`", lineno + 1)))?
                .parse()
                .map_err(|e| Error::Invalid(format!("line {}: {e}", lineno + 1)))
        };
        let u = parse(parts.next())?;
        let v = parse(parts.next())?;
        max_v = max_v.max(u).max(v);
        edges.push((u, v));
    }
    if edges.is_empty() {
        return Err(Error::Invalid("graph input has no edges".into()));
    }
    MetricGraph::from_edges(max_v + 1, edges)
}

pub fn graph_to_json(g: &MetricGraph) -> serde_json::Value {
    let mut edges = Vec::new();
    for u in 0..g.n_vertices() {
        for &v in g.neighbors(u) {
            if u < v {
                edges.push((u, v));
            }
        }
    }
    serde_json::json!({ "vertices": g.n_vertices(), "edges": edges })
}

/// Dual-space export: sign strings in canonical vertex order, edges at
/// distance one, and the full metric table.
pub fn dual_to_json(d: &DualSpace) -> serde_json::Value {
    let n = d.n_vertices();
    let metric: Vec<Vec<u32>> = (0..n)
        .map(|i| (0..n).map(|j| d.dist(i, j) as u32).collect())
        .collect();
    serde_json::json!({
        "system": d.system.kind_name(),
        "vertices": d.vertices().iter().map(|v| v.sign_string()).collect::<Vec<_>>(),
        "edges": d.edges(),
        "metric": metric,
    })
}

/// Per-curtain record: dual geodesic, interval, and the tripartition.
pub fn curtains_to_json(cw: &CurtainWallspace) -> serde_json::Value {
    let curtains: Vec<serde_json::Value> = cw
        .curtains
        .iter()
        .map(|c| {
            serde_json::json!({
                "dual_geodesic": c.dual_geodesic.vertices,
                "interval": [c.interval.0, c.interval.1],
                "contraction": c.contraction,
                "thickness": c.thickness,
                "membrane": c.membrane.iter().collect::<Vec<_>>(),
                "minus_side": c.minus_side.iter().collect::<Vec<_>>(),
                "plus_side": c.plus_side.iter().collect::<Vec<_>>(),
            })
        })
        .collect();
    serde_json::json!({
        "curtains": curtains,
        "walls": cw.wallspace.walls().iter().map(|w| w.minus.iter().collect::<Vec<_>>()).collect::<Vec<_>>(),
        "geodesics_tested": cw.stats.geodesics_tested,
        "contracting_found": cw.stats.contracting_found,
        "enumeration_complete": cw.stats.complete,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn wallspace_round_trip() {
        for ws in [
            fixtures::path_wallspace(5),
            fixtures::grid_wallspace(3, 3),
            fixtures::tripod_wallspace(),
        ] {
            let json = wallspace_to_json(&ws).to_string();
            let back = parse_wallspace(&json).unwrap();
            assert_eq!(back.n_points(), ws.n_points());
            assert_eq!(back.n_walls(), ws.n_walls());
            for w in 0..ws.n_walls() {
                assert_eq!(back.wall(w).minus, ws.wall(w).minus);
            }
        }
    }

    #[test]
    fn graph_formats() {
        let text = "0 1\n1 2\n# comment\n2 3\n";
        let g = parse_graph(text).unwrap();
        assert_eq!(g.n_vertices(), 4);
        assert_eq!(g.dist(0, 3), 3);
        let json = graph_to_json(&g).to_string();
        let g2 = parse_graph(&json).unwrap();
        assert_eq!(g2.dist(0, 3), 3);
    }

    #[test]
    fn malformed_inputs_error() {
        assert!(parse_wallspace("{\"points\": [\"a\"]").is_err());
        assert!(parse_graph("0 x\n").is_err());
        assert!(parse_wallspace("{\"points\": [\"a\",\"b\"], \"walls\": [[7]]}").is_err());
    }
}
