//! Curtains dual to strongly contracting geodesics and the graded systems
//! they induce.
//!
//! A curtain is the preimage of a middle interval of a contracting geodesic
//! under closest-point projection: a thick slab separating the graph into
//! two far halfspaces. Curtains induce walls, disjoint curtain pairs are
//! graded by the radius of a blocking ball between them, and the resulting
//! nested systems carry the graded hyperbolic metric.

use crate::bits::Bits;
use crate::chains::{rational, ChainSystem, GradedLevel, GradedSystem, PairwiseSystem};
use crate::error::{Error, Result};
use crate::graph::{Geodesic, MetricGraph};
use crate::wallspace::Wallspace;
use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use std::collections::HashMap;
use std::sync::Arc;

/// All vertices of `alpha` at minimal distance from `x`.
pub fn closest_point_projection(g: &MetricGraph, alpha: &Geodesic, x: usize) -> Vec<usize> {
    let dmin = alpha.vertices.iter().map(|&v| g.dist(x, v)).min().unwrap();
    alpha
        .vertices
        .iter()
        .copied()
        .filter(|&v| g.dist(x, v) == dmin)
        .collect()
}

/// First and last geodesic positions realizing the minimal distance, plus
/// that distance. Positions embed isometrically, so the projection diameter
/// is `hi - lo`.
fn projection_interval(g: &MetricGraph, alpha: &Geodesic, x: usize) -> (usize, usize, usize) {
    let mut dmin = usize::MAX;
    let mut lo = 0;
    let mut hi = 0;
    for (pos, &v) in alpha.vertices.iter().enumerate() {
        let d = g.dist(x, v);
        if d < dmin {
            dmin = d;
            lo = pos;
            hi = pos;
        } else if d == dmin {
            hi = pos;
        }
    }
    (lo, hi, dmin)
}

/// Checks the contraction property exhaustively: every ball disjoint from
/// the geodesic projects to diameter < `d`. Returns a witnessing ball on
/// failure.
pub fn is_strongly_contracting(g: &MetricGraph, alpha: &Geodesic, d: usize) -> (bool, Option<(usize, usize)>) {
    let on_alpha = Bits::from_indices(g.n_vertices(), alpha.vertices.iter().copied());
    let intervals: Vec<(usize, usize, usize)> = (0..g.n_vertices())
        .map(|x| projection_interval(g, alpha, x))
        .collect();
    for x in 0..g.n_vertices() {
        if on_alpha.get(x) {
            continue;
        }
        let d_to_alpha = intervals[x].2;
        let buckets = g.by_distance(x);
        let mut lo = usize::MAX;
        let mut hi = 0;
        for (r, bucket) in buckets.iter().enumerate() {
            if r >= d_to_alpha {
                break;
            }
            for &v in bucket {
                lo = lo.min(intervals[v].0);
                hi = hi.max(intervals[v].1);
            }
            if hi - lo >= d {
                return (false, Some((x, r)));
            }
        }
    }
    (true, None)
}

/// A tripartition of the graph induced by an interval of a contracting
/// geodesic.
#[derive(Clone, Debug)]
pub struct Curtain {
    pub dual_geodesic: Geodesic,
    /// inclusive position range of the interval on the geodesic
    pub interval: (usize, usize),
    /// contraction constant D of the dual geodesic
    pub contraction: usize,
    pub membrane: Bits,
    pub minus_side: Bits,
    pub plus_side: Bits,
    /// measured d(minus_side, plus_side); at least 3D
    pub thickness: usize,
}

/// Which bipartition of a curtain a wall is, and how its labelling relates
/// to the stored wall.
#[derive(Clone, Copy, Debug)]
pub struct WallSource {
    pub curtain: usize,
    /// wall minus side includes the membrane
    pub with_membrane: bool,
    /// curtain-induced minus set equals the stored wall's plus side
    pub flipped: bool,
}

#[derive(Clone, Debug, Default)]
pub struct BuildStats {
    pub geodesics_tested: usize,
    pub contracting_found: usize,
    pub complete: bool,
    pub geodesic_budget: usize,
}

pub struct CurtainWallspace {
    pub graph: Arc<MetricGraph>,
    pub curtains: Vec<Curtain>,
    pub wallspace: Arc<Wallspace>,
    pub wall_sources: Vec<Vec<WallSource>>,
    pub stats: BuildStats,
}

#[derive(Clone, Copy, Debug)]
pub struct BuildBudget {
    pub geodesics_per_pair: usize,
    pub total_geodesics: usize,
}

impl Default for BuildBudget {
    fn default() -> Self {
        BuildBudget {
            geodesics_per_pair: 64,
            total_geodesics: 4_000,
        }
    }
}

/// Enumerates contracting geodesics of length exactly 20D for each D in the
/// range, slides the middle interval of length 10D over interior positions,
/// and synthesizes the induced wallspace. Identical tripartitions and
/// identical bipartitions are deduplicated. An empty result is valid: many
/// graphs have no contracting geodesics of the required length.
pub fn build_curtains(
    graph: Arc<MetricGraph>,
    d_range: std::ops::RangeInclusive<usize>,
    budget: BuildBudget,
) -> Result<CurtainWallspace> {
    let n = graph.n_vertices();
    let mut stats = BuildStats {
        complete: true,
        geodesic_budget: budget.total_geodesics,
        ..Default::default()
    };
    let mut curtains: Vec<Curtain> = Vec::new();
    let mut curtain_keys: HashMap<(Bits, Bits), usize> = HashMap::new();
    for d in d_range {
        if d == 0 {
            continue;
        }
        let len = 20 * d;
        for u in 0..n {
            for v in (u + 1)..n {
                if graph.dist(u, v) != len {
                    continue;
                }
                if stats.geodesics_tested >= budget.total_geodesics {
                    stats.complete = false;
                    break;
                }
                let remaining = budget.total_geodesics - stats.geodesics_tested;
                let (geos, complete) = graph.geodesics_between(u, v, budget.geodesics_per_pair.min(remaining));
                stats.complete &= complete;
                for alpha in geos {
                    stats.geodesics_tested += 1;
                    if !is_strongly_contracting(&graph, &alpha, d).0 {
                        continue;
                    }
                    stats.contracting_found += 1;
                    let intervals: Vec<(usize, usize, usize)> =
                        (0..n).map(|x| projection_interval(&graph, &alpha, x)).collect();
                    for start in 1..=(10 * d - 1) {
                        let end = start + 10 * d;
                        debug_assert!(end <= len - 1);
                        let mut minus = Bits::new(n);
                        let mut plus = Bits::new(n);
                        for x in 0..n {
                            let (lo, hi, _) = intervals[x];
                            let in_minus = lo < start;
                            let in_plus = hi > end;
                            debug_assert!(
                                !(in_minus && in_plus),
                                "projection diameter exceeds the interval length"
                            );
                            if in_minus {
                                minus.set(x);
                            } else if in_plus {
                                plus.set(x);
                            }
                        }
                        let membrane = minus.union(&plus).complement();
                        debug_assert!(!minus.is_empty() && !plus.is_empty());
                        let key = (minus.clone(), membrane.clone());
                        if curtain_keys.contains_key(&key) {
                            continue;
                        }
                        let thickness = minus
                            .iter()
                            .flat_map(|a| plus.iter().map(move |b| (a, b)))
                            .map(|(a, b)| graph.dist(a, b))
                            .min()
                            .unwrap();
                        debug_assert!(thickness >= 3 * d, "curtain thinner than 3D");
                        curtain_keys.insert(key, curtains.len());
                        curtains.push(Curtain {
                            dual_geodesic: alpha.clone(),
                            interval: (start, end),
                            contraction: d,
                            membrane,
                            minus_side: minus,
                            plus_side: plus,
                            thickness,
                        });
                    }
                }
            }
        }
    }
    // Induced walls: (minus ∪ membrane | plus) and (minus | membrane ∪ plus),
    // deduplicated as unordered bipartitions.
    let mut wall_minus: Vec<Bits> = Vec::new();
    let mut wall_keys: HashMap<Bits, (usize, bool)> = HashMap::new();
    let mut wall_sources: Vec<Vec<WallSource>> = Vec::new();
    for (ci, curtain) in curtains.iter().enumerate() {
        for with_membrane in [true, false] {
            let induced_minus = if with_membrane {
                curtain.minus_side.union(&curtain.membrane)
            } else {
                curtain.minus_side.clone()
            };
            let complement = induced_minus.complement();
            let canonical = induced_minus.clone().min(complement.clone());
            let (wall_id, canon_is_minus) = match wall_keys.get(&canonical) {
                Some(&(id, canon_flag)) => (id, canon_flag),
                None => {
                    let id = wall_minus.len();
                    wall_minus.push(canonical.clone());
                    wall_sources.push(Vec::new());
                    wall_keys.insert(canonical.clone(), (id, true));
                    (id, true)
                }
            };
            let flipped = !(canon_is_minus && canonical == induced_minus);
            wall_sources[wall_id].push(WallSource {
                curtain: ci,
                with_membrane,
                flipped,
            });
        }
    }
    let labels = (0..n).map(|p| format!("v{p}")).collect();
    let wallspace = Wallspace::new(n, Some(labels), wall_minus)?;
    Ok(CurtainWallspace {
        graph,
        curtains,
        wallspace: Arc::new(wallspace),
        wall_sources,
        stats,
    })
}

impl CurtainWallspace {
    pub fn n_walls(&self) -> usize {
        self.wallspace.n_walls()
    }

    /// Boundary vertices of a set: members adjacent to a non-member.
    fn boundary(&self, set: &Bits) -> Vec<usize> {
        set.iter()
            .filter(|&v| self.graph.neighbors(v).iter().any(|&w| !set.get(w)))
            .collect()
    }

    /// Minimal blocking-ball radius for the arranged disjoint pair
    /// (`lower`, `upper`) with `upper` on the plus side of `lower`: the
    /// smallest ρ admitting a ball B(c, ρ) inside lower⁺ ∩ upper⁻ met by
    /// every geodesic from lower⁻ to upper⁺. `None` when no ball works.
    ///
    /// "Every geodesic from a to b meets B" is decided exactly: the
    /// shortest a–b path avoiding B must be strictly longer than d(a, b).
    /// Checking boundary pairs suffices, because the subpath of a geodesic
    /// between its last vertex in lower⁻ and its first vertex in upper⁺ is
    /// itself a geodesic between boundary vertices.
    pub fn arranged_min_ball_radius(&self, lower: usize, upper: usize) -> Option<(usize, usize)> {
        let g = &self.graph;
        let (a, b) = (&self.curtains[lower], &self.curtains[upper]);
        let region = a.plus_side.intersection(&b.minus_side);
        if region.is_empty() {
            return None;
        }
        let sources = self.boundary(&a.minus_side);
        let sinks = self.boundary(&b.plus_side);
        let outside = region.complement();
        let fit: Vec<(usize, usize)> = region
            .iter()
            .map(|c| {
                let room = outside.iter().map(|v| g.dist(c, v)).min().unwrap_or(usize::MAX);
                (c, room.saturating_sub(1))
            })
            .collect();
        let rho_max = fit.iter().map(|&(_, f)| f).max().unwrap_or(0);
        for rho in 0..=rho_max {
            for &(c, room) in &fit {
                if room < rho {
                    continue;
                }
                let ball = g.ball(c, rho);
                debug_assert!(ball.is_subset(&region));
                let blocked = sources.iter().all(|&s| {
                    let dd = g.dist_avoiding(s, &ball);
                    sinks.iter().all(|&t| dd[t] as usize > g.dist(s, t))
                });
                if blocked {
                    return Some((rho, c));
                }
            }
        }
        None
    }

    /// Ball-separation at radius `r` for a disjoint curtain pair with `h2`
    /// on the plus side of `h1` (either labelling). Errors when the
    /// curtains are not disjoint or not arranged on opposite sides.
    pub fn is_ball_separated(&self, h1: usize, h2: usize, r: usize) -> Result<(bool, Option<(usize, usize)>)> {
        if h1 == h2 || self.curtains[h1].membrane.intersects(&self.curtains[h2].membrane) {
            return Err(Error::NotDisjoint(h1, h2));
        }
        let (lower, upper) = if self.curtains[h2].membrane.is_subset(&self.curtains[h1].plus_side) {
            (h1, h2)
        } else if self.curtains[h2].membrane.is_subset(&self.curtains[h1].minus_side) {
            (h2, h1)
        } else {
            return Err(Error::NotDisjoint(h1, h2));
        };
        // Sidedness must hold both ways.
        let (a, b) = (&self.curtains[lower], &self.curtains[upper]);
        if !a.membrane.is_subset(&b.minus_side) && !a.membrane.is_subset(&b.plus_side) {
            return Err(Error::NotDisjoint(h1, h2));
        }
        let arranged = if a.membrane.is_subset(&b.minus_side) {
            (lower, upper)
        } else {
            (upper, lower)
        };
        match self.arranged_min_ball_radius(arranged.0, arranged.1) {
            Some((rho, center)) if rho <= r => Ok((true, Some((center, rho)))),
            _ => Ok((false, None)),
        }
    }

    /// Symmetric table of minimal ball-separation radii over wall pairs:
    /// entry (w1, w2) is the least R for which some disjoint ball-separated
    /// curtain pair induces the two walls, or `u32::MAX`.
    pub fn wall_min_r_table(&self) -> Vec<u32> {
        let nc = self.curtains.len();
        // Arranged curtain-pair radii, in parallel.
        let pair_min: Vec<u32> = (0..nc * nc)
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx / nc, idx % nc);
                if i == j {
                    return u32::MAX;
                }
                let (a, b) = (&self.curtains[i], &self.curtains[j]);
                if a.membrane.intersects(&b.membrane)
                    || !b.membrane.is_subset(&a.plus_side)
                    || !a.membrane.is_subset(&b.minus_side)
                {
                    return u32::MAX;
                }
                match self.arranged_min_ball_radius(i, j) {
                    Some((rho, _)) => rho as u32,
                    None => u32::MAX,
                }
            })
            .collect();
        let nw = self.n_walls();
        let mut table = vec![u32::MAX; nw * nw];
        for w1 in 0..nw {
            for w2 in (w1 + 1)..nw {
                let mut best = u32::MAX;
                for s1 in &self.wall_sources[w1] {
                    for s2 in &self.wall_sources[w2] {
                        if s1.curtain == s2.curtain {
                            continue;
                        }
                        best = best
                            .min(pair_min[s1.curtain * nc + s2.curtain])
                            .min(pair_min[s2.curtain * nc + s1.curtain]);
                    }
                }
                table[w1 * nw + w2] = best;
                table[w2 * nw + w1] = best;
            }
        }
        table
    }

    /// The level-R chain system: chains whose pairs are all R-ball-separated.
    pub fn level_system(&self, min_r: &[u32], r: usize) -> ChainSystem {
        let nw = self.n_walls();
        let pairs = (0..nw).flat_map(|a| {
            (a + 1..nw).filter_map(move |b| {
                if min_r[a * nw + b] as usize <= r {
                    Some((a, b))
                } else {
                    None
                }
            })
        });
        let mut cs = ChainSystem::pairwise(PairwiseSystem::new(format!("ball_separated({r})"), nw, pairs));
        cs.declared_m = Some(3);
        cs.declared_l = Some(3 * r + 5);
        cs
    }

    /// Assembles the graded system with levels R = 1..=r_max (default: the
    /// graph diameter, past which ball-separation is stable), separation
    /// constants 3R+5, gluing constant 3, κ_R = 1/R², λ_R = 1/(R²(3R+9)),
    /// and the exact tail bound Σ_{R>N} λ_R ≤ 1/(6N²).
    pub fn assemble_graded(&self, r_max: Option<usize>) -> GradedSystem {
        let r_max = r_max.unwrap_or_else(|| self.graph.diameter()).max(1);
        let min_r = self.wall_min_r_table();
        let levels: Vec<GradedLevel> = (1..=r_max)
            .map(|r| {
                let ri = r as i64;
                GradedLevel {
                    radius: r,
                    system: self.level_system(&min_r, r),
                    separation: 3 * r + 5,
                    gluing: 3,
                    kappa: rational(1, ri * ri),
                    lambda: rational(1, ri * ri * (3 * ri + 9)),
                }
            })
            .collect();
        let n = r_max as i64;
        let tail_weight = rational(1, 6 * n * n);
        // Λ: each level contributes λ_R (L_R + m_R + 1) = 1/R²; the tail
        // contributes at most tail_weight · (3N + 9).
        let mut lambda_total = BigRational::new(BigInt::from(0), BigInt::from(1));
        for r in 1..=n {
            lambda_total += rational(1, r * r);
        }
        lambda_total += tail_weight.clone() * BigInt::from(3 * n + 9);
        GradedSystem {
            levels,
            r_max,
            tail_weight,
            lambda_total,
        }
    }
}

// ---------------------------------------------------------------------------
// Comparison of the graph metric with the graded dual metric
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct ComparisonRow {
    pub s: usize,
    pub t: usize,
    pub graph_dist: usize,
    pub graded_dist: BigRational,
}

#[derive(Clone, Debug)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    /// max graded distance over the sampled pairs
    pub dist_diameter: BigRational,
    /// min of graded/graph over pairs at graph distance >= 20
    pub min_ratio_long_pairs: Option<BigRational>,
    /// max over sampled pairs and geodesic vertices of
    /// Dist(s,v) + Dist(v,t) - Dist(s,t)
    pub max_geodesic_slack: BigRational,
}

/// Tabulates graph distance against graded distance for the sampled pairs
/// and measures how far graph geodesics are from being unparametrised rough
/// geodesics of the graded metric.
pub fn universal_comparison(cw: &CurtainWallspace, gs: &GradedSystem, pairs: &[(usize, usize)]) -> ComparisonReport {
    use num_traits::Zero;
    let ws = &cw.wallspace;
    let mut rows = Vec::with_capacity(pairs.len());
    let mut dist_diameter = BigRational::zero();
    let mut min_ratio: Option<BigRational> = None;
    let mut max_slack = BigRational::zero();
    for &(s, t) in pairs {
        let xs = ws.principal_ultrafilter(s).unwrap();
        let xt = ws.principal_ultrafilter(t).unwrap();
        let dd = crate::chains::graded_dist(gs, ws, &xs, &xt);
        let dg = cw.graph.dist(s, t);
        if dd > dist_diameter {
            dist_diameter = dd.clone();
        }
        if dg >= 20 {
            let ratio = dd.clone() / BigRational::from(BigInt::from(dg as i64));
            min_ratio = Some(match min_ratio {
                None => ratio,
                Some(old) => old.min(ratio),
            });
        }
        if s != t {
            let geo = cw.graph.some_geodesic(s, t);
            for &v in &geo.vertices {
                let xv = ws.principal_ultrafilter(v).unwrap();
                let slack = crate::chains::graded_dist(gs, ws, &xs, &xv)
                    + crate::chains::graded_dist(gs, ws, &xv, &xt)
                    - dd.clone();
                if slack > max_slack {
                    max_slack = slack;
                }
            }
        }
        rows.push(ComparisonRow {
            s,
            t,
            graph_dist: dg,
            graded_dist: dd,
        });
    }
    ComparisonReport {
        rows,
        dist_diameter,
        min_ratio_long_pairs: min_ratio,
        max_geodesic_slack: max_slack,
    }
}
