//! Quantitative metric checks: four-point hyperbolicity, cross chains,
//! coarse injectivity, coarse density of the point set, and the graded
//! four-point and weak-rough-geodesic bounds. All comparisons are exact
//! integer or rational arithmetic.

use crate::bits::Bits;
use crate::chains::{self, ChainSystem, GradedSystem};
use crate::dual::{ball_family_sweep, DualSpace, FamilyCheckReport};
use crate::error::{Error, Result};
use crate::paths;
use crate::wallspace::{Orientation, Wallspace};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use std::ops::{Add, Sub};

/// Quadruple enumeration switches from exhaustive to seeded sampling above
/// this many points, keeping reports deterministic for a recorded seed.
pub const EXHAUSTIVE_QUADRUPLE_LIMIT: usize = 40;

#[derive(Clone, Debug)]
pub struct HyperbolicityReport<T> {
    /// Largest four-point defect seen.
    pub delta: T,
    pub bound: Option<T>,
    /// Set when a bound was supplied.
    pub passed: Option<bool>,
    pub quadruple_count: usize,
    pub worst_quadruple: [usize; 4],
    pub exhaustive: bool,
    pub seed: u64,
}

/// Max over quadruples of d(x1,x2) + d(x3,x4) - max of the two other
/// pairings, floored at zero: with the three pairing sums sorted this is
/// largest minus second largest.
pub fn four_point_delta<T, F>(
    n: usize,
    metric: F,
    bound: Option<T>,
    quadruple_cap: usize,
    seed: u64,
) -> HyperbolicityReport<T>
where
    T: Clone + Ord + Zero + Add<Output = T> + Sub<Output = T>,
    F: Fn(usize, usize) -> T,
{
    use rand::Rng;
    use rand::SeedableRng;
    let mut delta = T::zero();
    let mut worst = [0usize; 4];
    let mut count = 0usize;
    let consider = |q: [usize; 4], delta: &mut T, worst: &mut [usize; 4]| {
        let [a, b, c, d] = q;
        let mut sums = [
            metric(a, b) + metric(c, d),
            metric(a, c) + metric(b, d),
            metric(a, d) + metric(b, c),
        ];
        sums.sort();
        let defect = sums[2].clone() - sums[1].clone();
        if defect > *delta {
            *delta = defect;
            *worst = q;
        }
    };
    let exhaustive = n <= EXHAUSTIVE_QUADRUPLE_LIMIT;
    if exhaustive {
        for a in 0..n {
            for b in (a + 1)..n {
                for c in (b + 1)..n {
                    for d in (c + 1)..n {
                        consider([a, b, c, d], &mut delta, &mut worst);
                        count += 1;
                    }
                }
            }
        }
    } else {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        while count < quadruple_cap {
            let mut q: Vec<usize> = (0..4).map(|_| rng.gen_range(0..n)).collect();
            q.sort_unstable();
            q.dedup();
            if q.len() == 4 {
                consider([q[0], q[1], q[2], q[3]], &mut delta, &mut worst);
                count += 1;
            }
        }
    }
    let passed = bound.as_ref().map(|b| delta <= *b);
    HyperbolicityReport {
        delta,
        bound,
        passed,
        quadruple_count: count,
        worst_quadruple: worst,
        exhaustive,
        seed,
    }
}

/// Four-point defect of a dual space's metric table.
pub fn four_point_delta_dual(d: &DualSpace, bound: Option<usize>, quadruple_cap: usize, seed: u64) -> HyperbolicityReport<i64> {
    four_point_delta(
        d.n_vertices(),
        |a, b| d.dist(a, b) as i64,
        bound.map(|b| b as i64),
        quadruple_cap,
        seed,
    )
}

// ---------------------------------------------------------------------------
// Cross chains
// ---------------------------------------------------------------------------

/// A four-corner decomposition around a quadruple: part `i` consists of
/// walls separating witness `i` from the other three, and any two parts
/// together form a member of the system.
#[derive(Clone, Debug)]
pub struct CrossChain {
    pub parts: [Vec<usize>; 4],
    pub witnesses: [Orientation; 4],
}

impl CrossChain {
    pub fn size(&self) -> usize {
        self.parts.iter().map(|p| p.len()).sum()
    }
}

/// Locally-maximal cross chain: greedy longest corner chains, trimmed until
/// all pairwise unions are members, then grown one wall at a time until no
/// single wall can be added. `budget` bounds improvement steps.
pub fn maximal_cross_chain(
    ws: &Wallspace,
    cs: &ChainSystem,
    xs: &[Orientation; 4],
    budget: usize,
) -> Result<CrossChain> {
    if !cs.is_chain_kind() {
        return Err(Error::Invalid("cross chains require a chain system".into()));
    }
    let n = ws.n_walls();
    let corner = |i: usize| -> Bits {
        let mut own = Bits::new(n).complement();
        for j in 0..4 {
            if j != i {
                own = own.intersection(&ws.separating_walls(&xs[i], &xs[j]));
            }
        }
        own
    };
    let corners: Vec<Bits> = (0..4).map(corner).collect();
    let admissible = match &cs.kind {
        chains::SystemKind::Pairwise(p) => Some(p),
        _ => None,
    };
    let mut parts: Vec<Vec<usize>> = (0..4)
        .map(|i| chains::longest_chain_witness_within(ws, &xs[i], &corners[i], admissible).1)
        .collect();
    let union_ok = |parts: &[Vec<usize>], i: usize, j: usize| -> bool {
        let u = Bits::from_indices(n, parts[i].iter().chain(parts[j].iter()).copied());
        cs.contains(ws, &u)
    };
    // Trim: drop outermost walls of the larger part until each pairwise
    // union is a member.
    let mut steps = 0usize;
    loop {
        let mut bad = None;
        'scan: for i in 0..4 {
            for j in (i + 1)..4 {
                if !union_ok(&parts, i, j) {
                    bad = Some((i, j));
                    break 'scan;
                }
            }
        }
        match bad {
            None => break,
            Some((i, j)) => {
                let victim = if parts[i].len() >= parts[j].len() { i } else { j };
                if parts[victim].pop().is_none() {
                    return Err(Error::Invalid("cross-chain trim emptied a corner without repair".into()));
                }
                steps += 1;
                if steps > budget {
                    return Err(Error::SearchCap { budget });
                }
            }
        }
    }
    // Grow: add any corner wall that keeps its own corner a chain and all
    // pairwise unions members.
    loop {
        let mut grew = false;
        for i in 0..4 {
            for w in corners[i].iter() {
                if parts[i].contains(&w) {
                    continue;
                }
                let mut trial: Vec<usize> = parts[i].clone();
                trial.push(w);
                let trial_bits = Bits::from_indices(n, trial.iter().copied());
                if !cs.contains(ws, &trial_bits) {
                    continue;
                }
                let old = std::mem::replace(&mut parts[i], trial);
                if (0..4).all(|j| j == i || union_ok(&parts, i, j)) {
                    grew = true;
                } else {
                    parts[i] = old;
                }
                steps += 1;
                if steps > budget {
                    return Err(Error::SearchCap { budget });
                }
            }
        }
        if !grew {
            break;
        }
    }
    Ok(CrossChain {
        parts: [
            parts[0].clone(),
            parts[1].clone(),
            parts[2].clone(),
            parts[3].clone(),
        ],
        witnesses: xs.clone(),
    })
}

#[derive(Clone, Debug)]
pub struct CrossChainSandwich {
    pub chi1: usize,
    pub chi2: usize,
    /// Walls of a d(x1,x2)-realizing chain not separating x3 from x4.
    pub middle_free: usize,
    pub lower: i64,
    pub upper: i64,
    pub holds: bool,
}

/// Compares a maximal cross chain against a distance-realizing chain for
/// (x1, x2): the count of realizing walls not separating x3 from x4 is
/// within [|χ1|+|χ2| - 2(L+m+1), |χ1|+|χ2| + 4(L+m+1)].
pub fn cross_chain_sandwich(
    ws: &Wallspace,
    cs: &ChainSystem,
    chi: &CrossChain,
    l: usize,
    m: usize,
) -> CrossChainSandwich {
    let (x1, x2, x3, x4) = (
        &chi.witnesses[0],
        &chi.witnesses[1],
        &chi.witnesses[2],
        &chi.witnesses[3],
    );
    let (_, realizing) = chains::dist_with_witness(cs, ws, x1, x2);
    let sep34 = ws.separating_walls(x3, x4);
    let middle_free = realizing.iter().filter(|&&w| !sep34.get(w)).count();
    let sum = (chi.parts[0].len() + chi.parts[1].len()) as i64;
    let window = (l + m + 1) as i64;
    let lower = sum - 2 * window;
    let upper = sum + 4 * window;
    CrossChainSandwich {
        chi1: chi.parts[0].len(),
        chi2: chi.parts[1].len(),
        middle_free,
        lower,
        upper,
        holds: lower <= middle_free as i64 && middle_free as i64 <= upper,
    }
}

// ---------------------------------------------------------------------------
// Coarse injectivity and density
// ---------------------------------------------------------------------------

/// Ball families with pairwise-intersecting radii admit a common point after
/// inflating every radius by 2m. Wraps the family sweep with slack 2m.
pub fn check_coarse_injectivity(
    d: &DualSpace,
    m: usize,
    family_cap: usize,
    tuple_budget: usize,
    seed: u64,
) -> FamilyCheckReport {
    ball_family_sweep(d, family_cap, 2 * m, tuple_budget, 50_000, seed)
}

#[derive(Clone, Debug)]
pub struct DensityReport {
    /// Empirical weak-rough-geodesic constant of the marked subset.
    pub weak_rough_constant: usize,
    /// Max distance from any vertex to the marked subset.
    pub density: usize,
    pub bound: usize,
    pub passed: bool,
}

/// Measures how coarsely dense the marked vertices are and checks the
/// density bound 3k + 4(L+m+1), with k the measured weak-rough-geodesic
/// constant of the subset.
pub fn check_coarse_density(d: &DualSpace, marked: &[usize], l: usize, m: usize) -> Result<DensityReport> {
    if marked.is_empty() {
        return Err(Error::Invalid("density check needs a nonempty marked set".into()));
    }
    let mut k = 0usize;
    for (ai, &a) in marked.iter().enumerate() {
        for &b in marked.iter().skip(ai + 1) {
            let n = d.dist(a, b);
            for r in 0..=n {
                let best = marked
                    .iter()
                    .map(|&u| {
                        let da = d.dist(a, u).abs_diff(r);
                        let db = d.dist(u, b).abs_diff(n - r);
                        da.max(db)
                    })
                    .min()
                    .unwrap();
                k = k.max(best);
            }
        }
    }
    let density = (0..d.n_vertices())
        .map(|v| marked.iter().map(|&s| d.dist(s, v)).min().unwrap())
        .max()
        .unwrap_or(0);
    let bound = 3 * k + 4 * (l + m + 1);
    Ok(DensityReport {
        weak_rough_constant: k,
        density,
        bound,
        passed: density <= bound,
    })
}

// ---------------------------------------------------------------------------
// Graded hyperbolicity
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct GradedHyperbolicityReport {
    pub four_point: HyperbolicityReport<BigRational>,
    /// 16Λ.
    pub four_point_bound: BigRational,
    /// max path step and max Gromov slack along witness paths, both bounded
    /// by 4MΛ with M the largest level gluing constant.
    pub max_step: BigRational,
    pub max_slack: BigRational,
    pub wrg_bound: BigRational,
    pub passed: bool,
}

/// Four-point defect of the graded metric over a vertex sample, bounded by
/// 16Λ, plus the weak-rough-geodesic envelope of witness paths built in the
/// last level: steps and additive slack both within 4MΛ.
pub fn check_graded_hyperbolicity(
    gs: &GradedSystem,
    ws: &Wallspace,
    sample: &[Orientation],
    quadruple_cap: usize,
    seed: u64,
) -> Result<GradedHyperbolicityReport> {
    let n = sample.len();
    let mut table = vec![BigRational::zero(); n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = chains::graded_dist(gs, ws, &sample[i], &sample[j]);
            table[i * n + j] = v.clone();
            table[j * n + i] = v;
        }
    }
    let sixteen_lambda = BigRational::from(BigInt::from(16)) * gs.lambda_total.clone();
    let four_point = four_point_delta(
        n,
        |a, b| table[a * n + b].clone(),
        Some(sixteen_lambda.clone()),
        quadruple_cap,
        seed,
    );
    let m_max = gs.max_gluing();
    let wrg_bound = BigRational::from(BigInt::from(4 * m_max.max(1) as i64)) * gs.lambda_total.clone();
    let last = &gs
        .levels
        .last()
        .ok_or_else(|| Error::Invalid("graded system has no levels".into()))?
        .system;
    let mut max_step = BigRational::zero();
    let mut max_slack = BigRational::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            let path = paths::normal_wall_path(ws, last, &sample[i], &sample[j])?;
            let dxy = &table[i * n + j];
            for (r, z) in path.steps.iter().enumerate() {
                let dx = chains::graded_dist(gs, ws, &sample[i], z);
                let dy = chains::graded_dist(gs, ws, z, &sample[j]);
                let slack = dx + dy - dxy.clone();
                if slack > max_slack {
                    max_slack = slack;
                }
                if r + 1 < path.steps.len() {
                    let step = chains::graded_dist(gs, ws, z, &path.steps[r + 1]);
                    if step > max_step {
                        max_step = step;
                    }
                }
            }
        }
    }
    let passed = four_point.passed.unwrap_or(true) && max_step <= wrg_bound && max_slack <= wrg_bound;
    Ok(GradedHyperbolicityReport {
        four_point,
        four_point_bound: sixteen_lambda,
        max_step,
        max_slack,
        wrg_bound,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::DEFAULT_VERTEX_CAP;
    use crate::fixtures;
    use std::sync::Arc;

    fn dual(ws: Wallspace, cs: ChainSystem) -> DualSpace {
        DualSpace::enumerate(Arc::new(ws), cs, DEFAULT_VERTEX_CAP).unwrap()
    }

    #[test]
    fn tree_metric_is_zero_hyperbolic() {
        let d = dual(fixtures::path_wallspace(8), ChainSystem::all_chains());
        let r = four_point_delta_dual(&d, Some(0), 10_000, 1);
        assert_eq!(r.delta, 0);
        assert_eq!(r.passed, Some(true));
        assert!(r.exhaustive);
    }

    #[test]
    fn grid_l1_defect_grows() {
        let mut previous = -1i64;
        for n in [3usize, 4, 5] {
            let d = dual(fixtures::grid_wallspace(n, n), ChainSystem::all_subsets());
            let r = four_point_delta_dual(&d, None, 100_000, 1);
            assert!(r.delta > previous, "ell-1 grids get less hyperbolic with size");
            previous = r.delta;
        }
    }

    #[test]
    fn all_chains_grid_defect_within_separation_bound() {
        // 3x3 grid under all chains: L = 2, m = 0, bound 22(L+m+1) = 66.
        let d = dual(fixtures::grid_wallspace(3, 3), ChainSystem::all_chains());
        let r = four_point_delta_dual(&d, Some(66), 10_000, 1);
        assert_eq!(r.passed, Some(true));
    }

    #[test]
    fn degenerate_cross_chain() {
        let ws = fixtures::grid_wallspace(3, 3);
        let cs = ChainSystem::all_chains();
        let x = ws.principal_ultrafilter(4).unwrap();
        let chi = maximal_cross_chain(&ws, &cs, &[x.clone(), x.clone(), x.clone(), x], 10_000).unwrap();
        assert_eq!(chi.size(), 0);
    }

    #[test]
    fn collinear_cross_chain_covers_separators() {
        let ws = fixtures::path_wallspace(9);
        let cs = ChainSystem::all_chains();
        let phi = |s: usize| ws.principal_ultrafilter(s).unwrap();
        // x1 .. x4 in a row: corner walls of x1 = those before it; of x4 =
        // those after; middle points have no private walls.
        let xs = [phi(0), phi(9), phi(3), phi(6)];
        let chi = maximal_cross_chain(&ws, &cs, &xs, 10_000).unwrap();
        assert_eq!(chi.parts[0].len(), 3, "walls separating v0 from v3,v6,v9");
        assert_eq!(chi.parts[1].len(), 3, "walls separating v9 from the rest");
        assert!(chi.parts[2].is_empty() && chi.parts[3].is_empty());
        let sandwich = cross_chain_sandwich(&ws, &cs, &chi, 0, 0);
        assert!(sandwich.holds);
    }

    #[test]
    fn grid_corner_cross_chain() {
        let ws = fixtures::grid_wallspace(3, 3);
        let cs = ChainSystem::all_chains();
        let phi = |s: usize| ws.principal_ultrafilter(s).unwrap();
        let xs = [phi(0), phi(8), phi(2), phi(6)];
        let chi = maximal_cross_chain(&ws, &cs, &xs, 10_000).unwrap();
        // Every wall separates two corners from two corners, so no wall is
        // private to one corner.
        assert_eq!(chi.size(), 0);
        let sandwich = cross_chain_sandwich(&ws, &cs, &chi, 2, 0);
        assert!(sandwich.holds);
    }

    #[test]
    fn helly_and_coarse_injectivity_on_grid() {
        let d = dual(fixtures::grid_wallspace(3, 3), ChainSystem::all_chains());
        let helly = crate::dual::verify_helly(&d, 5, 100_000, 7);
        assert!(helly.passed && helly.exhaustive_tuples);
        let ci = check_coarse_injectivity(&d, 0, 4, 100_000, 7);
        assert!(ci.passed);
    }

    #[test]
    fn square_dual_is_a_clique_and_helly() {
        let d = dual(fixtures::square_wallspace(), ChainSystem::all_chains());
        assert_eq!(d.diameter(), 1);
        assert!(crate::dual::verify_helly(&d, 5, 100_000, 7).passed);
    }

    #[test]
    fn tripod_dual_helly() {
        let d = dual(fixtures::tripod_wallspace(), ChainSystem::all_chains());
        assert!(crate::dual::verify_helly(&d, 5, 100_000, 7).passed);
    }

    #[test]
    fn non_helly_vertex_set_is_caught() {
        // Removing the center from the tripod dual breaks the Helly
        // property: the three leaf balls of radius 1 pairwise intersect but
        // have no common point.
        let ws = Arc::new(fixtures::tripod_wallspace());
        let full = DualSpace::enumerate(ws.clone(), ChainSystem::all_chains(), 1 << 10).unwrap();
        let center = ws.principal_ultrafilter(0).unwrap();
        let depleted: Vec<Orientation> = full
            .vertices()
            .iter()
            .filter(|v| *v != &center)
            .cloned()
            .collect();
        let d = DualSpace::from_vertices(ws, ChainSystem::all_chains(), depleted).unwrap();
        let r = crate::dual::verify_helly(&d, 3, 100_000, 7);
        assert!(!r.passed);
    }

    #[test]
    fn density_trivial_cases() {
        let d = dual(fixtures::path_wallspace(6), ChainSystem::all_chains());
        let all: Vec<usize> = (0..d.n_vertices()).collect();
        let r = check_coarse_density(&d, &all, 0, 0).unwrap();
        assert_eq!(r.density, 0);
        assert!(r.passed);
    }

    #[test]
    fn two_tangent_balls_have_midpoint_witness() {
        let d = dual(fixtures::path_wallspace(6), ChainSystem::all_chains());
        // Balls of radius 3 around the endpoints exactly touch; slack 0
        // already admits the midpoint.
        let r = ball_family_sweep(&d, 2, 0, 100_000, 50_000, 3);
        assert!(r.passed);
    }
}
