//! Explicit finite duals: the vertex set of all consistent orientations with
//! its chain-system metric, gates to intersections of halfspaces, gated
//! balls, and the finite-group fixed point in the first subdivision.

use crate::bits::Bits;
use crate::chains::{self, ChainSystem, SystemKind};
use crate::error::{Error, Result};
use crate::wallspace::{Filter, Orientation, Side, Wallspace};
use rayon::prelude::*;
use std::collections::HashMap;
use std::sync::Arc;

/// A finite realization of a dual space: deduplicated consistent
/// orientations in canonical (sign-bitset) order with a full metric table.
pub struct DualSpace {
    pub ws: Arc<Wallspace>,
    pub system: ChainSystem,
    vertices: Vec<Orientation>,
    index: HashMap<Bits, usize>,
    metric: Vec<u32>,
}

pub const DEFAULT_VERTEX_CAP: usize = 1 << 18;

impl std::fmt::Debug for DualSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "DualSpace({} vertices, {})", self.vertices.len(), self.system.kind_name())
    }
}

impl DualSpace {
    /// Enumerates every consistent total orientation by a backtracking sweep
    /// over wall signs with pairwise pruning, so flip-disconnected
    /// orientations are found too. Errors once more than `cap` orientations
    /// exist.
    pub fn enumerate(ws: Arc<Wallspace>, system: ChainSystem, cap: usize) -> Result<DualSpace> {
        let n = ws.n_walls();
        let mut found: Vec<Orientation> = Vec::new();
        let mut assigned = Bits::new(n);
        let mut signs = Bits::new(n);
        fn sweep(
            ws: &Wallspace,
            wall: usize,
            assigned: &mut Bits,
            signs: &mut Bits,
            found: &mut Vec<Orientation>,
            cap: usize,
        ) -> Result<()> {
            if wall == ws.n_walls() {
                if found.len() >= cap {
                    return Err(Error::StateExplosion { cap });
                }
                found.push(Orientation { signs: signs.clone() });
                return Ok(());
            }
            for side in [Side::Minus, Side::Plus] {
                if !ws.choice_conflicts(assigned, signs, wall, side) {
                    assigned.set(wall);
                    signs.assign(wall, side == Side::Plus);
                    sweep(ws, wall + 1, assigned, signs, found, cap)?;
                    signs.clear(wall);
                    assigned.clear(wall);
                }
            }
            Ok(())
        }
        sweep(&ws, 0, &mut assigned, &mut signs, &mut found, cap)?;
        found.sort();
        Ok(Self::build(ws, system, found))
    }

    /// Builds a dual over an explicit vertex list (deduplicated, canonical
    /// order). Inconsistent orientations are rejected.
    pub fn from_vertices(ws: Arc<Wallspace>, system: ChainSystem, vertices: Vec<Orientation>) -> Result<DualSpace> {
        for v in &vertices {
            if let Some((h, k)) = ws.consistency_violation(v) {
                return Err(Error::Invalid(format!(
                    "vertex {} is inconsistent on walls {h},{k}",
                    v.sign_string()
                )));
            }
        }
        let mut vs = vertices;
        vs.sort();
        vs.dedup();
        Ok(Self::build(ws, system, vs))
    }

    fn build(ws: Arc<Wallspace>, system: ChainSystem, vertices: Vec<Orientation>) -> DualSpace {
        let index: HashMap<Bits, usize> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.signs.clone(), i))
            .collect();
        let n = vertices.len();
        let metric: Vec<u32> = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                let ws = &ws;
                let system = &system;
                let vertices = &vertices;
                (0..n).map(move |j| chains::dist(system, ws, &vertices[i], &vertices[j]) as u32)
            })
            .collect();
        DualSpace {
            ws,
            system,
            vertices,
            index,
            metric,
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Orientation] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &Orientation {
        &self.vertices[i]
    }

    pub fn index_of(&self, o: &Orientation) -> Option<usize> {
        self.index.get(&o.signs).copied()
    }

    pub fn dist(&self, i: usize, j: usize) -> usize {
        self.metric[i * self.vertices.len() + j] as usize
    }

    pub fn metric_table(&self) -> &[u32] {
        &self.metric
    }

    pub fn diameter(&self) -> usize {
        self.metric.iter().copied().max().unwrap_or(0) as usize
    }

    /// Vertex pairs at distance exactly 1.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.vertices.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if self.dist(i, j) == 1 {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// True iff `v` lies on a geodesic between `a` and `b` in the metric.
    pub fn between(&self, a: usize, v: usize, b: usize) -> bool {
        self.dist(a, v) + self.dist(v, b) == self.dist(a, b)
    }
}

// ---------------------------------------------------------------------------
// P-convex sets and gates
// ---------------------------------------------------------------------------

/// An intersection of halfspaces: a sign choice on a support set of walls.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PConvexSet {
    pub support: Bits,
    pub signs: Bits,
}

impl PConvexSet {
    pub fn new(support: Bits, signs: Bits) -> PConvexSet {
        PConvexSet {
            signs: signs.intersection(&support),
            support,
        }
    }

    pub fn whole(n_walls: usize) -> PConvexSet {
        PConvexSet {
            support: Bits::new(n_walls),
            signs: Bits::new(n_walls),
        }
    }

    /// A single halfspace.
    pub fn halfspace(n_walls: usize, wall: usize, side: Side) -> PConvexSet {
        let mut support = Bits::new(n_walls);
        support.set(wall);
        let mut signs = Bits::new(n_walls);
        if side == Side::Plus {
            signs.set(wall);
        }
        PConvexSet { support, signs }
    }

    /// Smallest P-convex set containing all the given orientations: the
    /// walls they agree on, with the common sign.
    pub fn hull(n_walls: usize, targets: &[Orientation]) -> PConvexSet {
        assert!(!targets.is_empty());
        let mut support = Bits::new(n_walls).complement();
        let first = &targets[0].signs;
        for t in &targets[1..] {
            let disagree = first.symmetric_difference(&t.signs);
            support = support.difference(&disagree);
        }
        PConvexSet {
            signs: first.intersection(&support),
            support,
        }
    }

    pub fn as_filter(&self) -> Filter {
        Filter {
            support: self.support.clone(),
            signs: self.signs.clone(),
        }
    }

    /// Nonempty iff the sign choice is a filter.
    pub fn is_nonempty(&self, ws: &Wallspace) -> bool {
        ws.is_filter(&self.as_filter()).is_ok()
    }

    pub fn contains(&self, o: &Orientation) -> bool {
        o.signs
            .symmetric_difference(&self.signs)
            .intersection(&self.support)
            .is_empty()
    }

    /// Vertices of a dual space lying in the set.
    pub fn members(&self, d: &DualSpace) -> Vec<usize> {
        (0..d.n_vertices())
            .filter(|&i| self.contains(d.vertex(i)))
            .collect()
    }
}

/// Nearest-point projection onto a nonempty P-convex set: switch exactly the
/// walls separating `z` from the set. A wall separates `z` from the set iff
/// its `z`-side conflicts pairwise with the set's sign constraints, so no
/// member enumeration is needed.
pub fn gate(ws: &Wallspace, c: &PConvexSet, z: &Orientation) -> Result<Orientation> {
    if !c.is_nonempty(ws) {
        return Err(Error::EmptyTarget);
    }
    let mut signs = z.signs.clone();
    for h in 0..ws.n_walls() {
        let z_side = z.side_of(h);
        let separated = if c.support.get(h) {
            (c.signs.get(h)) != (z_side == Side::Plus)
        } else {
            ws.choice_conflicts(&c.support, &c.signs, h, z_side)
        };
        if separated {
            signs.toggle(h);
        }
    }
    let w = Orientation { signs };
    debug_assert!(ws.is_consistent(&w), "gate of a consistent orientation is consistent");
    debug_assert!(c.contains(&w), "gate lands in the target set");
    Ok(w)
}

/// The iterated-median expression for the gate to the hull of finitely many
/// targets: fold a₁ with μ(aᵢ, x, ·) outward. Agrees with [`gate`] to
/// [`PConvexSet::hull`] on full duals.
pub fn gate_via_medians(ws: &Wallspace, targets: &[Orientation], x: &Orientation) -> Orientation {
    assert!(!targets.is_empty());
    let mut acc = targets[0].clone();
    for t in &targets[1..] {
        acc = ws.median(t, x, &acc);
    }
    acc
}

// ---------------------------------------------------------------------------
// Gated balls
// ---------------------------------------------------------------------------

/// Per-center support oracle for gated balls: for every wall `h`, the length
/// of the longest member all of whose walls separate `x` from `h` (wall `k`
/// separates `x` from wall `h` when the side of `h` away from `x` nests
/// strictly inside the side of `k` away from `x`). The radius-`r` ball
/// support is then every wall with length at least `r`.
pub struct BallOracle {
    /// longest separating member per wall
    depth: Vec<usize>,
    center: Orientation,
    n_walls: usize,
}

impl BallOracle {
    pub fn new(ws: &Wallspace, cs: &ChainSystem, x: &Orientation) -> BallOracle {
        let n = ws.n_walls();
        let far = |w: usize, o: &Orientation| o.side_of(w).opposite();
        let depth = (0..n)
            .map(|h| {
                let candidates = Bits::from_indices(
                    n,
                    (0..n).filter(|&k| k != h && ws.halfspace_subset(h, far(h, x), k, far(k, x))),
                );
                match &cs.kind {
                    SystemKind::AllSubsets => candidates.count(),
                    SystemKind::AllChains => chains::longest_chain_within(ws, x, &candidates, None),
                    SystemKind::Pairwise(p) => chains::longest_chain_within(ws, x, &candidates, Some(p)),
                    SystemKind::Explicit(members) => members
                        .iter()
                        .map(|m| m.intersection(&candidates).count())
                        .max()
                        .unwrap_or(0),
                }
            })
            .collect();
        BallOracle {
            depth,
            center: x.clone(),
            n_walls: n,
        }
    }

    /// The ball of radius `r` about the center as a P-convex set.
    pub fn ball(&self, r: usize) -> PConvexSet {
        let support = Bits::from_indices(self.n_walls, (0..self.n_walls).filter(|&h| self.depth[h] >= r));
        PConvexSet {
            signs: self.center.signs.intersection(&support),
            support,
        }
    }
}

/// One-shot gated ball. For chain systems this is the radius-`r` ball about
/// `x` (always contained in the metric ball; equal to it for the set of all
/// chains).
pub fn ball_as_pconvex(ws: &Wallspace, cs: &ChainSystem, x: &Orientation, r: usize) -> PConvexSet {
    BallOracle::new(ws, cs, x).ball(r)
}

// ---------------------------------------------------------------------------
// Median-graph verification
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct MedianGraphReport {
    pub passed: bool,
    /// Triple with no unique majority-vote-matching median vertex.
    pub violation: Option<(usize, usize, usize)>,
    pub triples_checked: usize,
}

/// Checks that every vertex triple has exactly one vertex lying between each
/// pair, and that it is the majority-vote median.
pub fn verify_median_graph(d: &DualSpace) -> MedianGraphReport {
    let n = d.n_vertices();
    let mut triples = 0usize;
    for a in 0..n {
        for b in (a + 1)..n {
            for c in (b + 1)..n {
                triples += 1;
                let mut found = None;
                let mut unique = true;
                for v in 0..n {
                    if d.between(a, v, b) && d.between(b, v, c) && d.between(a, v, c) {
                        if found.is_some() {
                            unique = false;
                            break;
                        }
                        found = Some(v);
                    }
                }
                let ok = unique
                    && found.is_some_and(|v| {
                        let mu = d.ws.median(d.vertex(a), d.vertex(b), d.vertex(c));
                        d.vertex(v) == &mu
                    });
                if !ok {
                    return MedianGraphReport {
                        passed: false,
                        violation: Some((a, b, c)),
                        triples_checked: triples,
                    };
                }
            }
        }
    }
    MedianGraphReport {
        passed: true,
        violation: None,
        triples_checked: triples,
    }
}

// ---------------------------------------------------------------------------
// Ball-family (Helly) verification
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct FamilyCheckReport {
    pub passed: bool,
    pub slack: usize,
    pub family_cap: usize,
    pub families_checked: usize,
    pub exhaustive_tuples: bool,
    pub exhaustive_radii: bool,
    /// (centers, radii) of a pairwise-intersecting family with empty
    /// slack-intersection.
    pub violation: Option<(Vec<usize>, Vec<usize>)>,
    pub seed: u64,
}

/// Sweeps families of up to `family_cap` balls with pairwise-intersecting
/// radii (rᵢ + rⱼ ≥ dᵢⱼ) and demands a common vertex within `slack` of every
/// ball. Intersection emptiness is monotone in the radii, so only minimal
/// radius vectors are tested; center tuples are exhaustive when their count
/// fits `tuple_budget`, otherwise a seeded sample.
pub fn ball_family_sweep(
    d: &DualSpace,
    family_cap: usize,
    slack: usize,
    tuple_budget: usize,
    radii_cap: usize,
    seed: u64,
) -> FamilyCheckReport {
    use rand::Rng;
    use rand::SeedableRng;
    let n = d.n_vertices();
    let mut families_checked = 0usize;
    let mut exhaustive_tuples = true;
    let mut exhaustive_radii = true;
    for k in 2..=family_cap.min(n) {
        let total = binomial(n, k);
        let tuples: Vec<Vec<usize>> = if total <= tuple_budget as u128 {
            combinations(n, k)
        } else {
            exhaustive_tuples = false;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ (k as u64));
            let mut seen = std::collections::HashSet::new();
            let mut out = Vec::with_capacity(tuple_budget);
            while out.len() < tuple_budget {
                let mut t: Vec<usize> = (0..k).map(|_| rng.gen_range(0..n)).collect();
                t.sort_unstable();
                t.dedup();
                if t.len() == k && seen.insert(t.clone()) {
                    out.push(t);
                }
            }
            out
        };
        for centers in tuples {
            let dmat: Vec<Vec<usize>> = centers
                .iter()
                .map(|&a| centers.iter().map(|&b| d.dist(a, b)).collect())
                .collect();
            let mut radii = vec![0usize; k];
            let mut nodes = 0usize;
            if let Some(bad) = minimal_radii_dfs(d, &centers, &dmat, &mut radii, 0, slack, radii_cap, &mut nodes, &mut exhaustive_radii) {
                return FamilyCheckReport {
                    passed: false,
                    slack,
                    family_cap,
                    families_checked,
                    exhaustive_tuples,
                    exhaustive_radii,
                    violation: Some((centers, bad)),
                    seed,
                };
            }
            families_checked += 1;
        }
    }
    FamilyCheckReport {
        passed: true,
        slack,
        family_cap,
        families_checked,
        exhaustive_tuples,
        exhaustive_radii,
        violation: None,
        seed,
    }
}

/// Convenience: slack-0 family sweep, the Helly property of the dual's
/// integer balls. Meaningful on all-chains duals, where the metric is a
/// graph metric.
pub fn verify_helly(d: &DualSpace, family_cap: usize, tuple_budget: usize, seed: u64) -> FamilyCheckReport {
    ball_family_sweep(d, family_cap, 0, tuple_budget, 50_000, seed)
}

fn minimal_radii_dfs(
    d: &DualSpace,
    centers: &[usize],
    dmat: &[Vec<usize>],
    radii: &mut Vec<usize>,
    pos: usize,
    slack: usize,
    radii_cap: usize,
    nodes: &mut usize,
    exhaustive: &mut bool,
) -> Option<Vec<usize>> {
    let k = centers.len();
    if pos == k {
        // Minimality: every radius is zero or tight against some partner.
        let minimal = (0..k).all(|i| {
            radii[i] == 0 || (0..k).any(|j| j != i && radii[i] + radii[j] == dmat[i][j])
        });
        if !minimal {
            return None;
        }
        let common = (0..d.n_vertices())
            .any(|v| (0..k).all(|i| d.dist(centers[i], v) <= radii[i] + slack));
        if common {
            return None;
        }
        return Some(radii.clone());
    }
    let lb = (0..pos)
        .map(|j| dmat[pos][j].saturating_sub(radii[j]))
        .max()
        .unwrap_or(0);
    let ub = (0..k).filter(|&j| j != pos).map(|j| dmat[pos][j]).max().unwrap_or(0);
    for r in lb..=ub.max(lb) {
        *nodes += 1;
        if *nodes > radii_cap {
            *exhaustive = false;
            return None;
        }
        radii[pos] = r;
        if let Some(bad) = minimal_radii_dfs(d, centers, dmat, radii, pos + 1, slack, radii_cap, nodes, exhaustive) {
            return Some(bad);
        }
    }
    None
}

fn binomial(n: usize, k: usize) -> u128 {
    let mut out: u128 = 1;
    for i in 0..k {
        out = out.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n || k == 0 {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // Rightmost position that can still advance.
        let mut i = k;
        while i > 0 && cur[i - 1] == n - k + (i - 1) {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        for j in i..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Fixed points of finite actions
// ---------------------------------------------------------------------------

/// A point of the first subdivision: a sign choice on the walls outside
/// `inward`, with each `inward` wall doubled and its two copies oriented
/// toward each other. `inward` walls pairwise cross.
#[derive(Clone, Debug)]
pub struct SubdivisionPoint {
    pub base: Filter,
    pub inward: Bits,
}

/// Closure of the generator permutations under composition.
fn generate_group(n_points: usize, generators: &[Vec<usize>], cap: usize) -> Result<Vec<Vec<usize>>> {
    let identity: Vec<usize> = (0..n_points).collect();
    let mut elements = vec![identity.clone()];
    let mut seen = std::collections::HashSet::new();
    seen.insert(identity);
    let mut frontier = 0;
    while frontier < elements.len() {
        let base = elements[frontier].clone();
        frontier += 1;
        for g in generators {
            let composed: Vec<usize> = (0..n_points).map(|p| g[base[p]]).collect();
            if seen.insert(composed.clone()) {
                elements.push(composed);
                if elements.len() > cap {
                    return Err(Error::Invalid(format!("group generated exceeds {cap} elements")));
                }
            }
        }
    }
    Ok(elements)
}

/// Produces a point of the first subdivision fixed by the whole group
/// generated by the given point permutations, and verifies the invariance
/// under every generator. Follows a three-stage construction: majority
/// orientation on walls splitting an orbit unevenly, the canonical invariant
/// orientation on walls with a disjoint non-crossing translate, and inward
/// doubling on the rest.
pub fn fixed_point_finite_group(ws: &Wallspace, generators: &[Vec<usize>]) -> Result<SubdivisionPoint> {
    let n = ws.n_walls();
    for (gi, g) in generators.iter().enumerate() {
        if g.len() != ws.n_points() {
            return Err(Error::Invalid(format!("generator {gi} has wrong length")));
        }
        ws.wall_permutation(g, gi)?;
    }
    let group = generate_group(ws.n_points(), generators, 100_000)?;
    let group_walls: Vec<Vec<(usize, bool)>> = group
        .iter()
        .map(|g| ws.wall_permutation(g, usize::MAX).expect("closed under composition"))
        .collect();

    // Orbit of point 0.
    let orbit: Vec<usize> = {
        let mut set: Vec<usize> = group.iter().map(|g| g[0]).collect();
        set.sort_unstable();
        set.dedup();
        set
    };
    let orbit_bits = Bits::from_indices(ws.n_points(), orbit.iter().copied());

    let mut support = Bits::new(n);
    let mut signs = Bits::new(n);

    // Stage 1: strict majority of the orbit.
    for h in 0..n {
        let plus = ws.wall(h).plus.intersection(&orbit_bits).count();
        let minus = ws.wall(h).minus.intersection(&orbit_bits).count();
        if plus != minus {
            support.set(h);
            signs.assign(h, plus > minus);
        }
    }

    // Stage 2: walls with a distinct non-crossing translate. The empty
    // quarterspace between the wall and its translate picks the side facing
    // away from the translate; this does not depend on the group element.
    for h in 0..n {
        if support.get(h) {
            continue;
        }
        let mut chosen: Option<Side> = None;
        for wp in &group_walls {
            let (img, _) = wp[h];
            if img == h || ws.crosses(h, img) {
                continue;
            }
            // h^a ∩ img^b = ∅ for exactly one (a,b); orient h away from a.
            let mut pick = None;
            for a in [Side::Minus, Side::Plus] {
                for b in [Side::Minus, Side::Plus] {
                    if ws.quarter_empty(h, a, img, b) {
                        pick = Some(a.opposite());
                    }
                }
            }
            let pick = pick.expect("non-crossing distinct walls have an empty quarterspace");
            match chosen {
                None => chosen = Some(pick),
                Some(prev) if prev != pick => {
                    return Err(Error::Invalid(format!(
                        "wall {h}: conflicting invariant orientations from different translates"
                    )))
                }
                _ => {}
            }
        }
        if let Some(side) = chosen {
            support.set(h);
            signs.assign(h, side == Side::Plus);
        }
    }

    let mut inward = Bits::new(n);
    if support.count() < n {
        // Stage 3. Pick the smallest unoriented wall; all its translates
        // cross it or equal it by the failure of stage 2.
        let pivot = support.complement().first().unwrap();
        let rest: Vec<usize> = support.complement().iter().collect();
        // Orbit partition of the remaining walls.
        let mut orbit_id = vec![usize::MAX; n];
        for &h in &rest {
            if orbit_id[h] != usize::MAX {
                continue;
            }
            for wp in &group_walls {
                let (img, _) = wp[h];
                orbit_id[img] = h;
            }
            orbit_id[h] = h;
        }
        for &h in &rest {
            let o = orbit_id[h];
            if h != o {
                continue;
            }
            let members: Vec<usize> = rest.iter().copied().filter(|&k| orbit_id[k] == o).collect();
            let doubled = members.iter().all(|&k| k == pivot || ws.crosses(k, pivot));
            if doubled {
                for &k in &members {
                    inward.set(k);
                }
            } else {
                // Some member does not cross the pivot: orient it toward the
                // side containing a halfspace of the pivot, then push the
                // choice around the orbit.
                let seed = members
                    .iter()
                    .copied()
                    .find(|&k| k != pivot && !ws.crosses(k, pivot))
                    .expect("non-doubled orbit has a non-crossing member");
                let mut side = None;
                for t in [Side::Minus, Side::Plus] {
                    for s in [Side::Minus, Side::Plus] {
                        if ws.halfspace_subset(pivot, s, seed, t) {
                            side = Some(t);
                        }
                    }
                }
                let side = side.expect("non-crossing pair has a witnessing inclusion");
                let mut pending = vec![(seed, side)];
                let mut fixed: HashMap<usize, Side> = HashMap::new();
                while let Some((k, s)) = pending.pop() {
                    match fixed.get(&k) {
                        Some(&prev) if prev != s => {
                            return Err(Error::Invalid(format!(
                                "wall {k}: equivariant extension is inconsistent"
                            )))
                        }
                        Some(_) => continue,
                        None => {
                            fixed.insert(k, s);
                            for wp in &group_walls {
                                let (img, flipped) = wp[k];
                                let img_side = if flipped { s.opposite() } else { s };
                                pending.push((img, img_side));
                            }
                        }
                    }
                }
                for (k, s) in fixed {
                    support.set(k);
                    signs.assign(k, s == Side::Plus);
                }
            }
        }
    }

    let base = Filter {
        support: support.clone(),
        signs: signs.clone(),
    };
    ws.is_filter(&base)?;
    // Inward walls must pairwise cross and meet every base halfspace.
    for h in inward.iter() {
        for k in inward.iter() {
            if h < k && !ws.crosses(h, k) {
                return Err(Error::Invalid(format!("inward walls {h},{k} do not cross")));
            }
        }
        for q in support.iter() {
            let qs = if signs.get(q) { Side::Plus } else { Side::Minus };
            if ws.quarter_empty(q, qs, h, Side::Minus) || ws.quarter_empty(q, qs, h, Side::Plus) {
                return Err(Error::Invalid(format!(
                    "inward wall {h} is inconsistent with base wall {q}"
                )));
            }
        }
    }
    let point = SubdivisionPoint { base, inward };
    // Verify invariance under every generator.
    for (gi, g) in generators.iter().enumerate() {
        let wp = ws.wall_permutation(g, gi)?;
        if !subdivision_point_invariant(&point, &wp) {
            return Err(Error::Invalid(format!("fixed point not invariant under generator {gi}")));
        }
    }
    Ok(point)
}

/// Invariance of a subdivision point under one wall permutation: the inward
/// set is preserved and the base signs are equivariant.
pub fn subdivision_point_invariant(p: &SubdivisionPoint, wp: &[(usize, bool)]) -> bool {
    for h in p.inward.iter() {
        if !p.inward.get(wp[h].0) {
            return false;
        }
    }
    for h in p.base.support.iter() {
        let (img, flipped) = wp[h];
        if !p.base.support.get(img) {
            return false;
        }
        let pushed_plus = p.base.signs.get(h) != flipped;
        if p.base.signs.get(img) != pushed_plus {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn dual(ws: Wallspace, cs: ChainSystem) -> DualSpace {
        DualSpace::enumerate(Arc::new(ws), cs, DEFAULT_VERTEX_CAP).unwrap()
    }

    #[test]
    fn path_dual_is_all_principal() {
        for n in [1, 4, 7] {
            let d = dual(fixtures::path_wallspace(n), ChainSystem::all_subsets());
            assert_eq!(d.n_vertices(), n + 1);
        }
    }

    #[test]
    fn crossing_walls_dual_is_square() {
        let d = dual(fixtures::square_wallspace(), ChainSystem::all_subsets());
        assert_eq!(d.n_vertices(), 4);
        assert_eq!(d.edges().len(), 4);
        assert!(verify_median_graph(&d).passed);
    }

    #[test]
    fn tripod_dual_has_center() {
        let d = dual(fixtures::tripod_wallspace(), ChainSystem::all_subsets());
        assert_eq!(d.n_vertices(), 4, "three leaves and the center");
        assert!(verify_median_graph(&d).passed);
    }

    #[test]
    fn cube_minus_corner_is_not_median() {
        let ws = Arc::new(fixtures::cube_wallspace(3));
        let full = DualSpace::enumerate(ws.clone(), ChainSystem::all_subsets(), 1 << 18).unwrap();
        assert_eq!(full.n_vertices(), 8);
        assert!(verify_median_graph(&full).passed);
        let depleted: Vec<Orientation> = full
            .vertices()
            .iter()
            .filter(|v| v.signs.count() != 3)
            .cloned()
            .collect();
        let d = DualSpace::from_vertices(ws, ChainSystem::all_subsets(), depleted).unwrap();
        let report = verify_median_graph(&d);
        assert!(!report.passed, "removing a corner breaks the median property");
    }

    #[test]
    fn vertex_cap_errors() {
        let ws = Arc::new(fixtures::cube_wallspace(3));
        let err = DualSpace::enumerate(ws, ChainSystem::all_subsets(), 4).unwrap_err();
        assert!(matches!(err, Error::StateExplosion { cap: 4 }));
    }

    #[test]
    fn gate_examples() {
        let ws = Arc::new(fixtures::grid_wallspace(3, 3));
        let d = dual(fixtures::grid_wallspace(3, 3), ChainSystem::all_subsets());
        let corner = ws.principal_ultrafilter(0).unwrap();
        // Gating into a set containing the point is the identity.
        let hull = PConvexSet::whole(ws.n_walls());
        assert_eq!(gate(&ws, &hull, &corner).unwrap(), corner);
        // Gating a corner across one wall flips exactly that wall.
        let target = PConvexSet::halfspace(ws.n_walls(), 0, Side::Plus);
        let g = gate(&ws, &target, &corner).unwrap();
        assert_eq!(ws.separating_walls(&corner, &g).count(), 1);
        assert_eq!(g.side_of(0), Side::Plus);
        let _ = d;
    }

    #[test]
    fn gate_is_closest_point_on_tripod() {
        let ws = Arc::new(fixtures::tripod_wallspace());
        let d = DualSpace::enumerate(ws.clone(), ChainSystem::all_subsets(), 1 << 10).unwrap();
        let leaf = ws.principal_ultrafilter(1).unwrap();
        // Target: the halfspace away from leaf 1 (contains center and the
        // other leaves).
        let target = PConvexSet::halfspace(ws.n_walls(), 0, Side::Minus);
        let g = gate(&ws, &target, &leaf).unwrap();
        let center = ws.principal_ultrafilter(0).unwrap();
        assert_eq!(g, center);
        // Exhaustive closest-point check.
        let li = d.index_of(&leaf).unwrap();
        let gi = d.index_of(&g).unwrap();
        for m in target.members(&d) {
            assert!(d.dist(li, m) >= d.dist(li, gi));
        }
    }

    #[test]
    fn gate_via_medians_matches_gate() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let d = dual(fixtures::grid_wallspace(3, 3), ChainSystem::all_subsets());
        let ws = &d.ws;
        for _ in 0..100 {
            let k = rng.gen_range(1..=3);
            let targets: Vec<Orientation> = (0..k)
                .map(|_| d.vertex(rng.gen_range(0..d.n_vertices())).clone())
                .collect();
            let x = d.vertex(rng.gen_range(0..d.n_vertices()));
            let hull = PConvexSet::hull(ws.n_walls(), &targets);
            let g1 = gate(ws, &hull, x).unwrap();
            let g2 = gate_via_medians(ws, &targets, x);
            assert_eq!(g1, g2);
        }
    }

    #[test]
    fn gate_single_target_and_inside() {
        let d = dual(fixtures::grid_wallspace(3, 3), ChainSystem::all_subsets());
        let ws = &d.ws;
        let a = ws.principal_ultrafilter(3).unwrap();
        let x = ws.principal_ultrafilter(7).unwrap();
        assert_eq!(gate_via_medians(ws, &[a.clone()], &x), a);
        let targets = vec![
            ws.principal_ultrafilter(0).unwrap(),
            ws.principal_ultrafilter(8).unwrap(),
        ];
        let inside = ws.principal_ultrafilter(4).unwrap();
        assert_eq!(gate_via_medians(ws, &targets, &inside), inside);
    }

    #[test]
    fn ball_pconvex_examples() {
        let ws = Arc::new(fixtures::path_wallspace(4));
        let cs = ChainSystem::all_chains();
        let d = DualSpace::enumerate(ws.clone(), cs.clone(), 1 << 10).unwrap();
        let mid = ws.principal_ultrafilter(2).unwrap();
        // r = 0 pins the ball to the center.
        let b0 = ball_as_pconvex(&ws, &cs, &mid, 0);
        assert_eq!(b0.members(&d), vec![d.index_of(&mid).unwrap()]);
        // r = 1 around the midpoint of a 4-edge path: three middle vertices.
        let b1 = ball_as_pconvex(&ws, &cs, &mid, 1);
        let members = b1.members(&d);
        assert_eq!(members.len(), 3);
        let mi = d.index_of(&mid).unwrap();
        for m in &members {
            assert!(d.dist(mi, *m) <= 1);
        }
        // r >= diameter frees every wall.
        let ball = ball_as_pconvex(&ws, &cs, &mid, 10);
        assert!(ball.support.is_empty());
        assert_eq!(ball.members(&d).len(), d.n_vertices());
    }

    #[test]
    fn ball_members_within_metric_ball() {
        let ws = Arc::new(fixtures::grid_wallspace(3, 3));
        let cs = ChainSystem::all_chains();
        let d = DualSpace::enumerate(ws.clone(), cs.clone(), 1 << 10).unwrap();
        for i in 0..d.n_vertices() {
            let oracle = BallOracle::new(&ws, &cs, d.vertex(i));
            for r in 0..=d.diameter() {
                let ball = oracle.ball(r);
                for m in ball.members(&d) {
                    assert!(d.dist(i, m) <= r, "gated ball sits inside the metric ball");
                }
                // For the set of all chains the two coincide.
                let metric_ball: Vec<usize> =
                    (0..d.n_vertices()).filter(|&j| d.dist(i, j) <= r).collect();
                assert_eq!(ball.members(&d), metric_ball);
            }
        }
    }

    #[test]
    fn fixed_point_trivial_group() {
        let ws = fixtures::grid_wallspace(3, 3);
        let p = fixed_point_finite_group(&ws, &[]).unwrap();
        assert!(p.inward.is_empty());
        assert_eq!(p.base.support.count(), ws.n_walls());
        assert_eq!(p.base.signs, ws.principal_ultrafilter(0).unwrap().signs);
    }

    #[test]
    fn fixed_point_even_path_reflection() {
        // 2-edge path, reflection v0 <-> v2: the center vertex is fixed.
        let ws = fixtures::path_wallspace(2);
        let p = fixed_point_finite_group(&ws, &[vec![2, 1, 0]]).unwrap();
        assert!(p.inward.is_empty());
        let center = ws.principal_ultrafilter(1).unwrap();
        assert_eq!(p.base.signs, center.signs);
    }

    #[test]
    fn fixed_point_single_wall_reflection() {
        // 1-edge path, reflection: the midpoint of the doubled wall.
        let ws = fixtures::path_wallspace(1);
        let p = fixed_point_finite_group(&ws, &[vec![1, 0]]).unwrap();
        assert_eq!(p.inward.count(), 1);
        assert!(p.base.support.is_empty());
    }

    #[test]
    fn fixed_point_tripod_rotation() {
        let ws = fixtures::tripod_wallspace();
        let p = fixed_point_finite_group(&ws, &[vec![0, 2, 3, 1]]).unwrap();
        assert!(p.inward.is_empty());
        let center = ws.principal_ultrafilter(0).unwrap();
        assert_eq!(p.base.signs, center.signs);
    }

    #[test]
    fn fixed_point_rejects_bad_generator() {
        let ws = fixtures::grid_wallspace(3, 3);
        // A transposition of two adjacent points does not preserve the walls.
        let mut perm: Vec<usize> = (0..9).collect();
        perm.swap(0, 4);
        assert!(matches!(
            fixed_point_finite_group(&ws, &[perm]),
            Err(Error::NotWallPreserving { .. })
        ));
    }

    #[test]
    fn gate_idempotent_and_lipschitz() {
        let d = dual(fixtures::grid_wallspace(3, 3), ChainSystem::all_subsets());
        let ws = &d.ws;
        let target = PConvexSet::hull(
            ws.n_walls(),
            &[
                ws.principal_ultrafilter(0).unwrap(),
                ws.principal_ultrafilter(1).unwrap(),
            ],
        );
        for i in 0..d.n_vertices() {
            let g1 = gate(ws, &target, d.vertex(i)).unwrap();
            let g2 = gate(ws, &target, &g1).unwrap();
            assert_eq!(g1, g2);
            for j in 0..d.n_vertices() {
                let gj = gate(ws, &target, d.vertex(j)).unwrap();
                let di = chains::dist(&d.system, ws, &g1, &gj);
                assert!(di <= d.dist(i, j));
            }
        }
    }
}
