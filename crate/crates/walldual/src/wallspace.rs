//! Finite sets with walls.
//!
//! A wallspace is a finite point set together with a set of bipartitions
//! (walls). Everything downstream — dual metrics, gates, median structure,
//! curtain systems — reduces to the crossing/nesting calculus of wall pairs,
//! so the relation table between all ordered oriented pairs is precomputed
//! here once and the rest of the crate only does table lookups.

use crate::bits::Bits;
use crate::error::{Error, Result};

/// A halfspace label. Every wall has a `Minus` and a `Plus` side; the
/// labelling is part of the data but carries no meaning beyond bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Minus => Side::Plus,
            Side::Plus => Side::Minus,
        }
    }

    pub(crate) fn bit(self) -> usize {
        match self {
            Side::Minus => 0,
            Side::Plus => 1,
        }
    }
}

/// A bipartition of the point set into two nonempty halfspaces.
#[derive(Clone, Debug)]
pub struct Wall {
    pub minus: Bits,
    pub plus: Bits,
}

impl Wall {
    pub fn halfspace(&self, side: Side) -> &Bits {
        match side {
            Side::Minus => &self.minus,
            Side::Plus => &self.plus,
        }
    }
}

/// How two distinct walls sit relative to each other, as oriented pairs.
///
/// For distinct walls exactly one of the four quarterspaces can be empty:
/// none empty means the walls cross, one empty means a halfspace inclusion,
/// and two or more empty is impossible without a degenerate or duplicate
/// wall.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairRelation {
    /// All four quarterspaces are nonempty.
    Cross,
    /// `h^{h_side} ⊆ k^{k_side}`, the unique witnessing inclusion.
    Nested { h_side: Side, k_side: Side },
}

/// Coarse classification used in reports: same-side inclusions are plain
/// nesting, opposite-side inclusions mean a pair of disjoint halfspaces
/// facing each other.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelationKind {
    Cross,
    Nested,
    DisjointFacing,
}

impl PairRelation {
    pub fn kind(self) -> RelationKind {
        match self {
            PairRelation::Cross => RelationKind::Cross,
            PairRelation::Nested { h_side, k_side } => {
                if h_side == k_side {
                    RelationKind::Nested
                } else {
                    RelationKind::DisjointFacing
                }
            }
        }
    }
}

/// A total choice of halfspace for every wall. Bit set means `Plus`.
///
/// Consistency (the filter law) is a checked property, not a structural
/// invariant; see [`Wallspace::is_consistent`].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Orientation {
    pub signs: Bits,
}

impl Orientation {
    pub fn side_of(&self, wall: usize) -> Side {
        if self.signs.get(wall) {
            Side::Plus
        } else {
            Side::Minus
        }
    }

    /// Sign string like `+-+`, wall 0 first.
    pub fn sign_string(&self) -> String {
        (0..self.signs.len())
            .map(|w| if self.signs.get(w) { '+' } else { '-' })
            .collect()
    }

    pub fn from_sign_string(s: &str) -> Option<Orientation> {
        let mut signs = Bits::new(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '+' => signs.set(i),
                '-' => {}
                _ => return None,
            }
        }
        Some(Orientation { signs })
    }
}

impl std::fmt::Debug for Orientation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.sign_string())
    }
}

/// A choice of halfspace on a subset of the walls. Sign bits outside the
/// support are zero and ignored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Filter {
    pub support: Bits,
    pub signs: Bits,
}

impl Filter {
    pub fn empty(n_walls: usize) -> Filter {
        Filter {
            support: Bits::new(n_walls),
            signs: Bits::new(n_walls),
        }
    }

    pub fn single(n_walls: usize, wall: usize, side: Side) -> Filter {
        let mut f = Filter::empty(n_walls);
        f.insert(wall, side);
        f
    }

    pub fn insert(&mut self, wall: usize, side: Side) {
        self.support.set(wall);
        self.signs.assign(wall, side == Side::Plus);
    }
}

/// A finite point set with an indexed set of walls and the precomputed
/// relation table over ordered oriented wall pairs.
pub struct Wallspace {
    n_points: usize,
    labels: Vec<String>,
    walls: Vec<Wall>,
    /// rel[h * n_walls + k] has bit `(a << 1) | b` set iff h^a ∩ k^b = ∅,
    /// with Minus = 0, Plus = 1.
    rel: Vec<u8>,
    /// conflict[s][w] splits the pairwise law by the other wall's sign:
    /// `.0` = walls k with w^s ∩ k^- = ∅, `.1` = walls k with w^s ∩ k^+ = ∅.
    conflict: [Vec<(Bits, Bits)>; 2],
}

impl std::fmt::Debug for Wallspace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Wallspace({} points, {} walls)", self.n_points, self.walls.len())
    }
}

impl Wallspace {
    /// Builds a wallspace from the minus sides of its walls. Rejects
    /// degenerate walls and duplicate bipartitions with a diagnostic naming
    /// the colliding wall ids.
    pub fn new(n_points: usize, labels: Option<Vec<String>>, minus_sides: Vec<Bits>) -> Result<Wallspace> {
        let labels = labels.unwrap_or_else(|| (0..n_points).map(|i| format!("p{i}")).collect());
        assert_eq!(labels.len(), n_points, "one label per point");
        let mut walls = Vec::with_capacity(minus_sides.len());
        for (id, minus) in minus_sides.into_iter().enumerate() {
            assert_eq!(minus.len(), n_points, "wall universe must match point count");
            let plus = minus.complement();
            if minus.is_empty() || plus.is_empty() {
                return Err(Error::DegenerateWall(id));
            }
            walls.push(Wall { minus, plus });
        }
        // A bipartition is an unordered pair, so minus == minus and
        // minus == plus are both collisions.
        for i in 0..walls.len() {
            for j in (i + 1)..walls.len() {
                if walls[i].minus == walls[j].minus || walls[i].minus == walls[j].plus {
                    return Err(Error::DuplicateWall(i, j));
                }
            }
        }
        let n = walls.len();
        let mut rel = vec![0u8; n * n];
        for h in 0..n {
            for k in 0..n {
                if h == k {
                    continue;
                }
                let mut mask = 0u8;
                for (a, ha) in [(0, &walls[h].minus), (1, &walls[h].plus)] {
                    for (b, kb) in [(0, &walls[k].minus), (1, &walls[k].plus)] {
                        if !ha.intersects(kb) {
                            mask |= 1 << ((a << 1) | b);
                        }
                    }
                }
                rel[h * n + k] = mask;
            }
        }
        let mut conflict = [vec![], vec![]];
        for (s, store) in conflict.iter_mut().enumerate() {
            for w in 0..n {
                let mut cm = Bits::new(n);
                let mut cp = Bits::new(n);
                for k in 0..n {
                    if k == w {
                        continue;
                    }
                    let mask = rel[w * n + k];
                    if mask & (1 << ((s << 1) | 0)) != 0 {
                        cm.set(k);
                    }
                    if mask & (1 << ((s << 1) | 1)) != 0 {
                        cp.set(k);
                    }
                }
                store.push((cm, cp));
            }
        }
        Ok(Wallspace {
            n_points,
            labels,
            walls,
            rel,
            conflict,
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn n_walls(&self) -> usize {
        self.walls.len()
    }

    pub fn wall(&self, id: usize) -> &Wall {
        &self.walls[id]
    }

    pub fn walls(&self) -> &[Wall] {
        &self.walls
    }

    pub fn label(&self, point: usize) -> &str {
        &self.labels[point]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn check_point(&self, index: usize) -> Result<()> {
        if index < self.n_points {
            Ok(())
        } else {
            Err(Error::PointOutOfRange {
                index,
                n_points: self.n_points,
            })
        }
    }

    pub fn check_wall(&self, index: usize) -> Result<()> {
        if index < self.walls.len() {
            Ok(())
        } else {
            Err(Error::WallOutOfRange {
                index,
                n_walls: self.walls.len(),
            })
        }
    }

    /// True iff h^a ∩ k^b = ∅ in the point set.
    pub fn quarter_empty(&self, h: usize, a: Side, k: usize, b: Side) -> bool {
        debug_assert_ne!(h, k);
        self.rel[h * self.walls.len() + k] & (1 << ((a.bit() << 1) | b.bit())) != 0
    }

    /// True iff h^a ⊆ k^b. Strict for distinct walls.
    pub fn halfspace_subset(&self, h: usize, a: Side, k: usize, b: Side) -> bool {
        self.quarter_empty(h, a, k, b.opposite())
    }

    pub fn crosses(&self, h: usize, k: usize) -> bool {
        self.rel[h * self.walls.len() + k] == 0
    }

    /// Classifies an ordered pair of distinct walls: either they cross, or
    /// there is a unique witnessing halfspace inclusion.
    pub fn classify_pair(&self, h: usize, k: usize) -> Result<PairRelation> {
        self.check_wall(h)?;
        self.check_wall(k)?;
        if h == k {
            return Err(Error::Invalid(format!("classify_pair requires distinct walls, got {h} twice")));
        }
        let mask = self.rel[h * self.walls.len() + k];
        if mask == 0 {
            return Ok(PairRelation::Cross);
        }
        debug_assert_eq!(mask.count_ones(), 1, "distinct walls admit at most one empty quarterspace");
        let idx = mask.trailing_zeros() as usize;
        let a = if idx >> 1 == 0 { Side::Minus } else { Side::Plus };
        let b = if idx & 1 == 0 { Side::Minus } else { Side::Plus };
        // h^a ∩ k^b = ∅ means h^a ⊆ k^{¬b}.
        Ok(PairRelation::Nested {
            h_side: a,
            k_side: b.opposite(),
        })
    }

    /// Orients every wall toward the point `s`.
    pub fn principal_ultrafilter(&self, s: usize) -> Result<Orientation> {
        self.check_point(s)?;
        let mut signs = Bits::new(self.walls.len());
        for (w, wall) in self.walls.iter().enumerate() {
            if wall.plus.get(s) {
                signs.set(w);
            }
        }
        Ok(Orientation { signs })
    }

    /// The filter law for a total orientation: no two chosen halfspaces may
    /// be disjoint.
    pub fn is_consistent(&self, o: &Orientation) -> bool {
        self.consistency_violation(o).is_none()
    }

    /// First violating pair in wall-id order, if any.
    pub fn consistency_violation(&self, o: &Orientation) -> Option<(usize, usize)> {
        let n = self.walls.len();
        for h in 0..n {
            let (cm, cp) = &self.conflict[o.side_of(h).bit()][h];
            // Walls whose chosen side is disjoint from h's chosen side.
            let bad_minus = cm.difference(&o.signs);
            if let Some(k) = bad_minus.first() {
                return Some((h.min(k), h.max(k)));
            }
            let bad_plus = cp.intersection(&o.signs);
            if let Some(k) = bad_plus.first() {
                return Some((h.min(k), h.max(k)));
            }
        }
        None
    }

    /// Checks whether assigning `side` to `wall` conflicts pairwise with an
    /// existing partial assignment (`assigned` marks fixed walls, `signs`
    /// their choices).
    pub(crate) fn choice_conflicts(&self, assigned: &Bits, signs: &Bits, wall: usize, side: Side) -> bool {
        let (cm, cp) = &self.conflict[side.bit()][wall];
        cm.intersection(assigned).difference(signs).first().is_some()
            || cp.intersection(assigned).intersection(signs).first().is_some()
    }

    /// Validates the filter law on a partial orientation.
    pub fn is_filter(&self, f: &Filter) -> Result<()> {
        for h in f.support.iter() {
            let side = if f.signs.get(h) { Side::Plus } else { Side::Minus };
            let (cm, cp) = &self.conflict[side.bit()][h];
            let bad = cm
                .intersection(&f.support)
                .difference(&f.signs)
                .union(&cp.intersection(&f.support).intersection(&f.signs));
            if let Some(k) = bad.first() {
                if k > h {
                    return Err(Error::InputNotFilter(h, k));
                }
            }
        }
        Ok(())
    }

    /// Extends a filter to a total consistent orientation by a deterministic
    /// greedy sweep in ascending wall-id order. At each step the partial
    /// assignment stays a filter, so a compatible sign always exists: if both
    /// signs of a wall conflicted with already-fixed walls, those two fixed
    /// walls would already violate the filter law between themselves.
    pub fn extend_filter(&self, f: &Filter) -> Result<Orientation> {
        self.is_filter(f)?;
        let n = self.walls.len();
        let mut assigned = f.support.clone();
        let mut signs = f.signs.clone();
        for w in 0..n {
            if assigned.get(w) {
                continue;
            }
            let side = if !self.choice_conflicts(&assigned, &signs, w, Side::Minus) {
                Side::Minus
            } else {
                Side::Plus
            };
            debug_assert!(
                !self.choice_conflicts(&assigned, &signs, w, side),
                "greedy extension blocked; input was not a filter"
            );
            assigned.set(w);
            signs.assign(w, side == Side::Plus);
        }
        let out = Orientation { signs };
        debug_assert!(self.is_consistent(&out));
        Ok(out)
    }

    /// Walls on which the two orientations disagree.
    pub fn separating_walls(&self, x: &Orientation, y: &Orientation) -> Bits {
        x.signs.symmetric_difference(&y.signs)
    }

    /// Majority vote per wall. The result of three consistent orientations
    /// is consistent.
    pub fn median(&self, x: &Orientation, y: &Orientation, z: &Orientation) -> Orientation {
        let xy = x.signs.intersection(&y.signs);
        let yz = y.signs.intersection(&z.signs);
        let xz = x.signs.intersection(&z.signs);
        Orientation {
            signs: xy.union(&yz).union(&xz),
        }
    }

    /// Image of each wall under a point permutation, or an error if some
    /// image bipartition is not a wall. Returns `(image id, flipped)` per
    /// wall, where `flipped` means the permutation sends the minus side onto
    /// the image's plus side.
    pub fn wall_permutation(&self, perm: &[usize], generator_index: usize) -> Result<Vec<(usize, bool)>> {
        assert_eq!(perm.len(), self.n_points);
        let mut out = Vec::with_capacity(self.walls.len());
        for (w, wall) in self.walls.iter().enumerate() {
            let image = Bits::from_indices(self.n_points, wall.minus.iter().map(|p| perm[p]));
            let mut found = None;
            for (k, other) in self.walls.iter().enumerate() {
                if other.minus == image {
                    found = Some((k, false));
                    break;
                }
                if other.plus == image {
                    found = Some((k, true));
                    break;
                }
            }
            match found {
                Some(hit) => out.push(hit),
                None => {
                    return Err(Error::NotWallPreserving {
                        generator: generator_index,
                        wall: w,
                    })
                }
            }
        }
        Ok(out)
    }

    /// Pushes an orientation forward along a wall permutation:
    /// `(g·x)(g·h) = g·(x(h))`.
    pub fn apply_wall_permutation(&self, wp: &[(usize, bool)], x: &Orientation) -> Orientation {
        let mut signs = Bits::new(self.walls.len());
        for w in 0..self.walls.len() {
            let (img, flipped) = wp[w];
            let side_plus = x.signs.get(w) != flipped;
            signs.assign(img, side_plus);
        }
        Orientation { signs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn path_walls_nest() {
        let ws = fixtures::path_wallspace(3);
        // Walls 0 and 1 of a path: minus sides are prefixes, so they nest.
        let rel = ws.classify_pair(0, 1).unwrap();
        assert_eq!(
            rel,
            PairRelation::Nested {
                h_side: Side::Minus,
                k_side: Side::Minus
            }
        );
        assert_eq!(rel.kind(), RelationKind::Nested);
    }

    #[test]
    fn grid_walls_cross() {
        let ws = fixtures::grid_wallspace(3, 3);
        // Wall 0 is a vertical cut, wall 2 a horizontal cut.
        assert_eq!(ws.classify_pair(0, 2).unwrap(), PairRelation::Cross);
    }

    #[test]
    fn tripod_leaf_walls_face() {
        let ws = fixtures::tripod_wallspace();
        let rel = ws.classify_pair(0, 1).unwrap();
        assert_eq!(
            rel,
            PairRelation::Nested {
                h_side: Side::Plus,
                k_side: Side::Minus
            }
        );
        assert_eq!(rel.kind(), RelationKind::DisjointFacing);
    }

    #[test]
    fn duplicate_walls_rejected() {
        let minus = Bits::from_indices(3, [0]);
        let dup = minus.complement();
        let err = Wallspace::new(3, None, vec![minus, dup]).unwrap_err();
        assert!(matches!(err, Error::DuplicateWall(0, 1)));
    }

    #[test]
    fn principal_ultrafilters_are_consistent() {
        for ws in [
            fixtures::path_wallspace(3),
            fixtures::grid_wallspace(3, 3),
            fixtures::tripod_wallspace(),
        ] {
            for s in 0..ws.n_points() {
                let phi = ws.principal_ultrafilter(s).unwrap();
                assert!(ws.is_consistent(&phi), "principal ultrafilter of {s}");
            }
        }
    }

    #[test]
    fn principal_orients_toward_point() {
        let ws = fixtures::path_wallspace(3);
        let phi = ws.principal_ultrafilter(0).unwrap();
        for w in 0..ws.n_walls() {
            assert_eq!(phi.side_of(w), Side::Minus, "endpoint 0 sits on every minus side");
        }
        let ws = fixtures::grid_wallspace(3, 3);
        let phi = ws.principal_ultrafilter(0).unwrap();
        assert_eq!(phi.signs.count(), 0, "corner (0,0) is on the minus side of all 4 walls");
    }

    #[test]
    fn outward_orientation_is_inconsistent() {
        // Two walls of a 2-edge path, both oriented away from the middle
        // vertex: the chosen halfspaces {v0} and {v2} are disjoint.
        let ws = fixtures::path_wallspace(2);
        let outward = Orientation::from_sign_string("-+").unwrap();
        assert!(!ws.is_consistent(&outward));
        assert_eq!(ws.consistency_violation(&outward), Some((0, 1)));
        assert!(ws.is_consistent(&ws.principal_ultrafilter(1).unwrap()));
    }

    #[test]
    fn grid_corner_flips() {
        // Flipping a wall adjacent to the corner stays consistent; flipping
        // a far wall strands the chosen halfspaces. Cross-checked against an
        // exhaustive pair scan.
        let ws = fixtures::grid_wallspace(3, 3);
        let phi = ws.principal_ultrafilter(0).unwrap();
        for w in 0..ws.n_walls() {
            let mut o = phi.clone();
            o.signs.toggle(w);
            let mut exhaustive_ok = true;
            for h in 0..ws.n_walls() {
                for k in 0..ws.n_walls() {
                    if h != k && ws.quarter_empty(h, o.side_of(h), k, o.side_of(k)) {
                        exhaustive_ok = false;
                    }
                }
            }
            assert_eq!(ws.is_consistent(&o), exhaustive_ok);
            let adjacent = w == 0 || w == 2; // nearest vertical and horizontal cut
            assert_eq!(ws.is_consistent(&o), adjacent, "wall {w}");
        }
    }

    #[test]
    fn extend_filter_agrees_on_support() {
        let ws = fixtures::path_wallspace(3);
        let f = Filter::single(3, 1, Side::Plus);
        let o = ws.extend_filter(&f).unwrap();
        assert_eq!(o.side_of(1), Side::Plus);
        assert!(ws.is_consistent(&o));
    }

    #[test]
    fn extend_filter_rejects_non_filter() {
        let ws = fixtures::path_wallspace(2);
        let mut f = Filter::empty(2);
        f.insert(0, Side::Minus); // {v0}
        f.insert(1, Side::Plus); // {v2}
        assert!(matches!(ws.extend_filter(&f), Err(Error::InputNotFilter(0, 1))));
    }

    #[test]
    fn separating_walls_examples() {
        let ws = fixtures::grid_wallspace(3, 3);
        let a = ws.principal_ultrafilter(0).unwrap();
        let b = ws.principal_ultrafilter(8).unwrap();
        assert_eq!(ws.separating_walls(&a, &a).count(), 0);
        assert_eq!(ws.separating_walls(&a, &b).count(), 4);

        let ws = fixtures::path_wallspace(4);
        let a = ws.principal_ultrafilter(1).unwrap();
        let b = ws.principal_ultrafilter(2).unwrap();
        assert_eq!(ws.separating_walls(&a, &b).count(), 1);
    }

    #[test]
    fn median_axioms_on_fixtures() {
        for ws in [
            fixtures::path_wallspace(4),
            fixtures::grid_wallspace(3, 3),
            fixtures::tripod_wallspace(),
        ] {
            let pts: Vec<Orientation> = (0..ws.n_points())
                .map(|s| ws.principal_ultrafilter(s).unwrap())
                .collect();
            for a in &pts {
                for b in &pts {
                    assert_eq!(&ws.median(a, a, b), a, "μ(a,a,b)=a");
                    for c in &pts {
                        let m1 = ws.median(a, b, c);
                        assert_eq!(m1, ws.median(b, a, c));
                        assert_eq!(m1, ws.median(c, a, b));
                        assert!(ws.is_consistent(&m1));
                    }
                }
            }
            // Five-point condition on a deterministic sample.
            for i in 0..pts.len().min(5) {
                for j in 0..pts.len().min(5) {
                    for k in 0..pts.len().min(5) {
                        for l in 0..pts.len().min(3) {
                            for e in 0..pts.len().min(3) {
                                let (a, b, c, d, ee) = (&pts[i], &pts[j], &pts[k], &pts[l], &pts[e]);
                                let lhs = ws.median(a, b, &ws.median(c, d, ee));
                                let rhs = ws.median(&ws.median(a, b, c), &ws.median(a, b, d), ee);
                                assert_eq!(lhs, rhs, "five-point condition");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn tripod_median_is_center() {
        let ws = fixtures::tripod_wallspace();
        let a = ws.principal_ultrafilter(1).unwrap();
        let b = ws.principal_ultrafilter(2).unwrap();
        let c = ws.principal_ultrafilter(3).unwrap();
        let center = ws.principal_ultrafilter(0).unwrap();
        assert_eq!(ws.median(&a, &b, &c), center);
    }

    #[test]
    fn classify_pair_invariant_under_relabeling() {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let ws = fixtures::grid_wallspace(3, 3);
        for _ in 0..20 {
            let mut perm: Vec<usize> = (0..ws.n_points()).collect();
            perm.shuffle(&mut rng);
            let permuted: Vec<Bits> = ws
                .walls()
                .iter()
                .map(|w| Bits::from_indices(ws.n_points(), w.minus.iter().map(|p| perm[p])))
                .collect();
            let ws2 = Wallspace::new(ws.n_points(), None, permuted).unwrap();
            for h in 0..ws.n_walls() {
                for k in 0..ws.n_walls() {
                    if h != k {
                        assert_eq!(
                            ws.classify_pair(h, k).unwrap(),
                            ws2.classify_pair(h, k).unwrap()
                        );
                    }
                }
            }
        }
    }
}
