//! Normal wall paths: gate the target to integer balls around the source.
//! For gluable chain systems these are weak rough geodesics with explicit
//! constants and form a fellow-traveling bicombing; on cube-complex duals
//! with the all-chains system they coincide with normal cube paths, which
//! are implemented here independently (greedy minimal-wall crossing) as the
//! second route of that check.

use crate::chains::{self, ChainSystem};
use crate::dual::{gate, BallOracle};
use crate::error::{Error, Result};
use crate::wallspace::{Orientation, Wallspace};

/// Fallback overshoot allowance when the system carries no declared gluing
/// constant. Termination happens within `dist + m` steps for an m-gluable
/// system; the cap only turns a broken gate into a diagnostic.
const DEFAULT_SLACK: usize = 16;

#[derive(Clone, Debug)]
pub struct NormalWallPath {
    pub source: Orientation,
    pub target: Orientation,
    /// steps[r] = gate of the target to the radius-r ball about the source;
    /// steps[0] is the source, the last step is the target.
    pub steps: Vec<Orientation>,
}

impl NormalWallPath {
    pub fn len(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.steps.len() <= 1
    }

    pub fn step(&self, r: usize) -> &Orientation {
        &self.steps[r.min(self.steps.len() - 1)]
    }
}

/// Builds the normal wall path from `x` to `y`. The loop is capped at
/// `dist(x, y) + m` extra steps and errors on non-termination, which cannot
/// occur when the gates are correct.
pub fn normal_wall_path(ws: &Wallspace, cs: &ChainSystem, x: &Orientation, y: &Orientation) -> Result<NormalWallPath> {
    if !cs.is_chain_kind() {
        return Err(Error::Invalid("normal wall paths require a chain system".into()));
    }
    let n = chains::dist(cs, ws, x, y);
    let cap = n + cs.declared_m.unwrap_or(DEFAULT_SLACK) + 1;
    let oracle = BallOracle::new(ws, cs, x);
    let mut steps = Vec::with_capacity(n + 1);
    for r in 0.. {
        let g = gate(ws, &oracle.ball(r), y)?;
        steps.push(g.clone());
        if &g == y {
            break;
        }
        if r > cap {
            return Err(Error::Invalid(format!(
                "normal wall path from {} to {} did not terminate within {} steps",
                x.sign_string(),
                y.sign_string(),
                cap
            )));
        }
    }
    Ok(NormalWallPath {
        source: x.clone(),
        target: y.clone(),
        steps,
    })
}

#[derive(Clone, Debug)]
pub struct RoughGeodesicReport {
    pub passed: bool,
    pub gluing_constant: usize,
    /// (r, which bound, lhs, rhs) for the first violated inequality.
    pub violation: Option<(usize, String)>,
    /// max over r1 < r2 of | d(steps[r1], steps[r2]) - (r2 - r1) |.
    pub max_step_defect: usize,
}

/// Verifies the weak-rough-geodesic envelope of a normal wall path for an
/// m-gluable system: r-m <= d(x, steps[r]) <= r, n-r <= d(steps[r], y) <=
/// n-r+m, and all step gaps within 3m of their index gaps.
pub fn check_rough_geodesic(ws: &Wallspace, cs: &ChainSystem, path: &NormalWallPath, m: usize) -> RoughGeodesicReport {
    let x = &path.source;
    let y = &path.target;
    let n = chains::dist(cs, ws, x, y);
    let mut max_defect = 0usize;
    for (r, z) in path.steps.iter().enumerate() {
        let dx = chains::dist(cs, ws, x, z);
        let dy = chains::dist(cs, ws, z, y);
        if dx > r || dx + m < r {
            return RoughGeodesicReport {
                passed: false,
                gluing_constant: m,
                violation: Some((r, format!("d(x, step) = {dx} outside [{}, {r}]", r.saturating_sub(m)))),
                max_step_defect: max_defect,
            };
        }
        if dy + r < n || dy + r > n + m {
            return RoughGeodesicReport {
                passed: false,
                gluing_constant: m,
                violation: Some((r, format!("d(step, y) = {dy} outside [{}, {}]", n.saturating_sub(r), n + m - r.min(n + m)))),
                max_step_defect: max_defect,
            };
        }
    }
    for r1 in 0..path.steps.len() {
        for r2 in (r1 + 1)..path.steps.len() {
            let d = chains::dist(cs, ws, &path.steps[r1], &path.steps[r2]);
            let gap = r2 - r1;
            let defect = d.abs_diff(gap);
            max_defect = max_defect.max(defect);
            if defect > 3 * m {
                return RoughGeodesicReport {
                    passed: false,
                    gluing_constant: m,
                    violation: Some((r1, format!("step gap |{d} - {gap}| > 3m between {r1} and {r2}"))),
                    max_step_defect: max_defect,
                };
            }
        }
    }
    RoughGeodesicReport {
        passed: true,
        gluing_constant: m,
        violation: None,
        max_step_defect: max_defect,
    }
}

#[derive(Clone, Debug)]
pub struct BicombingReport {
    pub passed: bool,
    pub quadruples_checked: usize,
    /// max over checked (r, quadruple) of lhs - (max(dx, dy)) — at most 3m.
    pub max_excess: usize,
    pub violation: Option<(usize, usize)>,
}

/// Fellow-traveling of the bicombing: paths started at nearby endpoints stay
/// within max(d(x1,x2), d(y1,y2)) + 3m of each other at equal times. Paths
/// are extended constantly past their ends.
pub fn check_bicombing(
    ws: &Wallspace,
    cs: &ChainSystem,
    quadruples: &[(Orientation, Orientation, Orientation, Orientation)],
    m: usize,
) -> Result<BicombingReport> {
    let mut max_excess = 0usize;
    for (qi, (x1, y1, x2, y2)) in quadruples.iter().enumerate() {
        let p1 = normal_wall_path(ws, cs, x1, y1)?;
        let p2 = normal_wall_path(ws, cs, x2, y2)?;
        let bound_base = chains::dist(cs, ws, x1, x2).max(chains::dist(cs, ws, y1, y2));
        for r in 0..=p1.len().max(p2.len()) {
            let d = chains::dist(cs, ws, p1.step(r), p2.step(r));
            if d > bound_base + 3 * m {
                return Ok(BicombingReport {
                    passed: false,
                    quadruples_checked: qi + 1,
                    max_excess: d - bound_base,
                    violation: Some((qi, r)),
                });
            }
            max_excess = max_excess.max(d.saturating_sub(bound_base));
        }
    }
    Ok(BicombingReport {
        passed: true,
        quadruples_checked: quadruples.len(),
        max_excess,
        violation: None,
    })
}

/// One-sided consistency: the path from `x` to an intermediate step is a
/// prefix of the full path.
pub fn check_one_sided_consistency(
    ws: &Wallspace,
    cs: &ChainSystem,
    x: &Orientation,
    y: &Orientation,
    r: usize,
) -> Result<bool> {
    let full = normal_wall_path(ws, cs, x, y)?;
    if r >= full.steps.len() {
        return Err(Error::Invalid(format!("r = {r} exceeds path length {}", full.len())));
    }
    let partial = normal_wall_path(ws, cs, x, &full.steps[r])?;
    Ok(partial
        .steps
        .iter()
        .zip(full.steps.iter())
        .all(|(a, b)| a == b)
        && partial.steps.len() <= full.steps.len())
}

/// Independent normal cube path on a cube-complex dual: starting at `x`,
/// repeatedly cross, all at once, every separating wall with nothing between
/// it and the current vertex. This is the second route for the path-equality
/// check and shares no code with the gate-based construction.
pub fn normal_cube_path(ws: &Wallspace, x: &Orientation, y: &Orientation) -> Vec<Orientation> {
    let mut steps = vec![x.clone()];
    let mut cur = x.clone();
    while &cur != y {
        let sep = ws.separating_walls(&cur, y);
        let sep_walls: Vec<usize> = sep.iter().collect();
        // far side = y's side; a wall is crossable when no other separating
        // wall's far side strictly contains its far side.
        let minimal: Vec<usize> = sep_walls
            .iter()
            .copied()
            .filter(|&h| {
                !sep_walls
                    .iter()
                    .any(|&k| k != h && ws.halfspace_subset(h, y.side_of(h), k, y.side_of(k)))
            })
            .collect();
        assert!(!minimal.is_empty(), "separating set of distinct vertices has minimal walls");
        for h in minimal {
            cur.signs.toggle(h);
        }
        debug_assert!(ws.is_consistent(&cur));
        steps.push(cur.clone());
    }
    steps
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn trivial_and_path_fixtures() {
        let ws = fixtures::path_wallspace(5);
        let cs = ChainSystem::all_chains();
        let x = ws.principal_ultrafilter(0).unwrap();
        let p = normal_wall_path(&ws, &cs, &x, &x).unwrap();
        assert_eq!(p.steps.len(), 1);
        let y = ws.principal_ultrafilter(5).unwrap();
        let p = normal_wall_path(&ws, &cs, &x, &y).unwrap();
        assert_eq!(p.len(), 5);
        for (r, step) in p.steps.iter().enumerate() {
            assert_eq!(step, &ws.principal_ultrafilter(r).unwrap());
        }
    }

    #[test]
    fn grid_diagonal_flips_one_of_each() {
        let ws = fixtures::grid_wallspace(3, 3);
        let cs = ChainSystem::all_chains();
        let x = ws.principal_ultrafilter(0).unwrap();
        let y = ws.principal_ultrafilter(8).unwrap();
        let p = normal_wall_path(&ws, &cs, &x, &y).unwrap();
        assert_eq!(p.len(), 2);
        // Each step flips one vertical and one horizontal wall.
        for w in p.steps.windows(2) {
            let flipped = ws.separating_walls(&w[0], &w[1]);
            let vertical = flipped.iter().filter(|&h| h < 2).count();
            let horizontal = flipped.iter().filter(|&h| h >= 2).count();
            assert_eq!((vertical, horizontal), (1, 1));
        }
    }

    #[test]
    fn all_chains_paths_are_discrete_geodesics() {
        let ws = fixtures::grid_wallspace(3, 3);
        let cs = ChainSystem::all_chains();
        for s in 0..9 {
            for t in 0..9 {
                let x = ws.principal_ultrafilter(s).unwrap();
                let y = ws.principal_ultrafilter(t).unwrap();
                let p = normal_wall_path(&ws, &cs, &x, &y).unwrap();
                let r = check_rough_geodesic(&ws, &cs, &p, 0);
                assert!(r.passed, "{:?}", r.violation);
                assert_eq!(r.max_step_defect, 0);
            }
        }
    }

    #[test]
    fn median_path_property() {
        let ws = fixtures::grid_wallspace(3, 3);
        let cs = ChainSystem::all_chains();
        let x = ws.principal_ultrafilter(0).unwrap();
        let y = ws.principal_ultrafilter(8).unwrap();
        let p = normal_wall_path(&ws, &cs, &x, &y).unwrap();
        for r1 in 0..p.steps.len() {
            for r2 in r1..p.steps.len() {
                for r3 in r2..p.steps.len() {
                    let mu = ws.median(&p.steps[r1], &p.steps[r2], &p.steps[r3]);
                    assert_eq!(mu, p.steps[r2]);
                }
            }
        }
    }

    #[test]
    fn one_sided_consistency_on_grid() {
        let ws = fixtures::grid_wallspace(3, 3);
        let cs = ChainSystem::all_chains();
        let x = ws.principal_ultrafilter(0).unwrap();
        let y = ws.principal_ultrafilter(8).unwrap();
        let n = chains::dist(&cs, &ws, &x, &y);
        for r in 0..=n {
            assert!(check_one_sided_consistency(&ws, &cs, &x, &y, r).unwrap());
        }
    }

    #[test]
    fn cube_paths_match_wall_paths_on_cube_fixtures() {
        for ws in [
            fixtures::path_wallspace(6),
            fixtures::grid_wallspace(3, 3),
            fixtures::square_wallspace(),
            fixtures::cube_wallspace(3),
            fixtures::tripod_wallspace(),
        ] {
            let cs = ChainSystem::all_chains();
            for s in 0..ws.n_points() {
                for t in 0..ws.n_points() {
                    let x = ws.principal_ultrafilter(s).unwrap();
                    let y = ws.principal_ultrafilter(t).unwrap();
                    let wall_path = normal_wall_path(&ws, &cs, &x, &y).unwrap();
                    let cube_path = normal_cube_path(&ws, &x, &y);
                    assert_eq!(wall_path.steps, cube_path, "paths differ from {s} to {t}");
                }
            }
        }
    }

    #[test]
    fn bicombing_on_grid() {
        let ws = fixtures::grid_wallspace(3, 3);
        let cs = ChainSystem::all_chains();
        let phi = |s: usize| ws.principal_ultrafilter(s).unwrap();
        // Parallel translates and L-shaped adversarial pairs.
        let quads = vec![
            (phi(0), phi(8), phi(0), phi(8)),
            (phi(0), phi(2), phi(3), phi(5)),
            (phi(0), phi(8), phi(2), phi(6)),
            (phi(0), phi(5), phi(6), phi(2)),
        ];
        let r = check_bicombing(&ws, &cs, &quads, 0).unwrap();
        assert!(r.passed);
        assert_eq!(r.max_excess, 0, "m = 0 leaves no slack");
    }
}
