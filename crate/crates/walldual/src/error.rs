use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A wall must be a bipartition into two nonempty halfspaces.
    #[error("wall {0} is degenerate: one halfspace is empty")]
    DegenerateWall(usize),

    /// Distinct walls with the same bipartition are rejected at load time.
    #[error("walls {0} and {1} define the same bipartition")]
    DuplicateWall(usize, usize),

    #[error("point index {index} out of range (wallspace has {n_points} points)")]
    PointOutOfRange { index: usize, n_points: usize },

    #[error("wall index {index} out of range (wallspace has {n_walls} walls)")]
    WallOutOfRange { index: usize, n_walls: usize },

    /// INPUT_NOT_FILTER: the partial orientation violates the filter law.
    #[error("input is not a filter: walls {0} and {1} have disjoint chosen halfspaces")]
    InputNotFilter(usize, usize),

    /// STATE_EXPLOSION: dual vertex enumeration exceeded the configured cap.
    #[error("dual vertex enumeration exceeded cap of {cap} orientations")]
    StateExplosion { cap: usize },

    /// SEARCH_CAP: an exact chain search exceeded its node budget.
    #[error("chain search exceeded node budget of {budget}")]
    SearchCap { budget: usize },

    /// EMPTY_TARGET: gates to the empty set are undefined.
    #[error("gate target is empty")]
    EmptyTarget,

    /// NOT_WALL_PRESERVING: a generator permutation must map walls to walls.
    #[error("generator {generator} does not preserve the wall set (image of wall {wall} is not a wall)")]
    NotWallPreserving { generator: usize, wall: usize },

    /// NOT_DISJOINT: ball-separation is only defined for disjoint curtains.
    #[error("curtains {0} and {1} are not disjoint")]
    NotDisjoint(usize, usize),

    #[error("graph is not connected (vertex {0} unreachable from vertex 0)")]
    Disconnected(usize),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
