//! Square-grid model: coordinates, sub-grids, paths, routings, and the
//! routing verifier every other module trusts.
//!
//! Coordinates are 1-indexed, `row` top-to-bottom and `col` left-to-right,
//! matching the usual v(i,j) convention for grid graphs.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;

/// A vertex of the grid.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct Coord {
    pub row: u32,
    pub col: u32,
}

impl Coord {
    pub fn new(row: u32, col: u32) -> Self {
        Coord { row, col }
    }

    pub fn in_side(&self, side: u32) -> bool {
        self.row >= 1 && self.col >= 1 && self.row <= side && self.col <= side
    }

    pub fn neighbors(&self, side: u32) -> impl Iterator<Item = Coord> {
        let Coord { row, col } = *self;
        [
            (row.wrapping_sub(1), col),
            (row + 1, col),
            (row, col.wrapping_sub(1)),
            (row, col + 1),
        ]
        .into_iter()
        .filter(move |&(r, c)| r >= 1 && c >= 1 && r <= side && c <= side)
        .map(|(r, c)| Coord::new(r, c))
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

/// Manhattan (shortest-path) distance between two grid vertices.
pub fn manhattan_dist(a: Coord, b: Coord) -> u64 {
    (a.row.abs_diff(b.row) + a.col.abs_diff(b.col)) as u64
}

/// Set variant: minimum distance over all cross pairs. `None` if either set is empty.
pub fn manhattan_dist_sets(a: &[Coord], b: &[Coord]) -> Option<u64> {
    let mut best = None;
    for &x in a {
        for &y in b {
            let d = manhattan_dist(x, y);
            best = Some(best.map_or(d, |m: u64| m.min(d)));
        }
    }
    best
}

/// An inclusive 1-indexed integer interval.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct Interval {
    pub start: u32,
    pub end: u32,
}

impl Interval {
    pub fn new(start: u32, end: u32) -> Self {
        assert!(start <= end, "empty interval [{start},{end}]");
        Interval { start, end }
    }

    pub fn len(&self) -> u32 {
        self.end - self.start + 1
    }

    pub fn contains(&self, x: u32) -> bool {
        self.start <= x && x <= self.end
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let s = self.start.max(other.start);
        let e = self.end.min(other.end);
        (s <= e).then(|| Interval::new(s, e))
    }

    /// Minimum gap between the two intervals; 0 if they touch or overlap.
    pub fn gap(&self, other: &Interval) -> u32 {
        if self.end < other.start {
            other.start - self.end - 1
        } else if other.end < self.start {
            self.start - other.end - 1
        } else {
            0
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}..{}]", self.start, self.end)
    }
}

/// A sub-grid spanned by a set of consecutive rows and consecutive columns.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct SubGrid {
    pub rows: Interval,
    pub cols: Interval,
}

impl SubGrid {
    pub fn new(rows: Interval, cols: Interval) -> Self {
        SubGrid { rows, cols }
    }

    pub fn from_bounds(r1: u32, r2: u32, c1: u32, c2: u32) -> Self {
        SubGrid::new(Interval::new(r1, r2), Interval::new(c1, c2))
    }

    pub fn contains(&self, v: Coord) -> bool {
        self.rows.contains(v.row) && self.cols.contains(v.col)
    }

    pub fn contains_subgrid(&self, other: &SubGrid) -> bool {
        self.rows.contains_interval(&other.rows) && self.cols.contains_interval(&other.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows.len() == self.cols.len()
    }

    pub fn height(&self) -> u32 {
        self.rows.len()
    }

    pub fn width_cols(&self) -> u32 {
        self.cols.len()
    }

    pub fn intersect(&self, other: &SubGrid) -> Option<SubGrid> {
        let r = self.rows.intersect(&other.rows)?;
        let c = self.cols.intersect(&other.cols)?;
        Some(SubGrid::new(r, c))
    }

    pub fn vertex_count(&self) -> u64 {
        self.rows.len() as u64 * self.cols.len() as u64
    }

    /// Is `v` on the boundary frame of this sub-grid?
    pub fn on_boundary(&self, v: Coord) -> bool {
        self.contains(v)
            && (v.row == self.rows.start
                || v.row == self.rows.end
                || v.col == self.cols.start
                || v.col == self.cols.end)
    }

    /// Grow by `m` on all sides (clamped at 1; caller checks upper bounds).
    pub fn expand(&self, m: u32) -> SubGrid {
        SubGrid::from_bounds(
            self.rows.start.saturating_sub(m).max(1),
            self.rows.end + m,
            self.cols.start.saturating_sub(m).max(1),
            self.cols.end + m,
        )
    }

    pub fn iter_vertices(&self) -> impl Iterator<Item = Coord> + '_ {
        let cols = self.cols;
        (self.rows.start..=self.rows.end)
            .flat_map(move |r| (cols.start..=cols.end).map(move |c| Coord::new(r, c)))
    }

    /// Minimum Manhattan distance between two sub-grids (0 if they intersect).
    pub fn dist(&self, other: &SubGrid) -> u64 {
        self.rows.gap(&other.rows) as u64 + self.cols.gap(&other.cols) as u64
    }
}

impl fmt::Display for SubGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

/// A problem instance: a side x side grid plus demand pairs (source, destination).
/// Sources and destinations may repeat across pairs (multi-set semantics).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridInstance {
    pub side: u32,
    pub pairs: Vec<(Coord, Coord)>,
    pub seed: u64,
}

#[derive(thiserror::Error, Debug, PartialEq, Eq)]
pub enum InstanceError {
    #[error("side must be at least 2, got {0}")]
    SideTooSmall(u32),
    #[error("pair {index}: coordinate {coord} outside {side}x{side} grid")]
    CoordOutOfRange {
        index: usize,
        coord: Coord,
        side: u32,
    },
}

impl GridInstance {
    pub fn new(side: u32, pairs: Vec<(Coord, Coord)>, seed: u64) -> Result<Self, InstanceError> {
        if side < 2 {
            return Err(InstanceError::SideTooSmall(side));
        }
        for (i, &(s, t)) in pairs.iter().enumerate() {
            for c in [s, t] {
                if !c.in_side(side) {
                    return Err(InstanceError::CoordOutOfRange {
                        index: i,
                        coord: c,
                        side,
                    });
                }
            }
        }
        Ok(GridInstance { side, pairs, seed })
    }

    pub fn n(&self) -> u64 {
        self.side as u64 * self.side as u64
    }

    pub fn k(&self) -> usize {
        self.pairs.len()
    }

    pub fn boundary(&self) -> SubGrid {
        SubGrid::from_bounds(1, self.side, 1, self.side)
    }

    pub fn is_on_boundary(&self, v: Coord) -> bool {
        v.row == 1 || v.col == 1 || v.row == self.side || v.col == self.side
    }
}

/// One routed path: a simple path in the grid, consecutive vertices adjacent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridPath {
    pub vertices: Vec<Coord>,
}

impl GridPath {
    pub fn new(vertices: Vec<Coord>) -> Self {
        GridPath { vertices }
    }

    pub fn first(&self) -> Option<Coord> {
        self.vertices.first().copied()
    }

    pub fn last(&self) -> Option<Coord> {
        self.vertices.last().copied()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Structure check independent of any instance: simple, adjacent steps.
    pub fn well_formed(&self) -> Result<(), RoutingViolation> {
        if self.vertices.is_empty() {
            return Err(RoutingViolation::EmptyPath {
                pair_index: usize::MAX,
            });
        }
        let mut seen = std::collections::HashSet::with_capacity(self.vertices.len());
        let mut prev: Option<Coord> = None;
        for &v in &self.vertices {
            if let Some(p) = prev {
                if manhattan_dist(p, v) != 1 {
                    return Err(RoutingViolation::NotAdjacent {
                        pair_index: usize::MAX,
                        at: v,
                    });
                }
            }
            if !seen.insert(v) {
                return Err(RoutingViolation::RepeatedVertex {
                    pair_index: usize::MAX,
                    at: v,
                });
            }
            prev = Some(v);
        }
        Ok(())
    }
}

/// A set of vertex-disjoint paths, each serving one demand pair of an instance.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Routing {
    pub entries: Vec<(usize, GridPath)>,
}

impl Routing {
    pub fn new(entries: Vec<(usize, GridPath)>) -> Self {
        Routing { entries }
    }

    pub fn empty() -> Self {
        Routing {
            entries: Vec::new(),
        }
    }

    pub fn routed_count(&self) -> usize {
        self.entries.len()
    }
}

/// Why a routing is invalid; the first violation found is reported.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RoutingViolation {
    PairIndexOutOfRange {
        pair_index: usize,
    },
    DuplicatePairIndex {
        pair_index: usize,
    },
    EmptyPath {
        pair_index: usize,
    },
    OutOfBounds {
        pair_index: usize,
        at: Coord,
    },
    NotAdjacent {
        pair_index: usize,
        at: Coord,
    },
    RepeatedVertex {
        pair_index: usize,
        at: Coord,
    },
    EndpointMismatch {
        pair_index: usize,
        expected: Coord,
        at: Coord,
    },
    SharedVertex {
        at: Coord,
        pair_a: usize,
        pair_b: usize,
    },
}

impl fmt::Display for RoutingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RoutingViolation::PairIndexOutOfRange { pair_index } => {
                write!(f, "pair index {pair_index} out of range")
            }
            RoutingViolation::DuplicatePairIndex { pair_index } => {
                write!(f, "pair index {pair_index} routed twice")
            }
            RoutingViolation::EmptyPath { pair_index } => {
                write!(f, "empty path for pair {pair_index}")
            }
            RoutingViolation::OutOfBounds { pair_index, at } => {
                write!(f, "pair {pair_index}: vertex {at} outside grid")
            }
            RoutingViolation::NotAdjacent { pair_index, at } => {
                write!(f, "pair {pair_index}: step break at {at}")
            }
            RoutingViolation::RepeatedVertex { pair_index, at } => {
                write!(f, "pair {pair_index}: repeated vertex {at}")
            }
            RoutingViolation::EndpointMismatch {
                pair_index,
                expected,
                at,
            } => {
                write!(
                    f,
                    "pair {pair_index}: endpoint mismatch, expected {expected}, got {at}"
                )
            }
            RoutingViolation::SharedVertex { at, pair_a, pair_b } => {
                write!(f, "shared vertex {at} between pairs {pair_a} and {pair_b}")
            }
        }
    }
}

/// Verdict of the routing verifier. Violations are data, not errors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Violation(RoutingViolation),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

/// Check every `Routing` invariant against the instance:
/// in-range simple paths, correct endpoints per the indexed pair, pairwise
/// vertex-disjointness, distinct pair indices.
pub fn verify_routing(inst: &GridInstance, routing: &Routing) -> Verdict {
    let mut used: HashMap<Coord, usize> = HashMap::new();
    let mut indices = std::collections::HashSet::new();
    for (pair_index, path) in routing.entries.iter().map(|(i, p)| (*i, p)) {
        if pair_index >= inst.pairs.len() {
            return Verdict::Violation(RoutingViolation::PairIndexOutOfRange { pair_index });
        }
        if !indices.insert(pair_index) {
            return Verdict::Violation(RoutingViolation::DuplicatePairIndex { pair_index });
        }
        if path.vertices.is_empty() {
            return Verdict::Violation(RoutingViolation::EmptyPath { pair_index });
        }
        let (s, t) = inst.pairs[pair_index];
        let first = path.first().unwrap();
        if first != s {
            return Verdict::Violation(RoutingViolation::EndpointMismatch {
                pair_index,
                expected: s,
                at: first,
            });
        }
        let last = path.last().unwrap();
        if last != t {
            return Verdict::Violation(RoutingViolation::EndpointMismatch {
                pair_index,
                expected: t,
                at: last,
            });
        }
        let mut prev: Option<Coord> = None;
        let mut own = std::collections::HashSet::with_capacity(path.len());
        for &v in &path.vertices {
            if !v.in_side(inst.side) {
                return Verdict::Violation(RoutingViolation::OutOfBounds { pair_index, at: v });
            }
            if let Some(p) = prev {
                if manhattan_dist(p, v) != 1 {
                    return Verdict::Violation(RoutingViolation::NotAdjacent { pair_index, at: v });
                }
            }
            if !own.insert(v) {
                return Verdict::Violation(RoutingViolation::RepeatedVertex { pair_index, at: v });
            }
            if let Some(&other) = used.get(&v) {
                return Verdict::Violation(RoutingViolation::SharedVertex {
                    at: v,
                    pair_a: other,
                    pair_b: pair_index,
                });
            }
            prev = Some(v);
        }
        for &v in &path.vertices {
            used.insert(v, pair_index);
        }
    }
    Verdict::Valid
}

/// Desk-scale multipliers replacing the asymptotic log-power factors.
/// `None` means the literal formula (with n = |U| for the rounding stages).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolylogOverrides {
    /// Replaces 64*(log2 n)^3 in the stage-2 failure threshold (still scaled by d_h).
    pub stage2_cap_factor: Option<u64>,
    /// Replaces ceil(128*(log2 n)^4), the stage-3 subsampling modulus.
    pub stage3_modulus: Option<u64>,
    /// Replaces (log2 n)^5, the independent rounding trial count.
    pub trial_factor: Option<u64>,
    /// Replaces 2*eta^3, the source-order subsampling modulus of the router.
    pub subsample_modulus: Option<u64>,
}

/// Algorithm parameters: eta, rho, the level caps d_1..d_rho, the trimmed
/// side l', and the polylog knobs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    pub eta: u64,
    pub rho: u32,
    /// d[h-1] = eta^(rho - h + 3) for h = 1..rho.
    pub d: Vec<u64>,
    pub opt_guess: u64,
    pub c_star: u32,
    pub ell_prime: u64,
    /// Set when the scale formula would force rho < 1 (always, at desk scale).
    pub degenerate_scale: bool,
    pub overrides: PolylogOverrides,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ParamOverrides {
    pub eta: Option<u64>,
    pub rho: Option<u32>,
    pub polylog: PolylogOverrides,
}

#[derive(thiserror::Error, Debug, PartialEq, Eq)]
pub enum ParamsError {
    #[error("n must be at least 4, got {0}")]
    NTooSmall(u64),
    #[error("opt_guess must be at least 1")]
    OptGuessZero,
    #[error("eta override must be at least 2")]
    EtaTooSmall,
    #[error("rho override must be at least 1")]
    RhoTooSmall,
    #[error("parameters overflow: eta^(rho+2) does not fit in u64")]
    Overflow,
}

impl Params {
    pub fn d1(&self) -> u64 {
        self.d[0]
    }

    pub fn d_at(&self, level: u32) -> u64 {
        self.d[(level - 1) as usize]
    }

    /// Stage-2 failure threshold for level h colors, given the rounding-local n.
    pub fn stage2_threshold(&self, level: u32, n_local: u64) -> u64 {
        let factor = self.overrides.stage2_cap_factor.unwrap_or_else(|| {
            let l = log2_ceil(n_local.max(2));
            64 * l * l * l
        });
        self.d_at(level).saturating_mul(factor)
    }

    /// Stage-3 subsampling modulus, >= 1.
    pub fn stage3_modulus(&self, n_local: u64) -> u64 {
        self.overrides
            .stage3_modulus
            .unwrap_or_else(|| {
                let l = log2_ceil(n_local.max(2));
                128 * l * l * l * l
            })
            .max(1)
    }

    /// Rounding trial count for run_hsc, defaulting to (log2 n)^5.
    pub fn trial_count(&self, n_local: u64) -> u64 {
        self.overrides
            .trial_factor
            .unwrap_or_else(|| {
                let l = log2_ceil(n_local.max(2));
                l * l * l * l * l
            })
            .max(1)
    }

    /// Source-order subsampling modulus used before snake routing.
    pub fn subsample_modulus(&self) -> u64 {
        self.overrides
            .subsample_modulus
            .unwrap_or_else(|| 2 * self.eta * self.eta * self.eta)
            .max(1)
    }
}

/// ceil(log2 x) for x >= 1.
pub fn log2_ceil(x: u64) -> u64 {
    assert!(x >= 1);
    (64 - (x - 1).leading_zeros() as u64).clamp(1, 63)
}

fn checked_pow(base: u64, exp: u32) -> Option<u64> {
    base.checked_pow(exp)
}

/// Derive the full parameter set from n = side^2 and a guess for OPT.
///
/// eta = 2^ceil(sqrt(log2 n)); rho is the largest integer with
/// eta^(rho+2) <= opt_guess / 2^(c* sqrt(log n) log log n). When that forces
/// rho < 1 (always, at desk scale), rho := 1 and the degenerate flag is set.
pub fn derive_params(
    n: u64,
    opt_guess: u64,
    overrides: ParamOverrides,
) -> Result<Params, ParamsError> {
    if n < 4 {
        return Err(ParamsError::NTooSmall(n));
    }
    if opt_guess == 0 {
        return Err(ParamsError::OptGuessZero);
    }
    let c_star = 11u32;
    let log_n = (n as f64).log2();
    let eta = match overrides.eta {
        Some(e) => {
            if e < 2 {
                return Err(ParamsError::EtaTooSmall);
            }
            e
        }
        None => {
            let exp = (log_n.sqrt() - 1e-9).ceil().max(1.0) as u32;
            checked_pow(2, exp).ok_or(ParamsError::Overflow)?
        }
    };

    let mut degenerate = false;
    let rho = match overrides.rho {
        Some(r) => {
            if r < 1 {
                return Err(ParamsError::RhoTooSmall);
            }
            r
        }
        None => {
            // largest rho with eta^(rho+2) <= opt / 2^(c* sqrt(log n) loglog n)
            let denom_log2 = c_star as f64 * log_n.sqrt() * log_n.max(2.0).log2();
            let budget_log2 = (opt_guess as f64).log2() - denom_log2;
            let eta_log2 = (eta as f64).log2();
            let max_rho = (budget_log2 / eta_log2 - 2.0).floor();
            if max_rho < 1.0 {
                degenerate = true;
                1
            } else {
                max_rho as u32
            }
        }
    };

    let d1 = checked_pow(eta, rho + 2).ok_or(ParamsError::Overflow)?;
    let d: Vec<u64> = (1..=rho)
        .map(|h| checked_pow(eta, rho - h + 3).ok_or(ParamsError::Overflow))
        .collect::<Result<_, _>>()?;
    debug_assert_eq!(d[0], d1);

    let side = (n as f64).sqrt() as u64;
    let side = if side * side > n { side - 1 } else { side };
    // largest multiple of d1 strictly below the grid side; 0 if none exists
    let ell_prime = if side > d1 { ((side - 1) / d1) * d1 } else { 0 };

    Ok(Params {
        eta,
        rho,
        d,
        opt_guess,
        c_star,
        ell_prime,
        degenerate_scale: degenerate,
        overrides: overrides.polylog,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manhattan_examples() {
        assert_eq!(manhattan_dist(Coord::new(1, 1), Coord::new(3, 4)), 5);
        assert_eq!(manhattan_dist(Coord::new(2, 2), Coord::new(2, 2)), 0);
        let a = [Coord::new(1, 1)];
        let b = [Coord::new(1, 3), Coord::new(4, 1)];
        assert_eq!(manhattan_dist_sets(&a, &b), Some(2));
    }

    #[test]
    fn verify_valid_column_path() {
        let inst = GridInstance::new(3, vec![(Coord::new(1, 1), Coord::new(3, 1))], 0).unwrap();
        let r = Routing::new(vec![(
            0,
            GridPath::new(vec![Coord::new(1, 1), Coord::new(2, 1), Coord::new(3, 1)]),
        )]);
        assert!(verify_routing(&inst, &r).is_valid());
    }

    #[test]
    fn verify_shared_vertex() {
        let inst = GridInstance::new(
            3,
            vec![
                (Coord::new(1, 1), Coord::new(3, 3)),
                (Coord::new(1, 3), Coord::new(3, 1)),
            ],
            0,
        )
        .unwrap();
        let r = Routing::new(vec![
            (
                0,
                GridPath::new(vec![
                    Coord::new(1, 1),
                    Coord::new(1, 2),
                    Coord::new(2, 2),
                    Coord::new(3, 2),
                    Coord::new(3, 3),
                ]),
            ),
            (
                1,
                GridPath::new(vec![
                    Coord::new(1, 3),
                    Coord::new(2, 3),
                    Coord::new(2, 2),
                    Coord::new(2, 1),
                    Coord::new(3, 1),
                ]),
            ),
        ]);
        match verify_routing(&inst, &r) {
            Verdict::Violation(RoutingViolation::SharedVertex { at, .. }) => {
                assert_eq!(at, Coord::new(2, 2));
            }
            v => panic!("expected shared-vertex violation, got {v:?}"),
        }
    }

    #[test]
    fn verify_endpoint_mismatch() {
        let inst = GridInstance::new(3, vec![(Coord::new(1, 1), Coord::new(3, 3))], 0).unwrap();
        let r = Routing::new(vec![(
            0,
            GridPath::new(vec![
                Coord::new(1, 1),
                Coord::new(2, 1),
                Coord::new(3, 1),
                Coord::new(3, 2),
            ]),
        )]);
        match verify_routing(&inst, &r) {
            Verdict::Violation(RoutingViolation::EndpointMismatch { at, .. }) => {
                assert_eq!(at, Coord::new(3, 2));
            }
            v => panic!("expected endpoint mismatch, got {v:?}"),
        }
    }

    #[test]
    fn derive_params_eta_formula() {
        // n = 2^16: eta = 2^ceil(sqrt(16)) = 16
        let p = derive_params(1 << 16, u64::MAX / 4, ParamOverrides::default()).unwrap();
        assert_eq!(p.eta, 16);
    }

    #[test]
    fn derive_params_override_d_vector() {
        let p = derive_params(
            1 << 16,
            8,
            ParamOverrides {
                eta: Some(2),
                rho: Some(2),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(p.d, vec![16, 8]);
    }

    #[test]
    fn derive_params_degenerate_scale() {
        // n = 4, opt 1: the inequality eta^(rho+2) <= 1/2^(...) fails for rho = 1,
        // so the degenerate flag must be set and rho pinned to 1.
        let p = derive_params(4, 1, ParamOverrides::default()).unwrap();
        assert!(p.degenerate_scale);
        assert_eq!(p.rho, 1);
    }

    #[test]
    fn derive_params_deterministic() {
        let a = derive_params(1 << 10, 7, ParamOverrides::default()).unwrap();
        let b = derive_params(1 << 10, 7, ParamOverrides::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_small_n() {
        assert_eq!(
            derive_params(3, 1, ParamOverrides::default()),
            Err(ParamsError::NTooSmall(3))
        );
    }
}
