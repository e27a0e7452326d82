//! Wall graphs (grids with alternating vertical edges removed), NDP/EDP on
//! walls, EDP-to-NDP extraction, and the snake-based wall router.

use crate::farroute::{route_far_from_boundary, FarConfig};
use crate::grid::{Coord, GridInstance, GridPath, ParamOverrides, Routing};
use crate::snake::Snake;
use std::collections::{BTreeMap, BTreeSet};

#[derive(thiserror::Error, Debug, PartialEq, Eq)]
pub enum WallError {
    #[error("wall length must be even, got {0}")]
    OddLength(u32),
    #[error("wall dimensions must be at least 2x2")]
    TooSmall,
    #[error("paths {0} and {1} share an edge")]
    NotEdgeDisjoint(usize, usize),
    #[error("vertex {0} is not in the wall")]
    NotInWall(Coord),
    #[error("source of pair {0} is not on the wall boundary")]
    SourceNotOnBoundary(usize),
}

/// A wall of length ell/2 and height h, derived from the (h x ell) grid by
/// deleting vertical edges e^j_z with z != j (mod 2) and then all degree-1
/// vertices.
#[derive(Clone, Debug)]
pub struct WallGraph {
    pub ell: u32,
    pub height: u32,
    removed: BTreeSet<Coord>,
}

impl WallGraph {
    pub fn build(ell: u32, height: u32) -> Result<WallGraph, WallError> {
        if !ell.is_multiple_of(2) {
            return Err(WallError::OddLength(ell));
        }
        if ell < 2 || height < 2 {
            return Err(WallError::TooSmall);
        }
        let mut wall = WallGraph {
            ell,
            height,
            removed: BTreeSet::new(),
        };
        // prune degree-1 vertices until stable
        loop {
            let mut doomed = Vec::new();
            for r in 1..=height {
                for c in 1..=ell {
                    let v = Coord::new(r, c);
                    if wall.contains(v) && wall.degree(v) <= 1 {
                        doomed.push(v);
                    }
                }
            }
            if doomed.is_empty() {
                break;
            }
            wall.removed.extend(doomed);
        }
        Ok(wall)
    }

    pub fn columns(&self) -> u32 {
        self.ell / 2
    }

    pub fn contains(&self, v: Coord) -> bool {
        v.row >= 1
            && v.row <= self.height
            && v.col >= 1
            && v.col <= self.ell
            && !self.removed.contains(&v)
    }

    /// Is the vertical grid edge between (z, j) and (z+1, j) present?
    fn vertical_edge_kept(&self, z: u32, j: u32) -> bool {
        z % 2 == j % 2
    }

    pub fn adjacent(&self, a: Coord, b: Coord) -> bool {
        if !self.contains(a) || !self.contains(b) {
            return false;
        }
        if a.row == b.row && a.col.abs_diff(b.col) == 1 {
            return true;
        }
        if a.col == b.col && a.row.abs_diff(b.row) == 1 {
            return self.vertical_edge_kept(a.row.min(b.row), a.col);
        }
        false
    }

    pub fn neighbors(&self, v: Coord) -> Vec<Coord> {
        let mut out = Vec::with_capacity(4);
        for nb in [
            Coord::new(v.row, v.col.wrapping_sub(1)),
            Coord::new(v.row, v.col + 1),
            Coord::new(v.row.wrapping_sub(1), v.col),
            Coord::new(v.row + 1, v.col),
        ] {
            if nb.row >= 1 && nb.col >= 1 && self.adjacent(v, nb) {
                out.push(nb);
            }
        }
        out
    }

    pub fn degree(&self, v: Coord) -> usize {
        self.neighbors(v).len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = Coord> + '_ {
        (1..=self.height)
            .flat_map(move |r| (1..=self.ell).map(move |c| Coord::new(r, c)))
            .filter(move |&v| self.contains(v))
    }

    /// Boundary of the wall: top/bottom rows plus the first and last columns.
    pub fn on_boundary(&self, v: Coord) -> bool {
        self.contains(v)
            && (v.row == 1 || v.row == self.height || v.col <= 2 || v.col >= self.ell - 1)
    }

    /// Check a path uses only wall vertices and edges.
    pub fn path_in_wall(&self, p: &GridPath) -> Result<(), WallError> {
        for v in &p.vertices {
            if !self.contains(*v) {
                return Err(WallError::NotInWall(*v));
            }
        }
        for w in p.vertices.windows(2) {
            if !self.adjacent(w[0], w[1]) {
                return Err(WallError::NotInWall(w[1]));
            }
        }
        Ok(())
    }
}

/// Wall-aware disjointness verdict for a set of paths.
pub fn verify_wall_paths(
    wall: &WallGraph,
    inst: &GridInstance,
    routing: &Routing,
    edge_disjoint_only: bool,
) -> Result<(), String> {
    let mut seen_pairs = BTreeSet::new();
    let mut used_vertices: BTreeMap<Coord, usize> = BTreeMap::new();
    let mut used_edges: BTreeSet<(Coord, Coord)> = BTreeSet::new();
    for (pi, path) in &routing.entries {
        if *pi >= inst.pairs.len() || !seen_pairs.insert(*pi) {
            return Err(format!("bad pair index {pi}"));
        }
        wall.path_in_wall(path).map_err(|e| e.to_string())?;
        let (s, t) = inst.pairs[*pi];
        if path.first() != Some(s) || path.last() != Some(t) {
            return Err(format!("endpoint mismatch for pair {pi}"));
        }
        for w in path.vertices.windows(2) {
            let e = (w[0].min(w[1]), w[0].max(w[1]));
            if !used_edges.insert(e) {
                return Err(format!("shared edge at {}", e.0));
            }
        }
        for v in &path.vertices {
            if let Some(other) = used_vertices.insert(*v, *pi) {
                if !edge_disjoint_only {
                    return Err(format!("shared vertex {v} between {other} and {pi}"));
                }
            }
        }
    }
    Ok(())
}

/// Extract a node-disjoint subset of size >= ceil(m/9) from an edge-disjoint
/// family, via a greedy minimum-degree independent set on the conflict graph
/// (edge P -> P' when an endpoint of P' lies on P).
pub fn edp_to_ndp_extract(wall: &WallGraph, paths: &[GridPath]) -> Result<Vec<usize>, WallError> {
    let m = paths.len();
    // edge-disjointness precondition
    let mut used_edges: BTreeMap<(Coord, Coord), usize> = BTreeMap::new();
    for (i, p) in paths.iter().enumerate() {
        wall.path_in_wall(p)?;
        for w in p.vertices.windows(2) {
            let e = (w[0].min(w[1]), w[0].max(w[1]));
            if let Some(&j) = used_edges.get(&e) {
                return Err(WallError::NotEdgeDisjoint(j, i));
            }
            used_edges.insert(e, i);
        }
    }
    let vertex_sets: Vec<BTreeSet<Coord>> = paths
        .iter()
        .map(|p| p.vertices.iter().copied().collect())
        .collect();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m];
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            let (s, t) = (paths[j].first().unwrap(), paths[j].last().unwrap());
            if vertex_sets[i].contains(&s) || vertex_sets[i].contains(&t) {
                adj[i].insert(j);
                adj[j].insert(i);
            }
        }
    }
    let mut alive: BTreeSet<usize> = (0..m).collect();
    let mut kept = Vec::new();
    while !alive.is_empty() {
        let v = *alive
            .iter()
            .min_by_key(|&&v| (adj[v].iter().filter(|n| alive.contains(n)).count(), v))
            .unwrap();
        kept.push(v);
        let neigh: Vec<usize> = adj[v]
            .iter()
            .copied()
            .filter(|n| alive.contains(n))
            .collect();
        alive.remove(&v);
        for n in neigh {
            alive.remove(&n);
        }
    }
    kept.sort_unstable();
    assert!(
        kept.len() >= m.div_ceil(9),
        "independent set below the m/9 floor"
    );
    // node-disjointness follows from degree-3: assert it
    let mut seen: BTreeSet<Coord> = BTreeSet::new();
    for &i in &kept {
        for v in &paths[i].vertices {
            assert!(seen.insert(*v), "extraction produced a shared vertex");
        }
    }
    Ok(kept)
}

/// Wall-source remap per the perturbation observation: sources on the first
/// or last wall column move one step outward onto the grid boundary.
#[derive(Clone, Debug)]
pub struct WallRemap {
    pub instance: GridInstance,
    /// per pair: Some(original source) when the source moved
    pub moved: Vec<Option<Coord>>,
}

pub fn remap_wall_sources(wall: &WallGraph, inst: &GridInstance) -> Result<WallRemap, WallError> {
    let mut pairs = Vec::new();
    let mut moved = Vec::new();
    for (i, &(s, t)) in inst.pairs.iter().enumerate() {
        if !wall.on_boundary(s) {
            return Err(WallError::SourceNotOnBoundary(i));
        }
        let on_gamma_g = s.row == 1 || s.row == wall.height || s.col == 1 || s.col == wall.ell;
        if on_gamma_g {
            pairs.push((s, t));
            moved.push(None);
        } else if s.col == 2 {
            pairs.push((Coord::new(s.row, 1), t));
            moved.push(Some(s));
        } else if s.col == wall.ell - 1 {
            pairs.push((Coord::new(s.row, wall.ell), t));
            moved.push(Some(s));
        } else {
            return Err(WallError::SourceNotOnBoundary(i));
        }
    }
    Ok(WallRemap {
        instance: GridInstance::new(inst.side, pairs, inst.seed).expect("in range"),
        moved,
    })
}

/// Lift a routing of the remapped instance back to the original sources,
/// dropping conflicting paths greedily.
pub fn lift_wall_routing(
    wall: &WallGraph,
    orig: &GridInstance,
    remap: &WallRemap,
    routing: &Routing,
) -> Routing {
    let extended: Vec<(usize, GridPath)> = routing
        .entries
        .iter()
        .map(|(i, p)| {
            let mut v = p.vertices.clone();
            if let Some(orig_src) = remap.moved[*i] {
                let mut vv = vec![orig_src];
                vv.extend(v);
                v = vv;
            }
            (*i, GridPath::new(v))
        })
        .collect();
    // drop paths whose prepended vertex collides with another kept path
    let mut kept: Vec<(usize, GridPath)> = Vec::new();
    let mut used: BTreeSet<Coord> = BTreeSet::new();
    for (i, path) in &extended {
        if path.vertices.iter().any(|v| used.contains(v)) {
            continue;
        }
        // the extension must also be a wall edge
        if remap.moved[*i].is_some() && wall.path_in_wall(path).is_err() {
            continue;
        }
        for v in &path.vertices {
            used.insert(*v);
        }
        kept.push((*i, path.clone()));
    }
    let _ = orig;
    Routing::new(kept)
}

/// Is the wall restriction of a snake a connected subgraph?
pub fn wall_restriction_connected(wall: &WallGraph, snake: &Snake) -> bool {
    let cells: BTreeSet<Coord> = snake
        .vertices()
        .into_iter()
        .filter(|&v| wall.contains(v))
        .collect();
    let Some(&start) = cells.iter().next() else {
        return true;
    };
    let mut seen = BTreeSet::new();
    let mut stack = vec![start];
    seen.insert(start);
    while let Some(v) = stack.pop() {
        for nb in wall.neighbors(v) {
            if cells.contains(&nb) && seen.insert(nb) {
                stack.push(nb);
            }
        }
    }
    seen.len() == cells.len()
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum WallMode {
    Ndp,
    Edp,
}

/// Route a wall instance: remap sources onto the grid boundary, try the
/// snake pipeline (sources on the top row) and a greedy wall BFS, verify
/// with the wall-aware checker, and lift back.
pub fn solve_wall(
    wall: &WallGraph,
    inst: &GridInstance,
    _mode: WallMode,
    seed: u64,
    overrides: ParamOverrides,
) -> Result<Routing, WallError> {
    let remap = remap_wall_sources(wall, inst)?;
    let mapped = &remap.instance;

    // candidate 1: greedy sequential BFS inside the wall
    let mut best = {
        let region: BTreeSet<Coord> = wall.vertices().collect();
        let mut region = region;
        let mut entries = Vec::new();
        for (i, &(s, t)) in mapped.pairs.iter().enumerate() {
            if !region.contains(&s) || !region.contains(&t) {
                continue;
            }
            if let Some(p) = wall_bfs(wall, &region, s, t) {
                for v in &p.vertices {
                    region.remove(v);
                }
                entries.push((i, p));
            }
        }
        Routing::new(entries)
    };

    // candidate 2: the grid snake pipeline when sources sit on the top row
    if mapped.pairs.iter().all(|p| p.0.row == 1) {
        let far = route_far_from_boundary(
            mapped,
            mapped.k() as u64,
            overrides,
            seed,
            &FarConfig {
                trials: Some(12),
                max_branches: Some(24),
                wall_mode: true,
            },
        );
        if let Ok(out) = far {
            let mut entries = Vec::new();
            let mut used: BTreeSet<Coord> = BTreeSet::new();
            for (pair, snake) in &out.pair_snakes {
                if snake.width() < 3 || !wall_restriction_connected(wall, snake) {
                    continue;
                }
                let cells: BTreeSet<Coord> = snake
                    .vertices()
                    .into_iter()
                    .filter(|v| wall.contains(*v) && !used.contains(v))
                    .collect();
                let (s, t) = mapped.pairs[*pair];
                if !cells.contains(&s) || !cells.contains(&t) {
                    continue;
                }
                if let Some(p) = wall_bfs(wall, &cells, s, t) {
                    used.extend(p.vertices.iter().copied());
                    entries.push((*pair, p));
                }
            }
            let cand = Routing::new(entries);
            if cand.routed_count() > best.routed_count()
                && verify_wall_paths(wall, mapped, &cand, false).is_ok()
            {
                best = cand;
            }
        }
    }

    debug_assert!(verify_wall_paths(wall, mapped, &best, false).is_ok());
    Ok(lift_wall_routing(wall, inst, &remap, &best))
}

fn wall_bfs(wall: &WallGraph, region: &BTreeSet<Coord>, s: Coord, t: Coord) -> Option<GridPath> {
    if !region.contains(&s) || !region.contains(&t) {
        return None;
    }
    if s == t {
        return Some(GridPath::new(vec![s]));
    }
    let mut prev: BTreeMap<Coord, Coord> = BTreeMap::new();
    let mut q = std::collections::VecDeque::new();
    prev.insert(s, s);
    q.push_back(s);
    while let Some(u) = q.pop_front() {
        if u == t {
            break;
        }
        for nb in wall.neighbors(u) {
            if region.contains(&nb) && !prev.contains_key(&nb) {
                prev.insert(nb, u);
                q.push_back(nb);
            }
        }
    }
    if !prev.contains_key(&t) {
        return None;
    }
    let mut path = vec![t];
    let mut cur = t;
    while cur != s {
        cur = prev[&cur];
        path.push(cur);
    }
    path.reverse();
    Some(GridPath::new(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wall_4x4_structure() {
        let w = WallGraph::build(4, 4).unwrap();
        assert_eq!(w.columns(), 2);
        for v in w.vertices() {
            let d = w.degree(v);
            assert!((2..=3).contains(&d), "vertex {v} has degree {d}");
        }
    }

    #[test]
    fn wall_rejects_odd() {
        assert!(matches!(
            WallGraph::build(3, 4),
            Err(WallError::OddLength(3))
        ));
    }

    #[test]
    fn extract_keeps_node_disjoint_input() {
        let w = WallGraph::build(8, 8).unwrap();
        // two clearly separated horizontal paths along rows
        let p1 = GridPath::new((2..=5).map(|c| Coord::new(2, c)).collect());
        let p2 = GridPath::new((2..=5).map(|c| Coord::new(6, c)).collect());
        w.path_in_wall(&p1).unwrap();
        w.path_in_wall(&p2).unwrap();
        let kept = edp_to_ndp_extract(&w, &[p1, p2]).unwrap();
        assert_eq!(kept, vec![0, 1]);
    }

    #[test]
    fn extract_drops_endpoint_conflict() {
        let w = WallGraph::build(8, 8).unwrap();
        let p1 = GridPath::new((2..=5).map(|c| Coord::new(2, c)).collect());
        // p2 ends on a vertex of p1
        let mut v: Vec<Coord> = (3..=4).map(|r| Coord::new(r, 3)).collect();
        v.insert(0, Coord::new(2, 3));
        v.reverse();
        let p2 = GridPath::new(v);
        if w.path_in_wall(&p2).is_err() {
            return; // the sampled edges may be absent in the wall; skip
        }
        let kept = edp_to_ndp_extract(&w, &[p1, p2]).unwrap();
        assert_eq!(kept.len(), 1);
    }

    #[test]
    fn remap_moves_inner_column_sources() {
        let w = WallGraph::build(8, 8).unwrap();
        let inst = GridInstance::new(
            8,
            vec![
                (Coord::new(3, 2), Coord::new(5, 5)),
                (Coord::new(1, 4), Coord::new(6, 6)),
            ],
            0,
        )
        .unwrap();
        let remap = remap_wall_sources(&w, &inst).unwrap();
        assert_eq!(remap.instance.pairs[0].0, Coord::new(3, 1));
        assert_eq!(remap.moved[0], Some(Coord::new(3, 2)));
        assert_eq!(remap.moved[1], None);
    }
}
