//! The general restricted solver: boundary classification, modified
//! instances, the good-pair interval DP, the short-pair cover, source
//! lifting, and the dispatcher combining them.

use crate::farroute::{greedy_one_pair, route_far_from_boundary, FarConfig};
use crate::flow::{bfs_path, disjoint_paths};
use crate::grid::{
    manhattan_dist, verify_routing, Coord, GridInstance, GridPath, Interval, ParamOverrides,
    Routing, SubGrid, Verdict,
};
use crate::spaced::{check_spacing, route_spaced_out};
use crate::transform::{edge_of, nearest_boundary, Edge, Sym};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

#[derive(thiserror::Error, Debug, PartialEq, Eq)]
pub enum ReductionError {
    #[error("source of pair {0} is not on the grid boundary")]
    SourceNotOnBoundary(usize),
    #[error("pair geometry invalid: {0}")]
    Geometry(String),
    #[error("interval pair is not {0}-interesting: {1}")]
    NotInteresting(u64, String),
    #[error("source of pair {0} is farther than delta from the boundary")]
    DeltaViolated(usize),
    #[error("connector capacity exceeded: routed {got} of {want}")]
    Capacity { got: usize, want: usize },
}

/// Classification of a demand pair by boundary edges and distance class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairClass {
    pub source_edge: Edge,
    pub dest_edge: Edge,
    /// 0 = far (d(t, t~) >= OPT/eta); r >= 1 per the dyadic ladder;
    /// None = destination on the boundary (handled by the planar DP).
    pub distance_class: Option<u32>,
}

/// Partition all pairs by (source edge, nearest-boundary edge of t, class).
pub fn split_classes(
    inst: &GridInstance,
    opt_guess: u64,
    eta: u64,
) -> Result<Vec<PairClass>, ReductionError> {
    let mut out = Vec::with_capacity(inst.pairs.len());
    for (i, &(s, t)) in inst.pairs.iter().enumerate() {
        let se = edge_of(inst.side, s).ok_or(ReductionError::SourceNotOnBoundary(i))?;
        let tb = nearest_boundary(inst.side, t);
        let de = edge_of(inst.side, tb).expect("nearest boundary is on the boundary");
        let dist = manhattan_dist(t, tb);
        let class = if dist == 0 {
            None
        } else if dist * eta >= opt_guess {
            Some(0)
        } else {
            // largest r with dist < OPT/(eta 2^(r-1)), i.e. dist*eta*2^(r-1) < OPT
            let mut r: u32 = 1;
            while (dist as u128) * (eta as u128) * (1u128 << r) >= opt_guess as u128 && r < 62 {
                r += 1;
            }
            Some(r)
        };
        out.push(PairClass {
            source_edge: se,
            dest_edge: de,
            distance_class: class,
        });
    }
    Ok(out)
}

/// A modified instance hosted on a square sub-grid of the original grid,
/// built for an (I, I') candidate with I' on the bottom boundary.
#[derive(Clone, Debug)]
pub struct ModifiedInstance {
    /// The square sub-grid G' in original coordinates.
    pub region: SubGrid,
    /// The inner core G'' (columns of I' x bottom 4d rows).
    pub core: SubGrid,
    pub d: u64,
    /// Pairs of the inner instance, parallel to `pair_map`.
    pub instance: GridInstance,
    /// Original pair index and original source per inner pair.
    pub pair_map: Vec<(usize, Coord)>,
    pub provenance: (Interval, Interval),
}

/// Build the modified instance for a valid (I, I', d) sub-instance whose I'
/// lies on the bottom boundary. The sub-instance pairs are the original
/// indices in `members`; sources must lie in I, t~ in I', d <= d(t,t~) < 2d.
pub fn build_modified_instance(
    inst: &GridInstance,
    members: &[usize],
    i_src: Interval,
    i_dst: Interval,
    d: u64,
) -> Result<ModifiedInstance, ReductionError> {
    let side = inst.side;
    let d32 = d as u32;
    if i_dst.start <= 4 * d32 || i_dst.end + 4 * d32 > side {
        return Err(ReductionError::Geometry(format!(
            "I' {i_dst} leaves no 4d margin inside side {side}"
        )));
    }
    let w2 = i_dst; // columns of G''
    let w1 = Interval::new(w2.start - 4 * d32, w2.end + 4 * d32);
    let width = w1.len();
    if width > side || width <= 4 * d32 {
        return Err(ReductionError::Geometry(format!(
            "region width {width} infeasible"
        )));
    }
    let rows = Interval::new(side - width + 1, side);
    let region = SubGrid::new(rows, w1);
    let core = SubGrid::new(Interval::new(side - 4 * d32 + 1, side), w2);
    // clockwise boundary order starting at the bottom-left corner of G'
    let order_key = |v: Coord| -> u64 {
        // traversal: up the left edge, along the top, down the right edge,
        // along the bottom right-to-left
        match edge_of(side, v).expect("sources on boundary") {
            Edge::Left => (side - v.row) as u64,
            Edge::Top => side as u64 + v.col as u64,
            Edge::Right => 2 * side as u64 + v.row as u64,
            Edge::Bottom => 3 * side as u64 + (side - v.col) as u64,
        }
    };
    let mut ordered: Vec<usize> = members.to_vec();
    for &p in &ordered {
        let (s, t) = inst.pairs[p];
        if !i_src.contains(s.col) && !i_src.contains(s.row) {
            // I may live on any edge; containment is validated by the caller
        }
        let tb = nearest_boundary(side, t);
        if !(tb.row == side && i_dst.contains(tb.col)) {
            return Err(ReductionError::Geometry(format!(
                "pair {p}: nearest boundary {tb} outside I'"
            )));
        }
        let dist = manhattan_dist(t, tb);
        if dist < d || dist >= 2 * d {
            return Err(ReductionError::Geometry(format!(
                "pair {p}: destination distance {dist} outside [{d}, {})",
                2 * d
            )));
        }
        if !region.contains(t) {
            return Err(ReductionError::Geometry(format!(
                "pair {p}: destination outside G'"
            )));
        }
    }
    ordered.sort_by_key(|&p| order_key(inst.pairs[p].0));
    // inner coordinates: region-local, 1-indexed
    let local = |v: Coord| Coord::new(v.row - region.rows.start + 1, v.col - region.cols.start + 1);
    let mut pairs = Vec::new();
    let mut pair_map = Vec::new();
    for (rank, &p) in ordered.iter().enumerate() {
        let (s, t) = inst.pairs[p];
        let s_new = Coord::new(1, rank as u32 + 1);
        pairs.push((s_new, local(t)));
        pair_map.push((p, s));
    }
    let instance = GridInstance::new(width, pairs, inst.seed)
        .map_err(|e| ReductionError::Geometry(e.to_string()))?;
    Ok(ModifiedInstance {
        region,
        core,
        d,
        instance,
        pair_map,
        provenance: (i_src, i_dst),
    })
}

/// Lift an inner routing of one modified instance back to the original grid:
/// inner paths are translated into the region and each routed original
/// source is connected to its relocated copy outside the region interiors.
pub fn route_modified_back(
    inst: &GridInstance,
    mi: &ModifiedInstance,
    inner: &Routing,
) -> Result<Routing, ReductionError> {
    route_modified_back_batch(inst, std::slice::from_ref(mi), std::slice::from_ref(inner))
}

/// Batched lift over several disjoint modified instances.
pub fn route_modified_back_batch(
    inst: &GridInstance,
    mis: &[ModifiedInstance],
    inners: &[Routing],
) -> Result<Routing, ReductionError> {
    assert_eq!(mis.len(), inners.len());
    let side = inst.side;
    // translate inner paths to global coordinates
    let mut entries: Vec<(usize, GridPath)> = Vec::new();
    let mut want: Vec<(Coord, Coord, usize)> = Vec::new(); // (source, target s', entry index)
    for (mi, inner) in mis.iter().zip(inners) {
        if inner.routed_count() as u64 > mi.d {
            return Err(ReductionError::Capacity {
                got: inner.routed_count(),
                want: mi.d as usize,
            });
        }
        for (ip, path) in &inner.entries {
            let (orig, orig_src) = mi.pair_map[*ip];
            let global: Vec<Coord> = path
                .vertices
                .iter()
                .map(|v| {
                    Coord::new(
                        v.row + mi.region.rows.start - 1,
                        v.col + mi.region.cols.start - 1,
                    )
                })
                .collect();
            let s_prime = global[0];
            want.push((orig_src, s_prime, entries.len()));
            entries.push((orig, GridPath::new(global)));
        }
    }
    if want.is_empty() {
        return Ok(Routing::new(entries));
    }
    // connector region: everything outside the regions, plus each target s'
    let mut region_set: BTreeSet<Coord> = SubGrid::from_bounds(1, side, 1, side)
        .iter_vertices()
        .collect();
    for mi in mis {
        for v in mi.region.iter_vertices() {
            region_set.remove(&v);
        }
    }
    for &(_, sp, _) in &want {
        region_set.insert(sp);
    }
    let sources: Vec<Coord> = want.iter().map(|w| w.0).collect();
    let targets: Vec<Coord> = want.iter().map(|w| w.1).collect();
    let paths = disjoint_paths(&region_set, &sources, &targets, side);
    if paths.len() != want.len() {
        return Err(ReductionError::Capacity {
            got: paths.len(),
            want: want.len(),
        });
    }
    // planar order forces the intended matching; stitch connectors on
    let mut by_source: BTreeMap<Coord, GridPath> =
        paths.into_iter().map(|p| (p.first().unwrap(), p)).collect();
    for &(src, sp, ei) in &want {
        let conn = by_source.remove(&src).ok_or(ReductionError::Capacity {
            got: 0,
            want: want.len(),
        })?;
        if conn.last() != Some(sp) {
            return Err(ReductionError::Capacity {
                got: 0,
                want: want.len(),
            });
        }
        if src == sp {
            continue; // source already equals its copy
        }
        let mut full = conn.vertices;
        full.pop();
        full.extend(std::mem::take(&mut entries[ei].1.vertices));
        entries[ei].1 = GridPath::new(full);
    }
    Ok(Routing::new(entries))
}

/// Candidate interval pair for the good-pair DP.
#[derive(Clone, Debug)]
pub struct GoodCandidate {
    pub sigma: Interval,
    pub sigma_prime: Interval,
    pub value: u64,
    pub payload: usize,
}

/// Select the maximum number of good candidates whose intervals respect the
/// circular order sigma_1..sigma_z, sigma'_z..sigma'_1 with 16d separation
/// between sigma' intervals. Quadratic DP over candidates.
pub fn select_good_pairs_dp(
    candidates: &[GoodCandidate],
    d: u64,
    goodness_floor: u64,
) -> Vec<usize> {
    let good: Vec<usize> = (0..candidates.len())
        .filter(|&i| candidates[i].value >= goodness_floor)
        .collect();
    if good.is_empty() {
        return Vec::new();
    }
    let sep = 16 * d as u32;
    // order by sigma start; chains must have ascending sigma and ascending
    // sigma' with disjointness and separation
    let mut idx = good.clone();
    idx.sort_by_key(|&i| (candidates[i].sigma.start, candidates[i].sigma_prime.start));
    let n = idx.len();
    let mut dp = vec![1usize; n];
    let mut prev = vec![usize::MAX; n];
    let compat = |a: &GoodCandidate, b: &GoodCandidate| -> bool {
        // a before b along sigma, and along sigma'
        a.sigma.end < b.sigma.start
            && a.sigma_prime.end < b.sigma_prime.start
            && a.sigma_prime.gap(&b.sigma_prime) >= sep
    };
    for i in 0..n {
        for j in 0..i {
            if compat(&candidates[idx[j]], &candidates[idx[i]]) && dp[j] + 1 > dp[i] {
                dp[i] = dp[j] + 1;
                prev[i] = j;
            }
        }
    }
    let mut best = 0;
    for i in 0..n {
        if dp[i] > dp[best] {
            best = i;
        }
    }
    let mut chain = Vec::new();
    let mut cur = best;
    loop {
        chain.push(idx[cur]);
        if prev[cur] == usize::MAX {
            break;
        }
        cur = prev[cur];
    }
    chain.reverse();
    chain
}

/// Exhaustive oracle for the DP on small candidate sets.
pub fn select_good_pairs_exhaustive(
    candidates: &[GoodCandidate],
    d: u64,
    goodness_floor: u64,
) -> usize {
    let n = candidates.len();
    assert!(n <= 20, "exhaustive selection beyond budget");
    let sep = 16 * d as u32;
    let mut best = 0;
    for mask in 0u32..(1 << n) {
        let chosen: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        if chosen.len() <= best {
            continue;
        }
        if chosen.iter().any(|&i| candidates[i].value < goodness_floor) {
            continue;
        }
        let mut sorted = chosen.clone();
        sorted.sort_by_key(|&i| candidates[i].sigma.start);
        let ok = sorted.windows(2).all(|w| {
            let a = &candidates[w[0]];
            let b = &candidates[w[1]];
            a.sigma.end < b.sigma.start
                && a.sigma_prime.end < b.sigma_prime.start
                && a.sigma_prime.gap(&b.sigma_prime) >= sep
        });
        if ok {
            best = chosen.len();
        }
    }
    best
}

/// Lifted-source bookkeeping: the remapped instance plus per-pair canonical
/// segments (from the boundary copy back to the original source).
#[derive(Clone, Debug)]
pub struct LiftedSources {
    pub instance: GridInstance,
    pub canonical: Vec<GridPath>,
}

/// Move every source to its nearest boundary vertex (all within `delta`).
pub fn lift_sources_to_boundary(
    inst: &GridInstance,
    delta: u64,
) -> Result<LiftedSources, ReductionError> {
    let mut pairs = Vec::new();
    let mut canonical = Vec::new();
    for (i, &(s, t)) in inst.pairs.iter().enumerate() {
        let sb = nearest_boundary(inst.side, s);
        let d = manhattan_dist(s, sb);
        if d > delta {
            return Err(ReductionError::DeltaViolated(i));
        }
        let mut seg = Vec::new();
        let mut cur = sb;
        seg.push(cur);
        while cur != s {
            if cur.row != s.row {
                cur.row = if s.row > cur.row {
                    cur.row + 1
                } else {
                    cur.row - 1
                };
            } else {
                cur.col = if s.col > cur.col {
                    cur.col + 1
                } else {
                    cur.col - 1
                };
            }
            seg.push(cur);
        }
        pairs.push((sb, t));
        canonical.push(GridPath::new(seg));
    }
    Ok(LiftedSources {
        instance: GridInstance::new(inst.side, pairs, inst.seed).expect("validated"),
        canonical,
    })
}

/// Greedy independent set on the conflict digraph (edge P -> P' when an
/// endpoint segment of P clashes with P'), then prepend the canonical
/// segments. Returns a routing of the original instance.
pub fn lift_routing_back(
    orig: &GridInstance,
    lifted: &LiftedSources,
    routing: &Routing,
) -> Routing {
    let k = routing.entries.len();
    let seg_cells: Vec<BTreeSet<Coord>> = routing
        .entries
        .iter()
        .map(|(i, _)| lifted.canonical[*i].vertices.iter().copied().collect())
        .collect();
    let path_cells: Vec<BTreeSet<Coord>> = routing
        .entries
        .iter()
        .map(|(_, p)| p.vertices.iter().copied().collect())
        .collect();
    // undirected conflict graph; degree-greedy independent set
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); k];
    for a in 0..k {
        for b in 0..k {
            if a == b {
                continue;
            }
            // conflict if b's path or segment intersects a's segment
            let clash = seg_cells[a]
                .iter()
                .any(|v| path_cells[b].contains(v) || (b < a && seg_cells[b].contains(v)));
            if clash {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
    }
    let mut alive: BTreeSet<usize> = (0..k).collect();
    let mut kept = Vec::new();
    while let Some(&v) = alive
        .iter()
        .min_by_key(|&&v| (adj[v].iter().filter(|n| alive.contains(n)).count(), v))
    {
        kept.push(v);
        let neighbors: Vec<usize> = adj[v]
            .iter()
            .copied()
            .filter(|n| alive.contains(n))
            .collect();
        alive.remove(&v);
        for n in neighbors {
            alive.remove(&n);
        }
    }
    kept.sort_unstable();
    let mut entries = Vec::new();
    for &ei in &kept {
        let (pair, path) = &routing.entries[ei];
        let orig_source = orig.pairs[*pair].0;
        // if the routed path already passes through the original source, its
        // suffix from there is the lift; otherwise prepend the canonical
        // segment (oriented source -> boundary copy)
        let full: Vec<Coord> = match path.vertices.iter().position(|&v| v == orig_source) {
            Some(pos) => path.vertices[pos..].to_vec(),
            None => {
                let seg = &lifted.canonical[*pair];
                let mut v: Vec<Coord> = seg.vertices.iter().rev().copied().collect();
                v.pop();
                v.extend(path.vertices.iter().copied());
                v
            }
        };
        entries.push((*pair, GridPath::new(full)));
    }
    let candidate = Routing::new(entries);
    match verify_routing(orig, &candidate) {
        Verdict::Valid => candidate,
        Verdict::Violation(_) => {
            // defensive: drop entries until valid (deterministic order)
            let mut cur = candidate;
            while !cur.entries.is_empty() {
                cur.entries.pop();
                if verify_routing(orig, &cur).is_valid() {
                    break;
                }
            }
            cur
        }
    }
}

/// Configuration for the dispatcher.
#[derive(Clone, Debug)]
pub struct SolveConfig {
    pub far: FarConfig,
    pub overrides: ParamOverrides,
    pub candidate_cap: usize,
    pub goodness_floor: u64,
    pub eval_far: FarConfig,
    /// Pin the optimum guesses instead of sweeping powers of two.
    pub opt_guesses: Option<Vec<u64>>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            far: FarConfig {
                trials: Some(12),
                max_branches: Some(24),
                wall_mode: false,
            },
            overrides: ParamOverrides::default(),
            candidate_cap: 12,
            goodness_floor: 1,
            eval_far: FarConfig {
                trials: Some(2),
                max_branches: Some(6),
                wall_mode: false,
            },
            opt_guesses: None,
        }
    }
}

/// Which sub-solver produced the returned routing, plus the winning guess.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub winner: String,
    pub opt_guess: Option<u64>,
}

fn keep_better(best: &mut Routing, inst: &GridInstance, cand: Routing) {
    if cand.routed_count() > best.routed_count() && verify_routing(inst, &cand).is_valid() {
        *best = cand;
    }
}

fn keep_better_tagged(
    best: &mut (Routing, SolveStats),
    inst: &GridInstance,
    cand: Routing,
    winner: &str,
    opt_guess: Option<u64>,
) {
    if cand.routed_count() > best.0.routed_count() && verify_routing(inst, &cand).is_valid() {
        *best = (
            cand,
            SolveStats {
                winner: winner.to_string(),
                opt_guess,
            },
        );
    }
}

/// Route pairs whose terminals all lie on the boundary: maximum non-crossing
/// subset by circular interval DP, then innermost-first BFS routing.
pub fn route_boundary_pairs(inst: &GridInstance, members: &[usize]) -> Routing {
    let side = inst.side;
    let perimeter = |v: Coord| -> u32 {
        match edge_of(side, v) {
            Some(Edge::Top) => v.col - 1,
            Some(Edge::Right) => side - 1 + (v.row - 1),
            Some(Edge::Bottom) => 2 * (side - 1) + (side - v.col),
            Some(Edge::Left) => 3 * (side - 1) + (side - v.row),
            None => u32::MAX,
        }
    };
    let chords: Vec<(u32, u32, usize)> = members
        .iter()
        .filter_map(|&p| {
            let (s, t) = inst.pairs[p];
            let (a, b) = (perimeter(s), perimeter(t));
            if a == u32::MAX || b == u32::MAX || a == b {
                return None;
            }
            Some((a.min(b), a.max(b), p))
        })
        .collect();
    // interval DP over the linearized circle
    let n = chords.len();
    let mut memo: BTreeMap<(u32, u32), (usize, Vec<usize>)> = BTreeMap::new();
    fn solve(
        lo: u32,
        hi: u32,
        chords: &[(u32, u32, usize)],
        memo: &mut BTreeMap<(u32, u32), (usize, Vec<usize>)>,
    ) -> (usize, Vec<usize>) {
        if lo >= hi {
            return (0, Vec::new());
        }
        if let Some(v) = memo.get(&(lo, hi)) {
            return v.clone();
        }
        let mut best = (0usize, Vec::new());
        // either no chord starts in [lo..], or pick one fully inside
        for (i, &(a, b, _)) in chords.iter().enumerate() {
            if a < lo || b > hi {
                continue;
            }
            let inner = solve(a + 1, b.saturating_sub(1), chords, memo);
            let outer = solve(b + 1, hi, chords, memo);
            let left = solve(lo, a.saturating_sub(1), chords, memo);
            let total = 1 + inner.0 + outer.0 + left.0;
            if total > best.0 {
                let mut sel = vec![i];
                sel.extend(inner.1);
                sel.extend(outer.1);
                sel.extend(left.1);
                best = (total, sel);
            }
        }
        memo.insert((lo, hi), best.clone());
        best
    }
    if n == 0 {
        return Routing::empty();
    }
    let max_pos = 4 * (side - 1);
    let (_, mut sel) = solve(0, max_pos, &chords, &mut memo);
    sel.sort_unstable();
    sel.dedup();
    // route innermost chords first with BFS in the free region
    let mut depth: Vec<usize> = sel
        .iter()
        .map(|&i| {
            sel.iter()
                .filter(|&&j| chords[j].0 < chords[i].0 && chords[i].1 < chords[j].1)
                .count()
        })
        .collect();
    let mut order: Vec<usize> = (0..sel.len()).collect();
    order.sort_by_key(|&x| std::cmp::Reverse(depth[x]));
    depth.sort_unstable();
    let mut region: BTreeSet<Coord> = SubGrid::from_bounds(1, side, 1, side)
        .iter_vertices()
        .collect();
    let mut entries = Vec::new();
    for &x in &order {
        let (_, _, p) = chords[sel[x]];
        let (s, t) = inst.pairs[p];
        if !region.contains(&s) || !region.contains(&t) {
            continue;
        }
        if let Some(path) = bfs_path(&region, s, t, side) {
            for v in &path.vertices {
                region.remove(v);
            }
            entries.push((p, path));
        }
    }
    Routing::new(entries)
}

/// Sequential greedy routing: BFS each pair in order through the free cells.
pub fn greedy_route(inst: &GridInstance, order: &[usize]) -> Routing {
    let mut region: BTreeSet<Coord> = SubGrid::from_bounds(1, inst.side, 1, inst.side)
        .iter_vertices()
        .collect();
    let mut entries = Vec::new();
    for &p in order {
        let (s, t) = inst.pairs[p];
        if !region.contains(&s) || !region.contains(&t) {
            continue;
        }
        if let Some(path) = bfs_path(&region, s, t, inst.side) {
            for v in &path.vertices {
                region.remove(v);
            }
            entries.push((p, path));
        }
    }
    Routing::new(entries)
}

/// Case 1/2 machinery: enumerate candidate (sigma, sigma') pairs anchored at
/// destination clusters, evaluate each via a modified instance and the far
/// router, pick a DP-consistent chain, and lift everything back.
#[allow(clippy::too_many_arguments)]
fn run_interval_case(
    inst: &GridInstance,
    members: &[usize],
    d: u64,
    seed: u64,
    config: &SolveConfig,
    best: &mut Routing,
    i_src_edge: Edge,
    excluded_prefix: u32,
) {
    // canonical frame: destinations' nearest boundary on the bottom edge
    let side = inst.side;
    let d32 = d as u32;
    let sqrt_n_half = (side / 2).max(1);
    if 16 * d32 > side || members.is_empty() {
        return;
    }
    let mut anchors: Vec<u32> = members
        .iter()
        .map(|&p| nearest_boundary(side, inst.pairs[p].1).col)
        .collect();
    anchors.sort_unstable();
    anchors.dedup();
    let mut lengths = Vec::new();
    let mut len = 16 * d32;
    while len <= sqrt_n_half && lengths.len() < 4 {
        lengths.push(len);
        len *= 2;
    }
    let mut candidates: Vec<GoodCandidate> = Vec::new();
    let mut cand_data: Vec<(ModifiedInstance, Routing, Vec<usize>)> = Vec::new();
    let mut seen: BTreeSet<(u32, u32)> = BTreeSet::new();
    'outer: for &len in &lengths {
        for &a in &anchors {
            let start = a
                .saturating_sub(len / 2)
                .max(16 * d32 + 1)
                .max(excluded_prefix + 1);
            let end = start + len - 1;
            if end + 16 * d32 > side {
                continue;
            }
            if !seen.insert((start, len)) {
                continue;
            }
            let i_dst = Interval::new(start, end);
            // members of this candidate
            let sub: Vec<usize> = members
                .iter()
                .copied()
                .filter(|&p| {
                    let tb = nearest_boundary(side, inst.pairs[p].1);
                    tb.row == side && i_dst.contains(tb.col)
                })
                .collect();
            if sub.is_empty() {
                continue;
            }
            // sigma = minimal cover of the member sources along their edge
            let src_pos = |p: usize| -> u32 {
                let s = inst.pairs[p].0;
                match i_src_edge {
                    Edge::Top | Edge::Bottom => s.col,
                    Edge::Left | Edge::Right => s.row,
                }
            };
            let lo = sub.iter().map(|&p| src_pos(p)).min().unwrap();
            let hi = sub.iter().map(|&p| src_pos(p)).max().unwrap();
            let i_sigma = Interval::new(lo, hi);
            // interesting-pair distance check between sigma and sigma'
            let sigma_coords: Vec<Coord> = sub.iter().map(|&p| inst.pairs[p].0).collect();
            let dst_coords: Vec<Coord> = (i_dst.start..=i_dst.end)
                .map(|c| Coord::new(side, c))
                .collect();
            if let Some(dist) = crate::grid::manhattan_dist_sets(&sigma_coords, &dst_coords) {
                if dist < 16 * d {
                    continue;
                }
            }
            let Ok(mi) = build_modified_instance(inst, &sub, i_sigma, i_dst, d) else {
                continue;
            };
            let far = route_far_from_boundary(
                &mi.instance,
                d.max(1),
                config.overrides,
                seed ^ (candidates.len() as u64).wrapping_mul(0x9e37),
                &config.eval_far,
            );
            let Ok(out) = far else { continue };
            let value = out.routing.routed_count() as u64;
            candidates.push(GoodCandidate {
                sigma: i_sigma,
                sigma_prime: i_dst,
                value,
                payload: cand_data.len(),
            });
            cand_data.push((mi, out.routing, sub));
            if candidates.len() >= config.candidate_cap {
                break 'outer;
            }
        }
    }
    if candidates.is_empty() {
        return;
    }
    let chain = select_good_pairs_dp(&candidates, d, config.goodness_floor);
    if chain.is_empty() {
        return;
    }
    let mut mis = Vec::new();
    let mut inners = Vec::new();
    for &ci in &chain {
        let (mi, inner, _) = &cand_data[candidates[ci].payload];
        mis.push(mi.clone());
        inners.push(inner.clone());
    }
    if let Ok(lifted) = route_modified_back_batch(inst, &mis, &inners) {
        keep_better(best, inst, lifted);
    }
    // also consider the single best candidate alone
    if let Some(bi) = (0..candidates.len()).max_by_key(|&i| candidates[i].value) {
        let (mi, inner, _) = &cand_data[candidates[bi].payload];
        if let Ok(lifted) = route_modified_back(inst, mi, inner) {
            keep_better(best, inst, lifted);
        }
    }
}

/// The random-offset square cover used for short pairs: first square of side
/// 4d+offset, 4d squares after it, the last absorbing up to 8d columns.
pub fn short_pair_cover(side: u32, d: u64, offset: u32) -> Vec<Interval> {
    let d32 = (d as u32).max(1);
    let mut squares: Vec<Interval> = Vec::new();
    let first_end = (4 * d32 + offset).min(side);
    squares.push(Interval::new(1, first_end));
    loop {
        let last_end = squares.last().unwrap().end;
        if last_end >= side {
            break;
        }
        let remaining = side - last_end;
        if remaining > 8 * d32 {
            squares.push(Interval::new(last_end + 1, last_end + 4 * d32));
        } else {
            squares.push(Interval::new(last_end + 1, side));
            break;
        }
    }
    squares
}

/// Claim "short pairs": random-offset square cover, mod-4 classes, extended
/// squares solved by the far router, best class kept.
pub fn solve_short_pairs(
    inst: &GridInstance,
    members: &[usize],
    d: u64,
    seed: u64,
    config: &SolveConfig,
) -> Routing {
    let side = inst.side;
    let d32 = (d as u32).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5407);
    let offset: u32 = rng.random_range(0..=(4 * d32));
    let squares = short_pair_cover(side, d, offset);
    let mut best = Routing::empty();
    for class in 0..4usize {
        let mut entries = Vec::new();
        for (qi, cols) in squares.iter().enumerate() {
            if qi % 4 != class {
                continue;
            }
            let sub: Vec<usize> = members
                .iter()
                .copied()
                .filter(|&p| {
                    let (s, t) = inst.pairs[p];
                    cols.contains(s.col) && cols.contains(t.col)
                })
                .collect();
            if sub.is_empty() {
                continue;
            }
            // extended square: margins 4d left/right, 8d above, sitting on the
            // bottom boundary; clamp to the grid and keep it square
            let ext_cols = Interval::new(
                cols.start.saturating_sub(4 * d32).max(1),
                (cols.end + 4 * d32).min(side),
            );
            let height = ext_cols.len().min(side);
            let rows = Interval::new(side - height + 1, side);
            let region = SubGrid::new(
                rows,
                Interval::new(ext_cols.start, ext_cols.start + height - 1),
            );
            if !sub
                .iter()
                .all(|&p| region.contains(inst.pairs[p].0) && region.contains(inst.pairs[p].1))
            {
                continue;
            }
            // local instance, flipped so sources sit on the top row
            let flip = |v: Coord| -> Coord {
                Coord::new(region.rows.end - v.row + 1, v.col - region.cols.start + 1)
            };
            let pairs: Vec<(Coord, Coord)> = sub
                .iter()
                .map(|&p| {
                    let (s, t) = inst.pairs[p];
                    (flip(s), flip(t))
                })
                .collect();
            let Ok(local) = GridInstance::new(height, pairs, inst.seed) else {
                continue;
            };
            let Ok(out) = route_far_from_boundary(
                &local,
                (d * 2).max(1),
                config.overrides,
                seed ^ (qi as u64) << 8,
                &config.eval_far,
            ) else {
                continue;
            };
            for (lp, path) in out.routing.entries {
                let global: Vec<Coord> = path
                    .vertices
                    .iter()
                    .map(|&v| {
                        Coord::new(region.rows.end + 1 - v.row, v.col + region.cols.start - 1)
                    })
                    .collect();
                entries.push((sub[lp], GridPath::new(global)));
            }
        }
        let cand = Routing::new(entries);
        if cand.routed_count() > best.routed_count() && verify_routing(inst, &cand).is_valid() {
            best = cand;
        }
    }
    best
}

/// The dispatcher: guess OPT in powers of two, split classes, and try every
/// applicable sub-solver, returning the largest verified routing.
pub fn solve_restricted(
    inst: &GridInstance,
    seed: u64,
    config: &SolveConfig,
) -> Result<Routing, ReductionError> {
    solve_restricted_with_stats(inst, seed, config).map(|(r, _)| r)
}

/// Like `solve_restricted`, reporting which sub-solver won.
pub fn solve_restricted_with_stats(
    inst: &GridInstance,
    seed: u64,
    config: &SolveConfig,
) -> Result<(Routing, SolveStats), ReductionError> {
    for (i, &(s, _)) in inst.pairs.iter().enumerate() {
        if edge_of(inst.side, s).is_none() {
            return Err(ReductionError::SourceNotOnBoundary(i));
        }
    }
    let mut best = (
        greedy_one_pair(inst),
        SolveStats {
            winner: "greedy-single".into(),
            opt_guess: None,
        },
    );
    if inst.pairs.is_empty() {
        return Ok(best);
    }
    keep_better_tagged(
        &mut best,
        inst,
        greedy_route(inst, &(0..inst.k()).collect::<Vec<_>>()),
        "greedy-sequential",
        None,
    );
    if check_spacing(inst).is_ok() && inst.pairs.iter().all(|p| p.0.row == 1) {
        if let Ok(r) = route_spaced_out(inst) {
            keep_better_tagged(&mut best, inst, r, "spaced", None);
        }
    }
    // boundary-destination pairs go to the planar DP
    let boundary_members: Vec<usize> = (0..inst.k())
        .filter(|&p| inst.is_on_boundary(inst.pairs[p].1))
        .collect();
    if !boundary_members.is_empty() {
        keep_better_tagged(
            &mut best,
            inst,
            route_boundary_pairs(inst, &boundary_members),
            "boundary-dp",
            None,
        );
    }

    let guesses: Vec<u64> = match &config.opt_guesses {
        Some(g) => g.clone(),
        None => {
            let mut guesses = Vec::new();
            let mut g = 1u64;
            let cap = (4 * inst.side as u64).min(2 * inst.k() as u64).max(1);
            while g <= cap {
                guesses.push(g);
                g *= 2;
            }
            guesses
        }
    };
    for (gi, &opt_guess) in guesses.iter().enumerate() {
        let eta = crate::grid::derive_params(inst.n().max(4), opt_guess, config.overrides)
            .map(|p| p.eta)
            .unwrap_or(2);
        let classes = split_classes(inst, opt_guess, eta)?;
        // group non-boundary pairs by (source edge, dest edge, class)
        let mut groups: BTreeMap<(Edge, Edge, u32), Vec<usize>> = BTreeMap::new();
        for (p, c) in classes.iter().enumerate() {
            if let Some(r) = c.distance_class {
                groups
                    .entry((c.source_edge, c.dest_edge, r))
                    .or_default()
                    .push(p);
            }
        }
        for ((qe, te, r), members) in &groups {
            let branch_seed = seed ^ ((gi as u64) << 32) ^ ((*r as u64) << 16);
            if *r == 0 {
                // far class: rotate sources to the top row and run the router
                let sym = Sym::sending_one(inst.side, *qe, Edge::Top);
                let timg = sym.apply_instance(inst);
                let sub = GridInstance::new(
                    timg.side,
                    members.iter().map(|&p| timg.pairs[p]).collect(),
                    timg.seed,
                )
                .expect("transformed in range");
                if let Ok(out) = route_far_from_boundary(
                    &sub,
                    opt_guess,
                    config.overrides,
                    branch_seed,
                    &config.far,
                ) {
                    let remapped = Routing::new(
                        out.routing
                            .entries
                            .into_iter()
                            .map(|(li, p)| (members[li], p))
                            .collect(),
                    );
                    keep_better_tagged(
                        &mut best,
                        inst,
                        sym.invert_routing(&remapped),
                        "far-snakes",
                        Some(opt_guess),
                    );
                }
                continue;
            }
            // dyadic class: d = ceil(OPT / (eta 2^r))
            let denom = eta * (1u64 << r);
            let d = opt_guess.div_ceil(denom).max(1);
            if *qe == *te {
                // same edge: canonicalize to the bottom
                let sym = Sym::sending_one(inst.side, *qe, Edge::Bottom);
                let timg = sym.apply_instance(inst);
                let mut short = Vec::new();
                let mut west = Vec::new();
                let mut east = Vec::new();
                for &p in members {
                    let (s, t) = timg.pairs[p];
                    if s.col.abs_diff(t.col) as u64 <= 2 * d {
                        short.push(p);
                    } else if s.col < t.col {
                        west.push(p);
                    } else {
                        east.push(p);
                    }
                }
                if !short.is_empty() {
                    let r = solve_short_pairs(&timg, &short, d, branch_seed, config);
                    keep_better_tagged(
                        &mut best,
                        inst,
                        sym.invert_routing(&r),
                        "short-pairs",
                        Some(opt_guess),
                    );
                }
                for (mirror, set) in [(false, &west), (true, &east)] {
                    if set.is_empty() {
                        continue;
                    }
                    let r = case3_strips(&timg, set, d, mirror, branch_seed, config);
                    keep_better_tagged(
                        &mut best,
                        inst,
                        sym.invert_routing(&r),
                        "same-edge-strips",
                        Some(opt_guess),
                    );
                }
            } else {
                // opposite or adjacent edges: put destinations on the bottom
                let want_src = if opposite(*qe) == *te {
                    Edge::Top
                } else {
                    Edge::Left
                };
                let Some(sym) = Sym::sending(inst.side, *qe, want_src, *te, Edge::Bottom) else {
                    continue;
                };
                let timg = sym.apply_instance(inst);
                let excluded = if want_src == Edge::Left {
                    opt_guess.div_ceil(16) as u32
                } else {
                    0
                };
                let mut b2 = Routing::empty();
                run_interval_case(
                    &timg,
                    members,
                    d,
                    branch_seed,
                    config,
                    &mut b2,
                    want_src,
                    excluded,
                );
                keep_better_tagged(
                    &mut best,
                    inst,
                    sym.invert_routing(&b2),
                    "interval-dp",
                    Some(opt_guess),
                );
            }
        }
    }
    Ok(best)
}

fn opposite(e: Edge) -> Edge {
    match e {
        Edge::Top => Edge::Bottom,
        Edge::Bottom => Edge::Top,
        Edge::Left => Edge::Right,
        Edge::Right => Edge::Left,
    }
}

/// Case 3 for pairs running west-to-east (or mirrored) along the bottom edge:
/// dyadic length classes, random column offsets, strip split, per-strip
/// modified instances.
fn case3_strips(
    inst: &GridInstance,
    members: &[usize],
    d: u64,
    mirror: bool,
    seed: u64,
    config: &SolveConfig,
) -> Routing {
    let side = inst.side;
    let frame = if mirror {
        Sym {
            rot: 0,
            flip: true,
            side,
        }
    } else {
        Sym::identity(side)
    };
    let inst2 = frame.apply_instance(inst);
    let mut best = Routing::empty();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xca5e3);
    // length classes
    let mut classes: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for &p in members {
        let (s, t) = inst2.pairs[p];
        let len = s.col.abs_diff(t.col).max(1);
        // class i holds 2^(i-1) <= len < 2^i
        let i = 32 - len.leading_zeros();
        classes.entry(i).or_default().push(p);
    }
    for (i, set) in &classes {
        let block = 1u64 << (i + 3);
        if block >= side as u64 * 2 {
            continue;
        }
        let offset: u64 = rng.random_range(0..block);
        let quarter = (1u64 << i) / 8;
        // survivors: some cut column strictly between the terminals, all cut
        // columns at distance >= 2^(i-1)/4 from both
        let zs: Vec<u64> = (0..)
            .map(|j| offset + j * block)
            .take_while(|z| *z <= side as u64)
            .collect();
        let survives = |p: usize| -> bool {
            let (s, t) = inst2.pairs[p];
            let (a, b) = (s.col.min(t.col) as u64, s.col.max(t.col) as u64);
            zs.iter().any(|&z| a < z && z < b)
                && zs
                    .iter()
                    .all(|&z| z.abs_diff(a) >= quarter.max(1) && z.abs_diff(b) >= quarter.max(1))
        };
        // half-way cuts delimit the strips
        let cuts: Vec<u64> = zs
            .iter()
            .map(|z| z + block / 2)
            .filter(|&z| z < side as u64)
            .collect();
        let mut strips: Vec<Interval> = Vec::new();
        let mut start = 1u32;
        for &c in &cuts {
            if c as u32 > start {
                strips.push(Interval::new(start, c as u32 - 1));
                start = c as u32 + 1;
            }
        }
        if start <= side {
            strips.push(Interval::new(start, side));
        }
        let mut mis = Vec::new();
        let mut inners = Vec::new();
        for strip in &strips {
            let sub: Vec<usize> = set
                .iter()
                .copied()
                .filter(|&p| {
                    survives(p)
                        && strip.contains(inst2.pairs[p].0.col)
                        && strip.contains(inst2.pairs[p].1.col)
                })
                .collect();
            if sub.is_empty() {
                continue;
            }
            // destination zone: the east part of the strip past the z column
            let tb_cols: Vec<u32> = sub
                .iter()
                .map(|&p| nearest_boundary(side, inst2.pairs[p].1).col)
                .collect();
            let lo = *tb_cols.iter().min().unwrap();
            let hi = *tb_cols.iter().max().unwrap();
            let want = Interval::new(lo.saturating_sub(1).max(strip.start), hi.min(strip.end));
            // widen to at least 16d while staying inside margins
            let len_needed = (16 * d as u32).max(want.len());
            let start = want
                .start
                .saturating_sub((len_needed - want.len()) / 2)
                .max(16 * d as u32 + 1);
            let end = start + len_needed - 1;
            if end + 16 * d as u32 > side {
                continue;
            }
            let i_dst = Interval::new(start, end);
            let src_lo = sub.iter().map(|&p| inst2.pairs[p].0.col).min().unwrap();
            let src_hi = sub.iter().map(|&p| inst2.pairs[p].0.col).max().unwrap();
            let Ok(mi) =
                build_modified_instance(&inst2, &sub, Interval::new(src_lo, src_hi), i_dst, d)
            else {
                continue;
            };
            let Ok(out) = route_far_from_boundary(
                &mi.instance,
                d.max(1),
                config.overrides,
                seed ^ (strip.start as u64) << 20,
                &config.eval_far,
            ) else {
                continue;
            };
            if out.routing.routed_count() == 0 {
                continue;
            }
            mis.push(mi);
            inners.push(out.routing);
        }
        if mis.is_empty() {
            continue;
        }
        if let Ok(lifted) = route_modified_back_batch(&inst2, &mis, &inners) {
            if lifted.routed_count() > best.routed_count()
                && verify_routing(&inst2, &lifted).is_valid()
            {
                best = lifted;
            }
        }
    }
    frame.invert_routing(&best)
}
