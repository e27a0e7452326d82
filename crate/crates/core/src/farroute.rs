//! The far-from-boundary routing pipeline: for every window, square system
//! and L-sequence, run the HSC rounding, pick a perfect subset, subsample,
//! build the snake plan, and route one pair per level-rho color; the largest
//! valid routing across branches wins, with a greedy single-pair fallback.

use crate::farplan::{build_level, LaneSpec, LevelPlan, SiteSpec};
use crate::flow::{bfs_path, disjoint_paths};
use crate::grid::verify_routing;
use crate::grid::{
    derive_params, Coord, GridInstance, GridPath, Interval, ParamOverrides, Params, Routing,
    SubGrid, Verdict,
};
use crate::hierarchy::{
    build_l_decomposition, build_square_systems, enumerate_l_sequences, ColorSystem, SquareSystem,
};
use crate::hsc::{run_hsc, HscInstance, HscVertex};
use crate::snake::{compose, Corridor, Snake};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

#[derive(thiserror::Error, Debug, PartialEq, Eq)]
pub enum FarError {
    #[error("source of pair {0} is not on the top row")]
    SourceNotOnTop(usize),
    #[error("destination of pair {0} violates the boundary-distance precondition")]
    DestTooClose(usize),
    #[error("instance has no demand pairs")]
    NoPairs,
    #[error(transparent)]
    Params(#[from] crate::grid::ParamsError),
}

/// Router knobs. `trials` caps the rounding repetitions per branch
/// (None = the literal log-power formula from the derived parameters).
#[derive(Clone, Copy, Debug, Default)]
pub struct FarConfig {
    pub trials: Option<u64>,
    pub max_branches: Option<usize>,
    pub wall_mode: bool,
}

/// A full snake plan: one LevelPlan per level.
#[derive(Clone, Debug, Default)]
pub struct SnakePlanOut {
    pub levels: Vec<LevelPlan>,
}

#[derive(Clone, Debug)]
pub struct FarOutcome {
    pub routing: Routing,
    /// (window column offset, system index, L sequence) of the winning branch.
    pub branch: Option<(u32, usize, Vec<u64>)>,
    pub plan: Option<SnakePlanOut>,
    /// Per routed pair, a width->=3 snake containing its whole path
    /// (populated in wall mode only).
    pub pair_snakes: Vec<(usize, Snake)>,
}

/// Greedy fallback: route the single lexicographically first routable pair.
pub fn greedy_one_pair(inst: &GridInstance) -> Routing {
    let region: BTreeSet<Coord> = inst.boundary().iter_vertices().collect();
    for (i, &(s, t)) in inst.pairs.iter().enumerate() {
        if let Some(p) = bfs_path(&region, s, t, inst.side) {
            return Routing::new(vec![(i, p)]);
        }
    }
    Routing::empty()
}

fn better(a: &Routing, b: &Routing) -> bool {
    a.routed_count() > b.routed_count()
}

/// Route with destinations far from the boundary and sources on the top row.
pub fn route_far_from_boundary(
    inst: &GridInstance,
    opt_guess: u64,
    overrides: ParamOverrides,
    seed: u64,
    config: &FarConfig,
) -> Result<FarOutcome, FarError> {
    if inst.pairs.is_empty() {
        return Err(FarError::NoPairs);
    }
    for (i, &(s, _)) in inst.pairs.iter().enumerate() {
        if s.row != 1 {
            return Err(FarError::SourceNotOnTop(i));
        }
    }
    let params = derive_params(inst.n().max(4), opt_guess.max(1), overrides)?;
    // every destination must sit at distance >= opt_guess / eta from the boundary
    for (i, &(_, t)) in inst.pairs.iter().enumerate() {
        let b = (t.row - 1)
            .min(t.col - 1)
            .min(inst.side - t.row)
            .min(inst.side - t.col) as u64;
        if b * params.eta < opt_guess {
            return Err(FarError::DestTooClose(i));
        }
    }

    let mut best = FarOutcome {
        routing: greedy_one_pair(inst),
        branch: None,
        plan: None,
        pair_snakes: Vec::new(),
    };
    let ell = inst.side as u64;
    let lp = params.ell_prime;
    if lp == 0 || lp < 4 * params.d1() {
        return Ok(best);
    }
    let systems = match build_square_systems(lp, &params) {
        Ok(s) => s,
        Err(_) => return Ok(best),
    };
    let lseqs = enumerate_l_sequences(&params);
    let windows: Vec<u32> = if ell == lp {
        vec![0]
    } else {
        vec![0, (ell - lp) as u32]
    };
    let row_off = (ell - lp) as u32;

    let mut branch_id = 0u64;
    'branches: for &col_off in &windows {
        for (sys_idx, system) in systems.iter().enumerate() {
            for lseq in &lseqs {
                if let Some(cap) = config.max_branches {
                    if branch_id as usize >= cap {
                        break 'branches;
                    }
                }
                branch_id += 1;
                let outcome = run_branch(
                    inst, &params, system, sys_idx, lseq, col_off, row_off, seed, branch_id, config,
                );
                if let Ok(out) = outcome {
                    if better(&out.routing, &best.routing) {
                        best = out;
                    }
                }
            }
        }
    }
    Ok(best)
}

/// Run every branch and collect the skip/success reason per branch.
pub fn branch_diagnostics(
    inst: &GridInstance,
    opt_guess: u64,
    overrides: ParamOverrides,
    seed: u64,
    config: &FarConfig,
) -> Vec<String> {
    let mut out = Vec::new();
    let Ok(params) = derive_params(inst.n().max(4), opt_guess.max(1), overrides) else {
        return vec!["params failed".into()];
    };
    let ell = inst.side as u64;
    let lp = params.ell_prime;
    if lp == 0 || lp < 4 * params.d1() {
        return vec![format!("ell_prime {lp} too small for d1 {}", params.d1())];
    }
    let Ok(systems) = build_square_systems(lp, &params) else {
        return vec!["square systems failed".into()];
    };
    let lseqs = enumerate_l_sequences(&params);
    let windows: Vec<u32> = if ell == lp {
        vec![0]
    } else {
        vec![0, (ell - lp) as u32]
    };
    let row_off = (ell - lp) as u32;
    let mut branch_id = 0u64;
    for &col_off in &windows {
        for (sys_idx, system) in systems.iter().enumerate() {
            for lseq in &lseqs {
                branch_id += 1;
                let r = run_branch(
                    inst, &params, system, sys_idx, lseq, col_off, row_off, seed, branch_id, config,
                );
                out.push(match r {
                    Ok(o) => format!(
                        "window {col_off} system {sys_idx} L {lseq:?}: routed {}",
                        o.routing.routed_count()
                    ),
                    Err(e) => format!("window {col_off} system {sys_idx} L {lseq:?}: {e}"),
                });
            }
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn run_branch(
    inst: &GridInstance,
    params: &Params,
    system: &SquareSystem,
    sys_idx: usize,
    lseq: &[u64],
    col_off: u32,
    row_off: u32,
    seed: u64,
    branch_id: u64,
    config: &FarConfig,
) -> Result<FarOutcome, String> {
    let lp = params.ell_prime as u32;
    let rho = params.rho;
    let decomp = build_l_decomposition(lseq, params.ell_prime, params.eta)
        .map_err(|e| format!("decomp: {e}"))?;
    let colors = ColorSystem::new(decomp);

    // local coordinates of the window's trimmed grid
    let to_local = |c: Coord| -> Option<Coord> {
        if c.col <= col_off || c.col > col_off + lp || c.row <= row_off {
            return None;
        }
        Some(Coord::new(c.row - row_off, c.col - col_off))
    };
    let mut u = Vec::new();
    for (pair_id, &(s, t)) in inst.pairs.iter().enumerate() {
        let (Some(_), Some(t_loc)) = (
            (s.col > col_off && s.col <= col_off + lp).then_some(()),
            to_local(t),
        ) else {
            continue;
        };
        if !system.member(t_loc) {
            continue;
        }
        let s_col_loc = s.col - col_off;
        u.push(HscVertex {
            coord: t_loc,
            color: colors.color_of_column(rho, s_col_loc),
            pair_id,
        });
    }
    if u.is_empty() {
        return Err("no destinations in this system".into());
    }
    let n_local = u.len() as u64;
    let hsc = HscInstance::new(system.clone(), colors.clone(), u, params.d.clone())
        .map_err(|e| format!("hsc: {e}"))?;
    let trials = config.trials.unwrap_or_else(|| params.trial_count(n_local));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(branch_id);
    let sol = run_hsc(&hsc, trials, params, &mut rng).map_err(|e| format!("hsc solve: {e}"))?;
    if sol.u_selected.is_empty() {
        return Err("hsc selected nothing".into());
    }

    // selected pairs; dedupe per level-rho color keeping the smallest source
    let mut selected: Vec<usize> = sol.u_selected.iter().map(|&ui| hsc.u[ui].pair_id).collect();
    selected.sort_by_key(|&p| inst.pairs[p].0.col);
    let mut seen_colors = BTreeSet::new();
    selected.retain(|&p| {
        let c = colors.color_of_column(rho, inst.pairs[p].0.col - col_off);
        seen_colors.insert(c)
    });
    // truncate to d_1 pairs, dropping the highest source columns first
    let d1 = params.d1() as usize;
    if selected.len() > d1 {
        selected.truncate(d1);
    }
    // subsample every (2 eta^3)-th pair in source order
    let modulus = params.subsample_modulus() as usize;
    let hatm: Vec<usize> = selected.iter().copied().step_by(modulus.max(1)).collect();
    if hatm.is_empty() {
        return Err("subsample emptied the selection".into());
    }

    // q0 geometry in global coordinates
    let d1g = params.d1() as u32;
    let margin = (params.d1() / params.eta) as u32;
    let side = inst.side;
    if side <= 2 * d1g + 2 {
        return Err(format!("side {side} too small for q0 with d1 {d1g}"));
    }
    let q0 = SubGrid::from_bounds(d1g + 1, side - d1g, d1g + 1, side - d1g);
    let q0_plus = SubGrid::from_bounds(
        d1g + 1 - margin,
        side - d1g + margin,
        d1g + 1 - margin,
        side - d1g + margin,
    );

    // drop pairs whose level-1 square (extended) leaves q0
    let square_global = |level: u32, idx: usize| -> SubGrid {
        let sq = system.square(level, idx);
        SubGrid::from_bounds(
            sq.rows.start + row_off,
            sq.rows.end + row_off,
            sq.cols.start + col_off,
            sq.cols.end + col_off,
        )
    };
    let hatm: Vec<usize> = hatm
        .into_iter()
        .filter(|&p| {
            let t_loc = to_local(inst.pairs[p].1).expect("selected pair in window");
            let sq1 = system.locate(1, t_loc).expect("in system");
            q0.contains_subgrid(&square_global(1, sq1))
        })
        .collect();
    if hatm.is_empty() {
        return Err("all selected squares were trimmed away".into());
    }
    // wall mode needs 3-wide connector ribbons; keep sources 4 columns apart
    // and off the grid corners
    let hatm: Vec<usize> = if config.wall_mode {
        let mut kept = Vec::new();
        let mut last_col: Option<u32> = None;
        for &p in &hatm {
            let c = inst.pairs[p].0.col;
            if c < 2 || c > side - 1 {
                continue;
            }
            if last_col.is_none_or(|lc| c >= lc + 4) {
                kept.push(p);
                last_col = Some(c);
            }
        }
        kept
    } else {
        hatm
    };
    if hatm.is_empty() {
        return Err("wall thinning emptied the selection".into());
    }

    // lane layout: pairs in source order; per level, colors with counts
    let m = hatm.len();
    let entry_room = (q0_plus.rows.start - 1) as usize;
    if 3 * m + 2 > q0_plus.cols.len() as usize || entry_room < 2 {
        return Err("no room for entry lanes".into());
    }
    let pair_color = |p: usize, level: u32| {
        colors.ancestor_at(
            colors.color_of_column(rho, inst.pairs[p].0.col - col_off),
            level,
        )
    };
    let mut plans = Vec::new();
    let mut lane_of_pair_rho: Vec<usize> = vec![0; m];
    for level in 1..=rho {
        let mut lanes: Vec<LaneSpec> = Vec::new();
        let mut pair_lane: Vec<usize> = Vec::with_capacity(m);
        for (j, &p) in hatm.iter().enumerate() {
            let c = pair_color(p, level);
            let entry = Interval::new(
                q0_plus.cols.start + 3 * j as u32,
                q0_plus.cols.start + 3 * j as u32 + 2,
            );
            match lanes.last_mut() {
                Some(last) if last.color == c => {
                    last.width += 3;
                    last.entry_cols = Interval::new(last.entry_cols.start, entry.end);
                }
                _ => lanes.push(LaneSpec {
                    color: c,
                    width: 3,
                    entry_cols: entry,
                }),
            }
            pair_lane.push(lanes.len() - 1);
        }
        if level == rho {
            lane_of_pair_rho = pair_lane.clone();
            // one pair per level-rho color after dedup
            debug_assert_eq!(lanes.len(), m);
        }
        // nonempty squares of this level
        let mut sites: Vec<SiteSpec> = Vec::new();
        let mut seen = BTreeSet::new();
        for (j, &p) in hatm.iter().enumerate() {
            let t_loc = to_local(inst.pairs[p].1).expect("in window");
            let sq = system.locate(level, t_loc).expect("in system");
            if seen.insert(sq) {
                let mh = (params.d_at(level) / params.eta) as u32;
                sites.push(SiteSpec {
                    square_plus: square_global(level, sq).expand(mh),
                    owner: pair_lane[j],
                    square_index: sq,
                });
            }
        }
        let plan = build_level(level, q0_plus, &lanes, &sites)
            .map_err(|e| format!("plan level {level}: {e}"))?;
        plans.push(plan);
    }

    // connectors: sources to the 3j-th leftmost vertices of the top row of q0+
    let s_primes: Vec<Coord> = (1..=m as u32)
        .map(|j| Coord::new(q0_plus.rows.start, q0_plus.cols.start + 3 * j - 1))
        .collect();
    let sources: Vec<Coord> = hatm.iter().map(|&p| inst.pairs[p].0).collect();
    let mut region: BTreeSet<Coord> = SubGrid::from_bounds(1, q0_plus.rows.start - 1, 1, side)
        .iter_vertices()
        .collect();
    region.extend(s_primes.iter().copied());
    let connectors = disjoint_paths(&region, &sources, &s_primes, side);
    if connectors.len() != m {
        return Err(format!("connector flow routed {} of {m}", connectors.len()));
    }
    // planarity forces the order-preserving matching; confirm it
    let mut conn_by_pair: Vec<Option<GridPath>> = vec![None; m];
    for path in connectors {
        let s = path.first().unwrap();
        let e = path.last().unwrap();
        let j = sources
            .iter()
            .position(|&x| x == s)
            .ok_or("connector start is not a source")?;
        if e != s_primes[j] {
            return Err("connector matching is not order-preserving".into());
        }
        conn_by_pair[j] = Some(path);
    }

    // ribbon band ranks: rightward connectors take bands from the top in
    // descending destination order, leftward ones follow in ascending order
    // (one wire's vertical leg must never cross another's horizontal band)
    let ribbon_rank: Vec<u32> = {
        let mut rights: Vec<usize> = Vec::new();
        let mut lefts: Vec<usize> = Vec::new();
        for (j, &p) in hatm.iter().enumerate() {
            if s_primes[j].col >= inst.pairs[p].0.col {
                rights.push(j);
            } else {
                lefts.push(j);
            }
        }
        let mut rank = vec![0u32; m];
        let mut next = 0u32;
        for &j in rights.iter().rev() {
            rank[j] = next;
            next += 1;
        }
        for &j in &lefts {
            rank[j] = next;
            next += 1;
        }
        rank
    };
    // route one pair per level-rho snake
    let rho_plan = plans.last().expect("at least one level");
    let mut entries = Vec::new();
    let mut pair_snakes = Vec::new();
    for (j, &p) in hatm.iter().enumerate() {
        let lane = lane_of_pair_rho[j];
        let (color, snake) = &rho_plan.snakes[lane];
        let _ = color;
        let verts = snake.vertices();
        let t = inst.pairs[p].1;
        let inner =
            bfs_path(&verts, s_primes[j], t, side).ok_or("no path inside the level-rho snake")?;
        let mut full = conn_by_pair[j].clone().expect("connector").vertices;
        full.pop(); // junction vertex s' is the head of the inner path
        full.extend(inner.vertices);
        entries.push((p, GridPath::new(full)));
        if config.wall_mode {
            let ribbon = connector_ribbon(
                inst.pairs[p].0,
                s_primes[j],
                ribbon_rank[j],
                q0_plus,
            )
            .ok_or("connector ribbon failed")?;
            let joined = compose(&ribbon, snake).map_err(|e| format!("ribbon compose: {e}"))?;
            pair_snakes.push((p, joined));
        }
    }
    let routing = Routing::new(entries);
    if let Verdict::Violation(v) = verify_routing(inst, &routing) {
        return Err(format!("verification: {v}"));
    }
    // wall-mode snakes must be pairwise disjoint
    if config.wall_mode {
        for i in 0..pair_snakes.len() {
            for k in (i + 1)..pair_snakes.len() {
                if pair_snakes[i].1.intersects(&pair_snakes[k].1) {
                    return Err("wall-mode pair snakes intersect".into());
                }
            }
        }
    }
    Ok(FarOutcome {
        routing,
        branch: Some((col_off, sys_idx, lseq.to_vec())),
        plan: Some(SnakePlanOut { levels: plans }),
        pair_snakes,
    })
}

/// The width-3 connector snake from a source on the top row down to its copy
/// on the top row of Q0+ (wall mode). `rank` selects the horizontal band.
fn connector_ribbon(source: Coord, s_prime: Coord, rank: u32, q0_plus: SubGrid) -> Option<Snake> {
    let band_top = 3 * rank + 4;
    if band_top + 2 >= q0_plus.rows.start {
        return None;
    }
    let src_cols = Interval::new(source.col - 1, source.col + 1);
    let dst_cols = Interval::new(s_prime.col - 2, s_prime.col);
    let band = Interval::new(band_top, band_top + 2);
    let mut corridors = Vec::new();
    if src_cols == dst_cols {
        corridors.push(Corridor(SubGrid::new(
            Interval::new(1, q0_plus.rows.start),
            src_cols,
        )));
    } else {
        corridors.push(Corridor(SubGrid::new(
            Interval::new(1, band.start),
            src_cols,
        )));
        let span = Interval::new(
            src_cols.start.min(dst_cols.start),
            src_cols.end.max(dst_cols.end),
        );
        corridors.push(Corridor(SubGrid::new(band, span)));
        corridors.push(Corridor(SubGrid::new(
            Interval::new(band.end, q0_plus.rows.start),
            dst_cols,
        )));
    }
    let snake = Snake::new(corridors);
    snake.validate().ok()?;
    Some(snake)
}

/// Convenience wrapper mirroring the library default parameters.
pub fn route_far_default(
    inst: &GridInstance,
    opt_guess: u64,
    seed: u64,
) -> Result<FarOutcome, FarError> {
    route_far_from_boundary(
        inst,
        opt_guess,
        ParamOverrides::default(),
        seed,
        &FarConfig::default(),
    )
}
