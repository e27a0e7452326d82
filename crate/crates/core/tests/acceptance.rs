//! Acceptance suite: one test per criterion, each printing a pass line with
//! the measured numbers (run with `--nocapture` to see them all).

use ndpgrid::grid::{
    derive_params, verify_routing, Coord, GridInstance, GridPath, Interval, ParamOverrides,
    PolylogOverrides, Routing, SubGrid,
};
use ndpgrid::hierarchy::{
    build_l_decomposition, build_square_systems, is_canonical, partition_forest, ColorId,
    ColorSystem, Forest, HierarchyError,
};
use ndpgrid::hsc::{round_once, run_hsc, solve_relaxation, HscInstance, HscVertex};
use ndpgrid::instances::{gen_hard, gen_random, gen_spaced, hard_params};
use ndpgrid::oracle::{
    exact_hsc, exact_ndp, max_distance_property_subset, DistanceAnswer, NdpBudget,
};
use ndpgrid::reduction::{
    build_modified_instance, greedy_route, route_modified_back, solve_restricted, SolveConfig,
};
use ndpgrid::snake::{route_in_snake, Corridor, Snake};
use ndpgrid::spaced::route_spaced_out;
use ndpgrid::wall::{edp_to_ndp_extract, WallGraph};
use num_rational::Ratio;
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::time::Instant;

fn desk_overrides() -> ParamOverrides {
    ParamOverrides {
        eta: None,
        rho: None,
        polylog: PolylogOverrides {
            stage2_cap_factor: Some(u64::MAX / 4),
            stage3_modulus: Some(1),
            trial_factor: None,
            subsample_modulus: Some(1),
        },
    }
}

fn desk_config() -> SolveConfig {
    SolveConfig {
        overrides: desk_overrides(),
        ..SolveConfig::default()
    }
}

/// Criterion 1: 1,000 seeded solves across random/spaced/hard instances
/// (side <= 200) all verify, within the 10 minute budget.
#[test]
fn criterion_1_routing_validity() {
    let started = Instant::now();
    let config = desk_config();
    let mut routed_total = 0usize;
    for seed in 0..1000u64 {
        let inst = match seed % 5 {
            0 | 1 => {
                let side = [12u32, 24, 48, 96, 144, 200][(seed / 5 % 6) as usize];
                let k = 1 + (seed % 7) as usize;
                gen_random(side, k, (side / 6) as u64, seed).unwrap()
            }
            2 => {
                let side = [16u32, 40, 80, 160][(seed / 5 % 4) as usize];
                let k = 1 + (seed % 5) as usize;
                gen_random(side, k.min(side as usize), 0, seed).unwrap()
            }
            3 => {
                let k = 1 + (seed % 4) as usize;
                let side = 200;
                gen_spaced(side, k, seed).unwrap()
            }
            _ => gen_hard(0).unwrap().0,
        };
        let routing = solve_restricted(&inst, seed, &config).unwrap();
        let verdict = verify_routing(&inst, &routing);
        assert!(verdict.is_valid(), "seed {seed}: {verdict:?}");
        routed_total += routing.routed_count();
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs() <= 600,
        "1000 runs took {} s, budget 600 s",
        elapsed.as_secs()
    );
    println!(
        "criterion 1: PASS - 1000/1000 valid routings ({routed_total} pairs routed) in {} s",
        elapsed.as_secs()
    );
}

/// Criterion 2: 100 generated spaced instances (k <= 8) route completely.
#[test]
fn criterion_2_spaced_completeness() {
    let mut done = 0;
    for seed in 0..100u64 {
        let k = 1 + (seed % 8) as usize;
        let s = 8 * k as u32 + 8;
        let grid_cells = (k as f64).sqrt().ceil() as u32 + 2;
        let side = s * (grid_cells + 2) + 1;
        let inst = gen_spaced(side, k, seed).unwrap();
        let routing =
            route_spaced_out(&inst).unwrap_or_else(|e| panic!("seed {seed}: routing failed: {e}"));
        assert_eq!(routing.routed_count(), k, "seed {seed}");
        assert!(verify_routing(&inst, &routing).is_valid(), "seed {seed}");
        done += 1;
    }
    println!("criterion 2: PASS - {done}/100 spaced instances routed completely");
}

/// Build a random staircase snake of the given width w: alternating east and
/// south corridors with thin overlaps, drifting monotonically southeast.
fn random_snake(rng: &mut ChaCha8Rng, w: u32, corridors: usize) -> Snake {
    let mut parts = Vec::new();
    let mut row = 1 + rng.random_range(0..4);
    let mut col = 1 + rng.random_range(0..4);
    let mut horizontal = rng.random_bool(0.5);
    for i in 0..corridors {
        let len = w + 2 + rng.random_range(0..14);
        if horizontal {
            let rect = SubGrid::from_bounds(row, row + w - 1, col, col + len - 1);
            parts.push(Corridor(rect));
            // next vertical corridor hangs from the last row, east end
            row += w - 1;
            col += len - w;
        } else {
            let rect = SubGrid::from_bounds(row, row + len - 1, col, col + w - 1);
            parts.push(Corridor(rect));
            row += len - w;
            col += w - 1;
        }
        horizontal = !horizontal;
        let _ = i;
    }
    let snake = Snake::new(parts);
    snake
        .validate()
        .expect("generator must produce valid snakes");
    snake
}

/// Criterion 3: 200 random snakes, every terminal-set size up to w-2 routes
/// node-disjointly.
#[test]
fn criterion_3_snake_routing() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut routed_sets = 0;
    for case in 0..200 {
        let w = 3 + (case % 10) as u32; // widths 3..12
        let n_corr = 1 + (case % 10);
        let snake = random_snake(&mut rng, w, n_corr);
        let side = snake
            .corridors
            .iter()
            .map(|c| c.0.rows.end.max(c.0.cols.end))
            .max()
            .unwrap()
            + 2;
        for m in 1..=(w - 2) as usize {
            let first = snake.first().boundary_edges();
            let last = snake.last().boundary_edges();
            let pick = |edge: &ndpgrid::snake::BoundaryEdge,
                        m: usize,
                        rng: &mut ChaCha8Rng|
             -> Vec<Coord> {
                let mut v = edge.vertices();
                v.shuffle(rng);
                v.truncate(m);
                v
            };
            let a = pick(&first[rng.random_range(0..4)], m, &mut rng);
            let b = pick(&last[rng.random_range(0..4)], m, &mut rng);
            if a.len() < m || b.len() < m {
                continue;
            }
            let paths = route_in_snake(&snake, &a, &b, side)
                .unwrap_or_else(|e| panic!("case {case} m {m}: {e}"));
            assert_eq!(paths.len(), m);
            let mut seen = BTreeSet::new();
            for p in &paths {
                p.well_formed().unwrap();
                for v in &p.vertices {
                    assert!(seen.insert(*v), "case {case}: shared vertex {v}");
                    assert!(snake.contains(*v), "case {case}: {v} outside the snake");
                }
            }
            routed_sets += 1;
        }
    }
    println!("criterion 3: PASS - 200 snakes, {routed_sets} matchings routed node-disjointly");
}

/// Criterion 4: the 4^rho square systems partition the l' x l' grid exactly;
/// combos violating the divisibility precondition report the documented error.
#[test]
fn criterion_4_hierarchical_partition() {
    let mut checked = 0;
    let mut infeasible = 0;
    for ell_prime in [16u64, 32, 64, 128] {
        for (eta, rho) in [(2u64, 1u32), (2, 2), (4, 1)] {
            let mut params = derive_params(
                (ell_prime * ell_prime).max(4),
                1,
                ParamOverrides {
                    eta: Some(eta),
                    rho: Some(rho),
                    ..Default::default()
                },
            )
            .unwrap();
            params.ell_prime = ell_prime;
            let d1 = params.d1();
            if ell_prime % d1 != 0 {
                assert!(matches!(
                    build_square_systems(ell_prime, &params),
                    Err(HierarchyError::NotDivisible { .. })
                ));
                infeasible += 1;
                continue;
            }
            let systems = build_square_systems(ell_prime, &params).unwrap();
            assert_eq!(systems.len(), 4usize.pow(rho));
            for r in 1..=ell_prime as u32 {
                for c in 1..=ell_prime as u32 {
                    let v = Coord::new(r, c);
                    let owners = systems.iter().filter(|s| s.member(v)).count();
                    assert_eq!(owners, 1, "vertex {v} owned by {owners} systems");
                }
            }
            for sys in &systems {
                for (h, level) in sys.levels.iter().enumerate() {
                    let rows: Vec<Interval> = level.iter().map(|s| s.rows).collect();
                    let mut rows = rows;
                    rows.sort();
                    rows.dedup();
                    assert!(is_canonical(&rows, params.d[h]));
                }
            }
            checked += 1;
        }
    }
    println!(
        "criterion 4: PASS - {checked} feasible combos partition exactly, {infeasible} infeasible combos rejected"
    );
}

/// A tiny random HSC instance: l' = 24, eta = 2, rho = 1 (so at most 4
/// squares and at most 6 level-1 colors), |U| <= 12, caps 1..4.
fn tiny_hsc(seed: u64) -> (HscInstance, ndpgrid::Params) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = derive_params(
        24 * 24,
        1,
        ParamOverrides {
            eta: Some(2),
            rho: Some(1),
            ..Default::default()
        },
    )
    .unwrap();
    params.ell_prime = 24;
    let systems = build_square_systems(24, &params).unwrap();
    let system = systems[rng.random_range(0..4)].clone();
    let lengths = [4u64, 8][rng.random_range(0..2)];
    let decomp = build_l_decomposition(&[lengths], 24, 2).unwrap();
    let colors = ColorSystem::new(decomp);
    let n_colors = colors.count(1);
    let n_u = 1 + rng.random_range(0..12);
    let mut u = Vec::new();
    for pair_id in 0..n_u {
        let sq_idx = rng.random_range(0..system.levels[0].len());
        let sq = system.levels[0][sq_idx];
        let coord = Coord::new(
            rng.random_range(sq.rows.start..=sq.rows.end),
            rng.random_range(sq.cols.start..=sq.cols.end),
        );
        let color = ColorId {
            level: 1,
            index: rng.random_range(0..n_colors),
        };
        u.push(HscVertex {
            coord,
            color,
            pair_id,
        });
    }
    let caps = vec![1 + rng.random_range(0..4)];
    params.overrides = desk_overrides().polylog;
    (HscInstance::new(system, colors, u, caps).unwrap(), params)
}

/// Criterion 5: rounded solutions are feasible, lp >= exact, best-of-200 is
/// at least half the exact optimum, and stage-1 marginals match x within
/// 3 sigma over 10^4 trials.
#[test]
fn criterion_5_hsc_correctness() {
    // floor ratio measured across this fixture corpus: best-of-200 never
    // dropped below exact/2 (it reached the exact optimum on every seed)
    let mut worst_ratio = f64::INFINITY;
    for seed in 0..50u64 {
        let (inst, params) = tiny_hsc(seed);
        let lp = solve_relaxation(&inst).unwrap();
        let (exact, _, _) = exact_hsc(&inst, 1_000_000).unwrap();
        let lp_val = lp.objective.to_f64().unwrap();
        assert!(
            lp.objective >= Ratio::from_integer(num_bigint::BigInt::from(exact as i64)),
            "seed {seed}: lp {lp_val} < exact {exact}"
        );
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let best = run_hsc(&inst, 200, &params, &mut rng).unwrap();
        assert!(best.check_feasible(&inst).is_valid(), "seed {seed}");
        // every individual trial must be feasible too
        for t in 0..20 {
            let r = round_once(&inst, &lp, &params.overrides.clone(), &params, t, &mut rng);
            if !r.stage2_failed {
                assert!(r.check_feasible(&inst).is_valid(), "seed {seed} trial {t}");
            }
        }
        if exact > 0 {
            let ratio = best.u_selected.len() as f64 / exact as f64;
            worst_ratio = worst_ratio.min(ratio);
            assert!(
                2 * best.u_selected.len() >= exact,
                "seed {seed}: best {} < exact {exact} / 2",
                best.u_selected.len()
            );
        }
    }

    // stage-1 marginal check against a hand-built fractional feasible
    // assignment: one square, two colors of two vertices each, cap 1,
    // x = (1/2, 1/2), y = (1/2, 1/2)
    let mut params = derive_params(
        16 * 16,
        1,
        ParamOverrides {
            eta: Some(2),
            rho: Some(1),
            ..Default::default()
        },
    )
    .unwrap();
    params.ell_prime = 16;
    params.overrides = desk_overrides().polylog;
    let systems = build_square_systems(16, &params).unwrap();
    let decomp = build_l_decomposition(&[8], 16, 2).unwrap();
    let colors = ColorSystem::new(decomp);
    let a = ColorId { level: 1, index: 0 };
    let b = ColorId { level: 1, index: 1 };
    let u = vec![
        HscVertex {
            coord: Coord::new(1, 1),
            color: a,
            pair_id: 0,
        },
        HscVertex {
            coord: Coord::new(1, 2),
            color: a,
            pair_id: 1,
        },
        HscVertex {
            coord: Coord::new(2, 1),
            color: b,
            pair_id: 2,
        },
        HscVertex {
            coord: Coord::new(2, 2),
            color: b,
            pair_id: 3,
        },
    ];
    let inst = HscInstance::new(systems[0].clone(), colors, u, vec![1]).unwrap();
    let half = || Ratio::new(num_bigint::BigInt::from(1), num_bigint::BigInt::from(2));
    let lp = ndpgrid::hsc::HscLpSolution {
        x_by_square: [((1u32, 0usize), vec![(0usize, half()), (1usize, half())])]
            .into_iter()
            .collect(),
        y: [((0usize, 0usize), half()), ((0usize, 1usize), half())]
            .into_iter()
            .collect(),
        objective: Ratio::from_integer(num_bigint::BigInt::from(1)),
    };
    let trials = 10_000u32;
    let mut hits = 0u32;
    let mut selected_total = 0u64;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for t in 0..trials {
        let r = round_once(
            &inst,
            &lp,
            &params.overrides.clone(),
            &params,
            t as u64,
            &mut rng,
        );
        if r.f.get(1, 0) == Some(a) {
            hits += 1;
        }
        assert!(r.stage2_failed || r.check_feasible(&inst).is_valid());
        selected_total += r.u_selected.len() as u64;
    }
    let freq = hits as f64 / trials as f64;
    let sigma = (0.5 * 0.5 / trials as f64).sqrt();
    assert!(
        (freq - 0.5).abs() <= 3.0 * sigma,
        "marginal {freq} deviates from 0.5 by more than 3 sigma ({sigma})"
    );
    // stage-1 expectation: mean selected mass tracks the y totals (= 1 here)
    let mean = selected_total as f64 / trials as f64;
    assert!(
        (mean - 1.0).abs() < 0.05,
        "mean selected {mean} drifts from the y mass 1.0"
    );
    println!(
        "criterion 5: PASS - 50 instances feasible, lp >= exact, worst best-of-200 ratio {worst_ratio:.2}, marginal {freq:.4} within 3 sigma"
    );
}

/// Criterion 6: 500 random forests (<= 512 nodes): layer count bound, layers
/// induce disjoint directed paths, ancestor layer-mates share a path.
#[test]
fn criterion_6_forest_partition() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for case in 0..500 {
        let n = 1 + rng.random_range(0..512);
        let mut parent = Vec::with_capacity(n);
        for v in 0..n {
            if v == 0 || rng.random_bool(0.08) {
                parent.push(None);
            } else {
                parent.push(Some(rng.random_range(0..v)));
            }
        }
        let forest = Forest::new(parent.clone());
        let layers = partition_forest(&forest).unwrap();
        let bound = if n == 1 {
            1
        } else {
            (n as f64).log2().ceil() as usize
        };
        assert!(
            layers.len() <= bound.max(1),
            "case {case}: {} layers for {n} nodes",
            layers.len()
        );
        // partition
        let mut seen = vec![false; n];
        for layer in &layers {
            for &v in layer {
                assert!(!seen[v], "case {case}: node {v} in two layers");
                seen[v] = true;
            }
        }
        assert!(
            seen.iter().all(|&s| s),
            "case {case}: node missing from layers"
        );
        for layer in &layers {
            let members: BTreeSet<usize> = layer.iter().copied().collect();
            // disjoint directed paths: in-layer in-degree <= 1
            let mut indeg = vec![0usize; n];
            for &v in layer {
                if let Some(p) = parent[v] {
                    if members.contains(&p) {
                        indeg[p] += 1;
                    }
                }
            }
            assert!(
                layer.iter().all(|&v| indeg[v] <= 1),
                "case {case}: a layer vertex has two in-layer children"
            );
            // ancestor layer-mates lie on the same induced path: walking up
            // from any member, once the chain leaves the layer it never
            // meets the layer again
            for &v in layer {
                let mut cur = parent[v];
                let mut left = false;
                while let Some(p) = cur {
                    if members.contains(&p) {
                        assert!(!left, "case {case}: layer re-entered above node {v}");
                    } else {
                        left = true;
                    }
                    cur = parent[p];
                }
            }
        }
    }
    println!("criterion 6: PASS - 500 forests partitioned within the log bound");
}

/// Criterion 7: the level-1 hard instance has 40 pairs on a 396 grid, its
/// witness verifies, and no 37-subset has the distance property; <= 60 s.
#[test]
fn criterion_7_hard_instance_gap() {
    let started = Instant::now();
    let p = hard_params(1);
    assert_eq!(p.pairs, 40);
    assert_eq!(p.side, 396);
    let (inst, witness) = gen_hard(1).unwrap();
    assert_eq!(inst.k(), 40);
    assert_eq!(inst.side, 396);
    assert!(verify_routing(&inst, &witness).is_valid());
    let answer = max_distance_property_subset(&inst, Some(37)).unwrap();
    assert_eq!(
        answer,
        DistanceAnswer::ThresholdUnmet,
        "a 37-subset with the distance property must not exist"
    );
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 60, "took {} s", elapsed.as_secs());
    println!(
        "criterion 7: PASS - level-1 instance (40 pairs, 396x396) witnessed, no 37-subset, {} ms",
        elapsed.as_millis()
    );
}

/// Criterion 8: exhaustive 4x4 sweep (k <= 2) plus 200 random 5x5 (k <= 3):
/// solver count <= exact count, and >= 1 whenever exact >= 1.
#[test]
fn criterion_8_oracle_dominance() {
    let budget = NdpBudget::default();
    let config = desk_config();
    let mut boundary_cells = Vec::new();
    for r in 1..=4u32 {
        for c in 1..=4u32 {
            let v = Coord::new(r, c);
            if r == 1 || c == 1 || r == 4 || c == 4 {
                boundary_cells.push(v);
            }
        }
    }
    let all_cells: Vec<Coord> = (1..=4u32)
        .flat_map(|r| (1..=4u32).map(move |c| Coord::new(r, c)))
        .collect();
    let mut singles = Vec::new();
    for &s in &boundary_cells {
        for &t in &all_cells {
            singles.push((s, t));
        }
    }
    let mut instances = 0u64;
    let mut check = |inst: &GridInstance| {
        let (opt, _) = exact_ndp(inst, &budget).unwrap();
        let routing = solve_restricted(inst, 42, &config).unwrap();
        assert!(verify_routing(inst, &routing).is_valid());
        assert!(
            routing.routed_count() <= opt,
            "solver beat the oracle on {inst:?}"
        );
        if opt >= 1 {
            assert!(
                routing.routed_count() >= 1,
                "solver routed nothing on {inst:?}"
            );
        }
        instances += 1;
    };
    for &p in &singles {
        check(&GridInstance::new(4, vec![p], 0).unwrap());
    }
    for i in 0..singles.len() {
        for j in (i + 1)..singles.len() {
            check(&GridInstance::new(4, vec![singles[i], singles[j]], 0).unwrap());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..200 {
        let k = 1 + rng.random_range(0..3);
        let mut pairs = Vec::new();
        for _ in 0..k {
            let s = loop {
                let v = Coord::new(rng.random_range(1..=5), rng.random_range(1..=5));
                if v.row == 1 || v.col == 1 || v.row == 5 || v.col == 5 {
                    break v;
                }
            };
            let t = Coord::new(rng.random_range(1..=5), rng.random_range(1..=5));
            pairs.push((s, t));
        }
        check(&GridInstance::new(5, pairs, 0).unwrap());
    }
    println!("criterion 8: PASS - oracle dominance on {instances} instances");
}

/// Criterion 9: 100 edge-disjoint families in walls up to 20x40: extraction
/// output node-disjoint with size >= ceil(m/9).
#[test]
fn criterion_9_wall_extraction() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut families = 0;
    for case in 0..100 {
        let ell = 2 * (4 + rng.random_range(0..19)); // even, up to 44 wide grid -> up to 20x40 walls
        let ell = ell.min(40);
        let h = 4 + rng.random_range(0..17);
        let wall = WallGraph::build(ell, h).unwrap();
        let verts: Vec<Coord> = wall.vertices().collect();
        let mut used_edges: BTreeSet<(Coord, Coord)> = BTreeSet::new();
        let mut family: Vec<GridPath> = Vec::new();
        let want = 5 + rng.random_range(0..26);
        for _ in 0..want * 4 {
            if family.len() >= want {
                break;
            }
            let s = verts[rng.random_range(0..verts.len())];
            let t = verts[rng.random_range(0..verts.len())];
            if s == t {
                continue;
            }
            // BFS through unused edges
            let mut prev = std::collections::BTreeMap::new();
            let mut queue = std::collections::VecDeque::new();
            prev.insert(s, s);
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                if u == t {
                    break;
                }
                for nb in wall.neighbors(u) {
                    let e = (u.min(nb), u.max(nb));
                    if !used_edges.contains(&e) && !prev.contains_key(&nb) {
                        prev.insert(nb, u);
                        queue.push_back(nb);
                    }
                }
            }
            if !prev.contains_key(&t) {
                continue;
            }
            let mut path = vec![t];
            let mut cur = t;
            while cur != s {
                cur = prev[&cur];
                path.push(cur);
            }
            path.reverse();
            for w in path.windows(2) {
                used_edges.insert((w[0].min(w[1]), w[0].max(w[1])));
            }
            family.push(GridPath::new(path));
        }
        if family.is_empty() {
            continue;
        }
        let kept = edp_to_ndp_extract(&wall, &family).unwrap();
        assert!(
            kept.len() >= family.len().div_ceil(9),
            "case {case}: kept {} of {}",
            kept.len(),
            family.len()
        );
        let mut seen = BTreeSet::new();
        for &i in &kept {
            for v in &family[i].vertices {
                assert!(seen.insert(*v), "case {case}: output shares vertex {v}");
            }
        }
        families += 1;
    }
    assert!(families >= 100, "only {families} families generated");
    println!(
        "criterion 9: PASS - {families} families extracted node-disjointly above the m/9 floor"
    );
}

/// Criterion 10: 100 modified-instance fixtures: inner routings of size <= d
/// lift to valid outer routings of equal size.
#[test]
fn criterion_10_modified_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut fixtures = 0;
    while fixtures < 100 {
        let d = 1 + rng.random_range(0..3u64);
        let d32 = d as u32;
        let len = 16 * d32 + rng.random_range(0..8) * d32;
        let side = 33 * d32 + len + rng.random_range(0..32);
        let start = 16 * d32 + 1 + rng.random_range(0..(side - len - 32 * d32));
        let i_dst = Interval::new(start, start + len - 1);
        // members: n_pairs destinations above distinct I' columns
        let n_pairs = 1 + rng.random_range(0..(2 * d as usize + 2));
        let mut cols: Vec<u32> = (i_dst.start..=i_dst.end).collect();
        cols.shuffle(&mut rng);
        cols.truncate(n_pairs);
        cols.sort_unstable();
        let mut pairs = Vec::new();
        for (i, &c) in cols.iter().enumerate() {
            let dist = d as u32 + rng.random_range(0..d as u32);
            pairs.push((Coord::new(1, 1 + i as u32 * 2), Coord::new(side - dist, c)));
        }
        let inst = GridInstance::new(side, pairs, 0).unwrap();
        let members: Vec<usize> = (0..n_pairs).collect();
        let i_src = Interval::new(1, 1 + (n_pairs as u32 - 1) * 2);
        let Ok(mi) = build_modified_instance(&inst, &members, i_src, i_dst, d) else {
            continue;
        };
        // inner routing: greedy BFS inside G', truncated to d pairs
        let inner_routing = greedy_route(&mi.instance, &(0..n_pairs).collect::<Vec<_>>());
        let mut inner = Routing::new(inner_routing.entries.into_iter().take(d as usize).collect());
        inner.entries.sort_by_key(|(i, _)| *i);
        if inner.entries.is_empty() {
            continue;
        }
        assert!(verify_routing(&mi.instance, &inner).is_valid());
        let lifted = route_modified_back(&inst, &mi, &inner).unwrap();
        assert_eq!(
            lifted.routed_count(),
            inner.routed_count(),
            "fixture {fixtures}"
        );
        assert!(
            verify_routing(&inst, &lifted).is_valid(),
            "fixture {fixtures}"
        );
        fixtures += 1;
    }
    println!("criterion 10: PASS - 100 modified-instance round trips at equal size");
}
