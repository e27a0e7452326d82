//! Exact brute-force oracles used as ground truth in tests: exact NDP by
//! backtracking over simple-path systems, exact HSC by coloring enumeration
//! with a laminar greedy selection, and the maximum distance-property subset.

use crate::grid::{manhattan_dist, Coord, GridInstance, GridPath, Routing};
use crate::hierarchy::{ColorId, Coloring};
use crate::hsc::HscInstance;
use std::collections::BTreeMap;

#[derive(thiserror::Error, Debug, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance exceeds the oracle budget ({0})")]
    BudgetExceeded(String),
}

/// Exhaustive NDP: the maximum number of routable pairs and a witness.
/// Budget: side <= 6, k <= 4 by default (overridable), plus a step counter.
pub struct NdpBudget {
    pub max_side: u32,
    pub max_pairs: usize,
    pub max_steps: u64,
}

impl Default for NdpBudget {
    fn default() -> Self {
        NdpBudget {
            max_side: 6,
            max_pairs: 4,
            max_steps: 200_000_000,
        }
    }
}

struct NdpSearch<'a> {
    inst: &'a GridInstance,
    used: Vec<bool>,
    steps: u64,
    max_steps: u64,
}

impl<'a> NdpSearch<'a> {
    fn idx(&self, v: Coord) -> usize {
        ((v.row - 1) * self.inst.side + (v.col - 1)) as usize
    }

    /// All remaining pairs must stay BFS-connected through free vertices.
    fn feasible(&mut self, pairs: &[usize], from: usize) -> bool {
        for &p in &pairs[from..] {
            let (s, t) = self.inst.pairs[p];
            if s != t && (self.used[self.idx(s)] || self.used[self.idx(t)]) {
                return false;
            }
            let mut seen = vec![false; self.used.len()];
            let mut queue = std::collections::VecDeque::new();
            if self.used[self.idx(s)] {
                return false;
            }
            seen[self.idx(s)] = true;
            queue.push_back(s);
            let mut ok = false;
            while let Some(u) = queue.pop_front() {
                if u == t {
                    ok = true;
                    break;
                }
                for nb in u.neighbors(self.inst.side) {
                    let i = self.idx(nb);
                    if !seen[i] && !self.used[i] {
                        seen[i] = true;
                        queue.push_back(nb);
                    }
                }
            }
            if !ok {
                return false;
            }
        }
        true
    }

    fn route_all(
        &mut self,
        pairs: &[usize],
        at: usize,
        acc: &mut Vec<(usize, GridPath)>,
    ) -> Result<bool, OracleError> {
        if at == pairs.len() {
            return Ok(true);
        }
        let (s, t) = self.inst.pairs[pairs[at]];
        // DFS over simple paths from s to t through free vertices
        let mut stack: Vec<Coord> = vec![s];
        let si = self.idx(s);
        self.used[si] = true;
        let found = self.extend_path(pairs, at, t, &mut stack, acc)?;
        self.used[si] = false;
        Ok(found)
    }

    fn extend_path(
        &mut self,
        pairs: &[usize],
        at: usize,
        t: Coord,
        stack: &mut Vec<Coord>,
        acc: &mut Vec<(usize, GridPath)>,
    ) -> Result<bool, OracleError> {
        self.steps += 1;
        if self.steps > self.max_steps {
            return Err(OracleError::BudgetExceeded("step counter".into()));
        }
        let cur = *stack.last().unwrap();
        if cur == t {
            acc.push((pairs[at], GridPath::new(stack.clone())));
            if self.feasible(pairs, at + 1) && self.route_all(pairs, at + 1, acc)? {
                return Ok(true);
            }
            acc.pop();
            return Ok(false);
        }
        // prune: Manhattan reachability is free; deeper pruning via feasible()
        let mut neighbors: Vec<Coord> = cur.neighbors(self.inst.side).collect();
        neighbors.sort_by_key(|&n| manhattan_dist(n, t));
        for nb in neighbors {
            let i = self.idx(nb);
            if self.used[i] {
                continue;
            }
            self.used[i] = true;
            stack.push(nb);
            let ok = self.extend_path(pairs, at, t, stack, acc)?;
            stack.pop();
            self.used[i] = false;
            if ok {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Exact maximum NDP value with a witness routing.
pub fn exact_ndp(inst: &GridInstance, budget: &NdpBudget) -> Result<(usize, Routing), OracleError> {
    if inst.side > budget.max_side {
        return Err(OracleError::BudgetExceeded(format!(
            "side {} > {}",
            inst.side, budget.max_side
        )));
    }
    if inst.k() > budget.max_pairs || inst.k() > 20 {
        return Err(OracleError::BudgetExceeded(format!(
            "k {} > {}",
            inst.k(),
            budget.max_pairs.min(20)
        )));
    }
    let k = inst.k();
    let n_cells = (inst.side * inst.side) as usize;
    // subsets by descending size, ascending lexicographic order within a size
    let mut masks: Vec<u32> = (1..(1u32 << k)).collect();
    masks.sort_by_key(|m| (std::cmp::Reverse(m.count_ones()), *m));
    for mask in masks {
        let subset: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        let mut search = NdpSearch {
            inst,
            used: vec![false; n_cells],
            steps: 0,
            max_steps: budget.max_steps,
        };
        let mut acc = Vec::new();
        if search.feasible(&subset, 0) && search.route_all(&subset, 0, &mut acc)? {
            return Ok((subset.len(), Routing::new(acc)));
        }
    }
    Ok((0, Routing::empty()))
}

/// Exact HSC by enumerating all valid colorings (budget-capped) and, per
/// coloring, a laminar bottom-up greedy over the color tree, which is exact
/// because the caps form a laminar family over the level-rho colors.
pub fn exact_hsc(
    inst: &HscInstance,
    max_colorings: u64,
) -> Result<(usize, Coloring, Vec<usize>), OracleError> {
    let rho = inst.rho();
    // count colorings first
    let mut count: u64 = 1;
    for h in 1..=rho {
        let options = if h == 1 {
            inst.colors.count(1) as u64
        } else {
            // every square picks among the children of its parent color
            let parent = ColorId {
                level: h - 1,
                index: 0,
            };
            inst.colors.children(parent).len() as u64
        };
        for _ in 0..inst.squares.levels[(h - 1) as usize].len() {
            count = count.saturating_mul(options);
            if count > max_colorings {
                return Err(OracleError::BudgetExceeded(format!(
                    "more than {max_colorings} colorings"
                )));
            }
        }
    }
    // vertices grouped by (level-rho square, color)
    let mut members: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (i, v) in inst.u.iter().enumerate() {
        let sq = inst.squares.locate(rho, v.coord).expect("validated");
        members.entry((sq, v.color.index)).or_default().push(i);
    }
    let mut best: (usize, Coloring, Vec<usize>) = (0, Coloring::default(), Vec::new());
    let mut assignment = Coloring::default();
    enumerate_colorings(inst, 1, 0, &mut assignment, &members, &mut best);
    Ok(best)
}

fn enumerate_colorings(
    inst: &HscInstance,
    level: u32,
    idx: usize,
    f: &mut Coloring,
    members: &BTreeMap<(usize, usize), Vec<usize>>,
    best: &mut (usize, Coloring, Vec<usize>),
) {
    let rho = inst.rho();
    let squares = inst.squares.levels[(level - 1) as usize].len();
    if idx == squares {
        if level == rho {
            evaluate_coloring(inst, f, members, best);
        } else {
            enumerate_colorings(inst, level + 1, 0, f, members, best);
        }
        return;
    }
    let choices: Vec<ColorId> = if level == 1 {
        inst.colors.colors(1).collect()
    } else {
        let parent_sq = inst.squares.parent(level, idx).expect("parent");
        let pc = f.get(level - 1, parent_sq).expect("assigned");
        inst.colors.children(pc)
    };
    for c in choices {
        f.set(level, idx, c);
        enumerate_colorings(inst, level, idx + 1, f, members, best);
    }
    f.assignment.remove(&(level, idx));
}

fn evaluate_coloring(
    inst: &HscInstance,
    f: &Coloring,
    members: &BTreeMap<(usize, usize), Vec<usize>>,
    best: &mut (usize, Coloring, Vec<usize>),
) {
    let rho = inst.rho();
    // available agreeing vertices per level-rho color
    let mut avail: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for ((sq, color), verts) in members {
        if f.get(rho, *sq)
            == Some(ColorId {
                level: rho,
                index: *color,
            })
        {
            avail
                .entry(*color)
                .or_default()
                .extend(verts.iter().copied());
        }
    }
    // bottom-up laminar capacities u(c) = min(cap, sum of children)
    fn capacity(inst: &HscInstance, c: ColorId, avail: &BTreeMap<usize, Vec<usize>>) -> u64 {
        let rho = inst.rho();
        let raw = if c.level == rho {
            avail.get(&c.index).map_or(0, |v| v.len() as u64)
        } else {
            inst.colors
                .children(c)
                .into_iter()
                .map(|cc| capacity(inst, cc, avail))
                .sum()
        };
        if c.level == 0 {
            raw
        } else {
            raw.min(inst.cap(c.level))
        }
    }
    let total = capacity(inst, inst.colors.root(), &avail) as usize;
    if total <= best.0 {
        return;
    }
    // top-down allocation for the witness
    fn allocate(
        inst: &HscInstance,
        c: ColorId,
        amount: u64,
        avail: &BTreeMap<usize, Vec<usize>>,
        out: &mut Vec<usize>,
    ) {
        let rho = inst.rho();
        if c.level == rho {
            let mut vs = avail.get(&c.index).cloned().unwrap_or_default();
            vs.sort_by_key(|&i| (inst.u[i].coord, inst.u[i].pair_id));
            out.extend(vs.into_iter().take(amount as usize));
            return;
        }
        let mut remaining = amount;
        for cc in inst.colors.children(c) {
            if remaining == 0 {
                break;
            }
            let give = capacity(inst, cc, avail).min(remaining);
            allocate(inst, cc, give, avail, out);
            remaining -= give;
        }
    }
    let mut selected = Vec::new();
    allocate(
        inst,
        inst.colors.root(),
        total as u64,
        &avail,
        &mut selected,
    );
    debug_assert_eq!(selected.len(), total);
    *best = (total, f.clone(), selected);
}

/// Answer type for the distance-property oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistanceAnswer {
    /// A subset of at least the threshold size exists (largest found size).
    ThresholdMet(usize),
    ThresholdUnmet,
    /// Exact maximum over all subsets.
    Maximum(usize),
}

fn has_distance_property(inst: &GridInstance, subset: &[usize]) -> bool {
    // subset sorted by source column; N = members strictly between
    for i in 0..subset.len() {
        for j in (i + 1)..subset.len() {
            let between = (j - i - 1) as u64;
            let d = manhattan_dist(inst.pairs[subset[i]].1, inst.pairs[subset[j]].1);
            if between > d {
                return false;
            }
        }
    }
    true
}

/// Exact decision/optimization for the 1-distance property.
/// With `threshold = Some(t)`: enumerate deletion sets of size <= k - t
/// (budget k <= 40). Without: exact maximum via pruned DFS (budget k <= 20).
pub fn max_distance_property_subset(
    inst: &GridInstance,
    threshold: Option<usize>,
) -> Result<DistanceAnswer, OracleError> {
    let k = inst.k();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&p| inst.pairs[p].0.col);
    match threshold {
        Some(t) => {
            if k > 40 {
                return Err(OracleError::BudgetExceeded(format!("k {k} > 40")));
            }
            if t > k {
                return Ok(DistanceAnswer::ThresholdUnmet);
            }
            for size in (t..=k).rev() {
                let del = k - size;
                let mut deletions: Vec<usize> = (0..del).collect();
                loop {
                    let subset: Vec<usize> = order
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| !deletions.contains(i))
                        .map(|(_, &p)| p)
                        .collect();
                    if has_distance_property(inst, &subset) {
                        return Ok(DistanceAnswer::ThresholdMet(size));
                    }
                    if del == 0 {
                        break;
                    }
                    // next combination of deletions
                    let mut i = del;
                    let mut done = true;
                    while i > 0 {
                        i -= 1;
                        if deletions[i] != i + k - del {
                            deletions[i] += 1;
                            for j in (i + 1)..del {
                                deletions[j] = deletions[j - 1] + 1;
                            }
                            done = false;
                            break;
                        }
                    }
                    if done {
                        break;
                    }
                }
            }
            Ok(DistanceAnswer::ThresholdUnmet)
        }
        None => {
            if k > 20 {
                return Err(OracleError::BudgetExceeded(format!("k {k} > 20")));
            }
            // DFS over sorted positions; violations never repair (adding
            // members only raises the between-counts), so prune eagerly
            fn dfs(
                inst: &GridInstance,
                order: &[usize],
                at: usize,
                chosen: &mut Vec<usize>,
                best: &mut usize,
            ) {
                if chosen.len() + (order.len() - at) <= *best {
                    return;
                }
                if at == order.len() {
                    *best = (*best).max(chosen.len());
                    return;
                }
                chosen.push(order[at]);
                if has_distance_property(inst, chosen) {
                    dfs(inst, order, at + 1, chosen, best);
                }
                chosen.pop();
                dfs(inst, order, at + 1, chosen, best);
            }
            let mut best = 0;
            let mut chosen = Vec::new();
            dfs(inst, &order, 0, &mut chosen, &mut best);
            Ok(DistanceAnswer::Maximum(best))
        }
    }
}

/// Pruned helper for fixtures: does a subset of the given size exist?
pub fn distance_subset_exists(inst: &GridInstance, size: usize) -> Result<bool, OracleError> {
    Ok(matches!(
        max_distance_property_subset(inst, Some(size))?,
        DistanceAnswer::ThresholdMet(_)
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::verify_routing;

    #[test]
    fn crossing_corner_pairs() {
        let inst = GridInstance::new(
            3,
            vec![
                (Coord::new(1, 1), Coord::new(3, 3)),
                (Coord::new(1, 3), Coord::new(3, 1)),
            ],
            0,
        )
        .unwrap();
        let (count, wit) = exact_ndp(&inst, &NdpBudget::default()).unwrap();
        assert_eq!(count, 1);
        assert!(verify_routing(&inst, &wit).is_valid());
    }

    #[test]
    fn single_pair_and_empty() {
        let inst = GridInstance::new(3, vec![(Coord::new(1, 1), Coord::new(3, 3))], 0).unwrap();
        assert_eq!(exact_ndp(&inst, &NdpBudget::default()).unwrap().0, 1);
        let empty = GridInstance::new(3, vec![], 0).unwrap();
        assert_eq!(exact_ndp(&empty, &NdpBudget::default()).unwrap().0, 0);
    }

    #[test]
    fn budget_enforced() {
        let inst = GridInstance::new(7, vec![(Coord::new(1, 1), Coord::new(7, 7))], 0).unwrap();
        assert!(exact_ndp(&inst, &NdpBudget::default()).is_err());
    }

    #[test]
    fn distance_property_trivial_pairs() {
        // two adjacent sources, distant destinations: N = 0 <= d
        let inst = GridInstance::new(
            30,
            vec![
                (Coord::new(1, 5), Coord::new(20, 5)),
                (Coord::new(1, 6), Coord::new(20, 25)),
            ],
            0,
        )
        .unwrap();
        assert_eq!(
            max_distance_property_subset(&inst, None).unwrap(),
            DistanceAnswer::Maximum(2)
        );
    }
}
