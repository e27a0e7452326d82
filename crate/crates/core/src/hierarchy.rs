//! Hierarchical interval/square systems, L-decompositions of the top row,
//! the color system, perfect-set and compatibility checks, and the
//! shadow-property utilities.

use crate::grid::{Coord, Interval, Params, SubGrid};
use num_rational::Ratio;
use std::collections::BTreeMap;
use std::fmt;

#[derive(thiserror::Error, Debug, PartialEq, Eq)]
pub enum HierarchyError {
    #[error("l' = {ell_prime} is not divisible by d_1 = {d1}")]
    NotDivisible { ell_prime: u64, d1: u64 },
    #[error("L sequence must be strictly decreasing powers of eta, offending entry {0}")]
    BadLSequence(u64),
    #[error("l_1 = {0} does not divide l' = {1}")]
    L1DoesNotDivide(u64, u64),
    #[error("destination {0} lies outside the square system")]
    DestinationOutsideSystem(Coord),
    #[error("duplicate source column {0}")]
    DuplicateSource(u32),
    #[error("forest contains a cycle through node {0}")]
    CyclicForest(usize),
}

/// Validity verdict for set-level checks. Violations are data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SetVerdict {
    Valid,
    Violation(String),
}

impl SetVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, SetVerdict::Valid)
    }
}

impl fmt::Display for SetVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetVerdict::Valid => write!(f, "valid"),
            SetVerdict::Violation(s) => write!(f, "violation: {s}"),
        }
    }
}

/// One rho-level hierarchical system of intervals within [l'].
/// Level h (1-indexed) is d_h-canonical and nested in level h-1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalSystem {
    pub levels: Vec<Vec<Interval>>,
}

impl IntervalSystem {
    /// The level-rho footprint: integers belonging to this system.
    pub fn member(&self, x: u32) -> bool {
        self.levels
            .last()
            .map(|lvl| lvl.iter().any(|iv| iv.contains(x)))
            .unwrap_or(false)
    }

    /// Index of the level-h interval containing x, if any.
    pub fn locate(&self, level: u32, x: u32) -> Option<usize> {
        self.levels[(level - 1) as usize]
            .iter()
            .position(|iv| iv.contains(x))
    }
}

/// Build the 2^rho interval systems by the odd/even splitting recursion:
/// partition [l'] into d_1 blocks, odd blocks to one system and even to the
/// other, then recursively split each level-(h-1) interval into d_h blocks.
pub fn build_interval_systems(
    ell_prime: u64,
    params: &Params,
) -> Result<Vec<IntervalSystem>, HierarchyError> {
    let d1 = params.d1();
    if ell_prime == 0 || !ell_prime.is_multiple_of(d1) {
        return Err(HierarchyError::NotDivisible { ell_prime, d1 });
    }
    // level 1
    let blocks: Vec<Interval> = (0..ell_prime / d1)
        .map(|i| Interval::new((i * d1 + 1) as u32, ((i + 1) * d1) as u32))
        .collect();
    let odd: Vec<Interval> = blocks.iter().copied().step_by(2).collect();
    let even: Vec<Interval> = blocks.iter().copied().skip(1).step_by(2).collect();
    let mut systems = vec![
        IntervalSystem { levels: vec![odd] },
        IntervalSystem { levels: vec![even] },
    ];
    for h in 2..=params.rho {
        let dh = params.d_at(h);
        let mut next = Vec::with_capacity(systems.len() * 2);
        for sys in systems {
            let top = sys.levels.last().unwrap();
            let mut odd_lvl = Vec::new();
            let mut even_lvl = Vec::new();
            for iv in top {
                let pieces = (iv.len() as u64) / dh;
                for p in 0..pieces {
                    let piece = Interval::new(
                        iv.start + (p * dh) as u32,
                        iv.start + ((p + 1) * dh) as u32 - 1,
                    );
                    if p % 2 == 0 {
                        odd_lvl.push(piece);
                    } else {
                        even_lvl.push(piece);
                    }
                }
            }
            let mut a = sys.levels.clone();
            a.push(odd_lvl);
            let mut b = sys.levels;
            b.push(even_lvl);
            next.push(IntervalSystem { levels: a });
            next.push(IntervalSystem { levels: b });
        }
        systems = next;
    }
    Ok(systems)
}

/// A hierarchical system of squares: levels of d_h-canonical square families
/// with parent containment, formed as the product of two interval systems
/// (rows from one, columns from the other).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquareSystem {
    /// levels[h-1] = sorted list of level-h squares.
    pub levels: Vec<Vec<SubGrid>>,
    /// Row/column interval systems the product was formed from.
    pub row_system: IntervalSystem,
    pub col_system: IntervalSystem,
}

impl SquareSystem {
    pub fn rho(&self) -> u32 {
        self.levels.len() as u32
    }

    /// Does v lie in some level-rho square (i.e. belong to the system)?
    pub fn member(&self, v: Coord) -> bool {
        self.locate(self.rho(), v).is_some()
    }

    /// Index of the level-h square containing v, if any.
    pub fn locate(&self, level: u32, v: Coord) -> Option<usize> {
        let ri = self.row_system.locate(level, v.row)?;
        let ci = self.col_system.locate(level, v.col)?;
        let cols_per_row = self.col_system.levels[(level - 1) as usize].len();
        let idx = ri * cols_per_row + ci;
        debug_assert!(self.levels[(level - 1) as usize][idx].contains(v));
        Some(idx)
    }

    pub fn square(&self, level: u32, idx: usize) -> &SubGrid {
        &self.levels[(level - 1) as usize][idx]
    }

    /// Index of the level-(h-1) parent of the level-h square `idx`.
    pub fn parent(&self, level: u32, idx: usize) -> Option<usize> {
        if level <= 1 {
            return None;
        }
        let sq = self.square(level, idx);
        let v = Coord::new(sq.rows.start, sq.cols.start);
        self.locate(level - 1, v)
    }
}

/// Build the 4^rho square systems: products of the 2^rho interval systems,
/// rows from system i and columns from system j. Every vertex of the l'xl'
/// grid belongs to exactly one system.
pub fn build_square_systems(
    ell_prime: u64,
    params: &Params,
) -> Result<Vec<SquareSystem>, HierarchyError> {
    let ivs = build_interval_systems(ell_prime, params)?;
    let mut out = Vec::with_capacity(ivs.len() * ivs.len());
    for rows in &ivs {
        for cols in &ivs {
            let levels = (0..params.rho)
                .map(|h| {
                    let mut v: Vec<SubGrid> = Vec::new();
                    for r in &rows.levels[h as usize] {
                        for c in &cols.levels[h as usize] {
                            v.push(SubGrid::new(*r, *c));
                        }
                    }
                    v
                })
                .collect();
            out.push(SquareSystem {
                levels,
                row_system: rows.clone(),
                col_system: cols.clone(),
            });
        }
    }
    Ok(out)
}

/// Check that a family of intervals is d-canonical: every interval has length
/// exactly d and every pair is d-separated (min cross gap > d).
pub fn is_canonical(intervals: &[Interval], d: u64) -> bool {
    for (i, a) in intervals.iter().enumerate() {
        if a.len() as u64 != d {
            return false;
        }
        for b in intervals.iter().skip(i + 1) {
            // min |x - y| over x in a, y in b is gap + 1; separation needs > d
            if (a.gap(b) as u64) < d {
                return false;
            }
        }
    }
    true
}

/// The unique hierarchical L-decomposition of the top row R* into nested
/// equal-length interval partitions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LDecomposition {
    pub ell_prime: u64,
    /// Strictly decreasing eta-powers, lengths[h-1] = l_h.
    pub lengths: Vec<u64>,
    /// levels[h-1] = the partition J_h of [l'] into intervals of length l_h.
    pub levels: Vec<Vec<Interval>>,
}

impl LDecomposition {
    pub fn rho(&self) -> u32 {
        self.lengths.len() as u32
    }

    /// Index of the level-h interval containing column x (1-indexed).
    pub fn interval_of(&self, level: u32, x: u32) -> usize {
        debug_assert!(x >= 1 && (x as u64) <= self.ell_prime);
        ((x as u64 - 1) / self.lengths[(level - 1) as usize]) as usize
    }

    pub fn interval(&self, level: u32, idx: usize) -> Interval {
        self.levels[(level - 1) as usize][idx]
    }

    /// Parent interval index of (level, idx) at level-1.
    pub fn parent_index(&self, level: u32, idx: usize) -> usize {
        debug_assert!(level >= 2);
        let ratio = self.lengths[(level - 2) as usize] / self.lengths[(level - 1) as usize];
        idx / ratio as usize
    }
}

fn is_power_of(x: u64, base: u64) -> bool {
    if x == 0 {
        return false;
    }
    let mut v = x;
    while v.is_multiple_of(base) {
        v /= base;
    }
    v == 1
}

/// Build the unique L-decomposition for lengths L = (l_1 > ... > l_rho).
pub fn build_l_decomposition(
    lengths: &[u64],
    ell_prime: u64,
    eta: u64,
) -> Result<LDecomposition, HierarchyError> {
    if lengths.is_empty() {
        return Err(HierarchyError::BadLSequence(0));
    }
    for (i, &l) in lengths.iter().enumerate() {
        if !is_power_of(l, eta) {
            return Err(HierarchyError::BadLSequence(l));
        }
        if i > 0 && l >= lengths[i - 1] {
            return Err(HierarchyError::BadLSequence(l));
        }
    }
    if ell_prime == 0 || !ell_prime.is_multiple_of(lengths[0]) {
        return Err(HierarchyError::L1DoesNotDivide(lengths[0], ell_prime));
    }
    // l_{h+1} | l_h holds automatically for decreasing powers of eta
    let levels = lengths
        .iter()
        .map(|&l| {
            (0..ell_prime / l)
                .map(|i| Interval::new((i * l + 1) as u32, ((i + 1) * l) as u32))
                .collect()
        })
        .collect();
    Ok(LDecomposition {
        ell_prime,
        lengths: lengths.to_vec(),
        levels,
    })
}

/// All strictly decreasing length-rho sequences of eta-powers (>= eta) whose
/// first entry divides l'.
pub fn enumerate_l_sequences(params: &Params) -> Vec<Vec<u64>> {
    let ell_prime = params.ell_prime;
    let mut powers = Vec::new();
    let mut p = params.eta;
    while p <= ell_prime {
        if ell_prime.is_multiple_of(p) {
            powers.push(p);
        }
        match p.checked_mul(params.eta) {
            Some(next) => p = next,
            None => break,
        }
    }
    powers.sort_unstable_by(|a, b| b.cmp(a));
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(
        powers: &[u64],
        start: usize,
        depth: u32,
        current: &mut Vec<u64>,
        out: &mut Vec<Vec<u64>>,
    ) {
        if depth == 0 {
            out.push(current.clone());
            return;
        }
        for i in start..powers.len() {
            current.push(powers[i]);
            rec(powers, i + 1, depth - 1, current, out);
            current.pop();
        }
    }
    rec(&powers, 0, params.rho, &mut current, &mut out);
    out
}

/// The hierarchical system of colors over an L-decomposition: one color per
/// interval per level, with the tree structure mirroring interval nesting.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct ColorId {
    pub level: u32,
    pub index: usize,
}

impl fmt::Display for ColorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}[{}]", self.level, self.index)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColorSystem {
    pub decomp: LDecomposition,
}

impl ColorSystem {
    pub fn new(decomp: LDecomposition) -> Self {
        ColorSystem { decomp }
    }

    pub fn rho(&self) -> u32 {
        self.decomp.rho()
    }

    pub fn root(&self) -> ColorId {
        ColorId { level: 0, index: 0 }
    }

    pub fn count(&self, level: u32) -> usize {
        if level == 0 {
            1
        } else {
            self.decomp.levels[(level - 1) as usize].len()
        }
    }

    pub fn colors(&self, level: u32) -> impl Iterator<Item = ColorId> + '_ {
        (0..self.count(level)).map(move |index| ColorId { level, index })
    }

    pub fn parent(&self, c: ColorId) -> Option<ColorId> {
        match c.level {
            0 => None,
            1 => Some(self.root()),
            _ => Some(ColorId {
                level: c.level - 1,
                index: self.decomp.parent_index(c.level, c.index),
            }),
        }
    }

    /// Ancestor at the given level (level <= c.level). Identity when equal.
    pub fn ancestor_at(&self, c: ColorId, level: u32) -> ColorId {
        assert!(level <= c.level);
        if level == 0 {
            return self.root();
        }
        let span =
            self.decomp.lengths[(level - 1) as usize] / self.decomp.lengths[(c.level - 1) as usize];
        ColorId {
            level,
            index: c.index / span as usize,
        }
    }

    pub fn children(&self, c: ColorId) -> Vec<ColorId> {
        let child_level = c.level + 1;
        if child_level > self.rho() {
            return Vec::new();
        }
        if c.level == 0 {
            return self.colors(1).collect();
        }
        let span = (self.decomp.lengths[(c.level - 1) as usize]
            / self.decomp.lengths[(child_level - 1) as usize]) as usize;
        (0..span)
            .map(|i| ColorId {
                level: child_level,
                index: c.index * span + i,
            })
            .collect()
    }

    /// Level-h' descendants of c (h' >= c.level).
    pub fn descendants_at(&self, c: ColorId, level: u32) -> Vec<ColorId> {
        assert!(level >= c.level && level <= self.rho());
        if c.level == 0 {
            return self.colors(level).collect();
        }
        let span = (self.decomp.lengths[(c.level - 1) as usize]
            / self.decomp.lengths[(level - 1) as usize]) as usize;
        (0..span)
            .map(|i| ColorId {
                level,
                index: c.index * span + i,
            })
            .collect()
    }

    pub fn is_ancestor(&self, anc: ColorId, c: ColorId) -> bool {
        anc.level <= c.level && self.ancestor_at(c, anc.level) == anc
    }

    /// The level-h color of a column of R*.
    pub fn color_of_column(&self, level: u32, col: u32) -> ColorId {
        if level == 0 {
            return self.root();
        }
        ColorId {
            level,
            index: self.decomp.interval_of(level, col),
        }
    }

    /// R* interval owning a color.
    pub fn interval(&self, c: ColorId) -> Interval {
        assert!(c.level >= 1);
        self.decomp.interval(c.level, c.index)
    }
}

/// A coloring f of every square in the system by a color of its level.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Coloring {
    /// (level, square index) -> color
    pub assignment: BTreeMap<(u32, usize), ColorId>,
}

impl Coloring {
    pub fn get(&self, level: u32, square_idx: usize) -> Option<ColorId> {
        self.assignment.get(&(level, square_idx)).copied()
    }

    pub fn set(&mut self, level: u32, square_idx: usize, c: ColorId) {
        self.assignment.insert((level, square_idx), c);
    }

    /// Validity: total on the system, level-matched, child color of parent color.
    pub fn validate(&self, squares: &SquareSystem, colors: &ColorSystem) -> SetVerdict {
        for level in 1..=squares.rho() {
            for idx in 0..squares.levels[(level - 1) as usize].len() {
                let c = match self.get(level, idx) {
                    Some(c) => c,
                    None => {
                        return SetVerdict::Violation(format!(
                            "square (level {level}, index {idx}) has no color"
                        ))
                    }
                };
                if c.level != level {
                    return SetVerdict::Violation(format!(
                        "square (level {level}, index {idx}) colored with level-{} color",
                        c.level
                    ));
                }
                if level > 1 {
                    let p_idx = squares.parent(level, idx).expect("parent square");
                    let pc = match self.get(level - 1, p_idx) {
                        Some(pc) => pc,
                        None => {
                            return SetVerdict::Violation(format!(
                                "parent of (level {level}, index {idx}) has no color"
                            ))
                        }
                    };
                    if colors.parent(c) != Some(pc) {
                        return SetVerdict::Violation(format!(
                            "square (level {level}, index {idx}): color {c} not a child of {pc}"
                        ));
                    }
                }
            }
        }
        SetVerdict::Valid
    }
}

/// Perfect-set check: (a) distinct sources and destinations, (b) the source's
/// level-rho color (from its R* interval) equals the destination square's
/// level-rho color, (c) per level-h color, at most d_h pairs.
///
/// Pairs are given in system coordinates: source on R* (its column indexes
/// the L-decomposition), destination inside the l'xl' grid of the system.
pub fn is_perfect_set(
    pairs: &[(Coord, Coord)],
    coloring: &Coloring,
    colors: &ColorSystem,
    squares: &SquareSystem,
    params: &Params,
) -> Result<SetVerdict, HierarchyError> {
    let rho = squares.rho();
    let mut seen_sources = std::collections::HashSet::new();
    let mut seen_dests = std::collections::HashSet::new();
    let mut per_color: BTreeMap<ColorId, u64> = BTreeMap::new();
    for &(s, t) in pairs {
        if !seen_sources.insert(s) {
            return Ok(SetVerdict::Violation(format!("duplicate source {s}")));
        }
        if !seen_dests.insert(t) {
            return Ok(SetVerdict::Violation(format!("duplicate destination {t}")));
        }
        let sq = squares
            .locate(rho, t)
            .ok_or(HierarchyError::DestinationOutsideSystem(t))?;
        let sq_color = match coloring.get(rho, sq) {
            Some(c) => c,
            None => {
                return Ok(SetVerdict::Violation(format!(
                    "level-{rho} square of {t} is uncolored"
                )))
            }
        };
        let src_color = colors.color_of_column(rho, s.col);
        if src_color != sq_color {
            return Ok(SetVerdict::Violation(format!(
                "pair ({s},{t}): source color {src_color} != square color {sq_color}"
            )));
        }
        for h in 1..=rho {
            let ch = colors.ancestor_at(src_color, h);
            *per_color.entry(ch).or_insert(0) += 1;
        }
    }
    for (c, count) in per_color {
        if count > params.d_at(c.level) {
            return Ok(SetVerdict::Violation(format!(
                "color {c} has {count} pairs, cap {}",
                params.d_at(c.level)
            )));
        }
    }
    Ok(SetVerdict::Valid)
}

/// Compatibility of a demand-pair subset with the L-decomposition:
/// every level-h interval holds either no sources or between d_h/(16 eta)
/// and d_h/4 of them (exact rational comparison).
pub fn is_compatible(
    pairs: &[(Coord, Coord)],
    decomp: &LDecomposition,
    params: &Params,
) -> SetVerdict {
    for h in 1..=decomp.rho() {
        let dh = params.d_at(h);
        let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
        for &(s, _) in pairs {
            *counts.entry(decomp.interval_of(h, s.col)).or_insert(0) += 1;
        }
        for (idx, count) in counts {
            // d_h/(16 eta) <= count <= d_h/4
            if count * 16 * params.eta < dh || count * 4 > dh {
                return SetVerdict::Violation(format!(
                    "level-{h} interval {idx} holds {count} sources, outside [{dh}/(16*{eta}), {dh}/4]",
                    eta = params.eta
                ));
            }
        }
    }
    SetVerdict::Valid
}

/// The shadow of a square: the smallest column interval of R* containing all
/// sources of subset pairs whose destination lies in the square, together
/// with the number of subset sources falling inside that interval.
pub fn shadow_length(
    square: &SubGrid,
    pairs: &[(Coord, Coord)],
) -> Result<(Option<Interval>, usize), HierarchyError> {
    let mut cols = std::collections::HashSet::new();
    for &(s, _) in pairs {
        if !cols.insert(s.col) {
            return Err(HierarchyError::DuplicateSource(s.col));
        }
    }
    let mut lo = None;
    let mut hi = None;
    for &(s, t) in pairs {
        if square.contains(t) {
            lo = Some(lo.map_or(s.col, |v: u32| v.min(s.col)));
            hi = Some(hi.map_or(s.col, |v: u32| v.max(s.col)));
        }
    }
    match (lo, hi) {
        (Some(lo), Some(hi)) => {
            let iv = Interval::new(lo, hi);
            let count = pairs.iter().filter(|&&(s, _)| iv.contains(s.col)).count();
            Ok((Some(iv), count))
        }
        _ => Ok((None, 0)),
    }
}

/// beta-shadow property of a square with respect to a pair subset.
pub fn has_shadow_property(
    square: &SubGrid,
    pairs: &[(Coord, Coord)],
    beta: Ratio<u64>,
) -> Result<bool, HierarchyError> {
    let (_, count) = shadow_length(square, pairs)?;
    let d = square.rows.len() as u64;
    // count <= beta * d
    Ok(Ratio::from_integer(count as u64) <= beta * Ratio::from_integer(d))
}

/// Keep pairs at 1-indexed positions i = 1 mod 2*ceil(beta2/beta1); the input
/// must be sorted by source column. Boosts a beta2-shadow property to beta1.
pub fn boost_shadow(
    pairs: &[(Coord, Coord)],
    beta1: Ratio<u64>,
    beta2: Ratio<u64>,
) -> Vec<(Coord, Coord)> {
    debug_assert!(
        pairs.windows(2).all(|w| w[0].0.col <= w[1].0.col),
        "pairs must be sorted by source column"
    );
    let num = *beta2.numer() * *beta1.denom();
    let den = *beta2.denom() * *beta1.numer();
    let ceil = num.div_ceil(den);
    let modulus = (2 * ceil).max(1) as usize;
    pairs
        .iter()
        .enumerate()
        .filter(|(i, _)| i % modulus == 0)
        .map(|(_, &p)| p)
        .collect()
}

/// A directed forest with edges toward the roots.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Forest {
    /// parent[v] = None for roots.
    pub parent: Vec<Option<usize>>,
    pub weight: Vec<u64>,
}

impl Forest {
    pub fn new(parent: Vec<Option<usize>>) -> Self {
        let weight = vec![1; parent.len()];
        Forest { parent, weight }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    fn check_acyclic(&self) -> Result<(), HierarchyError> {
        // color: 0 unvisited, 1 in progress, 2 done
        let mut color = vec![0u8; self.len()];
        for start in 0..self.len() {
            if color[start] != 0 {
                continue;
            }
            let mut stack = Vec::new();
            let mut v = start;
            loop {
                if color[v] == 1 {
                    return Err(HierarchyError::CyclicForest(v));
                }
                if color[v] == 2 {
                    break;
                }
                color[v] = 1;
                stack.push(v);
                match self.parent[v] {
                    Some(p) => {
                        if p >= self.len() {
                            return Err(HierarchyError::CyclicForest(v));
                        }
                        v = p;
                    }
                    None => break,
                }
            }
            for u in stack {
                color[u] = 2;
            }
        }
        Ok(())
    }
}

/// Partition the nodes of a forest into layers Y_1..Y_t (t <= ceil(log2 n))
/// by iterative leaf-path peeling. Each layer induces vertex-disjoint
/// directed paths, and layer-mates in ancestor relation share a path.
pub fn partition_forest(f: &Forest) -> Result<Vec<Vec<usize>>, HierarchyError> {
    f.check_acyclic()?;
    let n = f.len();
    let mut alive = vec![true; n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (v, &p) in f.parent.iter().enumerate() {
        if let Some(p) = p {
            children[p].push(v);
        }
    }
    let mut child_count: Vec<usize> = children.iter().map(|c| c.len()).collect();
    let mut remaining = n;
    let mut layers = Vec::new();
    while remaining > 0 {
        // degree within the current tree = live children + live parent
        let degree = |v: usize, child_count: &Vec<usize>| -> usize {
            let p = match f.parent[v] {
                Some(p) if alive[p] => 1,
                _ => 0,
            };
            child_count[v] + p
        };
        let mut layer = Vec::new();
        let mut taken = vec![false; n];
        for v in 0..n {
            if !alive[v] || taken[v] || child_count[v] != 0 {
                continue;
            }
            // v is a live leaf: walk the longest chain of degree-<=2 vertices,
            // entering the root only when it has a single live child
            let mut path = vec![v];
            taken[v] = true;
            let mut cur = v;
            loop {
                let next = match f.parent[cur] {
                    Some(p) if alive[p] && !taken[p] => p,
                    _ => break,
                };
                let deg = degree(next, &child_count);
                let is_root = f.parent[next].is_none_or(|pp| !alive[pp]);
                let allowed = if is_root { deg <= 1 } else { deg <= 2 };
                if !allowed {
                    break;
                }
                path.push(next);
                taken[next] = true;
                cur = next;
            }
            layer.extend(path);
        }
        if layer.is_empty() {
            // isolated live vertices with children all peeled cannot happen;
            // remaining singletons are leaves by child_count == 0
            unreachable!("peeling made no progress");
        }
        for &v in &layer {
            alive[v] = false;
            if let Some(p) = f.parent[v] {
                if alive[p] {
                    child_count[p] -= 1;
                }
            }
            remaining -= 1;
        }
        layers.push(layer);
    }
    Ok(layers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{derive_params, ParamOverrides};

    fn params(eta: u64, rho: u32, ell: u64) -> Params {
        let mut p = derive_params(
            (ell * ell).max(4),
            1,
            ParamOverrides {
                eta: Some(eta),
                rho: Some(rho),
                ..Default::default()
            },
        )
        .unwrap();
        p.ell_prime = ell;
        p
    }

    #[test]
    fn interval_systems_one_level() {
        let p = params(2, 1, 16);
        let sys = build_interval_systems(16, &p).unwrap();
        assert_eq!(sys.len(), 2);
        assert_eq!(sys[0].levels[0], vec![Interval::new(1, 8)]);
        assert_eq!(sys[1].levels[0], vec![Interval::new(9, 16)]);
        for x in 1..=16 {
            assert_eq!(sys.iter().filter(|s| s.member(x)).count(), 1);
        }
    }

    #[test]
    fn interval_systems_two_levels() {
        // l'=32, eta=2, rho=2 -> d = [16, 8]; the four level-2 sets are the
        // four blocks of eight.
        let p = params(2, 2, 32);
        let sys = build_interval_systems(32, &p).unwrap();
        assert_eq!(sys.len(), 4);
        let mut level2: Vec<Vec<Interval>> = sys.iter().map(|s| s.levels[1].clone()).collect();
        level2.sort();
        assert_eq!(
            level2,
            vec![
                vec![Interval::new(1, 8)],
                vec![Interval::new(9, 16)],
                vec![Interval::new(17, 24)],
                vec![Interval::new(25, 32)],
            ]
        );
        for x in 1..=32 {
            assert_eq!(sys.iter().filter(|s| s.member(x)).count(), 1);
        }
    }

    #[test]
    fn interval_systems_divisibility_error() {
        let p = params(2, 1, 12);
        assert!(matches!(
            build_interval_systems(12, &p),
            Err(HierarchyError::NotDivisible { .. })
        ));
    }

    #[test]
    fn square_systems_partition_and_membership() {
        let p = params(2, 1, 16);
        let sys = build_square_systems(16, &p).unwrap();
        assert_eq!(sys.len(), 4);
        // system (1,1): rows 1-8 x cols 1-8
        assert_eq!(sys[0].levels[0], vec![SubGrid::from_bounds(1, 8, 1, 8)]);
        // vertex (10,3): row in second interval system, col in first -> system (2,1)
        let v = Coord::new(10, 3);
        let owners: Vec<usize> = (0..4).filter(|&i| sys[i].member(v)).collect();
        assert_eq!(owners, vec![2]); // index 2 = (row system 2, col system 1)
        for r in 1..=16 {
            for c in 1..=16 {
                let v = Coord::new(r, c);
                assert_eq!(sys.iter().filter(|s| s.member(v)).count(), 1);
            }
        }
    }

    #[test]
    fn canonicality_of_levels() {
        let p = params(2, 2, 64);
        for sys in build_interval_systems(64, &p).unwrap() {
            for (h, level) in sys.levels.iter().enumerate() {
                assert!(is_canonical(level, p.d[h]));
            }
        }
    }

    #[test]
    fn l_decomposition_basic() {
        let d = build_l_decomposition(&[8, 4], 16, 2).unwrap();
        assert_eq!(d.levels[0], vec![Interval::new(1, 8), Interval::new(9, 16)]);
        assert_eq!(d.levels[1].len(), 4);
        for (i, iv) in d.levels[1].iter().enumerate() {
            assert_eq!(iv.len(), 4);
            // each level-2 interval has a unique level-1 parent
            let p = d.parent_index(2, i);
            assert!(d.levels[0][p].contains_interval(iv));
        }
    }

    #[test]
    fn l_decomposition_rejects_non_power() {
        assert!(matches!(
            build_l_decomposition(&[8, 3], 16, 2),
            Err(HierarchyError::BadLSequence(3))
        ));
    }

    #[test]
    fn l_decomposition_deterministic() {
        let a = build_l_decomposition(&[16, 4], 64, 2).unwrap();
        let b = build_l_decomposition(&[16, 4], 64, 2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn enumerate_l_two_levels() {
        let p = params(2, 2, 32);
        let mut got = enumerate_l_sequences(&p);
        got.sort();
        let mut want = vec![
            vec![32, 16],
            vec![32, 8],
            vec![32, 4],
            vec![32, 2],
            vec![16, 8],
            vec![16, 4],
            vec![16, 2],
            vec![8, 4],
            vec![8, 2],
            vec![4, 2],
        ];
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn enumerate_l_single_level() {
        let p = params(2, 1, 16);
        let mut got = enumerate_l_sequences(&p);
        got.sort();
        assert_eq!(got, vec![vec![2], vec![4], vec![8], vec![16]]);
    }

    #[test]
    fn enumerate_l_empty_when_rho_too_deep() {
        let p = params(2, 3, 4);
        assert!(enumerate_l_sequences(&p).is_empty());
    }

    #[test]
    fn boost_shadow_every_second() {
        let pairs: Vec<_> = (1..=10)
            .map(|i| (Coord::new(1, i), Coord::new(5, i)))
            .collect();
        let one = Ratio::from_integer(1);
        let kept = boost_shadow(&pairs, one, one);
        assert_eq!(kept.len(), 5);
        assert_eq!(kept[0].0.col, 1);
        assert_eq!(kept[1].0.col, 3);
    }

    #[test]
    fn boost_shadow_ratio_two() {
        let pairs: Vec<_> = (1..=10)
            .map(|i| (Coord::new(1, i), Coord::new(5, i)))
            .collect();
        let kept = boost_shadow(&pairs, Ratio::from_integer(1), Ratio::from_integer(2));
        let cols: Vec<u32> = kept.iter().map(|p| p.0.col).collect();
        assert_eq!(cols, vec![1, 5, 9]);
        assert!(kept.len() as u64 >= 10 / 8);
    }

    #[test]
    fn shadow_length_examples() {
        let square = SubGrid::from_bounds(4, 6, 4, 6);
        let pairs = vec![
            (Coord::new(1, 3), Coord::new(5, 5)),
            (Coord::new(1, 9), Coord::new(4, 4)),
            (Coord::new(1, 5), Coord::new(20, 20)),
        ];
        let (iv, count) = shadow_length(&square, &pairs).unwrap();
        assert_eq!(iv, Some(Interval::new(3, 9)));
        assert_eq!(count, 3);

        let empty_sq = SubGrid::from_bounds(30, 31, 30, 31);
        let (iv, count) = shadow_length(&empty_sq, &pairs).unwrap();
        assert_eq!(iv, None);
        assert_eq!(count, 0);
    }

    #[test]
    fn partition_path_single_layer() {
        // directed path of 5 nodes: 0 -> 1 -> 2 -> 3 -> 4 (root)
        let f = Forest::new(vec![Some(1), Some(2), Some(3), Some(4), None]);
        let layers = partition_forest(&f).unwrap();
        assert_eq!(layers.len(), 1);
        assert_eq!(layers[0].len(), 5);
    }

    #[test]
    fn partition_star() {
        // 3 leaves -> root
        let f = Forest::new(vec![Some(3), Some(3), Some(3), None]);
        let layers = partition_forest(&f).unwrap();
        assert_eq!(layers.len(), 2);
        let mut first = layers[0].clone();
        first.sort_unstable();
        assert_eq!(first, vec![0, 1, 2]);
        assert_eq!(layers[1], vec![3]);
    }

    #[test]
    fn partition_rejects_cycle() {
        let f = Forest::new(vec![Some(1), Some(0)]);
        assert!(matches!(
            partition_forest(&f),
            Err(HierarchyError::CyclicForest(_))
        ));
    }

    #[test]
    fn perfect_set_examples() {
        use crate::hsc::canonical_coloring;
        let p = params(2, 1, 16);
        let systems = build_square_systems(16, &p).unwrap();
        let squares = systems[0].clone();
        let decomp = build_l_decomposition(&[8], 16, 2).unwrap();
        let colors = ColorSystem::new(decomp);
        let inst =
            crate::hsc::HscInstance::new(squares.clone(), colors.clone(), vec![], p.d.clone())
                .unwrap();
        let f = canonical_coloring(&inst); // every square takes color index 0

        // empty set valid
        assert!(is_perfect_set(&[], &f, &colors, &squares, &p)
            .unwrap()
            .is_valid());

        // one pair: source in the first interval (color 0), dest in the
        // (single) square colored 0
        let good = vec![(Coord::new(1, 3), Coord::new(4, 4))];
        assert!(is_perfect_set(&good, &f, &colors, &squares, &p)
            .unwrap()
            .is_valid());

        // mismatched source color
        let bad = vec![(Coord::new(1, 12), Coord::new(4, 4))];
        assert!(!is_perfect_set(&bad, &f, &colors, &squares, &p)
            .unwrap()
            .is_valid());

        // shared source
        let dup = vec![
            (Coord::new(1, 3), Coord::new(4, 4)),
            (Coord::new(1, 3), Coord::new(5, 5)),
        ];
        assert!(!is_perfect_set(&dup, &f, &colors, &squares, &p)
            .unwrap()
            .is_valid());

        // destination outside the system
        let outside = vec![(Coord::new(1, 3), Coord::new(12, 12))];
        assert!(matches!(
            is_perfect_set(&outside, &f, &colors, &squares, &p),
            Err(HierarchyError::DestinationOutsideSystem(_))
        ));
    }

    #[test]
    fn shadow_rejects_duplicate_sources() {
        let square = SubGrid::from_bounds(4, 6, 4, 6);
        let pairs = vec![
            (Coord::new(1, 3), Coord::new(5, 5)),
            (Coord::new(1, 3), Coord::new(6, 6)),
        ];
        assert!(matches!(
            shadow_length(&square, &pairs),
            Err(HierarchyError::DuplicateSource(3))
        ));
    }

    #[test]
    fn compatible_empty_is_valid() {
        let p = params(2, 1, 16);
        let d = build_l_decomposition(&[8], 16, 2).unwrap();
        assert!(is_compatible(&[], &d, &p).is_valid());
    }

    #[test]
    fn compatible_single_source_needs_enough() {
        // d_1 = 8, eta = 2: lower bound 8/32 = 0.25 <= 1, upper 8/4 = 2 >= 1 -> 1 source ok
        let p = params(2, 1, 16);
        let d = build_l_decomposition(&[8], 16, 2).unwrap();
        let pairs = vec![(Coord::new(1, 3), Coord::new(9, 9))];
        assert!(is_compatible(&pairs, &d, &p).is_valid());
        // with eta large the lower bound d_h/(16 eta) stays <= 1 only while
        // 16*eta >= d_h; use rho=1, eta=4 -> d_1 = 64, 64/(64) = 1 -> ok;
        // three sources in one interval exceed d_1/4? 64/4 = 16, no.
        // Instead check the upper bound directly: d_1 = 8, 3 sources > 8/4 = 2.
        let pairs3 = vec![
            (Coord::new(1, 1), Coord::new(9, 1)),
            (Coord::new(1, 2), Coord::new(9, 2)),
            (Coord::new(1, 3), Coord::new(9, 3)),
        ];
        assert!(!is_compatible(&pairs3, &d, &p).is_valid());
    }
}
