//! Instance generators: seeded random instances, spaced-out instances, and
//! the recursive hard family with perfect-routability witnesses.

use crate::grid::{Coord, GridInstance, GridPath, Routing};
use crate::spaced::spacing_requirement;
use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(thiserror::Error, Debug, PartialEq, Eq)]
pub enum GenError {
    #[error("cannot place {k} distinct sources on a top row of width {side}")]
    TooManySources { k: usize, side: u32 },
    #[error("far margin {margin} leaves no interior in a {side} grid")]
    MarginTooLarge { margin: u64, side: u32 },
    #[error("side {side} cannot host {k} spaced destinations (need at least {need})")]
    InfeasibleSide { side: u32, k: usize, need: u32 },
    #[error("hard level {0} exceeds the configured budget")]
    LevelTooLarge(u32),
}

/// Uniform random instance: distinct sources on the top row, destinations at
/// least `far_margin` from every boundary edge. Deterministic per seed.
pub fn gen_random(
    side: u32,
    k: usize,
    far_margin: u64,
    seed: u64,
) -> Result<GridInstance, GenError> {
    if k > side as usize {
        return Err(GenError::TooManySources { k, side });
    }
    let m = far_margin as u32;
    if 2 * m + 1 > side {
        return Err(GenError::MarginTooLarge {
            margin: far_margin,
            side,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols: Vec<u32> = (1..=side).collect();
    cols.shuffle(&mut rng);
    cols.truncate(k);
    cols.sort_unstable();
    let lo = 1 + m;
    let hi = side - m;
    let pairs = cols
        .into_iter()
        .map(|c| {
            let t = Coord::new(rng.random_range(lo..=hi), rng.random_range(lo..=hi));
            (Coord::new(1, c), t)
        })
        .collect();
    Ok(GridInstance::new(side, pairs, seed).expect("in range"))
}

/// Spaced-out instance: destinations on an exact lattice with pitch 8k+8 and
/// the same boundary margin; sources are distinct random top-row columns.
pub fn gen_spaced(side: u32, k: usize, seed: u64) -> Result<GridInstance, GenError> {
    let s = spacing_requirement(k) as u32;
    if k == 0 {
        return Ok(GridInstance::new(side, Vec::new(), seed).expect("in range"));
    }
    if side < 2 * s + 1 {
        return Err(GenError::InfeasibleSide {
            side,
            k,
            need: 2 * s + 1,
        });
    }
    let positions: Vec<u32> = (0..)
        .map(|i| s + 1 + i * s)
        .take_while(|&p| p + s <= side)
        .collect();
    let cells = positions.len() * positions.len();
    if cells < k {
        let need = s + 1 + (k as u32) * s; // coarse lower bound for the message
        return Err(GenError::InfeasibleSide { side, k, need });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cell_ids: Vec<usize> = (0..cells).collect();
    cell_ids.shuffle(&mut rng);
    cell_ids.truncate(k);
    cell_ids.sort_unstable();
    let mut cols: Vec<u32> = (1..=side).collect();
    cols.shuffle(&mut rng);
    cols.truncate(k);
    cols.sort_unstable();
    let pairs = cell_ids
        .into_iter()
        .zip(cols)
        .map(|(cell, c)| {
            let r = positions[cell / positions.len()];
            let cc = positions[cell % positions.len()];
            (Coord::new(1, c), Coord::new(r, cc))
        })
        .collect();
    Ok(GridInstance::new(side, pairs, seed).expect("in range"))
}

/// The parameters of the hard family: g = 11/10, gamma_i = 20 g^(2i),
/// N_0 = 1, N_i = 2 gamma_(i-1) N_(i-1), l_i = ceil(9 N_i g^i).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HardParams {
    pub level: u32,
    pub pairs: u64,
    pub side: u64,
}

pub fn hard_params(level: u32) -> HardParams {
    let g = Ratio::new(11u64, 10u64);
    let mut n = Ratio::from_integer(1u64);
    let mut gi = Ratio::from_integer(1u64); // g^i
    for _ in 0..level {
        let gamma = Ratio::from_integer(20u64) * gi * gi;
        n = Ratio::from_integer(2u64) * gamma * n;
        gi *= g;
    }
    let pairs = n.to_integer();
    debug_assert_eq!(n, Ratio::from_integer(pairs), "N_i must stay integral");
    let ell = Ratio::from_integer(9u64) * n * gi;
    let side = ell.numer().div_ceil(*ell.denom());
    HardParams { level, pairs, side }
}

/// Generate the level-i hard instance plus its routability witness.
/// Levels 0 and 1 are exact; level 2 is witness-only and memory-heavy.
pub fn gen_hard(level: u32) -> Result<(GridInstance, Routing), GenError> {
    if level > 2 {
        return Err(GenError::LevelTooLarge(level));
    }
    if level == 0 {
        let inst =
            GridInstance::new(9, vec![(Coord::new(1, 1), Coord::new(5, 1))], 0).expect("in range");
        let path = GridPath::new((1..=5).map(|r| Coord::new(r, 1)).collect());
        let witness = Routing::new(vec![(0, path)]);
        return Ok((inst, witness));
    }
    let (sub, sub_wit) = gen_hard(level - 1)?;
    let sub_params = hard_params(level - 1);
    let params = hard_params(level);
    let n_sub = sub_params.pairs as usize;
    let n = params.pairs as usize;
    let ell_sub = sub_params.side as u32;
    let ell = params.side as u32;
    let half = n / 2; // = gamma * N_(level-1), always integral

    // per-side copy sizes: full copies of the sub-instance plus one partial
    let side_blocks = |total: usize| -> Vec<usize> {
        let mut blocks = vec![n_sub; total / n_sub];
        if !total.is_multiple_of(n_sub) {
            blocks.push(total % n_sub);
        }
        blocks
    };
    let odd_blocks = side_blocks(half);
    let even_blocks = side_blocks(half);
    let copies = odd_blocks.len() + even_blocks.len();
    // strip geometry
    let r_last = ell - half as u32; // last row of the strip
    let strip_top = r_last - ell_sub + 1;
    assert!(strip_top > half as u32 + 1, "no room for the upper lanes");
    assert!(
        half as u32 + copies as u32 * ell_sub <= ell,
        "copies do not fit horizontally"
    );

    // copy layout: interleave odd/even blocks left to right
    struct CopySlot {
        col_start: u32,
        pairs: usize,
        flipped: bool,
    }
    let mut slots: Vec<CopySlot> = Vec::with_capacity(copies);
    {
        let mut oi = 0;
        let mut ei = 0;
        for j in 0..copies {
            let flipped = j % 2 == 0; // odd-indexed copies (1-based) are flipped
            let count = if flipped {
                let c = odd_blocks[oi];
                oi += 1;
                c
            } else {
                let c = even_blocks[ei];
                ei += 1;
                c
            };
            slots.push(CopySlot {
                col_start: half as u32 + (j as u32) * ell_sub + 1,
                pairs: count,
                flipped,
            });
        }
    }

    // map a sub-instance coordinate into copy slot j
    let place = |slot: &CopySlot, v: Coord| -> Coord {
        if slot.flipped {
            Coord::new(
                strip_top + (ell_sub - v.row),
                slot.col_start + (ell_sub - v.col),
            )
        } else {
            Coord::new(strip_top + v.row - 1, slot.col_start + v.col - 1)
        }
    };

    // source layout on the top row and the nested connector lanes
    let mut pairs: Vec<(Coord, Coord)> = vec![(Coord::new(1, 1), Coord::new(1, 1)); n];
    let mut witness_paths: Vec<GridPath> = vec![GridPath::new(vec![Coord::new(1, 1)]); n];
    let sub_paths: std::collections::BTreeMap<usize, &GridPath> =
        sub_wit.entries.iter().map(|(i, p)| (*i, p)).collect();

    // odd-side sources occupy top-row columns 1..half: blocks for flipped
    // copies in right-to-left copy order, each block reversed
    let mut flipped_slots: Vec<usize> = (0..copies).filter(|&j| slots[j].flipped).collect();
    flipped_slots.sort_by_key(|&j| std::cmp::Reverse(slots[j].col_start));
    let mut pos = 1u32; // next top-row column on the odd side
    let mut pair_idx = 0usize;
    for &j in &flipped_slots {
        let slot = &slots[j];
        // sources on the copy's bottom boundary appear left-to-right as the
        // reversed sub order; reversed placement = sub order descending col
        let mut subs: Vec<usize> = (0..slot.pairs).collect();
        subs.sort_by_key(|&sp| {
            let s = place(slot, sub.pairs[sp].0);
            s.col // ascending target col
        });
        // reversed order of appearance on the copy boundary
        subs.reverse();
        for &sp in &subs {
            let x = pos;
            let src = Coord::new(1, x);
            let dst = place(slot, sub.pairs[sp].1);
            let copy_src = place(slot, sub.pairs[sp].0);
            let lane_row = ell + 1 - x;
            // down col x, east to the copy source column, up to the source
            let mut path = Vec::new();
            for r in 1..=lane_row {
                path.push(Coord::new(r, x));
            }
            for c in (x + 1)..=copy_src.col {
                path.push(Coord::new(lane_row, c));
            }
            for r in (copy_src.row..lane_row).rev() {
                path.push(Coord::new(r, copy_src.col));
            }
            // continue with the (flipped) inner witness path
            let inner = sub_paths[&sp];
            let mapped: Vec<Coord> = inner.vertices.iter().map(|&v| place(slot, v)).collect();
            debug_assert_eq!(mapped.first(), Some(&copy_src));
            path.extend(mapped.into_iter().skip(1));
            pairs[pair_idx] = (src, dst);
            witness_paths[pair_idx] = GridPath::new(path);
            pair_idx += 1;
            pos += 1;
        }
    }
    // even-side sources occupy columns half+1..n in copy order left-to-right,
    // block order matching the copy's own top boundary order
    let mut plain_slots: Vec<usize> = (0..copies).filter(|&j| !slots[j].flipped).collect();
    plain_slots.sort_by_key(|&j| slots[j].col_start);
    let mut q = 1u32;
    for &j in &plain_slots {
        let slot = &slots[j];
        let mut subs: Vec<usize> = (0..slot.pairs).collect();
        subs.sort_by_key(|&sp| place(slot, sub.pairs[sp].0).col);
        for &sp in &subs {
            let x = half as u32 + q;
            let src = Coord::new(1, x);
            let dst = place(slot, sub.pairs[sp].1);
            let copy_src = place(slot, sub.pairs[sp].0);
            let lane_row = strip_top - 1 - q;
            let mut path = Vec::new();
            for r in 1..=lane_row {
                path.push(Coord::new(r, x));
            }
            for c in (x + 1)..=copy_src.col {
                path.push(Coord::new(lane_row, c));
            }
            for r in (lane_row + 1)..=copy_src.row {
                path.push(Coord::new(r, copy_src.col));
            }
            let inner = sub_paths[&sp];
            let mapped: Vec<Coord> = inner.vertices.iter().map(|&v| place(slot, v)).collect();
            debug_assert_eq!(mapped.first(), Some(&copy_src));
            path.extend(mapped.into_iter().skip(1));
            pairs[pair_idx] = (src, dst);
            witness_paths[pair_idx] = GridPath::new(path);
            pair_idx += 1;
            q += 1;
        }
    }
    assert_eq!(pair_idx, n);
    let inst = GridInstance::new(ell, pairs, 0).expect("in range");
    let witness = Routing::new(witness_paths.into_iter().enumerate().collect());
    Ok((inst, witness))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::verify_routing;
    use crate::spaced::check_spacing;

    #[test]
    fn random_deterministic_and_margin() {
        let a = gen_random(40, 5, 10, 7).unwrap();
        let b = gen_random(40, 5, 10, 7).unwrap();
        assert_eq!(a, b);
        for &(s, t) in &a.pairs {
            assert_eq!(s.row, 1);
            assert!(t.row > 10 && t.row <= 30 && t.col > 10 && t.col <= 30);
        }
        assert!(gen_random(40, 0, 0, 1).unwrap().pairs.is_empty());
    }

    #[test]
    fn spaced_meets_preconditions() {
        let inst = gen_spaced(120, 3, 5).unwrap();
        assert_eq!(inst.k(), 3);
        check_spacing(&inst).unwrap();
    }

    #[test]
    fn spaced_infeasible_side() {
        assert!(matches!(
            gen_spaced(40, 3, 1),
            Err(GenError::InfeasibleSide { .. })
        ));
    }

    #[test]
    fn hard_level0() {
        let (inst, wit) = gen_hard(0).unwrap();
        assert_eq!(inst.side, 9);
        assert_eq!(inst.pairs, vec![(Coord::new(1, 1), Coord::new(5, 1))]);
        assert!(verify_routing(&inst, &wit).is_valid());
    }

    #[test]
    fn hard_level1_arithmetic() {
        let p = hard_params(1);
        assert_eq!(p.pairs, 40);
        assert_eq!(p.side, 396);
    }

    #[test]
    fn hard_level1_witness_verifies() {
        let (inst, wit) = gen_hard(1).unwrap();
        assert_eq!(inst.side, 396);
        assert_eq!(inst.k(), 40);
        assert_eq!(wit.routed_count(), 40);
        assert!(verify_routing(&inst, &wit).is_valid());
    }

    #[test]
    fn hard_level2_arithmetic() {
        // gamma_1 = 20 * 1.21 = 24.2: N_2 = 2 * 24.2 * 40 = 1936 and
        // l_2 = ceil(9 * 1936 * 1.21) = 21084
        let p = hard_params(2);
        assert_eq!(p.pairs, 1936);
        assert_eq!(p.side, 21084);
    }

    #[test]
    #[ignore = "memory-heavy witness (a 21084-sided grid); run explicitly"]
    fn hard_level2_witness_verifies() {
        let (inst, wit) = gen_hard(2).unwrap();
        assert_eq!(inst.k(), 1936);
        assert_eq!(inst.side, 21084);
        assert!(verify_routing(&inst, &wit).is_valid());
    }

    #[test]
    fn hard_level_cap() {
        assert!(matches!(gen_hard(3), Err(GenError::LevelTooLarge(3))));
    }

    #[test]
    fn hard_level1_source_order() {
        // sources fill the leftmost top-row columns; the flipped half's
        // destinations run right-to-left, the plain half's left-to-right
        let (inst, _) = gen_hard(1).unwrap();
        let cols: Vec<u32> = inst.pairs.iter().map(|p| p.0.col).collect();
        assert_eq!(cols, (1..=40).collect::<Vec<_>>());
        let dests: Vec<u32> = inst.pairs.iter().map(|p| p.1.col).collect();
        assert!(dests[..20].windows(2).all(|w| w[0] > w[1]));
        assert!(dests[20..].windows(2).all(|w| w[0] < w[1]));
    }
}
