//! Complete routing of spaced-out instances: sources on the top row,
//! destinations pairwise (and from the boundary) at distance >= 8k+8.
//!
//! A bundle of k wires sweeps the destination boxes band by band in a
//! serpentine. Inside a band the bundle shifts rigidly so that the owning
//! wire passes exactly through its destination and terminates there; every
//! cell is claimed in a global set, so any geometric slip aborts loudly
//! instead of emitting an invalid routing.

use crate::grid::{manhattan_dist, Coord, GridInstance, GridPath, Routing};
use std::collections::{HashMap, HashSet};

#[derive(thiserror::Error, Debug, PartialEq, Eq)]
pub enum SpacedError {
    #[error("source of pair {0} is not on the top row")]
    SourceNotOnTop(usize),
    #[error("duplicate source column {0}")]
    DuplicateSource(u32),
    #[error("destinations of pairs {a} and {b} are {dist} apart, need at least {need}")]
    DestTooClose {
        a: usize,
        b: usize,
        dist: u64,
        need: u64,
    },
    #[error("destination of pair {pair} is {dist} from the boundary, need at least {need}")]
    DestNearBoundary { pair: usize, dist: u64, need: u64 },
    #[error("band layout too irregular: consecutive in-band destinations {a} and {b} leave no shift room")]
    BandTooTight { a: usize, b: usize },
    #[error("internal collision at {0}; construction aborted")]
    Collision(Coord),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Heading {
    East,
    West,
    South,
}

struct Sim {
    side: u32,
    paths: Vec<Vec<Coord>>,
    pos: Vec<Coord>,
    done: Vec<bool>,
    used: HashSet<Coord>,
}

impl Sim {
    fn new(side: u32, starts: &[Coord]) -> Result<Self, SpacedError> {
        let mut used = HashSet::new();
        for &s in starts {
            if !used.insert(s) {
                return Err(SpacedError::Collision(s));
            }
        }
        Ok(Sim {
            side,
            paths: starts.iter().map(|&s| vec![s]).collect(),
            pos: starts.to_vec(),
            done: vec![false; starts.len()],
            used,
        })
    }

    /// Extend wire `w` in a straight line to `target` (same row or col).
    fn step_to(&mut self, w: usize, target: Coord) -> Result<(), SpacedError> {
        let mut cur = self.pos[w];
        assert!(
            cur.row == target.row || cur.col == target.col,
            "diagonal move"
        );
        while cur != target {
            if cur.row != target.row {
                cur.row = if target.row > cur.row {
                    cur.row + 1
                } else {
                    cur.row - 1
                };
            } else {
                cur.col = if target.col > cur.col {
                    cur.col + 1
                } else {
                    cur.col - 1
                };
            }
            assert!(cur.in_side(self.side), "wire left the grid at {cur}");
            if !self.used.insert(cur) {
                return Err(SpacedError::Collision(cur));
            }
            self.paths[w].push(cur);
        }
        self.pos[w] = target;
        Ok(())
    }
}

struct Bundle {
    sim: Sim,
    active: Vec<usize>,
    heading: Heading,
}

impl Bundle {
    /// Perpendicular position of a wire (row when heading E/W, col when S).
    fn perp(&self, w: usize) -> u32 {
        match self.heading {
            Heading::East | Heading::West => self.sim.pos[w].row,
            Heading::South => self.sim.pos[w].col,
        }
    }

    fn advance_all(&mut self, front: u32) -> Result<(), SpacedError> {
        for &w in &self.active.clone() {
            let p = self.sim.pos[w];
            let target = match self.heading {
                Heading::East | Heading::West => Coord::new(p.row, front),
                Heading::South => Coord::new(front, p.col),
            };
            self.sim.step_to(w, target)?;
        }
        Ok(())
    }

    /// Turn every active wire to `new_heading`. Wires turn at staggered
    /// positions along the current heading starting at `base`; the stagger
    /// order follows the anti-crossing rule (wires the new heading points
    /// away from turn first).
    fn turn(&mut self, new_heading: Heading, base: u32) -> Result<(), SpacedError> {
        let mut order: Vec<usize> = self.active.clone();
        order.sort_by_key(|&w| self.perp(w));
        // does the new heading point toward increasing perpendicular position?
        let increasing = match (self.heading, new_heading) {
            (Heading::South, Heading::East) => true, // east = increasing col? p is col... (p = cols)
            (Heading::South, Heading::West) => false,
            (Heading::East, Heading::South) | (Heading::West, Heading::South) => true, // south = increasing row (p = rows)
            _ => unreachable!("unsupported turn"),
        };
        // wires with smaller p turn farther along the current heading when the
        // new heading points toward increasing p
        let m = order.len() as u32;
        for (rank, &w) in order.iter().enumerate() {
            let depth = if increasing {
                m - 1 - rank as u32
            } else {
                rank as u32
            };
            let turn_at = match self.heading {
                Heading::East => base + depth,
                Heading::West => base - depth,
                Heading::South => base + depth,
            };
            let p = self.sim.pos[w];
            let corner = match self.heading {
                Heading::East | Heading::West => Coord::new(p.row, turn_at),
                Heading::South => Coord::new(turn_at, p.col),
            };
            self.sim.step_to(w, corner)?;
        }
        self.heading = new_heading;
        Ok(())
    }

    /// Rigid vertical shift of an E/W-heading bundle by `delta` rows, using a
    /// staircase of one turn column per wire starting just past the front.
    fn shift_rows(&mut self, delta: i64, front: u32) -> Result<u32, SpacedError> {
        if delta == 0 || self.active.is_empty() {
            return Ok(front);
        }
        let mut order: Vec<usize> = self.active.clone();
        order.sort_by_key(|&w| self.sim.pos[w].row);
        if delta > 0 {
            order.reverse(); // moving down: bottom wire turns first (nearest)
        }
        let east = self.heading == Heading::East;
        for (rank, &w) in order.iter().enumerate() {
            let turn_col = if east {
                front + 1 + rank as u32
            } else {
                front - 1 - rank as u32
            };
            let p = self.sim.pos[w];
            self.sim.step_to(w, Coord::new(p.row, turn_col))?;
            let new_row = (p.row as i64 + delta) as u32;
            self.sim.step_to(w, Coord::new(new_row, turn_col))?;
        }
        let new_front = if east {
            front + 1 + self.active.len() as u32
        } else {
            front - 1 - self.active.len() as u32
        };
        self.advance_all(new_front)?;
        Ok(new_front)
    }
}

/// Route every pair of a spaced-out instance. Preconditions are enforced:
/// sources on the top row with distinct columns, destination pairwise and
/// boundary distances at least 8k+8.
pub fn route_spaced_out(inst: &GridInstance) -> Result<Routing, SpacedError> {
    let k = inst.pairs.len();
    if k == 0 {
        return Ok(Routing::empty());
    }
    let need = 8 * k as u64 + 8;
    let mut cols_seen = HashSet::new();
    for (i, &(s, _)) in inst.pairs.iter().enumerate() {
        if s.row != 1 {
            return Err(SpacedError::SourceNotOnTop(i));
        }
        if !cols_seen.insert(s.col) {
            return Err(SpacedError::DuplicateSource(s.col));
        }
    }
    for i in 0..k {
        let (_, ti) = inst.pairs[i];
        let b = (ti.row - 1)
            .min(ti.col - 1)
            .min(inst.side - ti.row)
            .min(inst.side - ti.col) as u64;
        if b < need {
            return Err(SpacedError::DestNearBoundary {
                pair: i,
                dist: b,
                need,
            });
        }
        for j in (i + 1)..k {
            let d = manhattan_dist(ti, inst.pairs[j].1);
            if d < need {
                return Err(SpacedError::DestTooClose {
                    a: i,
                    b: j,
                    dist: d,
                    need,
                });
            }
        }
    }

    let side = inst.side;
    let km = k as u32;
    // formation: leftmost source gets the deepest personal row
    let mut by_col: Vec<usize> = (0..k).collect();
    by_col.sort_by_key(|&i| inst.pairs[i].0.col);
    let starts: Vec<Coord> = inst.pairs.iter().map(|&(s, _)| s).collect();
    let mut bundle = Bundle {
        sim: Sim::new(side, &starts)?,
        active: (0..k).collect(),
        heading: Heading::East,
    };
    for (rank, &w) in by_col.iter().enumerate() {
        let row = 1 + km - rank as u32; // rank 0 = leftmost = deepest
        let c = inst.pairs[w].0.col;
        bundle.sim.step_to(w, Coord::new(row, c))?;
    }
    // first descent along the east margin: the j-th rightmost distinct source
    // column is at most side - j + 1, so these turn columns are reachable
    bundle.turn(Heading::South, side - km + 1)?;

    // destination bands: sorted by row, split when the gap exceeds 4k+6 so
    // the margin cells of one band's exit stay clear of the next band's entry
    let band_gap = 4 * km + 6;
    let mut by_dest: Vec<usize> = (0..k).collect();
    by_dest.sort_by_key(|&i| (inst.pairs[i].1.row, inst.pairs[i].1.col));
    let mut bands: Vec<Vec<usize>> = Vec::new();
    for &i in &by_dest {
        let r = inst.pairs[i].1.row;
        match bands.last_mut() {
            Some(band) if r - inst.pairs[*band.last().unwrap()].1.row <= band_gap => band.push(i),
            _ => bands.push(vec![i]),
        }
    }

    let mut westward = true; // first band traversed westward (we sit east)
    for band in &bands {
        let m = bundle.active.len() as u32;
        let min_row = band.iter().map(|&i| inst.pairs[i].1.row).min().unwrap();
        // approach: descend along the current margin, then turn into the band
        let approach = min_row - (2 * km + 4);
        bundle.advance_all(approach)?;
        let dir = if westward {
            Heading::West
        } else {
            Heading::East
        };
        bundle.turn(dir, approach + 1)?;
        // after the turn wires sit at staggered margin columns; align fronts
        let mut front = if westward {
            bundle
                .active
                .iter()
                .map(|&w| bundle.sim.pos[w].col)
                .min()
                .unwrap_or(side)
        } else {
            bundle
                .active
                .iter()
                .map(|&w| bundle.sim.pos[w].col)
                .max()
                .unwrap_or(1)
        };
        bundle.advance_all(front)?;
        // visit destinations in travel order
        let mut visits = band.clone();
        visits.sort_by_key(|&i| inst.pairs[i].1.col);
        if westward {
            visits.reverse();
        }
        for (vi, &pair) in visits.iter().enumerate() {
            let t = inst.pairs[pair].1;
            let owner_row = bundle.sim.pos[pair].row;
            let delta = t.row as i64 - owner_row as i64;
            // room check between the shift staircase and the destination
            let gap_ok = if westward {
                front > t.col && front - t.col > m + 2
            } else {
                front < t.col && t.col - front > m + 2
            };
            if !gap_ok && delta != 0 {
                let prev = if vi > 0 { visits[vi - 1] } else { pair };
                return Err(SpacedError::BandTooTight { a: prev, b: pair });
            }
            let _ = bundle.shift_rows(delta, front)?;
            // advance everyone to the destination column; the owner ends on t
            bundle.advance_all(t.col)?;
            front = t.col;
            debug_assert_eq!(bundle.sim.pos[pair], t);
            bundle.sim.done[pair] = true;
            bundle.active.retain(|&w| w != pair);
        }
        if bundle.active.is_empty() {
            break;
        }
        // leave toward the margin we are heading at, ready for the next band
        let margin_turn = if westward { km } else { side - km + 1 };
        let exit_front = if westward { km + 1 } else { side - km };
        bundle.advance_all(exit_front)?;
        bundle.turn(Heading::South, margin_turn.max(1))?;
        westward = !westward;
    }
    assert!(
        bundle.sim.done.iter().all(|&d| d),
        "a wire missed its destination"
    );

    let entries = bundle
        .sim
        .paths
        .into_iter()
        .enumerate()
        .map(|(i, p)| (i, GridPath::new(p)))
        .collect();
    Ok(Routing::new(entries))
}

/// Spacing feasibility helper shared with the generator.
pub fn spacing_requirement(k: usize) -> u64 {
    8 * k as u64 + 8
}

/// Check the two spacing preconditions without routing.
pub fn check_spacing(inst: &GridInstance) -> Result<(), SpacedError> {
    let k = inst.pairs.len();
    let need = spacing_requirement(k);
    for i in 0..k {
        let t = inst.pairs[i].1;
        let b = (t.row - 1)
            .min(t.col - 1)
            .min(inst.side - t.row)
            .min(inst.side - t.col) as u64;
        if b < need {
            return Err(SpacedError::DestNearBoundary {
                pair: i,
                dist: b,
                need,
            });
        }
        for j in (i + 1)..k {
            let d = manhattan_dist(t, inst.pairs[j].1);
            if d < need {
                return Err(SpacedError::DestTooClose {
                    a: i,
                    b: j,
                    dist: d,
                    need,
                });
            }
        }
    }
    Ok(())
}

/// Map each wire's id to its path for diagnostics.
pub fn paths_by_pair(r: &Routing) -> HashMap<usize, &GridPath> {
    r.entries.iter().map(|(i, p)| (*i, p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::verify_routing;

    #[test]
    fn single_pair() {
        let side = 40;
        let inst =
            GridInstance::new(side, vec![(Coord::new(1, 5), Coord::new(20, 20))], 0).unwrap();
        let r = route_spaced_out(&inst).unwrap();
        assert_eq!(r.routed_count(), 1);
        assert!(verify_routing(&inst, &r).is_valid());
    }

    #[test]
    fn three_pairs_routed_completely() {
        // k = 3: spacing 32 pairwise and from the boundary
        let side = 110;
        let inst = GridInstance::new(
            side,
            vec![
                (Coord::new(1, 10), Coord::new(40, 40)),
                (Coord::new(1, 30), Coord::new(40, 75)),
                (Coord::new(1, 50), Coord::new(75, 40)),
            ],
            0,
        )
        .unwrap();
        let r = route_spaced_out(&inst).unwrap();
        assert_eq!(r.routed_count(), 3);
        assert!(verify_routing(&inst, &r).is_valid());
    }

    #[test]
    fn spacing_enforced_strictly() {
        // 8k+7 apart must be rejected, not best-effort routed
        let side = 120;
        let inst = GridInstance::new(
            side,
            vec![
                (Coord::new(1, 10), Coord::new(40, 40)),
                (Coord::new(1, 30), Coord::new(40, 40 + 23)), // 8*3+7 = 31 < 32
                (Coord::new(1, 50), Coord::new(80, 80)),
            ],
            0,
        )
        .unwrap();
        assert!(matches!(
            route_spaced_out(&inst),
            Err(SpacedError::DestTooClose { .. })
        ));
    }
}
