//! Canonical snake-plan construction for one level: all colors' snakes are
//! built simultaneously as a bundle of parallel ribbons (lane width 3N(c))
//! sweeping the level's nonempty squares in a boustrophedon over row bands.
//!
//! At every visited square the bundle splits: lanes ahead of the owner pass
//! above, the owner's ribbon runs through the extended square (making it a
//! corridor of that snake), lanes behind pass below. 90-degree and U-turns
//! reverse the tracked lane order; every emitted rectangle is checked into a
//! per-level occupancy map, so geometric violations surface as errors, never
//! as invalid snakes.

use crate::grid::{Coord, Interval, SubGrid};
use crate::hierarchy::ColorId;
use crate::snake::{Corridor, Snake};
use std::collections::BTreeMap;

#[derive(thiserror::Error, Debug, PartialEq, Eq)]
pub enum PlanError {
    #[error("spacing violation: {0}")]
    Spacing(String),
    #[error("lane occupancy clash between colors {0} and {1} at {2}")]
    Occupancy(ColorId, ColorId, Coord),
    #[error("snake invariant failed for color {0}: {1}")]
    BadSnake(ColorId, String),
}

/// One ribbon of the bundle.
#[derive(Clone, Debug)]
pub struct LaneSpec {
    pub color: ColorId,
    /// 3 * N(c): the ribbon (and snake) width.
    pub width: u32,
    /// Columns of the lane's entry footprint on the top row of Q0+.
    pub entry_cols: Interval,
}

/// One nonempty square to visit, in grid coordinates (already extended).
#[derive(Clone, Debug)]
pub struct SiteSpec {
    pub square_plus: SubGrid,
    pub owner: usize,
    pub square_index: usize,
}

/// Interface data recorded at a visited square.
#[derive(Clone, Debug)]
pub struct SitePortals {
    pub square_index: usize,
    pub owner_color: ColorId,
    /// Per lane: (color, rows occupied at the square's west side, rows at the
    /// east side). The owner spans the full extended square rows.
    pub lanes: Vec<(ColorId, Interval, Interval)>,
}

#[derive(Clone, Debug)]
pub struct LevelPlan {
    pub level: u32,
    pub snakes: Vec<(ColorId, Snake)>,
    pub portals: Vec<SitePortals>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Grow {
    Down,
    East,
    West,
}

struct Chain {
    color: ColorId,
    corridors: Vec<SubGrid>,
    cur: SubGrid,
    grow: Grow,
}

impl Chain {
    fn new(color: ColorId, start: SubGrid, grow: Grow) -> Self {
        Chain {
            color,
            corridors: Vec::new(),
            cur: start,
            grow,
        }
    }

    fn rows(&self) -> Interval {
        self.cur.rows
    }

    fn extend_down(&mut self, to_row: u32) {
        assert_eq!(self.grow, Grow::Down);
        assert!(to_row >= self.cur.rows.end);
        self.cur.rows.end = to_row;
    }

    fn extend_h(&mut self, to_col: u32) {
        match self.grow {
            Grow::East => {
                assert!(to_col >= self.cur.cols.end);
                self.cur.cols.end = to_col;
            }
            Grow::West => {
                assert!(to_col <= self.cur.cols.start);
                self.cur.cols.start = to_col;
            }
            Grow::Down => panic!("horizontal extension of a vertical corridor"),
        }
    }

    /// Close the growing vertical corridor into a horizontal one (east) whose
    /// rows are the final `band` rows; the vertical ends at the band's top.
    fn turn_down_to_east(&mut self, band: Interval) {
        assert_eq!(self.grow, Grow::Down);
        self.extend_down(band.start);
        let closed = self.cur;
        self.corridors.push(closed);
        self.cur = SubGrid::new(band, closed.cols);
        self.grow = Grow::East;
    }

    /// Vertical jog of a horizontal ribbon: the current corridor ends at the
    /// strip's near column, a vertical strip bridges the row change, and a new
    /// horizontal corridor continues in the same direction.
    fn jog_rows(&mut self, new_rows: Interval, strip_cols: Interval) {
        let dir = self.grow;
        assert_ne!(dir, Grow::Down);
        if new_rows == self.cur.rows {
            return;
        }
        let near = if dir == Grow::East {
            strip_cols.start
        } else {
            strip_cols.end
        };
        self.extend_h(near);
        let old_rows = self.cur.rows;
        self.corridors.push(self.cur);
        let span = Interval::new(
            old_rows.start.min(new_rows.start),
            old_rows.end.max(new_rows.end),
        );
        self.corridors.push(SubGrid::new(span, strip_cols));
        let far = if dir == Grow::East {
            strip_cols.end
        } else {
            strip_cols.start
        };
        self.cur = SubGrid::new(new_rows, Interval::new(far, far));
        self.grow = dir;
    }

    /// Pass through a square: the ribbon must already occupy rows inside the
    /// square's row span; the square itself becomes a corridor.
    fn through_square(&mut self, sq: SubGrid) {
        let dir = self.grow;
        assert_ne!(dir, Grow::Down);
        assert!(sq.rows.contains_interval(&self.cur.rows));
        let (near, far) = if dir == Grow::East {
            (sq.cols.start, sq.cols.end)
        } else {
            (sq.cols.end, sq.cols.start)
        };
        self.extend_h(near);
        self.corridors.push(self.cur);
        self.corridors.push(sq);
        self.cur = SubGrid::new(self.cur.rows, Interval::new(far, far));
    }

    /// U-turn at a vertical strip: finish the current run, descend, and come
    /// back in the opposite horizontal direction at `new_rows`.
    fn u_turn(&mut self, new_rows: Interval, strip_cols: Interval) {
        let dir = self.grow;
        assert_ne!(dir, Grow::Down);
        let near = if dir == Grow::East {
            strip_cols.start
        } else {
            strip_cols.end
        };
        self.extend_h(near);
        let old_rows = self.cur.rows;
        self.corridors.push(self.cur);
        let span = Interval::new(
            old_rows.start.min(new_rows.start),
            old_rows.end.max(new_rows.end),
        );
        self.corridors.push(SubGrid::new(span, strip_cols));
        self.cur = SubGrid::new(new_rows, Interval::new(near, near));
        self.grow = if dir == Grow::East {
            Grow::West
        } else {
            Grow::East
        };
    }

    fn finish(mut self) -> Snake {
        // drop a trailing stub that is already covered by the last strip
        let redundant = self
            .corridors
            .last()
            .is_some_and(|last| last.contains_subgrid(&self.cur));
        if !redundant {
            self.corridors.push(self.cur);
        }
        Snake::new(self.corridors.into_iter().map(Corridor).collect())
    }
}

fn spacing_err<T>(msg: String) -> Result<T, PlanError> {
    Err(PlanError::Spacing(msg))
}

/// Build the snakes of one level.
///
/// `lanes` are given in color (left-to-right interval) order; `entry_cols`
/// must tile a prefix of the top row of `q0_plus` in that order. `sites` are
/// the extended nonempty squares of this level.
pub fn build_level(
    level: u32,
    q0_plus: SubGrid,
    lanes: &[LaneSpec],
    sites: &[SiteSpec],
) -> Result<LevelPlan, PlanError> {
    let w_total: u32 = lanes.iter().map(|l| l.width).sum();
    if lanes.is_empty() {
        return Ok(LevelPlan {
            level,
            snakes: Vec::new(),
            portals: Vec::new(),
        });
    }
    // group sites into row bands (canonical squares share exact row spans)
    let mut bands: BTreeMap<Interval, Vec<usize>> = BTreeMap::new();
    for (i, s) in sites.iter().enumerate() {
        bands.entry(s.square_plus.rows).or_default().push(i);
    }
    let bands: Vec<(Interval, Vec<usize>)> = bands.into_iter().collect();
    for pair in bands.windows(2) {
        let gap = pair[0].0.gap(&pair[1].0);
        if gap < w_total + 4 {
            return spacing_err(format!(
                "row bands {} and {} are {} apart, need > {}",
                pair[0].0,
                pair[1].0,
                gap,
                w_total + 4
            ));
        }
    }

    // chains start as vertical corridors at the entry columns
    let mut chains: Vec<Chain> = lanes
        .iter()
        .map(|l| {
            Chain::new(
                l.color,
                SubGrid::new(
                    Interval::new(q0_plus.rows.start, q0_plus.rows.start),
                    l.entry_cols,
                ),
                Grow::Down,
            )
        })
        .collect();
    // current top-to-bottom lane order once horizontal (after the first turn
    // the order is reversed: the leftmost entry lane turns lowest)
    let mut order: Vec<usize> = (0..lanes.len()).rev().collect();

    let mut portals = Vec::new();
    let mut eastward = true;
    for (bi, (band_rows, band_sites)) in bands.iter().enumerate() {
        // compact rows just above the band, packed by current order
        let compact_top = band_rows
            .start
            .checked_sub(w_total + 2)
            .filter(|&v| v > q0_plus.rows.start)
            .ok_or_else(|| {
                PlanError::Spacing(format!("no room above band {band_rows} inside {q0_plus}"))
            })?;
        let mut compact: Vec<Interval> = Vec::with_capacity(order.len());
        {
            let mut r = compact_top;
            for &li in &order {
                compact.push(Interval::new(r, r + lanes[li].width - 1));
                r += lanes[li].width;
            }
        }
        if bi == 0 {
            // first turn: vertical entry -> eastward band, reversing order
            for (pos, &li) in order.iter().enumerate() {
                chains[li].turn_down_to_east(compact[pos]);
            }
        } else {
            // U-turn on the side the previous band ended at (east after an
            // eastward band). Nested C-shapes: the lane first in the current
            // top-to-bottom order is outermost (outermost strip, lowest slot).
            let east_side = eastward; // direction of the band just finished
            let strip_zone =
                band_turn_zone(sites, band_sites, &bands, bi, !east_side, w_total, q0_plus)?;
            let mut off = 0u32;
            for (pos, &li) in order.iter().enumerate() {
                let wdt = lanes[li].width;
                let strip = if east_side {
                    Interval::new(strip_zone.end - off - wdt + 1, strip_zone.end - off)
                } else {
                    Interval::new(strip_zone.start + off, strip_zone.start + off + wdt - 1)
                };
                off += wdt;
                // reversed row slots: first lane ends lowest
                let slot = compact[order.len() - 1 - pos];
                chains[li].u_turn(slot, strip);
            }
            order.reverse();
        }
        eastward = bi % 2 == 0;

        let s_max = lanes.iter().map(|l| l.width).max().unwrap_or(3);
        let mut visit = band_sites.clone();
        visit.sort_by_key(|&si| sites[si].square_plus.cols.start);
        if !eastward {
            visit.reverse();
        }
        for pair in visit.windows(2) {
            let a = &sites[pair[0]].square_plus.cols;
            let b = &sites[pair[1]].square_plus.cols;
            let need = 2 * w_total as u64 + 3 * s_max as u64 + 6;
            if (a.gap(b) as u64) < need {
                return spacing_err(format!(
                    "sites {a} and {b} are {} apart, need >= {need}",
                    a.gap(b),
                ));
            }
        }
        for &si in &visit {
            let site = &sites[si];
            let sq = site.square_plus;
            let owner_pos = order
                .iter()
                .position(|&li| li == site.owner)
                .expect("owner lane present");
            // slot rows around the square in current order
            let mut slots: Vec<Interval> = Vec::with_capacity(order.len());
            {
                // lanes above the owner pack upward from the square's top
                let above: u32 = order[..owner_pos].iter().map(|&li| lanes[li].width).sum();
                if sq.rows.start <= above + q0_plus.rows.start {
                    return spacing_err(format!(
                        "no room above square {sq} for {above} bypass rows"
                    ));
                }
                let mut r = sq.rows.start - above;
                for &li in &order[..owner_pos] {
                    slots.push(Interval::new(r, r + lanes[li].width - 1));
                    r += lanes[li].width;
                }
                slots.push(sq.rows);
                let mut r = sq.rows.end + 1;
                for &li in &order[owner_pos + 1..] {
                    if r + lanes[li].width > q0_plus.rows.end {
                        return spacing_err(format!("no room below square {sq} for bypass rows"));
                    }
                    slots.push(Interval::new(r, r + lanes[li].width - 1));
                    r += lanes[li].width;
                }
            }
            // staircase strip block before the square, offset so every lane's
            // horizontal run into the square is at least s_max long
            let pre_zone = if eastward {
                Interval::new(
                    sq.cols.start - s_max - 1 - w_total,
                    sq.cols.start - s_max - 2,
                )
            } else {
                Interval::new(sq.cols.end + s_max + 2, sq.cols.end + s_max + 1 + w_total)
            };
            if pre_zone.start <= q0_plus.cols.start || pre_zone.end >= q0_plus.cols.end {
                return spacing_err(format!("staircase zone {pre_zone} leaves {q0_plus}"));
            }
            apply_staircase(&mut chains, lanes, &order, &slots, pre_zone, eastward)?;
            // pass: owner through the square, others straight past it
            for (pos, &li) in order.iter().enumerate() {
                if li == site.owner {
                    chains[li].through_square(sq);
                } else {
                    let _ = pos;
                }
            }
            // record portals (west side, east side = the slot rows both sides)
            portals.push(SitePortals {
                square_index: site.square_index,
                owner_color: lanes[site.owner].color,
                lanes: order
                    .iter()
                    .enumerate()
                    .map(|(pos, &li)| (lanes[li].color, slots[pos], slots[pos]))
                    .collect(),
            });
            // staircase back to compact formation after the square
            let post_zone = if eastward {
                Interval::new(sq.cols.end + s_max + 2, sq.cols.end + s_max + 1 + w_total)
            } else {
                Interval::new(
                    sq.cols.start - s_max - 1 - w_total,
                    sq.cols.start - s_max - 2,
                )
            };
            if post_zone.start <= q0_plus.cols.start || post_zone.end >= q0_plus.cols.end {
                return spacing_err(format!("staircase zone {post_zone} leaves {q0_plus}"));
            }
            apply_staircase(&mut chains, lanes, &order, &compact, post_zone, eastward)?;
        }
    }

    // close chains and validate everything mechanically
    let mut snakes = Vec::new();
    for (li, chain) in chains.into_iter().enumerate() {
        let color = chain.color;
        let snake = chain.finish();
        snake
            .validate()
            .map_err(|e| PlanError::BadSnake(color, e.to_string()))?;
        if snake.width() < lanes[li].width {
            return Err(PlanError::BadSnake(
                color,
                format!("width {} below required {}", snake.width(), lanes[li].width),
            ));
        }
        for c in &snake.corridors {
            if !q0_plus.contains_subgrid(&c.0) {
                return Err(PlanError::BadSnake(
                    color,
                    format!("corridor {} leaves {q0_plus}", c.0),
                ));
            }
        }
        snakes.push((color, snake));
    }
    // same-level snakes must be pairwise disjoint
    for i in 0..snakes.len() {
        for j in (i + 1)..snakes.len() {
            if snakes[i].1.intersects(&snakes[j].1) {
                let clash = snakes[i]
                    .1
                    .corridors
                    .iter()
                    .find_map(|a| {
                        snakes[j]
                            .1
                            .corridors
                            .iter()
                            .find_map(|b| a.0.intersect(&b.0))
                    })
                    .map(|g| Coord::new(g.rows.start, g.cols.start))
                    .unwrap_or(Coord::new(0, 0));
                return Err(PlanError::Occupancy(snakes[i].0, snakes[j].0, clash));
            }
        }
    }
    // every owner's square must be a corridor of its snake
    for site in sites {
        let (_, snake) = &snakes[site.owner];
        if !snake.contains_corridor(&site.square_plus) {
            return Err(PlanError::BadSnake(
                lanes[site.owner].color,
                format!("square {} missing from snake", site.square_plus),
            ));
        }
    }
    Ok(LevelPlan {
        level,
        snakes,
        portals,
    })
}

/// Strip zone at the margin side used by the U-turn into band `bi`.
fn band_turn_zone(
    sites: &[SiteSpec],
    band_sites: &[usize],
    bands: &[(Interval, Vec<usize>)],
    bi: usize,
    west: bool,
    w_total: u32,
    q0_plus: SubGrid,
) -> Result<Interval, PlanError> {
    // the strip must clear both the previous and the current band's sites
    let prev = &bands[bi - 1].1;
    let edge = |list: &[usize], west: bool| -> u32 {
        if west {
            list.iter()
                .map(|&si| sites[si].square_plus.cols.start)
                .min()
                .unwrap_or(q0_plus.cols.end)
        } else {
            list.iter()
                .map(|&si| sites[si].square_plus.cols.end)
                .max()
                .unwrap_or(q0_plus.cols.start)
        }
    };
    // keep the turn strips clear of the outermost site staircase blocks
    let s_max = w_total; // conservative: blocks reach w_total + s_max past squares
    if west {
        let lim = edge(band_sites, true).min(edge(prev, true));
        if lim <= q0_plus.cols.start + 2 * w_total + s_max + 8 {
            return spacing_err(format!("no west margin before col {lim}"));
        }
        let end = lim - w_total - s_max - 6;
        Ok(Interval::new(end + 1 - w_total, end))
    } else {
        let lim = edge(band_sites, false).max(edge(prev, false));
        let start = lim + w_total + s_max + 6;
        if start + w_total > q0_plus.cols.end {
            return spacing_err(format!("no east margin after col {lim}"));
        }
        Ok(Interval::new(start, start + w_total - 1))
    }
}

/// Move each lane from its current rows to `targets[pos]` with one vertical
/// strip per mover inside `zone` (allocated in travel order, up-movers by
/// ascending target then down-movers by descending target).
fn apply_staircase(
    chains: &mut [Chain],
    lanes: &[LaneSpec],
    order: &[usize],
    targets: &[Interval],
    zone: Interval,
    eastward: bool,
) -> Result<(), PlanError> {
    let mut movers: Vec<(usize, usize)> = Vec::new(); // (order pos, lane)
    for (pos, &li) in order.iter().enumerate() {
        if chains[li].rows() != targets[pos] {
            movers.push((pos, li));
        }
    }
    if movers.is_empty() {
        return Ok(());
    }
    let mut ups: Vec<(usize, usize)> = movers
        .iter()
        .copied()
        .filter(|&(pos, li)| targets[pos].start < chains[li].rows().start)
        .collect();
    let mut downs: Vec<(usize, usize)> = movers
        .iter()
        .copied()
        .filter(|&(pos, li)| targets[pos].start >= chains[li].rows().start)
        .collect();
    ups.sort_by_key(|&(pos, _)| targets[pos].start);
    downs.sort_by_key(|&(pos, _)| std::cmp::Reverse(targets[pos].start));
    let mut off = 0u32;
    let total: u32 = movers.iter().map(|&(_, li)| lanes[li].width).sum();
    if total > zone.len() {
        return spacing_err(format!(
            "staircase zone {zone} too narrow for {total} mover columns"
        ));
    }
    for &(pos, li) in ups.iter().chain(downs.iter()) {
        let wdt = lanes[li].width;
        let strip = if eastward {
            Interval::new(zone.start + off, zone.start + off + wdt - 1)
        } else {
            Interval::new(zone.end - off - wdt + 1, zone.end - off)
        };
        off += wdt;
        chains[li].jog_rows(targets[pos], strip);
    }
    Ok(())
}
