//! Corridors and snakes: validation, width, routing inside a snake, and
//! snake composition.

use crate::flow::disjoint_paths;
use crate::grid::{Coord, GridPath, Interval, SubGrid};
use std::collections::BTreeSet;

/// A corridor is a sub-grid; its width is the smaller dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Corridor(pub SubGrid);

impl Corridor {
    pub fn width(&self) -> u32 {
        self.0.rows.len().min(self.0.cols.len())
    }

    /// The four boundary edges as (is_row, fixed index, span).
    pub fn boundary_edges(&self) -> [BoundaryEdge; 4] {
        let g = self.0;
        [
            BoundaryEdge {
                horizontal: true,
                at: g.rows.start,
                span: g.cols,
            },
            BoundaryEdge {
                horizontal: true,
                at: g.rows.end,
                span: g.cols,
            },
            BoundaryEdge {
                horizontal: false,
                at: g.cols.start,
                span: g.rows,
            },
            BoundaryEdge {
                horizontal: false,
                at: g.cols.end,
                span: g.rows,
            },
        ]
    }
}

/// One boundary edge of a corridor: a row segment or a column segment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub horizontal: bool,
    pub at: u32,
    pub span: Interval,
}

impl BoundaryEdge {
    pub fn contains(&self, v: Coord) -> bool {
        if self.horizontal {
            v.row == self.at && self.span.contains(v.col)
        } else {
            v.col == self.at && self.span.contains(v.row)
        }
    }

    pub fn vertices(&self) -> Vec<Coord> {
        if self.horizontal {
            (self.span.start..=self.span.end)
                .map(|c| Coord::new(self.at, c))
                .collect()
        } else {
            (self.span.start..=self.span.end)
                .map(|r| Coord::new(r, self.at))
                .collect()
        }
    }
}

#[derive(thiserror::Error, Debug, PartialEq, Eq)]
pub enum SnakeError {
    #[error("snake has no corridors")]
    Empty,
    #[error("corridors {0} and {1} are not internally disjoint")]
    NotInternallyDisjoint(usize, usize),
    #[error("non-consecutive corridors {0} and {1} intersect")]
    NonConsecutiveTouch(usize, usize),
    #[error("consecutive corridors {0} and {1} do not intersect")]
    ConsecutiveDisjoint(usize, usize),
    #[error("terminal set sizes {a} and {b} differ")]
    SizeMismatch { a: usize, b: usize },
    #[error("terminal sets of size {size} exceed width {width} minus 2")]
    CapacityViolation { size: usize, width: u32 },
    #[error("terminals do not lie on a single boundary edge of the end corridor")]
    TerminalsOffEdge,
    #[error("flow routed only {got} of {want} terminal pairs")]
    FlowShort { got: usize, want: usize },
    #[error("snakes are not composable: shared boundary holds {got} < {need} vertices")]
    NotComposable { got: u64, need: u64 },
}

/// Is the rectangle `i` entirely within the boundary frame of rectangle `r`?
fn within_frame(i: &SubGrid, r: &SubGrid) -> bool {
    let rows_on_frame = (i.rows.start == i.rows.end
        && (i.rows.start == r.rows.start || i.rows.start == r.rows.end))
        || (i.rows.start == r.rows.start && i.rows.end == r.rows.end && r.rows.len() <= 2);
    let cols_on_frame = (i.cols.start == i.cols.end
        && (i.cols.start == r.cols.start || i.cols.start == r.cols.end))
        || (i.cols.start == r.cols.start && i.cols.end == r.cols.end && r.cols.len() <= 2);
    rows_on_frame || cols_on_frame
}

/// Are two corridors internally disjoint (shared vertices on both boundaries)?
pub fn internally_disjoint(a: &SubGrid, b: &SubGrid) -> bool {
    match a.intersect(b) {
        None => true,
        Some(i) => within_frame(&i, a) && within_frame(&i, b),
    }
}

/// An ordered chain of internally disjoint corridors, neighbors iff
/// consecutive.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Snake {
    pub corridors: Vec<Corridor>,
}

impl Snake {
    pub fn new(corridors: Vec<Corridor>) -> Self {
        Snake { corridors }
    }

    pub fn single(g: SubGrid) -> Self {
        Snake {
            corridors: vec![Corridor(g)],
        }
    }

    pub fn len(&self) -> usize {
        self.corridors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.corridors.is_empty()
    }

    pub fn first(&self) -> &Corridor {
        &self.corridors[0]
    }

    pub fn last(&self) -> &Corridor {
        self.corridors.last().unwrap()
    }

    pub fn contains(&self, v: Coord) -> bool {
        self.corridors.iter().any(|c| c.0.contains(v))
    }

    pub fn contains_corridor(&self, g: &SubGrid) -> bool {
        self.corridors.iter().any(|c| c.0 == *g)
    }

    pub fn vertices(&self) -> BTreeSet<Coord> {
        let mut s = BTreeSet::new();
        for c in &self.corridors {
            s.extend(c.0.iter_vertices());
        }
        s
    }

    pub fn vertex_count_bound(&self) -> u64 {
        self.corridors.iter().map(|c| c.0.vertex_count()).sum()
    }

    /// min over corridor widths and consecutive-overlap sizes.
    pub fn width(&self) -> u32 {
        let mut w = self.corridors.iter().map(|c| c.width()).min().unwrap_or(0);
        for pair in self.corridors.windows(2) {
            let overlap = pair[0]
                .0
                .intersect(&pair[1].0)
                .map(|i| i.vertex_count())
                .unwrap_or(0);
            w = w.min(overlap.min(u32::MAX as u64) as u32);
        }
        w
    }

    /// Check all structural invariants.
    pub fn validate(&self) -> Result<(), SnakeError> {
        if self.corridors.is_empty() {
            return Err(SnakeError::Empty);
        }
        for i in 0..self.corridors.len() {
            for j in (i + 1)..self.corridors.len() {
                let inter = self.corridors[i].0.intersect(&self.corridors[j].0);
                if j == i + 1 {
                    if inter.is_none() {
                        return Err(SnakeError::ConsecutiveDisjoint(i, j));
                    }
                    if !internally_disjoint(&self.corridors[i].0, &self.corridors[j].0) {
                        return Err(SnakeError::NotInternallyDisjoint(i, j));
                    }
                } else if inter.is_some() {
                    return Err(SnakeError::NonConsecutiveTouch(i, j));
                }
            }
        }
        Ok(())
    }

    /// Do two snakes share any vertex?
    pub fn intersects(&self, other: &Snake) -> bool {
        self.corridors.iter().any(|a| {
            other
                .corridors
                .iter()
                .any(|b| a.0.intersect(&b.0).is_some())
        })
    }
}

/// Route |A| node-disjoint paths from A (on one boundary edge of the first
/// corridor) to distinct vertices of A' (on one boundary edge of the last
/// corridor), inside the snake. Requires |A| = |A'| <= width - 2.
pub fn route_in_snake(
    snake: &Snake,
    a: &[Coord],
    a_prime: &[Coord],
    side: u32,
) -> Result<Vec<GridPath>, SnakeError> {
    snake.validate()?;
    if a.len() != a_prime.len() {
        return Err(SnakeError::SizeMismatch {
            a: a.len(),
            b: a_prime.len(),
        });
    }
    let w = snake.width();
    if a.len() as u64 + 2 > w as u64 {
        return Err(SnakeError::CapacityViolation {
            size: a.len(),
            width: w,
        });
    }
    if a.is_empty() {
        return Ok(Vec::new());
    }
    let on_single_edge = |corr: &Corridor, pts: &[Coord]| {
        corr.boundary_edges()
            .iter()
            .any(|e| pts.iter().all(|&p| e.contains(p)))
    };
    if !on_single_edge(snake.first(), a) || !on_single_edge(snake.last(), a_prime) {
        return Err(SnakeError::TerminalsOffEdge);
    }
    let region = snake.vertices();
    let paths = disjoint_paths(&region, a, a_prime, side);
    if paths.len() != a.len() {
        return Err(SnakeError::FlowShort {
            got: paths.len(),
            want: a.len(),
        });
    }
    debug_assert!(paths
        .iter()
        .all(|p| p.vertices.iter().all(|v| region.contains(v))));
    Ok(paths)
}

/// Concatenate two composable snakes. Composable: internally disjoint as
/// snakes, and some boundary edge of the last corridor of `a` shares at least
/// min(w_a, w_b) vertices with some boundary edge of the first corridor of
/// `b`. The result is validated and has width >= min(w_a, w_b).
pub fn compose(a: &Snake, b: &Snake) -> Result<Snake, SnakeError> {
    a.validate()?;
    b.validate()?;
    let need = a.width().min(b.width()) as u64;
    let mut best = 0u64;
    for ea in a.last().boundary_edges() {
        for eb in b.first().boundary_edges() {
            if ea.horizontal != eb.horizontal || ea.at != eb.at {
                continue;
            }
            if let Some(ov) = ea.span.intersect(&eb.span) {
                best = best.max(ov.len() as u64);
            }
        }
    }
    if best < need.max(1) {
        return Err(SnakeError::NotComposable {
            got: best,
            need: need.max(1),
        });
    }
    let mut corridors = a.corridors.clone();
    corridors.extend(b.corridors.iter().cloned());
    let joined = Snake::new(corridors);
    joined.validate()?;
    debug_assert!(joined.width() >= a.width().min(b.width()));
    Ok(joined)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::verify_routing;
    use crate::grid::{GridInstance, Routing};

    #[test]
    fn one_corridor_route() {
        let snake = Snake::single(SubGrid::from_bounds(1, 5, 1, 5));
        let paths = route_in_snake(&snake, &[Coord::new(1, 2)], &[Coord::new(5, 4)], 5).unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].first(), Some(Coord::new(1, 2)));
        assert_eq!(paths[0].last(), Some(Coord::new(5, 4)));
    }

    #[test]
    fn capacity_enforced() {
        // width 5: |A| = 4 = width - 1 must be rejected
        let snake = Snake::single(SubGrid::from_bounds(1, 5, 1, 5));
        let a: Vec<Coord> = (1..=4).map(|c| Coord::new(1, c)).collect();
        let b: Vec<Coord> = (1..=4).map(|c| Coord::new(5, c)).collect();
        assert!(matches!(
            route_in_snake(&snake, &a, &b, 5),
            Err(SnakeError::CapacityViolation { .. })
        ));
    }

    #[test]
    fn l_shaped_route_disjoint() {
        // two corridors: vertical 1..6 x 1..4, horizontal 6..9 x 1..12, width 4
        let snake = Snake::new(vec![
            Corridor(SubGrid::from_bounds(1, 6, 1, 4)),
            Corridor(SubGrid::from_bounds(6, 9, 1, 12)),
        ]);
        snake.validate().unwrap();
        assert_eq!(snake.width(), 4);
        let a = vec![Coord::new(1, 1), Coord::new(1, 3)];
        let b = vec![Coord::new(9, 10), Coord::new(9, 12)];
        let paths = route_in_snake(&snake, &a, &b, 12).unwrap();
        // check disjointness through the routing verifier
        let mut pairs = Vec::new();
        for p in &paths {
            pairs.push((p.first().unwrap(), p.last().unwrap()));
        }
        let inst = GridInstance::new(12, pairs, 0).unwrap();
        let routing = Routing::new(paths.into_iter().enumerate().collect());
        assert!(verify_routing(&inst, &routing).is_valid());
    }

    #[test]
    fn compose_stacked_corridors() {
        let a = Snake::single(SubGrid::from_bounds(1, 4, 1, 6));
        let b = Snake::single(SubGrid::from_bounds(4, 8, 1, 6));
        let joined = compose(&a, &b).unwrap();
        assert_eq!(joined.len(), 2);
        assert_eq!(joined.width(), 4);
    }

    #[test]
    fn compose_rejects_disjoint() {
        let a = Snake::single(SubGrid::from_bounds(1, 3, 1, 3));
        let b = Snake::single(SubGrid::from_bounds(7, 9, 7, 9));
        assert!(matches!(
            compose(&a, &b),
            Err(SnakeError::NotComposable { .. })
        ));
    }

    #[test]
    fn compose_width_is_min() {
        // widths 3 and 5, shared row of length 5 >= min
        let a = Snake::single(SubGrid::from_bounds(1, 3, 1, 5));
        let b = Snake::single(SubGrid::from_bounds(3, 8, 1, 5));
        let joined = compose(&a, &b).unwrap();
        assert_eq!(joined.width(), 3);
    }

    #[test]
    fn validate_rejects_nonconsecutive_touch() {
        let snake = Snake::new(vec![
            Corridor(SubGrid::from_bounds(1, 3, 1, 3)),
            Corridor(SubGrid::from_bounds(3, 6, 1, 3)),
            Corridor(SubGrid::from_bounds(1, 3, 2, 5)),
        ]);
        assert!(snake.validate().is_err());
    }
}
