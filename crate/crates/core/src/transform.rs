//! Dihedral symmetries of the square grid, used to canonicalize which
//! boundary edge carries sources/destinations before calling the routers.

use crate::grid::{Coord, GridInstance, GridPath, Routing};

#[derive(Clone, Copy, PartialEq, Eq, Debug, PartialOrd, Ord)]
pub enum Edge {
    Top,
    Bottom,
    Left,
    Right,
}

/// A rotation (quarter turns clockwise) optionally preceded by a horizontal
/// mirror (columns reversed).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Sym {
    pub rot: u8,
    pub flip: bool,
    pub side: u32,
}

impl Sym {
    pub fn identity(side: u32) -> Self {
        Sym {
            rot: 0,
            flip: false,
            side,
        }
    }

    pub fn apply(&self, c: Coord) -> Coord {
        let mut v = c;
        if self.flip {
            v = Coord::new(v.row, self.side + 1 - v.col);
        }
        for _ in 0..self.rot % 4 {
            v = Coord::new(v.col, self.side + 1 - v.row);
        }
        v
    }

    pub fn invert(&self, c: Coord) -> Coord {
        let mut v = c;
        for _ in 0..self.rot % 4 {
            // inverse of one clockwise quarter turn
            v = Coord::new(self.side + 1 - v.col, v.row);
        }
        if self.flip {
            v = Coord::new(v.row, self.side + 1 - v.col);
        }
        v
    }

    pub fn edge_image(&self, e: Edge) -> Edge {
        let mut e = e;
        if self.flip {
            e = match e {
                Edge::Left => Edge::Right,
                Edge::Right => Edge::Left,
                other => other,
            };
        }
        for _ in 0..self.rot % 4 {
            e = match e {
                Edge::Top => Edge::Right,
                Edge::Right => Edge::Bottom,
                Edge::Bottom => Edge::Left,
                Edge::Left => Edge::Top,
            };
        }
        e
    }

    pub fn all(side: u32) -> impl Iterator<Item = Sym> {
        (0..4u8).flat_map(move |rot| {
            [false, true]
                .into_iter()
                .map(move |flip| Sym { rot, flip, side })
        })
    }

    /// Find a symmetry sending edge `a` to `ta` and edge `b` to `tb`.
    pub fn sending(side: u32, a: Edge, ta: Edge, b: Edge, tb: Edge) -> Option<Sym> {
        Sym::all(side).find(|s| s.edge_image(a) == ta && s.edge_image(b) == tb)
    }

    pub fn sending_one(side: u32, a: Edge, ta: Edge) -> Sym {
        Sym::all(side)
            .find(|s| !s.flip && s.edge_image(a) == ta)
            .expect("rotations cover all single-edge images")
    }

    pub fn apply_instance(&self, inst: &GridInstance) -> GridInstance {
        GridInstance {
            side: inst.side,
            pairs: inst
                .pairs
                .iter()
                .map(|&(s, t)| (self.apply(s), self.apply(t)))
                .collect(),
            seed: inst.seed,
        }
    }

    pub fn invert_routing(&self, r: &Routing) -> Routing {
        Routing::new(
            r.entries
                .iter()
                .map(|(i, p)| {
                    (
                        *i,
                        GridPath::new(p.vertices.iter().map(|&v| self.invert(v)).collect()),
                    )
                })
                .collect(),
        )
    }
}

/// Which boundary edge a vertex lies on, with the tie order top, bottom,
/// left, right.
pub fn edge_of(side: u32, v: Coord) -> Option<Edge> {
    if v.row == 1 {
        Some(Edge::Top)
    } else if v.row == side {
        Some(Edge::Bottom)
    } else if v.col == 1 {
        Some(Edge::Left)
    } else if v.col == side {
        Some(Edge::Right)
    } else {
        None
    }
}

/// Nearest boundary vertex, ties broken by smallest (row, col).
pub fn nearest_boundary(side: u32, v: Coord) -> Coord {
    let mut best = Coord::new(1, v.col);
    let mut best_d = v.row - 1;
    for cand in [
        (Coord::new(side, v.col), side - v.row),
        (Coord::new(v.row, 1), v.col - 1),
        (Coord::new(v.row, side), side - v.col),
    ] {
        if cand.1 < best_d || (cand.1 == best_d && cand.0 < best) {
            best = cand.0;
            best_d = cand.1;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotations_roundtrip() {
        for s in Sym::all(7) {
            for r in 1..=7 {
                for c in 1..=7 {
                    let v = Coord::new(r, c);
                    assert_eq!(s.invert(s.apply(v)), v);
                }
            }
        }
    }

    #[test]
    fn edge_images_match_coords() {
        for s in Sym::all(5) {
            let top = Coord::new(1, 3);
            let img = s.apply(top);
            assert_eq!(edge_of(5, img), Some(s.edge_image(Edge::Top)));
        }
    }

    #[test]
    fn nearest_boundary_ties() {
        // (2,5) with delta 1 on a 9-grid: nearest is the top (1,5)
        assert_eq!(nearest_boundary(9, Coord::new(2, 5)), Coord::new(1, 5));
        // center of 5x5: all sides distance 2, tie -> top (smallest row, col)
        assert_eq!(nearest_boundary(5, Coord::new(3, 3)), Coord::new(1, 3));
    }
}
