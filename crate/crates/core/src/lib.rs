//! Node-disjoint path routing in square grids with sources on the boundary:
//! hierarchical square systems, the square-coloring LP with randomized
//! rounding, snake-based routing, the general boundary reduction, wall-graph
//! adaptation, hard-instance generation, and exact oracles.

pub mod farplan;
pub mod farroute;
pub mod flow;
pub mod grid;
pub mod hierarchy;
pub mod hsc;
pub mod instances;
pub mod io;
pub mod lp;
pub mod oracle;
pub mod reduction;
pub mod snake;
pub mod spaced;
pub mod svg;
pub mod transform;
pub mod wall;

pub use grid::{
    derive_params, manhattan_dist, manhattan_dist_sets, verify_routing, Coord, GridInstance,
    GridPath, Interval, ParamOverrides, Params, PolylogOverrides, Routing, SubGrid, Verdict,
};
