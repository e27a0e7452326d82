//! Deterministic SVG rendering of grids, routings, and snake plans.

use crate::farroute::SnakePlanOut;
use crate::grid::{GridInstance, Routing};
use std::fmt::Write as _;

const CELL: u32 = 10;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#e377c2",
];

fn x(col: u32) -> u32 {
    col * CELL
}

fn y(row: u32) -> u32 {
    row * CELL
}

/// Render the lattice, terminals, routed paths and (optionally) the snake
/// corridors of a plan. Byte-identical output for identical inputs.
pub fn render_svg(
    inst: &GridInstance,
    routing: Option<&Routing>,
    plan: Option<&SnakePlanOut>,
) -> String {
    let side = inst.side;
    let size = (side + 2) * CELL;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">"
    );
    let _ = writeln!(
        out,
        "<rect width=\"{size}\" height=\"{size}\" fill=\"white\"/>"
    );
    // lattice
    for i in 1..=side {
        let _ = writeln!(
            out,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#dddddd\" stroke-width=\"1\"/>",
            x(1),
            y(i),
            x(side),
            y(i)
        );
        let _ = writeln!(
            out,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#dddddd\" stroke-width=\"1\"/>",
            x(i),
            y(1),
            x(i),
            y(side)
        );
    }
    // snake corridors
    if let Some(plan) = plan {
        for level in &plan.levels {
            for (ci, (_, snake)) in level.snakes.iter().enumerate() {
                let fill = PALETTE[ci % PALETTE.len()];
                for c in &snake.corridors {
                    let g = c.0;
                    let _ = writeln!(
                        out,
                        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" fill-opacity=\"0.15\" stroke=\"{}\" stroke-opacity=\"0.4\"/>",
                        x(g.cols.start),
                        y(g.rows.start),
                        (g.cols.len() - 1).max(1) * CELL,
                        (g.rows.len() - 1).max(1) * CELL,
                        fill,
                        fill
                    );
                }
            }
        }
    }
    // routed paths
    if let Some(routing) = routing {
        for (idx, (pair, path)) in routing.entries.iter().enumerate() {
            let stroke = PALETTE[idx % PALETTE.len()];
            let mut points = String::new();
            for v in &path.vertices {
                let _ = write!(points, "{},{} ", x(v.col), y(v.row));
            }
            let _ = writeln!(
                out,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\" data-pair=\"{}\"/>",
                points.trim_end(),
                stroke,
                pair
            );
        }
    }
    // terminals
    for (i, &(s, t)) in inst.pairs.iter().enumerate() {
        let _ = writeln!(
            out,
            "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"black\"/><text x=\"{}\" y=\"{}\" font-size=\"7\">s{}</text>",
            x(s.col),
            y(s.row),
            x(s.col) + 4,
            y(s.row) - 2,
            i
        );
        let _ = writeln!(
            out,
            "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"none\" stroke=\"black\"/><text x=\"{}\" y=\"{}\" font-size=\"7\">t{}</text>",
            x(t.col),
            y(t.row),
            x(t.col) + 4,
            y(t.row) - 2,
            i
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Coord, GridPath};

    #[test]
    fn deterministic_and_counts_paths() {
        let inst = GridInstance::new(4, vec![(Coord::new(1, 1), Coord::new(4, 4))], 0).unwrap();
        let lattice_only = render_svg(&inst, None, None);
        assert_eq!(lattice_only, render_svg(&inst, None, None));
        assert_eq!(lattice_only.matches("<polyline").count(), 0);
        let r = Routing::new(vec![(
            0,
            GridPath::new(vec![Coord::new(1, 1), Coord::new(2, 1)]),
        )]);
        let with_path = render_svg(&inst, Some(&r), None);
        assert_eq!(with_path.matches("<polyline").count(), 1);
        assert_eq!(with_path, render_svg(&inst, Some(&r), None));
    }
}
