//! Node-capacitated max flow on sub-regions of the grid, used to realize
//! vertex-disjoint path sets (in-snake routing, connector fans, lifts).
//!
//! Vertices are split into in/out halves with unit capacity; augmentation is
//! plain BFS, deterministic for a fixed region and terminal order.

use crate::grid::{Coord, GridPath};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// Find the maximum set of vertex-disjoint paths from `sources` to `sinks`
/// inside `region`. Each source/sink is used at most once. Returns one path
/// per routed source, starting at a source and ending at some sink.
pub fn disjoint_paths(
    region: &BTreeSet<Coord>,
    sources: &[Coord],
    sinks: &[Coord],
    side: u32,
) -> Vec<GridPath> {
    let index: BTreeMap<Coord, usize> = region.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let n = region.len();
    if n == 0 || sources.is_empty() || sinks.is_empty() {
        return Vec::new();
    }
    let coords: Vec<Coord> = region.iter().copied().collect();
    // node ids: 2*v (in), 2*v+1 (out), source S = 2n, sink T = 2n+1
    let s_node = 2 * n;
    let t_node = 2 * n + 1;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); 2 * n + 2];
    // edge list: to, cap; reverse edge at idx^1
    let mut eto: Vec<usize> = Vec::new();
    let mut ecap: Vec<i32> = Vec::new();
    let add_edge = |adj: &mut Vec<Vec<usize>>,
                    eto: &mut Vec<usize>,
                    ecap: &mut Vec<i32>,
                    a: usize,
                    b: usize| {
        adj[a].push(eto.len());
        eto.push(b);
        ecap.push(1);
        adj[b].push(eto.len());
        eto.push(a);
        ecap.push(0);
    };
    for (i, &c) in coords.iter().enumerate() {
        add_edge(&mut adj, &mut eto, &mut ecap, 2 * i, 2 * i + 1);
        for nb in c.neighbors(side) {
            if let Some(&j) = index.get(&nb) {
                add_edge(&mut adj, &mut eto, &mut ecap, 2 * i + 1, 2 * j);
            }
        }
    }
    let mut sink_set = BTreeSet::new();
    for &s in sources {
        if let Some(&i) = index.get(&s) {
            add_edge(&mut adj, &mut eto, &mut ecap, s_node, 2 * i);
        }
    }
    for &t in sinks {
        if let Some(&i) = index.get(&t) {
            if sink_set.insert(t) {
                add_edge(&mut adj, &mut eto, &mut ecap, 2 * i + 1, t_node);
            }
        }
    }
    // BFS augmentation
    loop {
        let mut prev_edge: Vec<Option<usize>> = vec![None; 2 * n + 2];
        let mut visited = vec![false; 2 * n + 2];
        let mut queue = VecDeque::new();
        visited[s_node] = true;
        queue.push_back(s_node);
        let mut reached = false;
        while let Some(u) = queue.pop_front() {
            if u == t_node {
                reached = true;
                break;
            }
            for &e in &adj[u] {
                if ecap[e] > 0 && !visited[eto[e]] {
                    visited[eto[e]] = true;
                    prev_edge[eto[e]] = Some(e);
                    queue.push_back(eto[e]);
                }
            }
        }
        if !reached {
            break;
        }
        let mut u = t_node;
        while u != s_node {
            let e = prev_edge[u].unwrap();
            ecap[e] -= 1;
            ecap[e ^ 1] += 1;
            u = eto[e ^ 1];
        }
    }
    // extract paths by walking saturated edges from each routed source
    let mut used_out_edge: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        for &e in &adj[2 * i + 1] {
            // forward edges from out-node with flow: cap 0 and even index
            if e % 2 == 0 && ecap[e] == 0 && eto[e] != 2 * i {
                used_out_edge[i] = Some(e);
                break;
            }
        }
    }
    let mut paths = Vec::new();
    for &s in sources {
        let Some(&si) = index.get(&s) else { continue };
        // source routed iff the s->in edge is saturated
        let mut routed = false;
        for &e in &adj[s_node] {
            if e % 2 == 0 && eto[e] == 2 * si && ecap[e] == 0 {
                routed = true;
            }
        }
        if !routed {
            continue;
        }
        let mut path = vec![s];
        let mut cur = si;
        for _ in 0..=n {
            match used_out_edge[cur] {
                Some(e) if eto[e] != t_node => {
                    let next = eto[e] / 2;
                    path.push(coords[next]);
                    cur = next;
                }
                _ => break,
            }
        }
        assert!(path.len() <= n, "flow walk failed to terminate");
        paths.push(GridPath::new(path));
    }
    paths
}

/// Single shortest path between two cells of a region (BFS), if one exists.
pub fn bfs_path(region: &BTreeSet<Coord>, from: Coord, to: Coord, side: u32) -> Option<GridPath> {
    if !region.contains(&from) || !region.contains(&to) {
        return None;
    }
    if from == to {
        return Some(GridPath::new(vec![from]));
    }
    let mut prev: BTreeMap<Coord, Coord> = BTreeMap::new();
    let mut queue = VecDeque::new();
    queue.push_back(from);
    prev.insert(from, from);
    while let Some(u) = queue.pop_front() {
        if u == to {
            break;
        }
        for nb in u.neighbors(side) {
            if region.contains(&nb) && !prev.contains_key(&nb) {
                prev.insert(nb, u);
                queue.push_back(nb);
            }
        }
    }
    if !prev.contains_key(&to) {
        return None;
    }
    let mut path = vec![to];
    let mut cur = to;
    while cur != from {
        cur = prev[&cur];
        path.push(cur);
    }
    path.reverse();
    Some(GridPath::new(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SubGrid;

    fn full_region(side: u32) -> BTreeSet<Coord> {
        SubGrid::from_bounds(1, side, 1, side)
            .iter_vertices()
            .collect()
    }

    #[test]
    fn routes_parallel_columns() {
        let region = full_region(5);
        let sources = vec![Coord::new(1, 1), Coord::new(1, 3), Coord::new(1, 5)];
        let sinks = vec![Coord::new(5, 1), Coord::new(5, 3), Coord::new(5, 5)];
        let paths = disjoint_paths(&region, &sources, &sinks, 5);
        assert_eq!(paths.len(), 3);
        let mut seen = BTreeSet::new();
        for p in &paths {
            p.well_formed().unwrap();
            for v in &p.vertices {
                assert!(seen.insert(*v), "vertex shared across paths");
            }
        }
    }

    #[test]
    fn capacity_limited_by_width() {
        // a 2-wide corridor carries at most 2 disjoint paths
        let region: BTreeSet<Coord> = SubGrid::from_bounds(1, 5, 1, 2).iter_vertices().collect();
        let sources = vec![Coord::new(1, 1), Coord::new(1, 2)];
        let sinks = vec![Coord::new(5, 1), Coord::new(5, 2)];
        let paths = disjoint_paths(&region, &sources, &sinks, 5);
        assert_eq!(paths.len(), 2);
    }

    #[test]
    fn bfs_simple() {
        let region = full_region(4);
        let p = bfs_path(&region, Coord::new(1, 1), Coord::new(4, 4), 4).unwrap();
        assert_eq!(p.first(), Some(Coord::new(1, 1)));
        assert_eq!(p.last(), Some(Coord::new(4, 4)));
        assert_eq!(p.len(), 7);
    }
}
