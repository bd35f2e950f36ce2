//! Dependent rounding of fractional values on the edges of a bipartite graph.
//!
//! Each step picks a cycle (or, when the fractional edges form a forest, a
//! maximal path) of strictly fractional edges, splits it into two alternating
//! edge groups and moves mass between them by the largest shift that keeps
//! every value in `[0, 1]`, choosing the direction at random so each edge's
//! expectation is unchanged. Interior vertices keep their degree exactly; path
//! endpoints carry a single fractional edge, so their degree stays between
//! its floor and ceiling. The result satisfies:
//!
//! * marginals: `E[X_e] = x_e`;
//! * degree preservation: every vertex degree lands on the floor or ceiling
//!   of its fractional degree;
//! * negative correlation among the edges at any single vertex.

use rand::Rng;

use crate::error::{Error, Result};

/// Values within this distance of 0 or 1 are treated as integral.
pub const FRACTIONAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BipartiteEdge {
    pub left: usize,
    pub right: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FractionalBipartite {
    left: usize,
    right: usize,
    edges: Vec<BipartiteEdge>,
}

impl FractionalBipartite {
    /// Simple bipartite graph with `left` and `right` vertices; each edge is
    /// `(left vertex, right vertex, value in [0, 1])`.
    pub fn new(left: usize, right: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::with_capacity(edges.len());
        for (k, (u, v, x)) in edges.into_iter().enumerate() {
            if u >= left || v >= right {
                return Err(Error::Structure(format!(
                    "edge {k} joins ({u}, {v}) outside a {left} x {right} bipartition"
                )));
            }
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::Structure(format!("edge {k} has value {x} outside [0, 1]")));
            }
            if !seen.insert((u, v)) {
                return Err(Error::Structure(format!("parallel edges between ({u}, {v})")));
            }
            out.push(BipartiteEdge { left: u, right: v, value: x });
        }
        Ok(Self { left, right, edges: out })
    }

    pub fn left_count(&self) -> usize {
        self.left
    }

    pub fn right_count(&self) -> usize {
        self.right
    }

    pub fn edges(&self) -> &[BipartiteEdge] {
        &self.edges
    }

    /// Fractional degrees of the left and right vertices.
    pub fn fractional_degrees(&self) -> (Vec<f64>, Vec<f64>) {
        let mut l = vec![0.0; self.left];
        let mut r = vec![0.0; self.right];
        for e in &self.edges {
            l[e.left] += e.value;
            r[e.right] += e.value;
        }
        (l, r)
    }

    /// Degrees under a rounded edge selection.
    pub fn rounded_degrees(&self, selected: &[bool]) -> (Vec<usize>, Vec<usize>) {
        let mut l = vec![0; self.left];
        let mut r = vec![0; self.right];
        for (e, &s) in self.edges.iter().zip(selected) {
            if s {
                l[e.left] += 1;
                r[e.right] += 1;
            }
        }
        (l, r)
    }

    fn vertex_of_right(&self, v: usize) -> usize {
        self.left + v
    }
}

fn snap(x: f64) -> f64 {
    if x <= FRACTIONAL_TOL {
        0.0
    } else if x >= 1.0 - FRACTIONAL_TOL {
        1.0
    } else {
        x
    }
}

fn is_fractional(x: f64) -> bool {
    x > 0.0 && x < 1.0
}

/// Adjacency over strictly fractional edges: `(neighbour, edge)`.
fn fractional_adjacency(g: &FractionalBipartite, x: &[f64]) -> Vec<Vec<(usize, usize)>> {
    let mut adj = vec![Vec::new(); g.left + g.right];
    for (k, e) in g.edges.iter().enumerate() {
        if is_fractional(x[k]) {
            let (a, b) = (e.left, g.vertex_of_right(e.right));
            adj[a].push((b, k));
            adj[b].push((a, k));
        }
    }
    adj
}

/// Edges of some cycle, in walk order.
fn find_cycle(adj: &[Vec<(usize, usize)>]) -> Option<Vec<usize>> {
    const OPEN: u8 = 1;
    const DONE: u8 = 2;
    let mut state = vec![0u8; adj.len()];
    for root in 0..adj.len() {
        if state[root] != 0 || adj[root].is_empty() {
            continue;
        }
        state[root] = OPEN;
        // (vertex, edge used to reach it, next neighbour to try)
        let mut stack = vec![(root, usize::MAX, 0usize)];
        while let Some(top) = stack.last_mut() {
            let (u, parent_edge, idx) = *top;
            if idx == adj[u].len() {
                state[u] = DONE;
                stack.pop();
                continue;
            }
            top.2 += 1;
            let (w, e) = adj[u][idx];
            if e == parent_edge {
                continue;
            }
            match state[w] {
                0 => {
                    state[w] = OPEN;
                    stack.push((w, e, 0));
                }
                OPEN => {
                    let pos = stack.iter().position(|s| s.0 == w).expect("open vertex on stack");
                    let mut cycle: Vec<usize> = stack[pos + 1..].iter().map(|s| s.1).collect();
                    cycle.push(e);
                    return Some(cycle);
                }
                _ => {}
            }
        }
    }
    None
}

/// Edges of a maximal path in a forest, starting from a leaf.
fn find_path(adj: &[Vec<(usize, usize)>]) -> Option<Vec<usize>> {
    let start = (0..adj.len()).find(|&v| adj[v].len() == 1)?;
    let mut path = Vec::new();
    let (mut cur, mut prev_edge) = (start, usize::MAX);
    while let Some(&(w, e)) = adj[cur].iter().find(|&&(_, e)| e != prev_edge) {
        path.push(e);
        prev_edge = e;
        cur = w;
    }
    Some(path)
}

/// Rounds every edge value to 0 or 1. Returns the selection per edge, in edge order.
pub fn round<R: Rng + ?Sized>(g: &FractionalBipartite, rng: &mut R) -> Vec<bool> {
    let mut x: Vec<f64> = g.edges.iter().map(|e| snap(e.value)).collect();
    loop {
        let adj = fractional_adjacency(g, &x);
        let Some(walk) = find_cycle(&adj).or_else(|| find_path(&adj)) else {
            break;
        };
        // even positions move up together, odd positions down (or vice versa)
        let mut up_room = f64::INFINITY;
        let mut down_room = f64::INFINITY;
        for (pos, &e) in walk.iter().enumerate() {
            if pos % 2 == 0 {
                up_room = up_room.min(1.0 - x[e]);
                down_room = down_room.min(x[e]);
            } else {
                up_room = up_room.min(x[e]);
                down_room = down_room.min(1.0 - x[e]);
            }
        }
        let shift = if rng.random::<f64>() * (up_room + down_room) < down_room {
            up_room
        } else {
            -down_room
        };
        for (pos, &e) in walk.iter().enumerate() {
            let delta = if pos % 2 == 0 { shift } else { -shift };
            x[e] = snap((x[e] + delta).clamp(0.0, 1.0));
        }
    }
    x.iter().map(|&v| v >= 0.5).collect()
}
