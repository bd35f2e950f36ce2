//! Linear relaxation of a guess and the bipartite graph its solution is
//! rounded on.

use serde::Serialize;

use super::discretize::DiscretizedInstance;
use super::guess::{CustomerClass, Guess, GuessSpace, PatternCount};
use crate::error::Result;
use crate::lp::{solve_lp, LpModel, Relation};
use crate::mnl::Instance;
use crate::rounding::FractionalBipartite;

/// Values this close to 0 or 1 are cleaned to the integer before rounding.
pub const SNAP_TOL: f64 = 1e-7;

/// Column of `x[i][t]` in the relaxation.
pub fn column(n: usize, i: usize, t: usize) -> usize {
    t * n + i
}

/// `max sum_{t light} sum_i v_hat_i x_it` over `x in [0,1]^{n x T}` with
/// visibility floors, the cap, the guessed class counts (exact, or above the
/// star threshold), the guessed weight lower bounds and the light ceiling.
/// Rows for empty product classes are left out (their count is 0 by
/// construction).
pub fn build_relaxation(
    disc: &DiscretizedInstance,
    instance: &Instance,
    space: &GuessSpace,
    guess: &Guess,
) -> LpModel {
    let n = instance.n();
    let horizon = guess.horizon();
    let cap = instance.cap().unwrap_or(n);
    let mut model = LpModel::new();
    for t in 0..horizon {
        let light = guess.customer(space, t).class == CustomerClass::Light;
        for i in 0..n {
            let obj = if light { disc.rounded_weight(i) } else { 0.0 };
            model.add_var(obj, 0.0, 1.0);
        }
    }

    for i in 0..n {
        let coeffs = (0..horizon).map(|t| (column(n, i, t), 1.0)).collect();
        model.add_row(coeffs, Relation::Ge, instance.visibility(i) as f64);
    }
    for t in 0..horizon {
        let pair = guess.customer(space, t);
        let all = |w: &dyn Fn(usize) -> f64| -> Vec<(usize, f64)> {
            (0..n).map(|i| (column(n, i, t), w(i))).collect()
        };
        model.add_row(all(&|_| 1.0), Relation::Le, cap as f64);
        for q in 0..disc.class_count() {
            let members = disc.class_members(q);
            if members.is_empty() {
                continue;
            }
            let coeffs = members.iter().map(|&i| (column(n, i, t), 1.0)).collect();
            match pair.pattern.count(q) {
                PatternCount::Exact(c) => model.add_row(coeffs, Relation::Eq, c as f64),
                PatternCount::Star => {
                    model.add_row(coeffs, Relation::Ge, (disc.star_threshold() + 1) as f64)
                }
            };
        }
        let weighted = all(&|i| disc.rounded_weight(i));
        if pair.class == CustomerClass::Light {
            model.add_row(weighted, Relation::Le, disc.eps());
        } else {
            model.add_row(weighted, Relation::Ge, pair.lower);
        }
    }
    model
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelaxationSolution {
    /// `x[t * n + i]`, cleaned to exact 0/1 within [`SNAP_TOL`].
    pub x: Vec<f64>,
    pub value: f64,
}

impl RelaxationSolution {
    pub fn get(&self, n: usize, i: usize, t: usize) -> f64 {
        self.x[column(n, i, t)]
    }
}

/// Solves the relaxation of a guess; `None` when it is infeasible.
pub fn solve_relaxation(
    disc: &DiscretizedInstance,
    instance: &Instance,
    space: &GuessSpace,
    guess: &Guess,
) -> Result<Option<RelaxationSolution>> {
    let model = build_relaxation(disc, instance, space, guess);
    let sol = solve_lp(&model)?;
    if !sol.is_optimal() {
        return Ok(None);
    }
    let x = sol
        .x
        .iter()
        .map(|&v| {
            if v <= SNAP_TOL {
                0.0
            } else if v >= 1.0 - SNAP_TOL {
                1.0
            } else {
                v
            }
        })
        .collect();
    Ok(Some(RelaxationSolution { x, value: sol.value }))
}

/// Right-hand vertices of the rounding graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RightNode {
    /// An unbounded customer.
    Customer(usize),
    /// Product class `q` of a bounded customer `t`.
    Class(usize, usize),
}

/// Products on the left; each edge carries `x[i][t]` for one `(i, t)` pair.
#[derive(Debug, Clone)]
pub struct RoundingGraph {
    pub graph: FractionalBipartite,
    pub edge_pairs: Vec<(usize, usize)>,
    pub right: Vec<RightNode>,
}

pub fn build_bipartite(
    disc: &DiscretizedInstance,
    space: &GuessSpace,
    guess: &Guess,
    relaxed: &RelaxationSolution,
) -> Result<RoundingGraph> {
    let n = disc.n();
    let horizon = guess.horizon();
    let mut right = Vec::new();
    // first right vertex of each customer
    let mut base = Vec::with_capacity(horizon);
    for t in 0..horizon {
        base.push(right.len());
        if guess.customer(space, t).pattern.is_bounded() {
            right.extend((0..disc.class_count()).map(|q| RightNode::Class(t, q)));
        } else {
            right.push(RightNode::Customer(t));
        }
    }

    let mut edges = Vec::with_capacity(n * horizon);
    let mut edge_pairs = Vec::with_capacity(n * horizon);
    for t in 0..horizon {
        let bounded = matches!(right[base[t]], RightNode::Class(..));
        for i in 0..n {
            let v = if bounded { base[t] + disc.class_of(i) } else { base[t] };
            edges.push((i, v, relaxed.get(n, i, t).clamp(0.0, 1.0)));
            edge_pairs.push((i, t));
        }
    }
    let graph = FractionalBipartite::new(n, right.len(), edges)?;
    Ok(RoundingGraph { graph, edge_pairs, right })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apvc::discretize::discretize;
    use crate::apvc::guess::{GuessSpace, PackingPattern};

    fn setup(
        weights: Vec<f64>,
        floors: Vec<usize>,
        horizon: usize,
        cap: usize,
    ) -> (Instance, DiscretizedInstance, GuessSpace) {
        let n = weights.len();
        let inst = Instance::new(vec![1.0; n], weights, floors, horizon, Some(cap)).unwrap();
        let disc = discretize(&inst, 0.75).unwrap();
        let space = GuessSpace::new(&disc, &inst).unwrap();
        (inst, disc, space)
    }

    fn find_pair(space: &GuessSpace, class: CustomerClass, counts: &[PatternCount]) -> usize {
        let pattern = PackingPattern::new(counts.to_vec());
        space
            .pairs()
            .iter()
            .position(|p| p.class == class && p.pattern == pattern)
            .unwrap()
    }

    #[test]
    fn all_light_empty_guess_is_the_zero_solution() {
        let (inst, disc, space) = setup(vec![0.1, 0.2], vec![0, 0], 2, 2);
        let zero = vec![PatternCount::Exact(0); disc.class_count()];
        let slot = find_pair(&space, CustomerClass::Light, &zero);
        let guess = Guess::new(vec![slot, slot]);
        let sol = solve_relaxation(&disc, &inst, &space, &guess).unwrap().unwrap();
        assert_eq!(sol.value, 0.0);
        assert!(sol.x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn row_counts() {
        // classes: 0.1 -> D_0, 1.0 -> a middle class, 3.0 -> D_Q
        let (inst, disc, space) = setup(vec![0.1, 1.0, 3.0], vec![1, 0, 0], 2, 2);
        let nonempty = (0..disc.class_count()).filter(|&q| !disc.class_members(q).is_empty()).count();
        assert_eq!(nonempty, 3);
        let guess = Guess::new(vec![0, 0]);
        let model = build_relaxation(&disc, &inst, &space, &guess);
        assert_eq!(model.num_vars(), 3 * 2);
        // n visibility rows, then per customer: cap, one per nonempty class, one weight row
        assert_eq!(model.num_rows(), 3 + 2 * (1 + nonempty + 1));
    }

    #[test]
    fn bounded_customers_get_one_vertex_per_class() {
        let (inst, disc, space) = setup(vec![0.1, 1.0, 3.0], vec![1, 1, 0], 2, 2);
        let mut counts = vec![PatternCount::Exact(0); disc.class_count()];
        counts[disc.class_of(0)] = PatternCount::Exact(1);
        counts[disc.class_of(1)] = PatternCount::Exact(1);
        let slot = find_pair(&space, CustomerClass::Medium(1), &counts);
        let guess = Guess::new(vec![slot, slot]);
        let sol = solve_relaxation(&disc, &inst, &space, &guess).unwrap().unwrap();
        let g = build_bipartite(&disc, &space, &guess, &sol).unwrap();
        assert_eq!(g.right.len(), 2 * disc.class_count());
        assert_eq!(g.graph.edges().len(), 3 * 2);
        let (_, right_deg) = g.graph.fractional_degrees();
        for (v, node) in g.right.iter().enumerate() {
            if let RightNode::Class(_, q) = *node {
                let want = match counts[q] {
                    PatternCount::Exact(c) => c as f64,
                    PatternCount::Star => unreachable!(),
                };
                assert!((right_deg[v] - want).abs() < 1e-7);
            }
        }
    }
}
