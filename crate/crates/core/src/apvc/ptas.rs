//! The equal-price approximation scheme: discretize, enumerate guesses, solve
//! each guess's relaxation, round, and keep the best plan under true weights.

use log::{debug, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::discretize::{discretize, sandwich_check, DiscretizedInstance, Sandwich};
use super::guess::{Guess, GuessSpace};
use super::relaxation::{build_bipartite, solve_relaxation, RoundingGraph};
use crate::error::{Error, Result};
use crate::mnl::{Assortment, Instance, Plan};
use crate::par::{map_indexed, Execution};
use crate::rounding::round;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PtasConfig {
    pub epsilon: f64,
    pub seed: u64,
    /// Independent roundings per guess.
    pub reps: usize,
    pub guess_budget: u128,
    pub execution: Execution,
}

impl Default for PtasConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.5,
            seed: 0,
            reps: 20,
            guess_budget: 1_000_000,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PtasStats {
    pub pairs: usize,
    pub guesses: u128,
    pub admissible: usize,
    pub feasible: usize,
}

#[derive(Debug, Clone)]
struct Candidate {
    position: u128,
    guess: Guess,
    relaxed_value: f64,
    graph: RoundingGraph,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PtasOutcome {
    pub plan: Plan,
    /// Sales under true weights.
    pub sales: f64,
    pub sandwich: Sandwich,
    /// Position of the winning guess in enumeration order.
    pub guess_position: u128,
    pub rep: usize,
    /// Roundings rejected by the final feasibility check.
    pub rejected: usize,
}

/// Seed-independent part of the scheme: guesses whose relaxation is feasible,
/// with their rounding graphs. Rounding passes can be repeated with different
/// seeds without solving any LP again.
#[derive(Debug, Clone)]
pub struct PtasPlanner {
    instance: Instance,
    disc: DiscretizedInstance,
    space: GuessSpace,
    candidates: Vec<Candidate>,
    stats: PtasStats,
    execution: Execution,
}

impl PtasPlanner {
    pub fn new(instance: &Instance, epsilon: f64, guess_budget: u128, execution: Execution) -> Result<Self> {
        if instance.cap().is_none() {
            return Err(Error::Precondition("the scheme needs a cardinality cap".into()));
        }
        let disc = discretize(instance, epsilon)?;
        if !super::check_feasibility(instance)? {
            return Err(Error::Infeasible(
                "visibility floors cannot be met under the cardinality cap".into(),
            ));
        }
        let space = GuessSpace::new(&disc, instance)?;
        let guesses: Vec<(u128, Guess)> = space.enumerate(guess_budget)?.collect();

        let solved = map_indexed(execution, &guesses, |_, (position, guess)| {
            let Some(relaxed) = solve_relaxation(&disc, instance, &space, guess)? else {
                return Ok(None);
            };
            let graph = build_bipartite(&disc, &space, guess, &relaxed)?;
            Ok(Some(Candidate {
                position: *position,
                guess: guess.clone(),
                relaxed_value: relaxed.value,
                graph,
            }))
        });
        let mut candidates = Vec::new();
        for c in solved {
            if let Some(c) = c? {
                candidates.push(c);
            }
        }

        let stats = PtasStats {
            pairs: space.pairs().len(),
            guesses: space.guess_count(),
            admissible: guesses.len(),
            feasible: candidates.len(),
        };
        debug!("guess enumeration: {stats:?}");
        if candidates.is_empty() {
            return Err(Error::Infeasible("no guess has a feasible relaxation".into()));
        }
        Ok(Self { instance: instance.clone(), disc, space, candidates, stats, execution })
    }

    pub fn stats(&self) -> PtasStats {
        self.stats
    }

    pub fn discretized(&self) -> &DiscretizedInstance {
        &self.disc
    }

    pub fn space(&self) -> &GuessSpace {
        &self.space
    }

    /// `(position, guess, relaxation value)` of every guess with a feasible relaxation.
    pub fn feasible_guesses(&self) -> impl Iterator<Item = (u128, &Guess, f64)> + '_ {
        self.candidates.iter().map(|c| (c.position, &c.guess, c.relaxed_value))
    }

    /// Largest relaxation value over the feasible guesses.
    pub fn best_relaxed_value(&self) -> f64 {
        self.candidates.iter().map(|c| c.relaxed_value).fold(f64::NEG_INFINITY, f64::max)
    }

    fn plan_of(&self, candidate: &Candidate, selected: &[bool]) -> Result<Plan> {
        let mut members = vec![Vec::new(); self.instance.horizon()];
        for (&(i, t), &s) in candidate.graph.edge_pairs.iter().zip(selected) {
            if s {
                members[t].push(i);
            }
        }
        let assortments = members
            .into_iter()
            .map(|m| Assortment::new(&self.instance, m))
            .collect::<Result<Vec<_>>>()?;
        Plan::new(&self.instance, assortments)
    }

    /// Rounds every candidate `reps` times. Candidate `g` draws from stream
    /// `g` (its enumeration position) of a generator seeded with `seed`, so
    /// the result does not depend on scheduling. The best plan by true sales
    /// wins; ties go to the earliest guess, then the earliest repetition.
    pub fn round_best(&self, seed: u64, reps: usize) -> Result<PtasOutcome> {
        let reps = reps.max(1);
        let per_candidate = map_indexed(self.execution, &self.candidates, |_, c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c.position as u64);
            let mut best: Option<(f64, usize, Plan)> = None;
            let mut rejected = 0;
            for rep in 0..reps {
                let selected = round(&c.graph.graph, &mut rng);
                let plan = self.plan_of(c, &selected)?;
                if !plan.is_feasible(&self.instance) {
                    rejected += 1;
                    continue;
                }
                let sales = super::objective(&self.instance, &plan);
                if best.as_ref().is_none_or(|b| sales > b.0) {
                    best = Some((sales, rep, plan));
                }
            }
            Ok((c.position, best, rejected))
        });

        let mut winner: Option<(f64, u128, usize, Plan)> = None;
        let mut rejected = 0;
        for item in per_candidate {
            let (position, best, r) = item?;
            rejected += r;
            if let Some((sales, rep, plan)) = best {
                if winner.as_ref().is_none_or(|w| sales > w.0) {
                    winner = Some((sales, position, rep, plan));
                }
            }
        }
        if rejected > 0 {
            warn!("{rejected} roundings violated a constraint and were dropped");
        }
        let (sales, guess_position, rep, plan) = winner.ok_or_else(|| {
            Error::RoundingViolation("every rounding violated a visibility or cardinality constraint".into())
        })?;
        let sandwich = sandwich_check(&plan, &self.instance, &self.disc)?;
        Ok(PtasOutcome { plan, sales, sandwich, guess_position, rep, rejected })
    }
}

/// Discretize, guess, relax and round in one call.
pub fn solve_apvc_ptas(instance: &Instance, config: &PtasConfig) -> Result<PtasOutcome> {
    PtasPlanner::new(instance, config.epsilon, config.guess_budget, config.execution)?
        .round_best(config.seed, config.reps)
}
