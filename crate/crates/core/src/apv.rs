//! Exact planning with visibility floors.
//!
//! Customer `t` receives the expanded set of every product whose floor is at
//! least `t`. Those sets are nested, so the plan is built from the last
//! customer backwards, each step only extending the previous set.

use serde::Serialize;

use crate::brute;
use crate::error::{Error, Result};
use crate::mnl::{grow_by_price, Assortment, Instance, Plan, RevenueAccumulator};

/// Products grouped by visibility floor: `levels[t]` holds every product
/// with floor exactly `t`, for `t = 0..=T`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VisibilityPartition {
    levels: Vec<Vec<usize>>,
}

impl VisibilityPartition {
    pub fn new(instance: &Instance) -> Self {
        let mut levels = vec![Vec::new(); instance.horizon() + 1];
        for i in 0..instance.n() {
            levels[instance.visibility(i)].push(i);
        }
        Self { levels }
    }

    pub fn level(&self, t: usize) -> &[usize] {
        &self.levels[t]
    }

    pub fn levels(&self) -> &[Vec<usize>] {
        &self.levels
    }
}

/// Work counters from [`solve_apv_traced`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ApvTrace {
    /// Non-member products whose price was compared against the running revenue.
    pub inspections: usize,
}

pub fn solve_apv(instance: &Instance) -> Plan {
    solve_apv_traced(instance).0
}

pub fn solve_apv_traced(instance: &Instance) -> (Plan, ApvTrace) {
    let n = instance.n();
    let horizon = instance.horizon();
    let partition = VisibilityPartition::new(instance);

    let mut member = vec![false; n];
    let mut acc = RevenueAccumulator::new();
    // Everything before `cursor` in price order is either a member or was
    // forced in; products from `cursor` on have not been accepted yet.
    let mut cursor = 0;
    let mut trace = ApvTrace::default();
    let mut assortments = vec![Assortment::empty(); horizon];

    for t in (1..=horizon).rev() {
        for &i in partition.level(t) {
            if !member[i] {
                member[i] = true;
                acc.add(instance, i);
            }
        }
        let (pos, inspected) = grow_by_price(instance, &mut member, &mut acc, cursor);
        cursor = pos;
        trace.inspections += inspected;
        assortments[t - 1] =
            Assortment::from_mask(instance, &member).expect("mask sized to instance");
    }

    let plan = Plan::new(instance, assortments).expect("one assortment per customer");
    (plan, trace)
}

/// Exhaustive optimum, for instances whose plan space is within
/// [`brute::ENUMERATION_LIMIT`].
pub fn brute_force_apv(instance: &Instance) -> Result<Plan> {
    brute::best_plan(instance, instance.n())?
        .ok_or_else(|| Error::Infeasible("no plan meets the visibility floors".into()))
}
