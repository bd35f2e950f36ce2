//! Revenue lost to visibility floors, and how it is billed to vendors.
//!
//! Product `i` contributes `C_i = sum_t [i in S_t] (p_i - R(S_t)) v_i` to the
//! constrained plan. Products with a negative contribution share the loss
//! `Delta` in proportion to `max(-C_i, 0)`.

use log::warn;
use serde::Serialize;

use crate::apv::solve_apv;
use crate::error::{Error, Result};
use crate::mnl::{expanded, revenues_tie, unconstrained_optimum, Assortment, Instance, Plan};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeeReport {
    /// `T * R(S*)` without floors.
    pub unconstrained: f64,
    /// Optimal revenue with floors.
    pub constrained: f64,
    pub delta: f64,
    pub contributions: Vec<f64>,
    pub fees: Vec<f64>,
}

impl FeeReport {
    /// `unconstrained / constrained`; infinite when the constrained plan earns nothing.
    pub fn ratio(&self) -> f64 {
        self.unconstrained / self.constrained
    }
}

fn negative_part(x: f64) -> f64 {
    (-x).max(0.0)
}

/// The report for a given optimal constrained plan.
fn report_for(instance: &Instance, plan: &Plan) -> FeeReport {
    let unconstrained = instance.horizon() as f64 * unconstrained_optimum(instance).expanded_revenue;
    let constrained = plan.objective();
    let mut contributions = vec![0.0; instance.n()];
    for s in plan.assortments() {
        let r = crate::mnl::revenue_unchecked(instance, s.members());
        for &i in s.members() {
            contributions[i] += (instance.price(i) - r) * instance.weight(i);
        }
    }

    let delta = if revenues_tie(unconstrained, constrained) {
        0.0
    } else {
        (unconstrained - constrained).max(0.0)
    };
    let negative: f64 = contributions.iter().map(|&c| negative_part(c)).sum();
    let fees = if delta == 0.0 {
        vec![0.0; instance.n()]
    } else if negative == 0.0 {
        warn!("loss of {delta} but no product contributes negatively; charging no fees");
        vec![0.0; instance.n()]
    } else {
        contributions.iter().map(|&c| negative_part(c) / negative * delta).collect()
    };

    FeeReport { unconstrained, constrained, delta, contributions, fees }
}

pub fn fee_report(instance: &Instance) -> FeeReport {
    report_for(instance, &solve_apv(instance))
}

/// Report and plan after raising product `i`'s floor by one. Only customer
/// `l_i + 1` changes: it receives the expanded set of its old assortment plus `i`.
fn raised(instance: &Instance, i: usize) -> Result<(Instance, Plan)> {
    instance.check_index(i)?;
    let floor = instance.visibility(i);
    if floor >= instance.horizon() {
        return Err(Error::CannotIncrease { product: i });
    }
    let bumped = instance.with_visibility(i, floor + 1)?;
    let plan = solve_apv(instance);
    let mut assortments = plan.assortments().to_vec();
    let seed = Assortment::new(
        instance,
        assortments[floor].members().iter().copied().chain(std::iter::once(i)),
    )?;
    assortments[floor] = expanded(&bumped, &seed)?.expanded_set;
    let plan = Plan::new(&bumped, assortments)?;
    Ok((bumped, plan))
}

/// Fee charged to product `i` once its floor is raised by one.
pub fn fee_increment(instance: &Instance, i: usize) -> Result<f64> {
    let (bumped, plan) = raised(instance, i)?;
    Ok(report_for(&bumped, &plan).fees[i])
}

/// Fee of product `i` now and after raising its floor, with both reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WhatIf {
    pub product: usize,
    pub fee_before: f64,
    pub fee_after: f64,
    pub before: FeeReport,
    pub after: FeeReport,
}

pub fn what_if(instance: &Instance, i: usize) -> Result<WhatIf> {
    let before = fee_report(instance);
    let (bumped, plan) = raised(instance, i)?;
    let after = report_for(&bumped, &plan);
    Ok(WhatIf { product: i, fee_before: before.fees[i], fee_after: after.fees[i], before, after })
}
