//! Planning under a per-customer cardinality cap.

pub mod discretize;
pub mod guess;
pub mod ptas;
pub mod relaxation;

use crate::brute::best_plan;
use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::mnl::{Instance, Plan};

fn require_cap(instance: &Instance) -> Result<usize> {
    instance
        .cap()
        .ok_or_else(|| Error::Precondition("instance has no cardinality cap".into()))
}

/// Whether some 0/1 product-by-customer matrix has row sums at least the
/// visibility floors and column sums at most the cap. Decided by max-flow:
/// source to product `i` with capacity `l_i`, product to every customer with
/// capacity 1, customer to sink with capacity `k`.
pub fn check_feasibility(instance: &Instance) -> Result<bool> {
    let k = require_cap(instance)?;
    let (n, horizon) = (instance.n(), instance.horizon());
    let source = n + horizon;
    let sink = source + 1;
    let mut net = FlowNetwork::new(n + horizon + 2);
    let mut demand = 0u64;
    for i in 0..n {
        let l = instance.visibility(i) as u64;
        demand += l;
        if l > 0 {
            net.add_edge(source, i, l);
            for t in 0..horizon {
                net.add_edge(i, n + t, 1);
            }
        }
    }
    for t in 0..horizon {
        net.add_edge(n + t, sink, k as u64);
    }
    Ok(net.max_flow(source, sink) == demand)
}

/// Exact optimum by exhaustive search over plans with at most `k` products
/// per customer.
pub fn brute_force_apvc(instance: &Instance) -> Result<Plan> {
    let k = require_cap(instance)?;
    best_plan(instance, k)?.ok_or_else(|| {
        Error::Infeasible("visibility floors cannot be met under the cardinality cap".into())
    })
}

/// Expected number of purchases, `sum_t V(S_t) / (1 + V(S_t))`, under true weights.
pub fn objective(instance: &Instance, plan: &Plan) -> f64 {
    plan.assortments()
        .iter()
        .map(|s| {
            let v: f64 = s.members().iter().map(|&i| instance.weight(i)).sum();
            v / (1.0 + v)
        })
        .sum()
}
