//! Compact LP for visibility-constrained planning, over purchase
//! probabilities `alpha[t][i]` (with `i = 0` the no-purchase option), and
//! plan extraction from an optimal basic solution.

use crate::error::{Error, Result};
use crate::lp::{LpModel, LpSolution, Relation};
use crate::mnl::{Assortment, Instance, Plan};

/// Membership threshold for extracting assortments; matches the LP
/// feasibility tolerance.
pub const ZERO_THRESHOLD: f64 = 1e-7;

/// Column layout: customer-major, no-purchase first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ApvLpVars {
    n: usize,
    horizon: usize,
}

/// Purchase option within one customer's block of columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    NoPurchase,
    Product(usize),
}

impl ApvLpVars {
    pub fn new(instance: &Instance) -> Self {
        Self { n: instance.n(), horizon: instance.horizon() }
    }

    pub fn len(&self) -> usize {
        (self.n + 1) * self.horizon
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Column of `alpha` for customer `t` (0-based).
    pub fn col(&self, outcome: Outcome, t: usize) -> usize {
        let offset = match outcome {
            Outcome::NoPurchase => 0,
            Outcome::Product(i) => i + 1,
        };
        t * (self.n + 1) + offset
    }

    pub fn outcome_of(&self, col: usize) -> (Outcome, usize) {
        let t = col / (self.n + 1);
        let outcome = match col % (self.n + 1) {
            0 => Outcome::NoPurchase,
            k => Outcome::Product(k - 1),
        };
        (outcome, t)
    }
}

/// `max sum_i p_i sum_t alpha_i^t` subject to
/// `sum_i alpha_i^t = 1`, `alpha_i^t = v_i alpha_0^t` for the first `l_i`
/// customers and `0 <= alpha_i^t <= v_i alpha_0^t` for the rest.
pub fn build_apv_lp(instance: &Instance) -> LpModel {
    let vars = ApvLpVars::new(instance);
    let mut model = LpModel::new();
    for col in 0..vars.len() {
        let obj = match vars.outcome_of(col).0 {
            Outcome::NoPurchase => 0.0,
            Outcome::Product(i) => instance.price(i),
        };
        model.add_var(obj, 0.0, f64::INFINITY);
    }
    for t in 0..instance.horizon() {
        let coeffs = (0..=instance.n()).map(|k| (t * (instance.n() + 1) + k, 1.0)).collect();
        model.add_row(coeffs, Relation::Eq, 1.0);
    }
    for i in 0..instance.n() {
        let v = instance.weight(i);
        for t in 0..instance.horizon() {
            let coeffs = vec![
                (vars.col(Outcome::Product(i), t), 1.0),
                (vars.col(Outcome::NoPurchase, t), -v),
            ];
            let relation = if t < instance.visibility(i) { Relation::Eq } else { Relation::Le };
            model.add_row(coeffs, relation, 0.0);
        }
    }
    model
}

/// Reads `S_t = {i : alpha_i^t > 0}` off an optimal basic solution of
/// [`build_apv_lp`] and checks the plan against the LP value.
pub fn extract_plan(instance: &Instance, sol: &LpSolution) -> Result<Plan> {
    let vars = ApvLpVars::new(instance);
    if !sol.is_optimal() {
        return Err(Error::Extraction(format!("LP status is {:?}", sol.status)));
    }
    if sol.x.len() != vars.len() {
        return Err(Error::Extraction(format!(
            "solution has {} values, the model has {} columns",
            sol.x.len(),
            vars.len()
        )));
    }

    let mut assortments = Vec::with_capacity(instance.horizon());
    for t in 0..instance.horizon() {
        let alpha0 = sol.x[vars.col(Outcome::NoPurchase, t)];
        let mut members = Vec::new();
        for i in 0..instance.n() {
            let a = sol.x[vars.col(Outcome::Product(i), t)];
            let full = instance.weight(i) * alpha0;
            if a > ZERO_THRESHOLD {
                if (a - full).abs() > ZERO_THRESHOLD {
                    return Err(Error::Extraction(format!(
                        "alpha for product {i}, customer {t} is {a}, strictly between 0 and {full}"
                    )));
                }
                members.push(i);
            }
        }
        assortments.push(Assortment::new(instance, members)?);
    }

    let plan = Plan::new(instance, assortments)?;
    if (plan.objective() - sol.value).abs() > 1e-6 {
        return Err(Error::Extraction(format!(
            "extracted plan earns {}, LP value is {}",
            plan.objective(),
            sol.value
        )));
    }
    Ok(plan)
}

/// Builds, solves and extracts in one call.
pub fn solve_apv_lp(instance: &Instance) -> Result<(Plan, LpSolution)> {
    let model = build_apv_lp(instance);
    let sol = crate::lp::solve_lp(&model)?;
    let plan = extract_plan(instance, &sol)?;
    Ok((plan, sol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apv::solve_apv;
    use crate::lp::{solve_lp, LpStatus};

    #[test]
    fn single_forced_product_has_one_feasible_point() {
        let inst = Instance::new(vec![2.0], vec![3.0], vec![1], 1, None).unwrap();
        let model = build_apv_lp(&inst);
        assert_eq!(model.num_vars(), 2);
        assert_eq!(model.count_rows(Relation::Eq), 2);
        let sol = solve_lp(&model).unwrap();
        assert!((sol.x[0] - 0.25).abs() < 1e-12);
        assert!((sol.x[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn row_counts() {
        let inst =
            Instance::new(vec![1.0, 2.0], vec![1.0, 1.0], vec![1, 2], 2, None).unwrap();
        let model = build_apv_lp(&inst);
        assert_eq!(model.num_vars(), 6);
        assert_eq!(model.count_rows(Relation::Eq), 2 + 3);
        assert_eq!(model.count_rows(Relation::Le), 4 - 3);
    }

    #[test]
    fn lp_value_and_extraction_on_the_forced_example() {
        let (m, horizon) = (25.0, 3);
        let inst =
            Instance::new(vec![1.0, 0.0], vec![1.0, m], vec![0, horizon], horizon, None).unwrap();
        let (plan, sol) = solve_apv_lp(&inst).unwrap();
        assert!((sol.value - horizon as f64 / (2.0 + m)).abs() < 1e-9);
        for s in plan.assortments() {
            assert_eq!(s.members(), &[0, 1]);
        }
    }

    #[test]
    fn no_floors_repeats_unconstrained_optimum() {
        let inst = Instance::new(vec![4.0, 2.0, 1.0], vec![0.3, 1.0, 2.0], vec![0; 3], 2, None)
            .unwrap();
        let (plan, _) = solve_apv_lp(&inst).unwrap();
        assert_eq!(plan, solve_apv(&inst));
    }

    #[test]
    fn non_vertex_solution_is_rejected() {
        let inst = Instance::new(vec![1.0], vec![1.0], vec![0], 1, None).unwrap();
        let sol = LpSolution {
            status: LpStatus::Optimal,
            value: 0.25,
            x: vec![0.75, 0.25],
            basis: vec![],
            row_duals: vec![],
            dual_bound: None,
        };
        assert!(matches!(extract_plan(&inst, &sol), Err(Error::Extraction(_))));
    }

    #[test]
    fn column_layout_round_trips() {
        let inst = Instance::new(vec![1.0; 3], vec![1.0; 3], vec![0; 3], 4, None).unwrap();
        let vars = ApvLpVars::new(&inst);
        for col in 0..vars.len() {
            let (o, t) = vars.outcome_of(col);
            assert_eq!(vars.col(o, t), col);
        }
    }
}
