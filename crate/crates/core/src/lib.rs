//! Assortment planning under the multinomial logit model with visibility
//! floors: every product must be offered to a minimum number of the `T`
//! customers.
//!
//! * [`mnl`] holds the instance model, revenue and expanded sets.
//! * [`apv`] solves the uncapped problem exactly; [`apv_lp`] reaches the same
//!   optimum through a compact LP solved by [`lp`].
//! * [`apvc`] covers the cardinality-capped problem: feasibility, an exhaustive
//!   oracle, and an approximation scheme for equal prices built on
//!   [`rounding`].
//! * [`pricing`] measures the revenue lost to the floors and splits it into
//!   per-product fees.
//! * [`instgen`] generates random instances and 3-PARTITION gadgets.

pub mod apv;
pub mod apv_lp;
pub mod apvc;
mod brute;
pub mod error;
mod flow;
pub mod instgen;
pub mod lp;
pub mod mnl;
pub mod par;
pub mod pricing;
pub mod rounding;

pub use apv::{brute_force_apv, solve_apv, solve_apv_traced, ApvTrace, VisibilityPartition};
pub use apv_lp::{build_apv_lp, extract_plan, solve_apv_lp, ApvLpVars};
pub use apvc::ptas::{solve_apvc_ptas, PtasConfig, PtasOutcome, PtasPlanner};
pub use apvc::{brute_force_apvc, check_feasibility};
pub use brute::ENUMERATION_LIMIT;
pub use error::{Error, Result};
pub use lp::{solve_lp, LpModel, LpSolution, LpStatus, Relation};
pub use mnl::{
    add_product_effect, choice_prob, expanded, revenue, unconstrained_optimum, Assortment, Choice,
    ExpandedResult, Instance, Plan,
};
pub use par::Execution;
pub use pricing::{fee_increment, fee_report, what_if, FeeReport};
