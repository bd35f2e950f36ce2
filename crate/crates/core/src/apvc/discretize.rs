//! Weight rounding for the equal-price problem.
//!
//! With accuracy `eps`, weights of at least `1/eps` drop to `1/eps`, weights
//! below `eps^5` are kept, and everything in between drops to the geometric
//! grid point `eps^5 (1+eps)^(q-1)` just below it. Products then fall into
//! classes `D_0..=D_Q`: `D_0` holds the kept small weights, `D_1..D_{Q-1}`
//! the grid points and `D_Q` the capped weights.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mnl::{Instance, Plan};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscretizedInstance {
    eps: f64,
    rounded: Vec<f64>,
    class_of: Vec<usize>,
    top_class: usize,
    members: Vec<Vec<usize>>,
    star_threshold: usize,
}

/// `eps^5 (1+eps)^(q-1)`, the common weight of class `q` for `1 <= q < Q`.
fn grid_point(eps: f64, q: usize) -> f64 {
    eps.powi(5) * (1.0 + eps).powi(q as i32 - 1)
}

/// Smallest `Q` with `eps^5 (1+eps)^(Q-1) >= 1/eps`.
fn top_class(eps: f64) -> usize {
    let mut q = 1;
    while grid_point(eps, q) < 1.0 / eps {
        q += 1;
    }
    q
}

/// `ceil(1/eps^6)`, taking float noise around integers into account.
pub fn star_threshold(eps: f64) -> usize {
    let r = 1.0 / eps.powi(6);
    let nearest = r.round();
    if (r - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as usize
    } else {
        r.ceil() as usize
    }
}

/// Grid index `q >= 1` with `eps^5 (1+eps)^(q-1) <= v < eps^5 (1+eps)^q`.
fn grid_index(eps: f64, v: f64) -> usize {
    let guess = ((v / eps.powi(5)).ln() / (1.0 + eps).ln()).floor() as i64 + 1;
    let mut q = guess.max(1) as usize;
    while q > 1 && grid_point(eps, q) > v {
        q -= 1;
    }
    while grid_point(eps, q + 1) <= v {
        q += 1;
    }
    q
}

pub fn discretize(instance: &Instance, eps: f64) -> Result<DiscretizedInstance> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Precondition(format!("accuracy must lie in (0, 1), got {eps}")));
    }
    if !instance.has_equal_prices() {
        return Err(Error::Unsupported("weight rounding requires identical prices".into()));
    }

    let top = top_class(eps);
    let small = eps.powi(5);
    let large = 1.0 / eps;
    let mut rounded = Vec::with_capacity(instance.n());
    let mut class_of = Vec::with_capacity(instance.n());
    for &v in instance.weights() {
        let (w, q) = if v >= large {
            (large, top)
        } else if v < small {
            (v, 0)
        } else {
            let q = grid_index(eps, v).min(top - 1);
            (grid_point(eps, q), q)
        };
        rounded.push(w);
        class_of.push(q);
    }

    let mut members = vec![Vec::new(); top + 1];
    for (i, &q) in class_of.iter().enumerate() {
        members[q].push(i);
    }

    Ok(DiscretizedInstance {
        eps,
        rounded,
        class_of,
        top_class: top,
        members,
        star_threshold: star_threshold(eps),
    })
}

impl DiscretizedInstance {
    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn n(&self) -> usize {
        self.rounded.len()
    }

    pub fn rounded_weight(&self, i: usize) -> f64 {
        self.rounded[i]
    }

    pub fn rounded_weights(&self) -> &[f64] {
        &self.rounded
    }

    pub fn class_of(&self, i: usize) -> usize {
        self.class_of[i]
    }

    /// `Q`, the index of the capped-weight class.
    pub fn top_class(&self) -> usize {
        self.top_class
    }

    /// Number of classes, `Q + 1`.
    pub fn class_count(&self) -> usize {
        self.top_class + 1
    }

    pub fn class_members(&self, q: usize) -> &[usize] {
        &self.members[q]
    }

    /// Common rounded weight of class `q >= 1`.
    pub fn class_weight(&self, q: usize) -> Option<f64> {
        match q {
            0 => None,
            q if q == self.top_class => Some(1.0 / self.eps),
            q => Some(grid_point(self.eps, q)),
        }
    }

    /// Count above which a pattern records a class as "more than the cap".
    pub fn star_threshold(&self) -> usize {
        self.star_threshold
    }

    /// The instance with rounded weights in place of the true ones.
    pub fn rounded_instance(&self, instance: &Instance) -> Result<Instance> {
        instance.with_weights(self.rounded.clone())
    }

    /// `sum_t V(S_t) / (1 + V(S_t))` under rounded weights.
    pub fn rounded_sales(&self, plan: &Plan) -> f64 {
        plan.assortments()
            .iter()
            .map(|s| {
                let w: f64 = s.members().iter().map(|&i| self.rounded[i]).sum();
                w / (1.0 + w)
            })
            .sum()
    }
}

/// Rounded and true sales of the same plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sandwich {
    pub rounded: f64,
    pub exact: f64,
}

/// Evaluates a plan under rounded and true weights and checks
/// `rounded <= exact <= (1 + eps) * rounded`.
pub fn sandwich_check(
    plan: &Plan,
    instance: &Instance,
    disc: &DiscretizedInstance,
) -> Result<Sandwich> {
    let rounded = disc.rounded_sales(plan);
    let exact = super::objective(instance, plan);
    let tol = 1e-9;
    if rounded > exact + tol || exact > (1.0 + disc.eps) * rounded + tol {
        return Err(Error::Invariant(format!(
            "rounded sales {rounded} and true sales {exact} break the (1+eps) sandwich"
        )));
    }
    Ok(Sandwich { rounded, exact })
}
