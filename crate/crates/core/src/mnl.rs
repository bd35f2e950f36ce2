//! Multinomial logit data model: instances, assortments, plans, revenue and
//! choice probabilities, and the expanded revenue / expanded set of a seed
//! assortment.
//!
//! Product indices are always the caller's (input-order, 0-based) indices.
//! The instance keeps a stable non-increasing-price permutation internally,
//! which every price-ordered scan walks.

use serde::Serialize;

use crate::error::{Error, Result};

/// Relative tolerance under which two revenues are considered equal.
pub const REVENUE_TIE_TOL: f64 = 1e-9;

/// `|a - b| <= 1e-9 * max(1, |a|, |b|)`.
pub fn revenues_tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= REVENUE_TIE_TOL * 1f64.max(a.abs()).max(b.abs())
}

/// `a >= b`, treating near-ties as equal.
pub fn at_least(a: f64, b: f64) -> bool {
    a >= b || revenues_tie(a, b)
}

/// A problem instance: products with prices, MNL preference weights and
/// visibility floors, a horizon of `T` customers and an optional per-customer
/// cardinality cap. The no-purchase weight is fixed at 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Instance {
    prices: Vec<f64>,
    weights: Vec<f64>,
    visibility: Vec<usize>,
    horizon: usize,
    cap: Option<usize>,
    #[serde(skip)]
    by_price: Vec<usize>,
}

impl Instance {
    pub fn new(
        prices: Vec<f64>,
        weights: Vec<f64>,
        visibility: Vec<usize>,
        horizon: usize,
        cap: Option<usize>,
    ) -> Result<Self> {
        let n = prices.len();
        if n == 0 {
            return Err(Error::InvalidInstance("at least one product is required".into()));
        }
        if weights.len() != n || visibility.len() != n {
            return Err(Error::InvalidInstance(format!(
                "length mismatch: {} prices, {} weights, {} visibility floors",
                n,
                weights.len(),
                visibility.len()
            )));
        }
        if horizon == 0 {
            return Err(Error::InvalidInstance("horizon must be positive".into()));
        }
        if cap == Some(0) {
            return Err(Error::InvalidInstance("cardinality cap must be positive".into()));
        }
        for (i, &p) in prices.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidInstance(format!("price of product {i} is {p}")));
            }
        }
        for (i, &v) in weights.iter().enumerate() {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidInstance(format!("weight of product {i} is {v}")));
            }
        }
        for (i, &l) in visibility.iter().enumerate() {
            if l > horizon {
                return Err(Error::InvalidInstance(format!(
                    "visibility floor {l} of product {i} exceeds the horizon {horizon}"
                )));
            }
        }

        let mut by_price: Vec<usize> = (0..n).collect();
        // stable: equal prices keep input order
        by_price.sort_by(|&a, &b| prices[b].total_cmp(&prices[a]));

        Ok(Self { prices, weights, visibility, horizon, cap, by_price })
    }

    pub fn n(&self) -> usize {
        self.prices.len()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn cap(&self) -> Option<usize> {
        self.cap
    }

    pub fn price(&self, i: usize) -> f64 {
        self.prices[i]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn visibility(&self, i: usize) -> usize {
        self.visibility[i]
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn visibilities(&self) -> &[usize] {
        &self.visibility
    }

    /// Product indices in non-increasing price order (stable on input index).
    pub fn by_price(&self) -> &[usize] {
        &self.by_price
    }

    /// Copy of this instance with product `i`'s visibility floor replaced.
    pub fn with_visibility(&self, i: usize, floor: usize) -> Result<Self> {
        self.check_index(i)?;
        let mut visibility = self.visibility.clone();
        visibility[i] = floor;
        Self::new(self.prices.clone(), self.weights.clone(), visibility, self.horizon, self.cap)
    }

    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(self.prices.clone(), weights, self.visibility.clone(), self.horizon, self.cap)
    }

    pub fn with_cap(&self, cap: Option<usize>) -> Result<Self> {
        Self::new(
            self.prices.clone(),
            self.weights.clone(),
            self.visibility.clone(),
            self.horizon,
            cap,
        )
    }

    /// True when every product carries the same price.
    pub fn has_equal_prices(&self) -> bool {
        let p0 = self.prices[0];
        self.prices.iter().all(|&p| p == p0)
    }

    pub(crate) fn check_index(&self, i: usize) -> Result<()> {
        if i < self.n() {
            Ok(())
        } else {
            Err(Error::InvalidAssortment { index: i, n: self.n() })
        }
    }
}

/// A set of products offered to one customer, with its cached total weight.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assortment {
    members: Vec<usize>,
    #[serde(skip)]
    weight: f64,
}

impl Assortment {
    pub fn empty() -> Self {
        Self { members: Vec::new(), weight: 0.0 }
    }

    /// Builds an assortment, sorting and de-duplicating `members`.
    pub fn new(instance: &Instance, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        for &i in &members {
            instance.check_index(i)?;
        }
        let weight = members.iter().map(|&i| instance.weight(i)).sum();
        Ok(Self { members, weight })
    }

    pub fn from_mask(instance: &Instance, mask: &[bool]) -> Result<Self> {
        if mask.len() != instance.n() {
            return Err(Error::Precondition(format!(
                "membership mask has length {} for {} products",
                mask.len(),
                instance.n()
            )));
        }
        Self::new(instance, mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i))
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }

    /// Cached `V(S)`.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn is_subset_of(&self, other: &Assortment) -> bool {
        self.members.iter().all(|&i| other.contains(i))
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for &i in &self.members {
            mask[i] = true;
        }
        mask
    }

    pub(crate) fn check(&self, instance: &Instance) -> Result<()> {
        match self.members.last() {
            Some(&i) => instance.check_index(i),
            None => Ok(()),
        }
    }
}

/// One assortment per customer, plus the total expected revenue.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Plan {
    assortments: Vec<Assortment>,
    objective: f64,
}

impl Plan {
    pub fn new(instance: &Instance, assortments: Vec<Assortment>) -> Result<Self> {
        if assortments.len() != instance.horizon() {
            return Err(Error::Precondition(format!(
                "plan has {} assortments for a horizon of {}",
                assortments.len(),
                instance.horizon()
            )));
        }
        let mut objective = 0.0;
        for s in &assortments {
            objective += revenue(instance, s)?;
        }
        Ok(Self { assortments, objective })
    }

    pub fn assortments(&self) -> &[Assortment] {
        &self.assortments
    }

    pub fn objective(&self) -> f64 {
        self.objective
    }

    pub fn horizon(&self) -> usize {
        self.assortments.len()
    }

    /// Number of customers product `i` is shown to.
    pub fn appearances(&self, i: usize) -> usize {
        self.assortments.iter().filter(|s| s.contains(i)).count()
    }

    /// Products shown to fewer customers than their visibility floor.
    pub fn visibility_violations(&self, instance: &Instance) -> Vec<usize> {
        (0..instance.n())
            .filter(|&i| self.appearances(i) < instance.visibility(i))
            .collect()
    }

    /// Customers offered more products than the cap (empty when uncapped).
    pub fn cardinality_violations(&self, instance: &Instance) -> Vec<usize> {
        match instance.cap() {
            Some(k) => (0..self.assortments.len())
                .filter(|&t| self.assortments[t].len() > k)
                .collect(),
            None => Vec::new(),
        }
    }

    pub fn is_feasible(&self, instance: &Instance) -> bool {
        self.visibility_violations(instance).is_empty()
            && self.cardinality_violations(instance).is_empty()
    }
}

/// The expanded set of a seed assortment and its revenue.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpandedResult {
    pub expanded_set: Assortment,
    pub expanded_revenue: f64,
}

/// The no-purchase option or a product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Choice {
    NoPurchase,
    Product(usize),
}

/// Running numerator `sum p_i v_i` and denominator `1 + sum v_i`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RevenueAccumulator {
    num: f64,
    den: f64,
}

impl RevenueAccumulator {
    pub(crate) fn new() -> Self {
        Self { num: 0.0, den: 1.0 }
    }

    pub(crate) fn add(&mut self, instance: &Instance, i: usize) {
        self.num += instance.price(i) * instance.weight(i);
        self.den += instance.weight(i);
    }

    pub(crate) fn revenue(&self) -> f64 {
        self.num / self.den
    }
}

pub(crate) fn revenue_unchecked(instance: &Instance, members: &[usize]) -> f64 {
    let mut acc = RevenueAccumulator::new();
    for &i in members {
        acc.add(instance, i);
    }
    acc.revenue()
}

/// Expected revenue `R(S) = sum p_i v_i / (1 + sum v_i)`; zero for the empty set.
pub fn revenue(instance: &Instance, s: &Assortment) -> Result<f64> {
    s.check(instance)?;
    Ok(revenue_unchecked(instance, s.members()))
}

/// MNL choice probability of `choice` when `s` is offered.
pub fn choice_prob(instance: &Instance, choice: Choice, s: &Assortment) -> Result<f64> {
    s.check(instance)?;
    let den = 1.0 + s.weight();
    match choice {
        Choice::NoPurchase => Ok(1.0 / den),
        Choice::Product(i) => {
            instance.check_index(i)?;
            Ok(if s.contains(i) { instance.weight(i) / den } else { 0.0 })
        }
    }
}

/// Grows `member` in price order starting at position `from` of the price
/// permutation: each non-member is added while its price is at least the
/// running revenue, stopping at the first rejection. Returns the position of
/// the rejected product (or `n`) and the number of non-members inspected.
pub(crate) fn grow_by_price(
    instance: &Instance,
    member: &mut [bool],
    acc: &mut RevenueAccumulator,
    from: usize,
) -> (usize, usize) {
    let order = instance.by_price();
    let mut inspected = 0;
    let mut pos = from;
    while pos < order.len() {
        let i = order[pos];
        if !member[i] {
            inspected += 1;
            if !at_least(instance.price(i), acc.revenue()) {
                break;
            }
            member[i] = true;
            acc.add(instance, i);
        }
        pos += 1;
    }
    (pos, inspected)
}

fn expand_mask(instance: &Instance, mut member: Vec<bool>) -> ExpandedResult {
    let mut acc = RevenueAccumulator::new();
    for (i, _) in member.iter().enumerate().filter(|(_, &m)| m) {
        acc.add(instance, i);
    }
    grow_by_price(instance, &mut member, &mut acc, 0);
    let expanded_set = Assortment::from_mask(instance, &member).expect("mask sized to instance");
    let expanded_revenue = revenue_unchecked(instance, expanded_set.members());
    ExpandedResult { expanded_set, expanded_revenue }
}

/// Maximum-cardinality revenue-maximizing assortment with no constraints:
/// the best price-ordered prefix.
pub fn unconstrained_optimum(instance: &Instance) -> ExpandedResult {
    expand_mask(instance, vec![false; instance.n()])
}

/// Expanded set and expanded revenue of `a`: the largest revenue-maximizing
/// superset of `a`, found by adding the remaining products in price order.
pub fn expanded(instance: &Instance, a: &Assortment) -> Result<ExpandedResult> {
    a.check(instance)?;
    Ok(expand_mask(instance, a.mask(instance.n())))
}

/// The three equivalent conditions describing what adding product `j` does to
/// the revenue of `S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AddEffect {
    pub revenue_before: f64,
    pub revenue_after: f64,
    /// `R(S + j) >= R(S)`
    pub gains: bool,
    /// `p_j >= R(S)`
    pub price_covers_before: bool,
    /// `p_j >= R(S + j)`
    pub price_covers_after: bool,
}

impl AddEffect {
    /// Whether adding the product weakly increases revenue, decided by `p_j >= R(S)`.
    pub fn increases(&self) -> bool {
        self.price_covers_before
    }

    pub fn conditions_agree(&self) -> bool {
        self.gains == self.price_covers_before && self.gains == self.price_covers_after
    }
}

pub fn add_product_effect(instance: &Instance, s: &Assortment, j: usize) -> Result<AddEffect> {
    s.check(instance)?;
    instance.check_index(j)?;
    if s.contains(j) {
        return Err(Error::Precondition(format!("product {j} is already in the assortment")));
    }
    let revenue_before = revenue_unchecked(instance, s.members());
    let mut with_j = s.members().to_vec();
    with_j.push(j);
    let revenue_after = revenue_unchecked(instance, &with_j);
    let pj = instance.price(j);
    Ok(AddEffect {
        revenue_before,
        revenue_after,
        gains: at_least(revenue_after, revenue_before),
        price_covers_before: at_least(pj, revenue_before),
        price_covers_after: at_least(pj, revenue_after),
    })
}
