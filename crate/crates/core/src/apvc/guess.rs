//! Guess enumeration for the equal-price scheme.
//!
//! A guess fixes, for every customer, a weight class of the offered assortment
//! (light, one of `L` medium classes, heavy) and a packing pattern counting
//! the offered products per product class. Customers are interchangeable, so a
//! guess is a multiset of `T` (class, pattern) pairs; customer `t` takes the
//! `t`-th pair in non-decreasing order.

use serde::Serialize;

use super::discretize::DiscretizedInstance;
use crate::brute::multiset_count;
use crate::error::{Error, Result};
use crate::mnl::{Assortment, Instance, Plan};

const WEIGHT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CustomerClass {
    Light,
    Medium(usize),
    Heavy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum PatternCount {
    Exact(usize),
    /// More than the star threshold.
    Star,
}

/// Products offered per product class `D_0..=D_Q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PackingPattern {
    counts: Vec<PatternCount>,
}

impl PackingPattern {
    pub fn new(counts: Vec<PatternCount>) -> Self {
        Self { counts }
    }

    pub fn counts(&self) -> &[PatternCount] {
        &self.counts
    }

    pub fn count(&self, q: usize) -> PatternCount {
        self.counts[q]
    }

    /// Bounded customers have no star among classes `1..=Q`.
    pub fn is_bounded(&self) -> bool {
        self.counts[1..].iter().all(|c| *c != PatternCount::Star)
    }
}

/// One customer's share of a guess.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GuessPair {
    pub class: CustomerClass,
    pub pattern: PackingPattern,
    /// Lower bound on the rounded weight of the customer's assortment.
    pub lower: f64,
}

/// Customer classes by rounded assortment weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightClasses {
    eps: f64,
    medium: usize,
}

impl WeightClasses {
    pub fn new(eps: f64) -> Self {
        let mut medium = 0;
        while eps * (1.0 + eps).powi(medium as i32) < 1.0 / eps {
            medium += 1;
        }
        Self { eps, medium }
    }

    /// `L`, the number of medium classes.
    pub fn medium_count(&self) -> usize {
        self.medium
    }

    pub fn all(&self) -> Vec<CustomerClass> {
        let mut out = vec![CustomerClass::Light];
        out.extend((1..=self.medium).map(CustomerClass::Medium));
        out.push(CustomerClass::Heavy);
        out
    }

    pub fn lower(&self, class: CustomerClass) -> f64 {
        match class {
            CustomerClass::Light => 0.0,
            CustomerClass::Medium(l) => self.eps * (1.0 + self.eps).powi(l as i32 - 1),
            CustomerClass::Heavy => 1.0 / self.eps,
        }
    }

    pub fn upper(&self, class: CustomerClass) -> f64 {
        match class {
            CustomerClass::Light => self.eps,
            CustomerClass::Medium(l) => {
                (self.eps * (1.0 + self.eps).powi(l as i32)).min(1.0 / self.eps)
            }
            CustomerClass::Heavy => f64::INFINITY,
        }
    }

    pub fn classify(&self, weight: f64) -> CustomerClass {
        if weight < self.eps {
            return CustomerClass::Light;
        }
        if weight >= 1.0 / self.eps {
            return CustomerClass::Heavy;
        }
        (1..=self.medium)
            .map(CustomerClass::Medium)
            .find(|&c| weight < self.upper(c))
            .unwrap_or(CustomerClass::Medium(self.medium))
    }
}

/// The universe of (class, pattern) pairs a guess draws from.
#[derive(Debug, Clone)]
pub struct GuessSpace {
    horizon: usize,
    pairs: Vec<GuessPair>,
    class_sizes: Vec<usize>,
    class_demand: Vec<usize>,
    class_max_floor: Vec<usize>,
    classes: WeightClasses,
    star_threshold: usize,
}

/// Patterns the instance can realize: at most `|D_q|` products per class, a
/// star only when `|D_q|` exceeds the threshold, and at most `k` in total.
fn realizable_patterns(sizes: &[usize], star: usize, cap: usize) -> Vec<PackingPattern> {
    fn rec(
        q: usize,
        sizes: &[usize],
        star: usize,
        room: usize,
        cur: &mut Vec<PatternCount>,
        out: &mut Vec<PackingPattern>,
    ) {
        if q == sizes.len() {
            out.push(PackingPattern::new(cur.clone()));
            return;
        }
        for c in 0..=sizes[q].min(star).min(room) {
            cur.push(PatternCount::Exact(c));
            rec(q + 1, sizes, star, room - c, cur, out);
            cur.pop();
        }
        if sizes[q] > star && star < room {
            cur.push(PatternCount::Star);
            rec(q + 1, sizes, star, room - star - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, sizes, star, cap, &mut Vec::new(), &mut out);
    out
}

/// Number of patterns [`realizable_patterns`] would produce, saturating.
fn count_patterns(sizes: &[usize], star: usize, cap: usize) -> u128 {
    let mut ways = vec![0u128; cap + 1];
    ways[0] = 1;
    for &size in sizes {
        let mut options: Vec<usize> = (0..=size.min(star)).collect();
        if size > star {
            options.push(star + 1);
        }
        let mut next = vec![0u128; cap + 1];
        for (used, &w) in ways.iter().enumerate() {
            if w == 0 {
                continue;
            }
            for &o in &options {
                if used + o <= cap {
                    next[used + o] = next[used + o].saturating_add(w);
                }
            }
        }
        ways = next;
    }
    ways.iter().fold(0u128, |a, &b| a.saturating_add(b))
}

impl GuessSpace {
    pub fn new(disc: &DiscretizedInstance, instance: &Instance) -> Result<Self> {
        let cap = instance
            .cap()
            .ok_or_else(|| Error::Precondition("guessing requires a cardinality cap".into()))?;
        let classes = WeightClasses::new(disc.eps());
        let star = disc.star_threshold();
        let class_sizes: Vec<usize> =
            (0..disc.class_count()).map(|q| disc.class_members(q).len()).collect();
        let cap = cap.min(instance.n());

        let pattern_count = count_patterns(&class_sizes, star, cap);
        let pattern_budget = 1u128 << 24;
        if pattern_count > pattern_budget {
            // every realizable pattern fits some customer class
            return Err(Error::BudgetExceeded {
                guesses: multiset_count(pattern_count, instance.horizon() as u128),
                budget: pattern_budget,
            });
        }

        let mut small: Vec<f64> =
            disc.class_members(0).iter().map(|&i| disc.rounded_weight(i)).collect();
        small.sort_by(f64::total_cmp);

        let mut pairs = Vec::new();
        for pattern in realizable_patterns(&class_sizes, star, cap) {
            let (lo, hi) = weight_range(disc, &pattern, &small);
            for class in classes.all() {
                if lo < classes.upper(class) + WEIGHT_TOL && hi >= classes.lower(class) - WEIGHT_TOL {
                    pairs.push(GuessPair { class, lower: classes.lower(class), pattern: pattern.clone() });
                }
            }
        }

        let mut class_demand = vec![0; disc.class_count()];
        let mut class_max_floor = vec![0; disc.class_count()];
        for i in 0..instance.n() {
            let q = disc.class_of(i);
            class_demand[q] += instance.visibility(i);
            class_max_floor[q] = class_max_floor[q].max(instance.visibility(i));
        }

        Ok(Self {
            horizon: instance.horizon(),
            pairs,
            class_sizes,
            class_demand,
            class_max_floor,
            classes,
            star_threshold: star,
        })
    }

    pub fn pairs(&self) -> &[GuessPair] {
        &self.pairs
    }

    pub fn pair(&self, index: usize) -> &GuessPair {
        &self.pairs[index]
    }

    pub fn weight_classes(&self) -> WeightClasses {
        self.classes
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// `C(G + T - 1, T)` for `G` pairs, saturating.
    pub fn guess_count(&self) -> u128 {
        multiset_count(self.pairs.len() as u128, self.horizon as u128)
    }

    /// All guesses in enumeration order, skipping those that fail
    /// [`GuessSpace::admissible`]. Errors when the guess count exceeds `budget`.
    pub fn enumerate(&self, budget: u128) -> Result<GuessStream<'_>> {
        let guesses = self.guess_count();
        if guesses > budget {
            return Err(Error::BudgetExceeded { guesses, budget });
        }
        let next = if self.pairs.is_empty() { None } else { Some(vec![0; self.horizon]) };
        Ok(GuessStream { space: self, next, position: 0 })
    }

    /// Cheap necessary conditions for the relaxation to be feasible: enough
    /// slots per product class for the classes' total visibility, and enough
    /// customers admitting each class for its largest floor.
    pub fn admissible(&self, slots: &[usize]) -> bool {
        for q in 0..self.class_sizes.len() {
            let mut room = 0;
            let mut open = 0;
            for &s in slots {
                let c = match self.pairs[s].pattern.count(q) {
                    PatternCount::Exact(c) => c,
                    PatternCount::Star => self.class_sizes[q],
                };
                room += c;
                open += usize::from(c > 0);
            }
            if room < self.class_demand[q] || open < self.class_max_floor[q] {
                return false;
            }
        }
        true
    }

    /// Index of the pair describing one assortment under rounded weights.
    pub fn slot_of(&self, disc: &DiscretizedInstance, s: &Assortment) -> Option<usize> {
        let weight: f64 = s.members().iter().map(|&i| disc.rounded_weight(i)).sum();
        let class = self.classes.classify(weight);
        let mut counts = vec![0; disc.class_count()];
        for &i in s.members() {
            counts[disc.class_of(i)] += 1;
        }
        let pattern = PackingPattern::new(
            counts
                .into_iter()
                .map(|c| if c > self.star_threshold { PatternCount::Star } else { PatternCount::Exact(c) })
                .collect(),
        );
        self.pairs.iter().position(|p| p.class == class && p.pattern == pattern)
    }

    /// The guess describing a plan under rounded weights, if its pairs are in
    /// this space.
    pub fn guess_from_plan(&self, disc: &DiscretizedInstance, plan: &Plan) -> Option<Guess> {
        let slots = plan
            .assortments()
            .iter()
            .map(|s| self.slot_of(disc, s))
            .collect::<Option<Vec<_>>>()?;
        Some(Guess::new(slots))
    }
}

/// Smallest and largest rounded weight of an assortment with this pattern.
fn weight_range(disc: &DiscretizedInstance, pattern: &PackingPattern, small: &[f64]) -> (f64, f64) {
    let mut lo = 0.0;
    let mut hi = 0.0;
    for (q, &count) in pattern.counts().iter().enumerate() {
        let size = disc.class_members(q).len();
        let (fewest, most) = match count {
            PatternCount::Exact(c) => (c, c),
            PatternCount::Star => (disc.star_threshold() + 1, size),
        };
        if q == 0 {
            lo += small[..fewest].iter().sum::<f64>();
            hi += small[small.len() - most..].iter().sum::<f64>();
        } else {
            let w = disc.class_weight(q).expect("classes above 0 have a weight");
            lo += fewest as f64 * w;
            hi += most as f64 * w;
        }
    }
    (lo, hi)
}

/// A multiset of `T` pair indices, non-decreasing; customer `t` takes `slots[t]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Guess {
    slots: Vec<usize>,
}

impl Guess {
    pub fn new(mut slots: Vec<usize>) -> Self {
        slots.sort_unstable();
        Self { slots }
    }

    pub fn slots(&self) -> &[usize] {
        &self.slots
    }

    pub fn horizon(&self) -> usize {
        self.slots.len()
    }

    /// `(pair index, number of customers)` for every pair used.
    pub fn counts(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for &s in &self.slots {
            match out.last_mut() {
                Some((p, c)) if *p == s => *c += 1,
                _ => out.push((s, 1)),
            }
        }
        out
    }

    pub fn customer<'a>(&self, space: &'a GuessSpace, t: usize) -> &'a GuessPair {
        space.pair(self.slots[t])
    }
}

/// Lazy walk over the multisets, in lexicographic order.
#[derive(Debug)]
pub struct GuessStream<'a> {
    space: &'a GuessSpace,
    next: Option<Vec<usize>>,
    position: u128,
}

impl GuessStream<'_> {
    fn advance(&mut self) -> Option<(u128, Vec<usize>)> {
        let current = self.next.take()?;
        let g = self.space.pairs.len();
        let mut succ = current.clone();
        if let Some(j) = succ.iter().rposition(|&s| s + 1 < g) {
            let v = succ[j] + 1;
            for s in &mut succ[j..] {
                *s = v;
            }
            self.next = Some(succ);
        }
        let pos = self.position;
        self.position += 1;
        Some((pos, current))
    }
}

impl Iterator for GuessStream<'_> {
    /// Position in the full enumeration order, and the guess.
    type Item = (u128, Guess);

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let (pos, slots) = self.advance()?;
            if self.space.admissible(&slots) {
                return Some((pos, Guess { slots }));
            }
        }
    }
}

/// Every admissible guess for the instance, collected.
pub fn enumerate_guesses(
    disc: &DiscretizedInstance,
    instance: &Instance,
    budget: u128,
) -> Result<(GuessSpace, Vec<(u128, Guess)>)> {
    let space = GuessSpace::new(disc, instance)?;
    let guesses = space.enumerate(budget)?.collect();
    Ok((space, guesses))
}
