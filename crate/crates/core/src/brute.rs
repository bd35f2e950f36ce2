//! Exhaustive search over plans, used as the test oracle for both planning
//! problems. Customers are interchangeable, so plans are enumerated as
//! multisets of candidate assortments (non-decreasing candidate index).

use crate::error::{Error, Result};
use crate::mnl::{revenue_unchecked, Assortment, Instance, Plan};

/// Largest number of candidate multisets an exhaustive search may visit.
pub const ENUMERATION_LIMIT: u128 = 1 << 20;

/// `C(m + t - 1, t)`, saturating.
pub(crate) fn multiset_count(m: u128, t: u128) -> u128 {
    if m == 0 {
        return if t == 0 { 1 } else { 0 };
    }
    let mut acc: u128 = 1;
    for j in 1..=t {
        acc = match acc.checked_mul(m - 1 + j) {
            Some(v) => v / j,
            None => return u128::MAX,
        };
    }
    acc
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 1..=k {
        acc = match acc.checked_mul(n - k + j) {
            Some(v) => v / j,
            None => return u128::MAX,
        };
    }
    acc
}

fn subsets_up_to(n: usize, max_size: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, start: usize, max_size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(cur.clone());
        if cur.len() == max_size {
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, i + 1, max_size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, 0, max_size, &mut Vec::new(), &mut out);
    out
}

struct Search<'a> {
    instance: &'a Instance,
    candidates: Vec<Vec<usize>>,
    revenues: Vec<f64>,
    shown: Vec<usize>,
    chosen: Vec<usize>,
    best_value: f64,
    best: Option<Vec<usize>>,
}

impl Search<'_> {
    fn run(&mut self, start: usize, value: f64) {
        let horizon = self.instance.horizon();
        let remaining = horizon - self.chosen.len();
        if remaining == 0 {
            if value > self.best_value {
                self.best_value = value;
                self.best = Some(self.chosen.clone());
            }
            return;
        }
        for c in start..self.candidates.len() {
            for &i in &self.candidates[c] {
                self.shown[i] += 1;
            }
            self.chosen.push(c);
            let rest = remaining - 1;
            let reachable = (0..self.instance.n())
                .all(|i| self.shown[i] + rest >= self.instance.visibility(i));
            if reachable {
                self.run(c, value + self.revenues[c]);
            }
            self.chosen.pop();
            for &i in &self.candidates[c] {
                self.shown[i] -= 1;
            }
        }
    }
}

/// Exact optimum over all plans whose assortments have at most `max_size`
/// products and that meet every visibility floor. `Ok(None)` when no such
/// plan exists.
pub(crate) fn best_plan(instance: &Instance, max_size: usize) -> Result<Option<Plan>> {
    let n = instance.n() as u128;
    let max_size = max_size.min(instance.n());
    let mut masks: u128 = 0;
    for s in 0..=max_size as u128 {
        masks = masks.saturating_add(binomial(n, s));
    }
    let size = multiset_count(masks, instance.horizon() as u128);
    if size > ENUMERATION_LIMIT {
        return Err(Error::TooLarge { size, limit: ENUMERATION_LIMIT });
    }

    let candidates = subsets_up_to(instance.n(), max_size);
    let revenues = candidates.iter().map(|c| revenue_unchecked(instance, c)).collect();
    let mut search = Search {
        instance,
        candidates,
        revenues,
        shown: vec![0; instance.n()],
        chosen: Vec::with_capacity(instance.horizon()),
        best_value: f64::NEG_INFINITY,
        best: None,
    };
    search.run(0, 0.0);

    match search.best {
        None => Ok(None),
        Some(chosen) => {
            let assortments = chosen
                .iter()
                .map(|&c| Assortment::new(instance, search.candidates[c].iter().copied()))
                .collect::<Result<Vec<_>>>()?;
            Ok(Some(Plan::new(instance, assortments)?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiset_counts() {
        assert_eq!(multiset_count(5, 1), 5);
        assert_eq!(multiset_count(5, 2), 15);
        assert_eq!(multiset_count(130, 3), 374_660);
        assert_eq!(multiset_count(0, 0), 1);
        assert_eq!(multiset_count(u128::MAX / 2, 3), u128::MAX);
    }

    #[test]
    fn subset_enumeration_sizes() {
        assert_eq!(subsets_up_to(4, 4).len(), 16);
        assert_eq!(subsets_up_to(9, 3).len(), 1 + 9 + 36 + 84);
        assert_eq!(subsets_up_to(3, 0), vec![Vec::<usize>::new()]);
    }
}
