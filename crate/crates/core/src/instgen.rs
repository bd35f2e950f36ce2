//! Instance generators: seeded random instances and the 3-PARTITION gadget.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mnl::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriceMode {
    /// Prices uniform on `[0, 10]`.
    General,
    /// Every price is 1.
    Equal,
}

/// `n` products with log-uniform weights on `[1e-3, 10]` and floors uniform
/// on `0..=T`. The same seed always yields the same instance.
pub fn gen_random(
    n: usize,
    horizon: usize,
    seed: u64,
    mode: PriceMode,
    cap: Option<usize>,
) -> Result<Instance> {
    if n == 0 || horizon == 0 {
        return Err(Error::Precondition("need at least one product and one customer".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (1e-3f64.ln(), 10f64.ln());
    let mut prices = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut floors = Vec::with_capacity(n);
    for _ in 0..n {
        prices.push(match mode {
            PriceMode::General => rng.random_range(0.0..=10.0),
            PriceMode::Equal => 1.0,
        });
        weights.push(rng.random_range(lo..=hi).exp());
        floors.push(rng.random_range(0..=horizon));
    }
    Instance::new(prices, weights, floors, horizon, cap)
}

/// Unit prices, weights `a_i`, floors 1, cap 3 and `T = |a| / 3` customers.
/// Returns the instance and the target triplet sum `B = sum(a) / T`.
pub fn gen_3partition(a: &[u64]) -> Result<(Instance, u64)> {
    if a.is_empty() || !a.len().is_multiple_of(3) {
        return Err(Error::InvalidInstance(format!(
            "need a positive multiple of 3 integers, got {}",
            a.len()
        )));
    }
    if a.contains(&0) {
        return Err(Error::InvalidInstance("integers must be positive".into()));
    }
    let horizon = a.len() / 3;
    let total: u64 = a.iter().sum();
    if !total.is_multiple_of(horizon as u64) {
        return Err(Error::InvalidInstance(format!(
            "sum {total} is not divisible by {horizon}"
        )));
    }
    let n = a.len();
    let inst = Instance::new(
        vec![1.0; n],
        a.iter().map(|&x| x as f64).collect(),
        vec![1; n],
        horizon,
        Some(3),
    )?;
    Ok((inst, total / horizon as u64))
}

/// Largest list [`three_partition_decide`] accepts.
pub const DECIDER_LIMIT: usize = 12;

/// Whether `a` splits into triplets that each sum to `sum(a) / (|a| / 3)`.
pub fn three_partition_decide(a: &[u64]) -> Result<bool> {
    if a.len() > DECIDER_LIMIT {
        return Err(Error::TooLarge { size: a.len() as u128, limit: DECIDER_LIMIT as u128 });
    }
    if a.is_empty() || !a.len().is_multiple_of(3) {
        return Err(Error::InvalidInstance("need a positive multiple of 3 integers".into()));
    }
    let groups = (a.len() / 3) as u64;
    let total: u64 = a.iter().sum();
    if !total.is_multiple_of(groups) {
        return Ok(false);
    }
    let target = total / groups;

    fn rec(a: &[u64], used: &mut [bool], target: u64) -> bool {
        // the first unused element anchors the next triplet
        let Some(first) = used.iter().position(|u| !u) else {
            return true;
        };
        used[first] = true;
        for j in first + 1..a.len() {
            if used[j] {
                continue;
            }
            used[j] = true;
            for k in j + 1..a.len() {
                if !used[k] && a[first] + a[j] + a[k] == target {
                    used[k] = true;
                    if rec(a, used, target) {
                        return true;
                    }
                    used[k] = false;
                }
            }
            used[j] = false;
        }
        used[first] = false;
        false
    }
    Ok(rec(a, &mut vec![false; a.len()], target))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_instances_are_reproducible() {
        let a = gen_random(5, 3, 42, PriceMode::General, None).unwrap();
        let b = gen_random(5, 3, 42, PriceMode::General, None).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, gen_random(5, 3, 43, PriceMode::General, None).unwrap());
        for i in 0..5 {
            assert!((0.0..=10.0).contains(&a.price(i)));
            assert!((1e-3..=10.0).contains(&a.weight(i)));
            assert!(a.visibility(i) <= 3);
        }
    }

    #[test]
    fn equal_mode_has_unit_prices() {
        let a = gen_random(6, 2, 1, PriceMode::Equal, Some(2)).unwrap();
        assert!(a.prices().iter().all(|&p| p == 1.0));
        assert_eq!(a.cap(), Some(2));
    }

    #[test]
    fn gadget_shape() {
        let (inst, b) = gen_3partition(&[1, 1, 1]).unwrap();
        assert_eq!((inst.n(), inst.horizon(), inst.cap(), b), (3, 1, Some(3), 3));
        assert!(gen_3partition(&[1, 2]).is_err());
        assert!(gen_3partition(&[1, 1, 1, 1, 1, 2]).is_err());
    }

    #[test]
    fn decider() {
        assert!(three_partition_decide(&[1, 2, 3, 1, 2, 3]).unwrap());
        assert!(!three_partition_decide(&[1, 1, 1, 1, 1, 7]).unwrap());
        assert!(three_partition_decide(&[4, 1, 1, 2, 2, 2]).unwrap());
        assert!(three_partition_decide(&[1; 15]).is_err());
    }
}
