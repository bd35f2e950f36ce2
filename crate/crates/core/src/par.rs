//! Execution switch for the data-parallel loops.

use serde::{Deserialize, Serialize};

/// How independent work items are scheduled. Without the `parallel` feature
/// both variants run sequentially.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when work is actually spread over threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// `f(index, item)` for every item, results in item order.
pub(crate) fn map_indexed<T, U, F>(exec: Execution, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(usize, &T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Execution::Parallel {
        use rayon::prelude::*;
        return items.par_iter().enumerate().map(|(k, x)| f(k, x)).collect();
    }
    let _ = exec;
    items.iter().enumerate().map(|(k, x)| f(k, x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_agree() {
        let items: Vec<u64> = (0..1000).collect();
        let seq = map_indexed(Execution::Sequential, &items, |k, x| x * x + k as u64);
        let par = map_indexed(Execution::Parallel, &items, |k, x| x * x + k as u64);
        assert_eq!(seq, par);
    }
}
