use assortvis::instgen::{gen_random, PriceMode};
use assortvis::pricing::what_if;
use assortvis::rounding::{round, FractionalBipartite};
use assortvis::{fee_increment, fee_report, solve_apv, Instance};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Star centred on the single left vertex.
fn star(values: &[f64]) -> FractionalBipartite {
    FractionalBipartite::new(1, values.len(), values.iter().enumerate().map(|(v, &x)| (0, v, x)).collect())
        .unwrap()
}

#[test]
fn stars_are_negatively_correlated() {
    const N: usize = 20_000;
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for case in 0..20 {
        let k = rng.random_range(3..=6);
        let values: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..0.9)).collect();
        let g = star(&values);
        let samples: Vec<Vec<bool>> = (0..N).map(|_| round(&g, &mut rng)).collect();
        for a in 0..k {
            for b in a + 1..k {
                for c in b + 1..=k {
                    let subset: Vec<usize> = if c == k { vec![a, b] } else { vec![a, b, c] };
                    for want in [true, false] {
                        let bound: f64 =
                            subset.iter().map(|&e| if want { values[e] } else { 1.0 - values[e] }).product();
                        let p = samples.iter().filter(|s| subset.iter().all(|&e| s[e] == want)).count() as f64
                            / N as f64;
                        let se = (bound * (1.0 - bound) / N as f64).sqrt();
                        assert!(p <= bound + 3.0 * se, "case {case} {subset:?} {want}: {p} > {bound}");
                    }
                }
            }
        }
    }
}

#[test]
fn lower_tail_of_equal_weight_stars() {
    // 40 edges at 0.3 each: expected degree 12
    const N: usize = 20_000;
    let g = star(&[0.3; 40]);
    let mean = 12.0;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for eps in [0.1, 0.2, 0.3] {
        let below = (0..N)
            .filter(|_| {
                let picked = round(&g, &mut rng).iter().filter(|&&b| b).count() as f64;
                picked <= (1.0 - eps) * mean
            })
            .count() as f64
            / N as f64;
        let bound: f64 = (-eps * eps * mean / 2.0).exp();
        let se = (bound * (1.0 - bound) / N as f64).sqrt();
        assert!(below <= bound + 3.0 * se, "eps {eps}: {below} > {bound}");
    }
}

fn instance(max_n: usize, max_t: usize) -> impl Strategy<Value = Instance> {
    (1..=max_n, 1..=max_t).prop_flat_map(|(n, t)| {
        (
            prop::collection::vec(0.0..10.0f64, n),
            prop::collection::vec(0.01..10.0f64, n),
            prop::collection::vec(0..=t, n),
        )
            .prop_map(move |(p, v, l)| Instance::new(p, v, l, t, None).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn fees_share_the_loss(inst in instance(6, 5)) {
        let r = fee_report(&inst);
        prop_assert!(r.delta >= 0.0);
        if r.delta > 0.0 {
            prop_assert!((r.fees.iter().sum::<f64>() - r.delta).abs() <= 1e-9);
        } else {
            prop_assert!(r.fees.iter().all(|&f| f == 0.0));
        }
        prop_assert!(r.fees.iter().all(|&f| f >= 0.0));
    }

    #[test]
    fn raising_a_floor_never_lowers_the_fee(inst in instance(5, 4)) {
        for i in 0..inst.n() {
            if inst.visibility(i) < inst.horizon() {
                let w = what_if(&inst, i).unwrap();
                prop_assert!(w.fee_after >= w.fee_before - 1e-9);
                // only customer l_i + 1 is re-solved; that must agree with a full solve
                let full = solve_apv(&inst.with_visibility(i, inst.visibility(i) + 1).unwrap());
                prop_assert!((w.after.constrained - full.objective()).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn fee_unchanged_when_already_shown_to_the_next_customer() {
    let mut seen = 0;
    for seed in 0..300 {
        let inst = gen_random(5, 4, seed, PriceMode::General, None).unwrap();
        let plan = solve_apv(&inst);
        let before = fee_report(&inst);
        for i in 0..inst.n() {
            let l = inst.visibility(i);
            if l < inst.horizon() && plan.assortments()[l].contains(i) {
                seen += 1;
                assert!((fee_increment(&inst, i).unwrap() - before.fees[i]).abs() <= 1e-12);
            }
        }
    }
    assert!(seen > 50);
}

#[test]
fn forcing_the_cheap_product_everywhere_raises_its_fee() {
    let (m, horizon) = (9.0, 4);
    let inst = Instance::new(vec![1.0, 0.0], vec![1.0, m], vec![0, horizon - 1], horizon, None).unwrap();
    let now = fee_report(&inst).fees[1];
    let next = fee_increment(&inst, 1).unwrap();
    assert!(next > now, "{next} <= {now}");
}

#[test]
fn identical_products_pay_the_same() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..300 {
        let p = rng.random_range(0.0..5.0);
        let v = rng.random_range(0.1..3.0);
        let l = rng.random_range(0..=3);
        let other_p = rng.random_range(0.0..10.0);
        let inst = Instance::new(vec![p, other_p, p], vec![v, 1.0, v], vec![l, 0, l], 3, None).unwrap();
        let r = fee_report(&inst);
        assert!((r.fees[0] - r.fees[2]).abs() <= 1e-9);
    }
}
