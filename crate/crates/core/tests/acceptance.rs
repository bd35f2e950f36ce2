//! Acceptance checks. Each test prints one `PASS`/`FAIL` line; run with
//! `cargo test -p assortvis --test acceptance -- --nocapture` to see them.

use std::time::Instant;

use assortvis::apvc::discretize::sandwich_check;
use assortvis::instgen::{gen_3partition, gen_random, three_partition_decide, PriceMode};
use assortvis::rounding::{round, FractionalBipartite};
use assortvis::{
    brute_force_apv, brute_force_apvc, check_feasibility, expanded, fee_increment, fee_report,
    solve_apv, solve_apv_lp, Assortment, Execution, Instance, PtasPlanner,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(criterion: u32, title: &str, violations: usize, detail: String) {
    let verdict = if violations == 0 { "PASS" } else { "FAIL" };
    println!("criterion {criterion} [{verdict}] {title}: {detail}");
    assert_eq!(violations, 0, "criterion {criterion} failed: {detail}");
}

/// 500 instances with `n <= 4`, `T <= 3`, general prices.
fn small_corpus() -> Vec<Instance> {
    (0..500u64)
        .map(|seed| {
            let n = 1 + (seed % 4) as usize;
            let horizon = 1 + (seed / 4 % 3) as usize;
            gen_random(n, horizon, seed, PriceMode::General, None).unwrap()
        })
        .collect()
}

#[test]
fn criterion_1_exact_solver_matches_exhaustive_search() {
    let start = Instant::now();
    let mut bad = 0;
    let mut worst: f64 = 0.0;
    for inst in small_corpus() {
        let fast = solve_apv(&inst).objective();
        let slow = brute_force_apv(&inst).unwrap().objective();
        worst = worst.max((fast - slow).abs());
        if (fast - slow).abs() > 1e-9 {
            bad += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 30.0 {
        bad += 1;
    }
    report(1, "nested solver vs exhaustive search", bad, format!(
        "500 instances, max gap {worst:.2e}, {secs:.2}s"
    ));
}

#[test]
fn criterion_2_lp_value_equals_exact_optimum() {
    let mut bad = 0;
    let mut worst: f64 = 0.0;
    for inst in small_corpus() {
        let exact = solve_apv(&inst).objective();
        let (plan, sol) = solve_apv_lp(&inst).unwrap();
        let gap = (sol.value - exact).abs().max((plan.objective() - exact).abs());
        worst = worst.max(gap);
        if gap > 1e-6 || !plan.is_feasible(&inst) {
            bad += 1;
        }
    }
    report(2, "LP value and extracted plan vs exact optimum", bad, format!(
        "500 instances, max gap {worst:.2e}"
    ));
}

#[test]
fn criterion_3_expanded_revenue_is_monotone_and_supermodular() {
    let mut bad = 0;
    let mut checks = 0;
    for seed in 0..100u64 {
        let inst = gen_random(4, 1, 10_000 + seed, PriceMode::General, None).unwrap();
        let sets: Vec<Assortment> =
            (0..16u32).map(|m| Assortment::new(&inst, (0..4).filter(|i| m >> i & 1 == 1)).unwrap()).collect();
        let bar: Vec<_> = sets.iter().map(|s| expanded(&inst, s).unwrap()).collect();
        for a in 0..16usize {
            for b in 0..16usize {
                if a & b != a {
                    continue;
                }
                checks += 1;
                if !bar[a].expanded_set.is_subset_of(&bar[b].expanded_set)
                    || bar[a].expanded_revenue < bar[b].expanded_revenue - 1e-9
                {
                    bad += 1;
                }
                for i in (0..4).filter(|i| b >> i & 1 == 0) {
                    let gain_b = bar[b | 1 << i].expanded_revenue - bar[b].expanded_revenue;
                    let gain_a = bar[a | 1 << i].expanded_revenue - bar[a].expanded_revenue;
                    checks += 1;
                    if gain_b < gain_a - 1e-9 {
                        bad += 1;
                    }
                }
            }
        }
    }
    report(3, "monotonicity and supermodularity of expanded revenue", bad, format!(
        "{checks} checks over 100 instances"
    ));
}

#[test]
fn criterion_4_price_of_visibility_ratio() {
    let (m, horizon) = (100.0, 10);
    let inst = Instance::new(vec![1.0, 0.0], vec![1.0, m], vec![0, horizon], horizon, None).unwrap();
    let r = fee_report(&inst);
    let ratio = r.ratio();
    let bad = usize::from((ratio - 51.0).abs() > 1e-9);
    report(4, "unconstrained / constrained revenue", bad, format!("ratio {ratio}"));
}

#[test]
fn criterion_5_fee_axioms() {
    let mut bad = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for seed in 0..500u64 {
        let n = rng.random_range(1..=5usize);
        let horizon = rng.random_range(1..=5usize);
        let base = gen_random(n, horizon, 20_000 + seed, PriceMode::General, None).unwrap();
        // append a twin of a random product, so n <= 6
        let j = rng.random_range(0..n);
        let mut prices = base.prices().to_vec();
        let mut weights = base.weights().to_vec();
        let mut floors = base.visibilities().to_vec();
        prices.push(prices[j]);
        weights.push(weights[j]);
        floors.push(floors[j]);
        let inst = Instance::new(prices, weights, floors, horizon, None).unwrap();
        let r = fee_report(&inst);

        if r.delta < 0.0 {
            bad.push(format!("seed {seed}: negative loss"));
        }
        let total: f64 = r.fees.iter().sum();
        if r.delta > 0.0 && (total - r.delta).abs() > 1e-9 {
            bad.push(format!("seed {seed}: fees sum to {total}, loss {}", r.delta));
        }
        for i in 0..inst.n() {
            let charged = r.fees[i] > 0.0;
            let negative = r.contributions[i] < 0.0;
            if r.delta > 0.0 && charged != negative {
                bad.push(format!("seed {seed}: support mismatch at {i}"));
            }
            if r.delta == 0.0 && r.fees[i] != 0.0 {
                bad.push(format!("seed {seed}: fee without loss"));
            }
            if inst.visibility(i) < horizon {
                let raised = fee_increment(&inst, i).unwrap();
                if raised < r.fees[i] - 1e-9 {
                    bad.push(format!("seed {seed}: fee of {i} drops {} -> {raised}", r.fees[i]));
                }
            }
        }
        if (r.fees[j] - r.fees[n]).abs() > 1e-9 {
            bad.push(format!("seed {seed}: twins {j} and {n} pay {} and {}", r.fees[j], r.fees[n]));
        }
    }
    report(5, "fee sharing, support, anonymity, monotonicity", bad.len(), format!(
        "500 instances, violations {:?}",
        bad.iter().take(3).collect::<Vec<_>>()
    ));
}

/// Non-decreasing lists of length `len` over `1..=max`.
fn sorted_lists(len: usize, max: u64) -> Vec<Vec<u64>> {
    fn rec(len: usize, lo: u64, max: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for v in lo..=max {
            cur.push(v);
            rec(len, v, max, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(len, 1, max, &mut Vec::new(), &mut out);
    out
}

#[test]
fn criterion_6_gadget_threshold() {
    let mut bad = Vec::new();
    let (mut yes, mut no) = (0, 0);
    for horizon in 1..=3usize {
        for a in sorted_lists(3 * horizon, 4) {
            if a.iter().sum::<u64>() % horizon as u64 != 0 {
                continue;
            }
            let (inst, b) = gen_3partition(&a).unwrap();
            assert!(check_feasibility(&inst).unwrap());
            let value = brute_force_apvc(&inst).unwrap().objective();
            let bf = b as f64;
            let threshold = horizon as f64 * bf / (1.0 + bf);
            let partitionable = three_partition_decide(&a).unwrap();
            if partitionable {
                yes += 1;
                if value < threshold - 1e-9 {
                    bad.push(format!("{a:?}: YES but {value} < {threshold}"));
                }
            } else {
                no += 1;
                let gap = 2.0 / (bf * (bf + 1.0) * (bf + 2.0));
                if threshold - value < gap - 1e-9 {
                    bad.push(format!("{a:?}: NO but shortfall {} < {gap}", threshold - value));
                }
            }
        }
    }
    report(6, "3-PARTITION gadget threshold", bad.len(), format!(
        "{yes} YES and {no} NO inputs, violations {:?}",
        bad.iter().take(3).collect::<Vec<_>>()
    ));
}

fn random_fractional_graph(rng: &mut ChaCha8Rng) -> FractionalBipartite {
    let left = rng.random_range(2..=5);
    let right = rng.random_range(2..=5);
    let mut edges = Vec::new();
    for u in 0..left {
        for v in 0..right {
            if rng.random_bool(0.6) {
                let x = if rng.random_bool(0.1) {
                    f64::from(u8::from(rng.random_bool(0.5)))
                } else {
                    rng.random_range(0.05..0.95)
                };
                edges.push((u, v, x));
            }
        }
    }
    FractionalBipartite::new(left, right, edges).unwrap()
}

#[test]
fn criterion_7_dependent_rounding_properties() {
    const TRIALS: usize = 10_000;
    let mut graph_rng = ChaCha8Rng::seed_from_u64(7);
    let (mut degree_bad, mut marginal_bad, mut cylinder_bad) = (0, 0, 0);
    let mut cylinder_checks = 0;
    for g_idx in 0..50u64 {
        let g = random_fractional_graph(&mut graph_rng);
        let m = g.edges().len();
        let (dl, dr) = g.fractional_degrees();
        let mut rng = ChaCha8Rng::seed_from_u64(1_000 + g_idx);
        let samples: Vec<Vec<bool>> = (0..TRIALS).map(|_| round(&g, &mut rng)).collect();

        for s in &samples {
            let (l, r) = g.rounded_degrees(s);
            let ok = |d: f64, got: usize| {
                let got = got as f64;
                got >= (d - 1e-9).floor() && got <= (d + 1e-9).ceil()
            };
            if !l.iter().zip(&dl).all(|(&k, &d)| ok(d, k)) || !r.iter().zip(&dr).all(|(&k, &d)| ok(d, k)) {
                degree_bad += 1;
            }
        }

        let n = TRIALS as f64;
        for e in 0..m {
            let x = g.edges()[e].value;
            let freq = samples.iter().filter(|s| s[e]).count() as f64 / n;
            let se = (x * (1.0 - x) / n).sqrt();
            if (freq - x).abs() > 4.0 * se + 1e-12 {
                marginal_bad += 1;
            }
        }

        // edges at each vertex, strictly fractional ones only
        let mut at_vertex: Vec<Vec<usize>> = vec![Vec::new(); g.left_count() + g.right_count()];
        for (e, edge) in g.edges().iter().enumerate() {
            if edge.value > 0.0 && edge.value < 1.0 {
                at_vertex[edge.left].push(e);
                at_vertex[g.left_count() + edge.right].push(e);
            }
        }
        for edges in &at_vertex {
            let k = edges.len();
            for mask in 1u32..(1 << k) {
                let size = mask.count_ones();
                if !(2..=3).contains(&size) {
                    continue;
                }
                let subset: Vec<usize> = (0..k).filter(|b| mask >> b & 1 == 1).map(|b| edges[b]).collect();
                for want in [true, false] {
                    let bound: f64 = subset
                        .iter()
                        .map(|&e| if want { g.edges()[e].value } else { 1.0 - g.edges()[e].value })
                        .product();
                    let hits = samples.iter().filter(|s| subset.iter().all(|&e| s[e] == want)).count();
                    let p = hits as f64 / n;
                    let se = (bound * (1.0 - bound) / n).sqrt();
                    cylinder_checks += 1;
                    if p > bound + 3.0 * se {
                        cylinder_bad += 1;
                    }
                }
            }
        }
    }
    report(7, "dependent rounding degree, marginal and correlation", degree_bad + marginal_bad + cylinder_bad, format!(
        "50 graphs x {TRIALS} trials: degree violations {degree_bad}, marginal outliers {marginal_bad}, \
         cylinder outliers {cylinder_bad} of {cylinder_checks}"
    ));
}

struct PtasRun {
    infeasible_plans: usize,
    sandwich_bad: usize,
    quality_bad: Vec<String>,
    plans: usize,
    worst_ratio: f64,
}

fn ptas_corpus() -> Vec<Instance> {
    let mut out = Vec::new();
    let mut seed = 30_000u64;
    while out.len() < 50 {
        let n = 1 + (seed % 4) as usize;
        let horizon = 1 + (seed / 4 % 3) as usize;
        let k = 1 + (seed / 12) as usize % n;
        let inst = gen_random(n, horizon, seed, PriceMode::Equal, Some(k)).unwrap();
        if check_feasibility(&inst).unwrap() {
            out.push(inst);
        }
        seed += 1;
    }
    out
}

fn run_ptas(eps: f64, seeds: u64) -> PtasRun {
    let mut run = PtasRun {
        infeasible_plans: 0,
        sandwich_bad: 0,
        quality_bad: Vec::new(),
        plans: 0,
        worst_ratio: f64::INFINITY,
    };
    for (idx, inst) in ptas_corpus().iter().enumerate() {
        let planner = PtasPlanner::new(inst, eps, 1_000_000, Execution::Parallel).unwrap();
        let disc = planner.discretized();
        let rounded = disc.rounded_instance(inst).unwrap();
        let opt_hat = brute_force_apvc(&rounded).unwrap().objective();

        let mut values = Vec::with_capacity(seeds as usize);
        for seed in 0..seeds {
            let out = planner.round_best(seed, 1).unwrap();
            run.plans += 1;
            if !out.plan.is_feasible(inst) {
                run.infeasible_plans += 1;
            }
            match sandwich_check(&out.plan, inst, disc) {
                Ok(s) => values.push(s.rounded),
                Err(_) => run.sandwich_bad += 1,
            }
        }
        let count = values.len() as f64;
        let mean = values.iter().sum::<f64>() / count;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0).max(1.0);
        let se = (var / count).sqrt();
        let bound = (1.0 - 3.0 * eps) * opt_hat;
        if opt_hat > 0.0 {
            run.worst_ratio = run.worst_ratio.min(mean / opt_hat);
        }
        if mean < bound - 3.0 * se {
            run.quality_bad.push(format!("instance {idx}: mean {mean} < {bound} - 3 * {se}"));
        }
    }
    run
}

#[test]
fn criterion_8_and_9_ptas_quality_feasibility_and_sandwich() {
    let mut quality = 0;
    let mut feasibility = 0;
    let mut sandwich = 0;
    let mut details = Vec::new();
    for eps in [0.5, 0.75] {
        let run = run_ptas(eps, 200);
        quality += run.quality_bad.len();
        feasibility += run.infeasible_plans;
        sandwich += run.sandwich_bad;
        details.push(format!(
            "eps {eps}: {} plans, infeasible {}, sandwich violations {}, worst mean/OPT_hat {:.4}, quality misses {:?}",
            run.plans, run.infeasible_plans, run.sandwich_bad, run.worst_ratio,
            run.quality_bad.iter().take(2).collect::<Vec<_>>()
        ));
    }
    let text = details.join("; ");
    println!("criterion 8 [{}] scheme quality and feasibility: {text}",
        if quality + feasibility == 0 { "PASS" } else { "FAIL" });
    println!("criterion 9 [{}] discretization sandwich: {sandwich} violations",
        if sandwich == 0 { "PASS" } else { "FAIL" });
    assert_eq!(quality + feasibility + sandwich, 0, "{text}");
}
