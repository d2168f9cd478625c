use amco::bandit::FnArms;
use amco::data::latent;
use amco::neighbors::{knn_graph, knn_query, Points};
use amco::{run_best_k, BanditConfig, EvalLedger, Objective};
use rand::Rng;

fn noisy_arms(
    means: &[f64],
    m: u64,
) -> FnArms<
    impl FnMut(usize, &mut amco::bandit::ArmRng) -> amco::Result<f64> + '_,
    impl FnMut(usize) -> amco::Result<f64> + '_,
> {
    FnArms::uniform(
        means.len(),
        m,
        move |a, rng| Ok(means[a] + rng.random_range(-1.0..1.0)),
        move |a| Ok(means[a]),
    )
}

#[test]
fn touches_split_into_pulls_and_exact_work() {
    let means: Vec<f64> = (0..40).map(|i| i as f64 * 0.05).collect();
    let m = 500;
    let cfg = BanditConfig::default().with_seed(4);
    let out = run_best_k(&mut noisy_arms(&means, m), 3, &cfg).unwrap();
    let l = &out.ledger;
    assert_eq!(l.coord_touches, l.pulls + l.exact_evals * m);
    assert!(l.exact_evals as usize <= means.len());
    assert!(l.effective_total <= l.brute_total + 1e-9);
    assert!((l.brute_total - means.len() as f64).abs() < 1e-12);
    let mut best = out.arms.clone();
    best.sort_unstable();
    assert_eq!(best, vec![0, 1, 2]);
}

#[test]
fn maximizing_finds_the_top_arms() {
    let means: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).sin()).collect();
    let cfg = BanditConfig::default()
        .with_seed(9)
        .with_objective(Objective::Maximize);
    let out = run_best_k(&mut noisy_arms(&means, 2000), 1, &cfg).unwrap();
    let top = (0..means.len())
        .max_by(|&a, &b| means[a].total_cmp(&means[b]))
        .unwrap();
    assert_eq!(out.arms, vec![top]);
}

#[test]
fn graph_ledger_is_the_sum_of_query_ledgers() {
    let m = latent(40, 128, 3, 0.1, 6).unwrap();
    let cfg = BanditConfig::default().with_seed(6);
    let graph = knn_graph(Points::Dense(&m), 3, &cfg).unwrap();
    let queries: Vec<EvalLedger> = (0..m.n())
        .map(|i| {
            let local = cfg.clone().with_seed(amco::mix_seed(6, i as u64));
            knn_query(Points::Dense(&m), i, 3, &local)
                .unwrap()
                .best
                .ledger
        })
        .collect();
    assert_eq!(graph.ledger, EvalLedger::sum(&queries));
    // Every query races n - 1 arms at one distance evaluation each.
    assert_eq!(graph.ledger.brute_total, (m.n() * (m.n() - 1)) as f64);
}
