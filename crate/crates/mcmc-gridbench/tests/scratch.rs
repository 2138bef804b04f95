//! Temporary diagnostics; deleted before release.

mod common;
use common::simulate_ar1;
use mcmc_gridbench::act::{
    estimate_act, sample_acf, select_order, ActOptions, MeanMode, SeriesView,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
#[ignore]
fn diagnose_unbounded_fraction() {
    let mut unbounded = 0;
    let mut orders = std::collections::BTreeMap::new();
    let mut pi1s = Vec::new();
    for seed in 0..200u64 {
        let chain = simulate_ar1(0.995, 2_000, 4000 + seed);
        let sv = SeriesView::new(&chain, MeanMode::Known(0.0)).unwrap();
        let fit = select_order(&sv, 34).unwrap();
        *orders.entry(fit.order).or_insert(0) += 1;
        let acf1 = sample_acf(&sv, 1).unwrap()[0];
        pi1s.push(acf1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let opts = ActOptions { p_max: Some(1), ..ActOptions::default() };
        let est = estimate_act(&sv, &opts, &mut rng);
        if est.ci_high.is_infinite() {
            unbounded += 1;
        }
    }
    pi1s.sort_by(f64::total_cmp);
    eprintln!("orders: {orders:?}");
    eprintln!(
        "rho1 quantiles: 5%={:.5} 25%={:.5} 50%={:.5} 75%={:.5} 95%={:.5}",
        pi1s[10], pi1s[50], pi1s[100], pi1s[150], pi1s[190]
    );
    // threshold for an AR(1) fit: pi_hat > 1 - 1.96*sqrt((1-pi^2)/n)
    let thr = |p: f64| 1.0 - 1.96 * ((1.0 - p * p) / 2000.0).sqrt();
    let above = pi1s.iter().filter(|p| **p > thr(**p)).count();
    eprintln!("rho1 above its own AR(1) threshold: {above}/200; unbounded: {unbounded}/200");
}
