//! Shared oracles for the integration suites: an AR(1) simulator with
//! known autocorrelation time, finite differences, a least-squares slope,
//! and a small XML well-formedness checker. These stay independent of the
//! library's estimation code paths.
#![allow(dead_code)] // each test binary uses its own subset

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Stationary AR(1) chain with unit innovation variance; its
/// autocorrelation time is `(1 + pi) / (1 - pi)` and its variance
/// `1 / (1 - pi^2)`.
pub fn simulate_ar1(pi: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut x: f64 = rng.sample::<f64, _>(StandardNormal) / (1.0 - pi * pi).sqrt();
    out.push(x);
    for _ in 1..n {
        x = pi * x + rng.sample::<f64, _>(StandardNormal);
        out.push(x);
    }
    out
}

pub fn white_noise(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn uniform_points(dim: usize, lo: f64, hi: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..dim).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect())
        .collect()
}

/// Least-squares slope of y against x.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Minimal XML well-formedness check: tags balance, attributes are quoted,
/// and no stray `<` appears in text content. Enough to catch structural
/// breakage in generated SVG.
pub fn assert_well_formed_xml(text: &str) {
    let mut stack: Vec<String> = Vec::new();
    let mut rest = text;
    while let Some(start) = rest.find('<') {
        let tail = &rest[start + 1..];
        let end = tail.find('>').expect("unclosed tag");
        let tag = &tail[..end];
        rest = &tail[end + 1..];
        if tag.starts_with('?') || tag.starts_with('!') {
            continue;
        }
        if let Some(name) = tag.strip_prefix('/') {
            let open = stack.pop().unwrap_or_else(|| panic!("unmatched </{name}>"));
            assert_eq!(open, name, "mismatched close tag");
            continue;
        }
        let name: String = tag
            .split([' ', '\t', '\n'])
            .next()
            .unwrap()
            .trim_end_matches('/')
            .to_string();
        assert!(!name.is_empty(), "empty tag name");
        assert_eq!(tag.matches('"').count() % 2, 0, "unbalanced quotes in <{name}>");
        if !tag.ends_with('/') {
            stack.push(name);
        }
    }
    assert!(stack.is_empty(), "unclosed tags: {stack:?}");
    assert!(!rest.contains('<'), "stray < in text content");
}

/// Central finite differences of a log density, with a scaled step.
pub fn finite_difference_gradient<F: Fn(&[f64]) -> f64>(f: F, x: &[f64]) -> Vec<f64> {
    let mut grad = vec![0.0; x.len()];
    let mut hi = x.to_vec();
    let mut lo = x.to_vec();
    for i in 0..x.len() {
        let h = 1e-5 * x[i].abs().max(1.0);
        hi[i] = x[i] + h;
        lo[i] = x[i] - h;
        grad[i] = (f(&hi) - f(&lo)) / (2.0 * h);
        hi[i] = x[i];
        lo[i] = x[i];
    }
    grad
}
