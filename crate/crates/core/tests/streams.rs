use sandwich_core::rng::run_trials;
use sandwich_core::RngStream;
use statrs::distribution::{ContinuousCDF, Normal};

#[test]
fn same_stream_same_draws() {
    let (mut a, mut b) = (RngStream::new(42, 7), RngStream::new(42, 7));
    for _ in 0..10_000 {
        assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
    }
}

#[test]
fn neighbouring_indices_differ_and_decorrelate() {
    let (mut a, mut b) = (RngStream::new(42, 0), RngStream::new(42, 1));
    let n = 1_000_000;
    let (xs, ys): (Vec<f64>, Vec<f64>) = (0..n).map(|_| (a.uniform(), b.uniform())).unzip();
    assert_ne!(xs[..10], ys[..10]);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let (mx, my) = (mean(&xs), mean(&ys));
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / n as f64;
    let sd = |v: &[f64], m: f64| (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n as f64).sqrt();
    let corr = cov / (sd(&xs, mx) * sd(&ys, my));
    assert!(corr.abs() < 0.01, "{corr}");
}

#[test]
fn uniform_passes_kolmogorov_smirnov() {
    let mut r = RngStream::new(9, 0);
    let n = 100_000;
    let mut xs: Vec<f64> = (0..n).map(|_| r.uniform()).collect();
    assert!(xs.iter().all(|&x| (0.0..1.0).contains(&x)));
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| ((i + 1) as f64 / n as f64 - x).max(x - i as f64 / n as f64))
        .fold(0.0, f64::max);
    // Asymptotic Kolmogorov tail, two-sided.
    let t = d * (n as f64).sqrt();
    let p: f64 = 2.0 * (1..100).map(|k| (-1f64).powi(k - 1) * (-2.0 * (k as f64 * t).powi(2)).exp()).sum::<f64>();
    assert!(p > 1e-3, "D = {d}, p = {p}");
    // Sanity on the normal helper used elsewhere.
    assert!((Normal::standard().cdf(0.0) - 0.5).abs() < 1e-12);
}

#[test]
fn trials_are_ordered_by_index() {
    let out = run_trials(5, 64, |i, rng| Ok((i, rng.uniform()))).unwrap();
    for (k, (i, u)) in out.iter().enumerate() {
        assert_eq!(*i, k as u64);
        assert_eq!(u.to_bits(), RngStream::new(5, k as u64).uniform().to_bits());
    }
}
