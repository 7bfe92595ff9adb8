//! Small statistical helpers shared across modules.

use ndarray::{Array2, ArrayView1, ArrayView2};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator). Returns 0 for fewer than
/// two values.
pub fn sample_sd(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|&x| (x - m) * (x - m)).sum();
    (ss / (n - 1) as f64).sqrt()
}

pub fn median(xs: &[f64]) -> f64 {
    assert!(!xs.is_empty(), "median of empty slice");
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("non-finite value in median"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median absolute deviation about the median. `scaled` applies the usual
/// 1.4826 consistency factor.
pub fn mad(xs: &[f64], scaled: bool) -> f64 {
    let med = median(xs);
    let dev: Vec<f64> = xs.iter().map(|&x| (x - med).abs()).collect();
    let raw = median(&dev);
    if scaled {
        1.4826 * raw
    } else {
        raw
    }
}

/// Squared Euclidean distance between two rows.
pub fn sq_dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum()
}

/// All-pairs Euclidean distances of the rows of `x`, computed with a Gram
/// matrix so the inner loop runs as a matrix product. Tiny negative values
/// from cancellation are clamped to zero.
pub fn pairwise_distances(x: ArrayView2<f64>) -> Array2<f64> {
    let n = x.nrows();
    let gram = x.dot(&x.t());
    let mut d = Array2::<f64>::zeros((n, n));
    let sq: Vec<f64> = (0..n).map(|i| gram[[i, i]]).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = (sq[i] + sq[j] - 2.0 * gram[[i, j]]).max(0.0).sqrt();
            d[[i, j]] = v;
            d[[j, i]] = v;
        }
    }
    d
}
