//! The observation-weighting pipeline in isolation: LOF scores on one
//! cluster, per-cluster standardization, and the translated biweight that
//! maps standardized scores into [0, 1].
//!
//! ```bash
//! cargo run --release --example observation_weights
//! ```

use ndarray::Array2;
use rand_distr::{Distribution, StandardNormal};
use wrsk::outlier::{biweight, lof, standardize_lof, LofParams};

fn main() {
    let mut rng = wrsk::rng::stream(3, &[0]);
    let n = 30;
    let p = 4;

    // one tight cluster plus two increasingly distant points
    let mut x = Array2::<f64>::zeros((n, p));
    for i in 0..n - 2 {
        for j in 0..p {
            let z: f64 = StandardNormal.sample(&mut rng);
            x[[i, j]] = z;
        }
    }
    for j in 0..p {
        x[[n - 2, j]] = 4.0;
        x[[n - 1, j]] = 10.0;
    }

    let params = LofParams::default();
    let scores = lof(x.view(), params.q, &params).expect("lof");
    let members: Vec<usize> = (0..n).collect();
    let standardized = standardize_lof(&scores, &members).expect("standardize");
    let (weights, step_mode) = biweight(&standardized, params.c, params.scaled_mad);

    println!("q = {}, c = {}, degenerate step mode: {step_mode}", params.q, params.c);
    println!("{:>4} {:>8} {:>8} {:>8}", "row", "lof", "lof*", "weight");
    for i in 0..n {
        println!(
            "{:>4} {:>8.3} {:>8.3} {:>8.3}",
            i + 1,
            scores[i],
            standardized[i],
            weights[i]
        );
    }
    println!();
    println!("the mild point (row {}) is downweighted, the gross one (row {}) hits 0", n - 1, n);
}
