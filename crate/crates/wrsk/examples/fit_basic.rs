//! Fit one model with fixed k and s: three clusters in two informative
//! variables, eight noise variables, and a few planted outliers.
//!
//! ```bash
//! cargo run --release --example fit_basic
//! ```

use ndarray::Array2;
use rand_distr::{Distribution, StandardNormal};
use wrsk::fit::fit;
use wrsk::model::FitConfig;

fn main() {
    let mut rng = wrsk::rng::stream(42, &[0]);
    let n_per = 25;
    let p = 10;
    let centers = [[0.0, 0.0], [8.0, 0.0], [0.0, 8.0]];

    // variables 0-1 carry the separation; 2-9 are standard normal noise
    let n = 3 * n_per + 2;
    let mut x = Array2::<f64>::zeros((n, p));
    for i in 0..3 * n_per {
        let c = centers[i / n_per];
        for j in 0..p {
            let z: f64 = StandardNormal.sample(&mut rng);
            x[[i, j]] = if j < 2 { c[j] + z } else { z };
        }
    }
    // two outliers: one far away in the informative plane, one contaminated
    // only in the noise variables
    for j in 0..p {
        x[[3 * n_per, j]] = if j < 2 { 25.0 } else { 0.0 };
        x[[3 * n_per + 1, j]] = if j < 2 { 0.2 } else { 15.0 };
    }

    let config = FitConfig::new(3, 2.0).with_seed(7);
    let model = fit(x.view(), &config).expect("fit succeeds");

    println!("converged: {} after {} outer iterations", model.converged, model.iterations);
    println!("objective: {:.3}", model.objective);
    println!();
    println!("variable weights (informative variables are 1 and 2):");
    for (j, w) in model.w.iter().enumerate() {
        println!("  variable {:2}: w = {:.4}", j + 1, w);
    }
    println!();
    println!("flagged outliers (observation weight v < 0.5):");
    for i in 0..n {
        if model.outlier_flags[i] {
            println!(
                "  row {:2}: v = {:.3} (v1 = {:.3}, v2 = {:.3}), cluster {}",
                i + 1,
                model.v[i],
                model.v1[i],
                model.v2[i],
                model.assignment[i]
            );
        }
    }
    let sizes: Vec<usize> = (1..=3)
        .map(|r| model.assignment.iter().filter(|&&a| a == r).count())
        .collect();
    println!();
    println!("cluster sizes: {sizes:?}");
}
