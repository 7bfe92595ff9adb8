//! All five clusterers on one contaminated dataset with the true k: the
//! weighted robust sparse method against plain, trimmed, sparse, and
//! trimmed-sparse k-means.
//!
//! ```bash
//! cargo run --release --example compare_methods
//! ```

use wrsk::baselines::{kmeans, robust_sparse_kmeans, sparse_kmeans, trimmed_kmeans, TrimConfig};
use wrsk::eval::evaluate;
use wrsk::fit::fit;
use wrsk::model::{ClusterModel, FitConfig};
use wrsk::simgen::{generate, GroupSizes, OutlierKind, SimConfig};

fn main() {
    let config = SimConfig {
        g: 3,
        group_sizes: GroupSizes::Fixed(vec![30, 30, 30]),
        p_inf: 8,
        p_noise: 72,
        mu_range: (3.0, 6.0),
        rho_range: (0.1, 0.9),
        sigma_range: (3.0, 10.0),
        outlier_frac_inf: 0.10,
        outlier_frac_noise: 0.10,
        noise_contam_var_frac: 0.10,
        outlier_kind_inf: OutlierKind::Scattered,
        uniform_literal_interval: false,
        seed: 99,
    };
    let ds = generate(&config).expect("generate");
    let k = config.g;
    let s = 2.4;
    // trimming level for the trimming-based baselines: the true fraction
    let true_frac = ds.outlier_flags().iter().filter(|&&f| f).count() as f64 / ds.n() as f64;
    let trim = TrimConfig::new(true_frac);

    let runs: Vec<(&str, ClusterModel)> = vec![
        ("wrsk", fit(ds.x.view(), &FitConfig::new(k, s).with_seed(1)).unwrap()),
        ("kc", kmeans(ds.x.view(), k, None, 100).unwrap()),
        ("tkc", trimmed_kmeans(ds.x.view(), k, trim, 100).unwrap()),
        ("skc", sparse_kmeans(ds.x.view(), k, s, 100).unwrap()),
        ("rskc", robust_sparse_kmeans(ds.x.view(), k, s, trim, 100).unwrap()),
    ];

    println!(
        "dataset: {} x {}, {} planted outliers, alpha = {true_frac:.2}, k = {k}, s = {s}",
        ds.n(),
        ds.p(),
        ds.outlier_flags().iter().filter(|&&f| f).count()
    );
    println!();
    println!(
        "{:>6} {:>8} {:>8} {:>8} {:>10} {:>10}",
        "method", "CER", "TPR", "FPR", "w_inf", "w_noise"
    );
    for (name, model) in &runs {
        let r = evaluate(model, &ds).expect("evaluate");
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into());
        println!(
            "{:>6} {:>8.3} {:>8} {:>8} {:>10} {:>10}",
            name,
            r.cer,
            fmt(r.tpr),
            fmt(r.fpr),
            fmt(r.w_bar_inf),
            fmt(r.w_bar_noise)
        );
    }
    println!();
    println!("(CER is computed against the pre-contamination group labels)");
}
