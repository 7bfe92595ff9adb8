//! Joint selection of the number of clusters k and the sparsity bound s by
//! the observation-weight-adjusted gap statistic, next to the classic gap
//! for plain k-means on the same data.
//!
//! ```bash
//! cargo run --release --example parameter_selection
//! ```

use wrsk::gap::{default_s_grid, gap_k_classic, gap_table, select_k, select_s, GapParams};
use wrsk::model::FitConfig;
use wrsk::simgen::{generate, GroupSizes, OutlierKind, SimConfig};

fn main() {
    // three groups, 6 informative + 34 noise variables, 10% contamination
    let config = SimConfig {
        g: 3,
        group_sizes: GroupSizes::Fixed(vec![25, 25, 25]),
        p_inf: 6,
        p_noise: 34,
        mu_range: (3.0, 6.0),
        rho_range: (0.1, 0.9),
        sigma_range: (3.0, 10.0),
        outlier_frac_inf: 0.10,
        outlier_frac_noise: 0.10,
        noise_contam_var_frac: 0.10,
        outlier_kind_inf: OutlierKind::Scattered,
        uniform_literal_interval: false,
        seed: 11,
    };
    let ds = generate(&config).expect("generate");
    println!("dataset: {} observations, {} variables ({} informative)", ds.n(), ds.p(), 6);

    let k_grid: Vec<usize> = (2..=5).collect();
    let s_grid = default_s_grid(ds.p());
    let params = GapParams {
        permutations: 5,
        se_inflation: true,
    };
    let base = FitConfig::new(2, s_grid[0]).with_seed(1);
    let table = gap_table(ds.x.view(), &k_grid, &s_grid, &params, &base).expect("gap grid");

    println!();
    println!("weight-adjusted gap, optimal s per k (one-standard-error rule):");
    for &k in &k_grid {
        let rows = table.entries_for_k(k);
        let star = select_s(&rows);
        println!("  k = {k}: s* = {:>4.1}, gap = {:.3} +- {:.3}", star.s, star.gap, star.se);
    }
    let best = select_k(&table);
    println!("selected: k = {}, s = {:.1}  (true number of groups: 3)", best.k, best.s);

    // the classic gap statistic ignores observation and variable weights
    let classic = gap_k_classic(ds.x.view(), &k_grid, &params, None, 1).expect("classic gap");
    println!();
    println!("classic gap on the same data (plain k-means, all variables):");
    for e in &classic.entries {
        println!("  k = {}: gap = {:.3} +- {:.3}", e.k, e.gap, e.se);
    }
    println!(
        "classic choice: k = {}{}",
        classic.k_star,
        if classic.fallback { " (rule never fired; largest k reported)" } else { "" }
    );
}
