//! Estimating a label-noise type from samples with threshold classifiers,
//! and the high-probability error bound that goes with it.
//!
//! ```bash
//! cargo run --release --example type_estimation
//! ```

use collab_incentives::classif::{
    empirical_rademacher, erm_fit, eta_bound, h_divergence_label_flip, h_divergence_sup_scan, sample, true_type,
    PacPreset, SyntheticAgentDist,
};
use collab_incentives::Result;

pub fn run() -> Result<()> {
    let clean = SyntheticAgentDist::new(0.4, 0.0)?;
    let noisy = SyntheticAgentDist::new(0.4, 0.06)?;
    let reference = sample(&clean, 2_000, 1);
    let own = sample(&noisy, 2_000, 2);

    let (g, risk) = erm_fit(&own)?;
    println!("ERM on the noisy agent: threshold {:.4}, orientation {:+}, risk {risk:.4}", g.threshold, g.orientation);

    let sup = h_divergence_sup_scan(&own, &reference)?;
    let flip = h_divergence_label_flip(&own, &reference)?;
    println!("true type {} | sup scan {sup:.4} | label flip {flip:.4}", true_type(&noisy));

    let xs: Vec<f64> = reference.iter().map(|s| s.x).collect();
    let rad = empirical_rademacher(&xs, 3)?;
    let eta = eta_bound(2_000, 2_000, 0.05, 1, PacPreset::UnitRate, rad)?;
    println!("Rademacher {rad:.4}, error bound eta = {eta:.4}, covered: {}", (flip - 0.06).abs() <= eta);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run()
}
