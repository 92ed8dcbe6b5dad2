//! Sweep the requested tolerance and compare both transform directions
//! against the direct nonuniform DFT oracle, printing one row per tolerance
//! with the selected kernel width and observed max relative error.
//!
//! Usage: cargo run --release --example accuracy_sweep

use nufft3::bench::{random_modes, random_particles};
use nufft3::oracle::{nudft_type1, nudft_type2, DEFAULT_COST_CAP};
use nufft3::pipeline::{max_rel_error, one_norm, NufftPlan, PlanConfig};

fn main() -> nufft3::Result<()> {
    let modes = 16usize;
    let np = 4000usize;
    println!("{:>8}  {:>2}  {:>13}  {:>13}", "eps", "w", "type1 err", "type2 err");
    for eps in [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8] {
        let cfg = PlanConfig { modes_n: modes, tolerance: eps, ..PlanConfig::default() };
        let plan = NufftPlan::new(cfg.clone())?;
        let ps = random_particles(np, 3, cfg.length, 42);
        let coeffs = random_modes(modes, 3, 43);

        let got1 = plan.type1(&ps)?;
        let want1 = nudft_type1(&ps, modes, DEFAULT_COST_CAP)?;
        let err1 = max_rel_error(&got1.values, &want1.values, one_norm(&ps.strengths));

        let got2 = plan.type2(&coeffs, &ps.positions)?;
        let want2 = nudft_type2(&coeffs, &ps.positions, cfg.length, DEFAULT_COST_CAP)?;
        let err2 = max_rel_error(&got2, &want2, one_norm(&coeffs.values));

        println!("{eps:>8.0e}  {:>2}  {err1:>13.4e}  {err2:>13.4e}", plan.spec.width);
        assert!(err1 <= 10.0 * eps && err2 <= 10.0 * eps, "error outside the requested tolerance band");
    }
    println!("all errors within 10x the requested tolerance");
    Ok(())
}
