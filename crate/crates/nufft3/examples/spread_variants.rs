//! Benchmark the three spreading variants (atomic, tiled, grid-partitioned)
//! under the warm-up/timed protocol and check they agree pairwise, then show
//! the per-stage breakdown of a Type 1 execution.
//!
//! Usage: cargo run --release --example spread_variants

use nufft3::bench::{bench_transform, random_particles, BenchProtocol};
use nufft3::geometry::OversampledGrid;
use nufft3::pipeline::PlanConfig;
use nufft3::spread::{spread, ExecMode, SpreadVariant, TileParams};
use nufft3::window::select_params;

fn main() -> nufft3::Result<()> {
    let modes = 32usize;
    let rho = 8.0;
    let np = (rho * (modes as f64).powi(3)) as usize;
    let eps = 1e-4;
    let spec = select_params(eps, 3)?;
    let length = 2.0 * std::f64::consts::PI;

    // Pairwise agreement of the raw spread outputs.
    let ps = random_particles(np, 3, length, 11);
    let mut grids = Vec::new();
    for variant in [
        SpreadVariant::Atomic,
        SpreadVariant::Tiled(TileParams::default()),
        SpreadVariant::GridParallel(TileParams::default()),
    ] {
        let mut grid = OversampledGrid::new_single(3, modes, 2 * modes, length, spec.width);
        spread(&ps, &spec, &mut grid, &variant, ExecMode::Parallel)?;
        grids.push((variant.name(), grid));
    }
    let scale: f64 = grids[0].1.owned_values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    for i in 0..grids.len() {
        for j in i + 1..grids.len() {
            let worst = grids[i]
                .1
                .owned_values()
                .iter()
                .zip(&grids[j].1.owned_values())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            println!("{:>8} vs {:<8} max abs diff {:.3e} (scale {:.3e})", grids[i].0, grids[j].0, worst, scale);
            assert!(worst <= 1e-12 * scale);
        }
    }

    // Protocol-timed end-to-end Type 1 with per-stage breakdown.
    println!("\n{:>8}  {:>10}  {:>10}  {:>8}  breakdown (transfer/fft/deconv)", "variant", "median_s", "range_s", "Mpts/s");
    for (name, variant) in [
        ("atomic", SpreadVariant::Atomic),
        ("tiled", SpreadVariant::Tiled(TileParams::default())),
        ("gridpar", SpreadVariant::GridParallel(TileParams::default())),
    ] {
        let cfg = PlanConfig { modes_n: modes, tolerance: eps, variant, ..PlanConfig::default() };
        let (res, bd) = bench_transform(&cfg, 1, np, 11, BenchProtocol::default())?;
        println!(
            "{name:>8}  {:>10.4e}  {:>4.2e}-{:<4.2e}  {:>8.2}  {:.3e}/{:.3e}/{:.3e}",
            res.median_s,
            res.min_s,
            res.max_s,
            res.mpts_per_s(np),
            bd.grid_transfer.as_secs_f64(),
            bd.fft.as_secs_f64(),
            bd.deconv.as_secs_f64(),
        );
    }
    Ok(())
}
