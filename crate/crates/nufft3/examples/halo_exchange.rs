//! Simulated multi-rank domain decomposition: partition the fine grid into
//! rank boxes, spread particles rank-locally, exchange halo contributions,
//! and check the reassembled grid matches a single-rank spread — then the
//! reverse direction (scatter, halo fill, per-rank interpolation).
//!
//! Usage: cargo run --release --example halo_exchange

use nufft3::bench::random_particles;
use nufft3::decomp::{assign_particles, gather_global, halo_accumulate, halo_fill, partition, scatter_global};
use nufft3::geometry::OversampledGrid;
use nufft3::interp::{interpolate, InterpOrdering};
use nufft3::spread::{spread, ExecMode, SpreadVariant};
use nufft3::window::select_params;

fn main() -> nufft3::Result<()> {
    let modes = 8usize;
    let fine = 2 * modes;
    let length = 2.0 * std::f64::consts::PI;
    let spec = select_params(1e-4, 3)?;
    let ps = random_particles(3000, 3, length, 9);

    // Single-rank reference.
    let mut reference = OversampledGrid::new_single(3, modes, fine, length, spec.width);
    spread(&ps, &spec, &mut reference, &SpreadVariant::Atomic, ExecMode::Deterministic)?;
    reference.fill_halo_periodic();
    let want = interpolate(&reference, &ps, &spec, InterpOrdering::Direct, ExecMode::Deterministic)?;

    for ranks in [[2usize, 1, 1], [2, 2, 1], [2, 2, 2]] {
        let map = partition(fine, ranks, spec.width, 3)?;
        let mut grids = map.make_local_grids(modes, length);

        // Forward: rank-local spread, then accumulate halo contributions
        // into the owning ranks.
        let sets = assign_particles(&ps, &map);
        for (grid, set) in grids.iter_mut().zip(&sets) {
            spread(set, &spec, grid, &SpreadVariant::Atomic, ExecMode::Deterministic)?;
        }
        let stats = halo_accumulate(&mut grids, &map)?;
        let global = gather_global(&grids, &map, modes, length);
        let spread_diff = global
            .owned_values()
            .iter()
            .zip(&reference.owned_values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);

        // Reverse: distribute the reference grid, fill halos, interpolate
        // rank-locally, and compare against the single-rank gather.
        scatter_global(&reference, &mut grids, &map);
        halo_fill(&mut grids, &map)?;
        let mut interp_diff = 0.0f64;
        for (grid, set) in grids.iter().zip(&sets) {
            let got = interpolate(grid, set, &spec, InterpOrdering::Direct, ExecMode::Deterministic)?;
            let orig = set.ordering.as_ref().expect("assigned sets track origin indices");
            for (v, &j) in got.iter().zip(orig.iter()) {
                interp_diff = interp_diff.max((v - want[j]).norm());
            }
        }

        println!(
            "ranks {:?}: {} halo messages / {} values; spread diff {:.3e}, interp diff {:.3e}",
            ranks, stats.messages, stats.values, spread_diff, interp_diff
        );
        let scale: f64 = reference.owned_values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(spread_diff <= 1e-12 * scale && interp_diff <= 1e-12 * scale);
    }
    println!("decomposed execution matches single-rank results");
    Ok(())
}
