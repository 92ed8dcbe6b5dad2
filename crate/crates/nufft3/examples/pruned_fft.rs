//! Demonstrate the pruned Cooley-Tukey step for 2x-oversampled grids: the
//! forward pruned transform equals truncating a full FFT, the inverse equals
//! a full inverse FFT of zero-padded modes, and the parity sub-transforms can
//! run under different concurrency levels without changing the result.
//!
//! Usage: cargo run --release --example pruned_fft

use nufft3::geometry::OversampledGrid;
use nufft3::specfft::{fft_forward, fft_inverse, pad_modes, truncate_modes, FftEngine, ModeArray, PrunedPlan};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use std::time::Instant;

fn main() -> nufft3::Result<()> {
    let modes = 32usize;
    let fine = 2 * modes;
    let engine = Arc::new(FftEngine::new());
    let mut rng = ChaCha8Rng::seed_from_u64(5);

    let mut grid = OversampledGrid::new_single(3, modes, fine, 2.0 * std::f64::consts::PI, 3);
    let data: Vec<Complex64> = (0..grid.owned_len())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    grid.set_owned(&data);

    let full = truncate_modes(&fft_forward(&engine, &grid), fine, modes, 3);
    let mut coeffs = ModeArray::zeros(modes, 3);
    for v in coeffs.values.iter_mut() {
        *v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    let mut padded = pad_modes(&coeffs, fine);
    fft_inverse(&engine, &mut padded, fine, 3);

    println!("{:>6}  {:>13}  {:>13}  {:>10}", "n_conc", "fwd diff", "inv diff", "fwd time");
    for n_conc in [1usize, 2, 4, 8] {
        let plan = PrunedPlan::new(fine, modes, 3, n_conc, engine.clone())?;

        let t0 = Instant::now();
        let pruned_fwd = plan.forward(&grid);
        let fwd_time = t0.elapsed().as_secs_f64();
        let fwd_diff = pruned_fwd
            .values
            .iter()
            .zip(&full.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);

        let mut out = OversampledGrid::new_single(3, modes, fine, 2.0 * std::f64::consts::PI, 3);
        plan.inverse(&coeffs, &mut out);
        let inv_diff = out
            .owned_values()
            .iter()
            .zip(&padded)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);

        println!("{n_conc:>6}  {fwd_diff:>13.4e}  {inv_diff:>13.4e}  {fwd_time:>9.4}s");
        let scale: f64 = full.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(fwd_diff <= 1e-13 * scale && inv_diff <= 1e-13 * scale);
    }
    println!("pruned transforms match truncate(full FFT) and ifft(padded modes)");
    Ok(())
}
