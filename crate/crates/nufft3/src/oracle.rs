//! Brute-force references: direct nonuniform DFTs (Type 1 and Type 2), a
//! naive spreading/interpolation loop, and compensated-summation variants.
//! These are the ground truth the fast paths are tested against; performance
//! is a non-goal.

use crate::error::{Error, Result};
use crate::geometry::{stencil_unchecked, wrap_index, OversampledGrid};
use crate::points::ParticleSet;
use crate::specfft::ModeArray;
use crate::window::WindowSpec;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Default operation cap per oracle call: N^d * N_p.
pub const DEFAULT_COST_CAP: u64 = 1 << 31;

fn check_cost(modes_total: usize, np: usize, cap: u64) -> Result<()> {
    let cost = modes_total as u64 * np.max(1) as u64;
    if cost > cap {
        return Err(Error::CostCapExceeded { cost, cap });
    }
    Ok(())
}

/// Direct Type 1 sum: f_n = sum_j f_j e^{-i k_n . x_j} with k_n = (2 pi / L) n.
pub fn nudft_type1(ps: &ParticleSet, modes_n: usize, cap: u64) -> Result<ModeArray> {
    let mut out = ModeArray::zeros(modes_n, ps.dim);
    check_cost(out.values.len(), ps.len(), cap)?;
    let k0 = 2.0 * PI / ps.length;
    for idx in 0..out.values.len() {
        let n = out.freq_of(idx);
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..ps.len() {
            let phase: f64 = (0..ps.dim).map(|a| n[a] as f64 * ps.positions[j][a]).sum();
            acc += ps.strengths[j] * Complex64::from_polar(1.0, -k0 * phase);
        }
        out.values[idx] = acc;
    }
    Ok(out)
}

/// Direct Type 2 sum: f(x_j) = sum_n f_n e^{+i k_n . x_j}.
pub fn nudft_type2(modes: &ModeArray, positions: &[[f64; 3]], length: f64, cap: u64) -> Result<Vec<Complex64>> {
    check_cost(modes.values.len(), positions.len(), cap)?;
    let k0 = 2.0 * PI / length;
    let mut out = vec![Complex64::new(0.0, 0.0); positions.len()];
    for idx in 0..modes.values.len() {
        let n = modes.freq_of(idx);
        let f = modes.values[idx];
        if f == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (j, x) in positions.iter().enumerate() {
            let phase: f64 = (0..modes.dim).map(|a| n[a] as f64 * x[a]).sum();
            out[j] += f * Complex64::from_polar(1.0, k0 * phase);
        }
    }
    Ok(out)
}

/// Type 1 with Kahan-compensated accumulation per mode; used to cross-check
/// the plain oracle's summation error.
pub fn nudft_type1_compensated(ps: &ParticleSet, modes_n: usize, cap: u64) -> Result<ModeArray> {
    let mut out = ModeArray::zeros(modes_n, ps.dim);
    check_cost(out.values.len(), ps.len(), cap)?;
    let k0 = 2.0 * PI / ps.length;
    for idx in 0..out.values.len() {
        let n = out.freq_of(idx);
        let (mut sr, mut si, mut cr, mut ci) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for j in 0..ps.len() {
            let phase: f64 = (0..ps.dim).map(|a| n[a] as f64 * ps.positions[j][a]).sum();
            let term = ps.strengths[j] * Complex64::from_polar(1.0, -k0 * phase);
            let yr = term.re - cr;
            let tr = sr + yr;
            cr = (tr - sr) - yr;
            sr = tr;
            let yi = term.im - ci;
            let ti = si + yi;
            ci = (ti - si) - yi;
            si = ti;
        }
        out.values[idx] = Complex64::new(sr, si);
    }
    Ok(out)
}

/// Literal double loop realizing the sparse spreading operator: for each
/// particle, add strength times the separable window weights into the w^d
/// covered cells of a single-rank grid, with periodic wrapping. Sequential
/// summation in particle order.
pub fn dense_spread_reference(ps: &ParticleSet, spec: &WindowSpec, grid: &mut OversampledGrid) {
    let h = grid.spacing();
    let m = grid.fine_m;
    let w = spec.width;
    for j in 0..ps.len() {
        let st = stencil_unchecked(ps.positions[j], spec, h);
        let f = ps.strengths[j];
        let loops = |a: usize| if a < ps.dim { w } else { 1 };
        for kz in 0..loops(2) {
            for ky in 0..loops(1) {
                for kx in 0..loops(0) {
                    let weight = st.weights[0][kx]
                        * if ps.dim > 1 { st.weights[1][ky] } else { 1.0 }
                        * if ps.dim > 2 { st.weights[2][kz] } else { 1.0 };
                    let mut c = [0usize; 3];
                    c[0] = wrap_index(st.base[0] + kx as i64, m);
                    if ps.dim > 1 {
                        c[1] = wrap_index(st.base[1] + ky as i64, m);
                    }
                    if ps.dim > 2 {
                        c[2] = wrap_index(st.base[2] + kz as i64, m);
                    }
                    let off = grid.owned_offset(c);
                    grid.values[off] += f * weight;
                }
            }
        }
    }
}

/// Adjoint of [`dense_spread_reference`]: per-particle weighted sum of the
/// w^d covered grid cells.
pub fn dense_interp_reference(grid: &OversampledGrid, ps: &ParticleSet, spec: &WindowSpec) -> Vec<Complex64> {
    let h = grid.spacing();
    let m = grid.fine_m;
    let w = spec.width;
    let mut out = vec![Complex64::new(0.0, 0.0); ps.len()];
    for j in 0..ps.len() {
        let st = stencil_unchecked(ps.positions[j], spec, h);
        let loops = |a: usize| if a < ps.dim { w } else { 1 };
        let mut acc = Complex64::new(0.0, 0.0);
        for kz in 0..loops(2) {
            for ky in 0..loops(1) {
                for kx in 0..loops(0) {
                    let weight = st.weights[0][kx]
                        * if ps.dim > 1 { st.weights[1][ky] } else { 1.0 }
                        * if ps.dim > 2 { st.weights[2][kz] } else { 1.0 };
                    let mut c = [0usize; 3];
                    c[0] = wrap_index(st.base[0] + kx as i64, m);
                    if ps.dim > 1 {
                        c[1] = wrap_index(st.base[1] + ky as i64, m);
                    }
                    if ps.dim > 2 {
                        c[2] = wrap_index(st.base[2] + kz as i64, m);
                    }
                    acc += grid.values[grid.owned_offset(c)] * weight;
                }
            }
        }
        out[j] = acc;
    }
    out
}
