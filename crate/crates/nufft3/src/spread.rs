//! Deposit particle strengths onto the oversampled grid (the scatter half of
//! the transform pair) via three algorithms: per-cell atomic adds, per-tile
//! private histograms flushed to the grid, and a grid-parallel scheme that
//! partitions output cells across a worker team so no cell is ever written
//! concurrently.

use crate::error::{Error, Result};
use crate::geometry::{build_tiles, stencil_unchecked, OversampledGrid, TileLayout};
use crate::points::{sort_bins, ParticleSet};
use crate::window::WindowSpec;
use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::atomic::{AtomicU64, Ordering};

/// Execution discipline shared by spread and interpolation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    /// Single-threaded, fixed summation order; repeated runs are bit-identical.
    Deterministic,
    /// Internally threaded; agrees with Deterministic to summation-order
    /// roundoff.
    Parallel,
}

/// Tiling and team parameters for the tiled and grid-parallel variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TileParams {
    pub tile: [usize; 3],
    /// Grid-parallel: number of workers partitioning output cells by
    /// z-coordinate residue class.
    pub z_split: usize,
    /// Tiled: worker threads merging tile histograms.
    pub team: usize,
}

impl Default for TileParams {
    fn default() -> Self {
        TileParams {
            tile: [8, 8, 4],
            z_split: 4,
            team: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpreadVariant {
    Atomic,
    Tiled(TileParams),
    GridParallel(TileParams),
}

impl SpreadVariant {
    pub fn name(&self) -> &'static str {
        match self {
            SpreadVariant::Atomic => "atomic",
            SpreadVariant::Tiled(_) => "tiled",
            SpreadVariant::GridParallel(_) => "gridpar",
        }
    }
}

/// Extended-coordinate linear offset for a (possibly out-of-box) global cell
/// index. All variants write into the extended region; single-rank grids fold
/// halo content back into the owned region afterwards, decomposed grids leave
/// it for the halo exchange.
#[inline]
pub(crate) fn write_offset(grid: &OversampledGrid, g: [i64; 3], dim: usize) -> usize {
    let ext = grid.extents();
    let h = grid.halo_width as i64;
    let mut c = [0usize; 3];
    for a in 0..dim {
        let local = g[a] - grid.owned_start[a] as i64 + h;
        debug_assert!(local >= 0 && (local as usize) < ext[a], "stencil outside extended box");
        c[a] = local as usize;
    }
    (c[2] * ext[1] + c[1]) * ext[0] + c[0]
}

fn validate(ps: &ParticleSet, spec: &WindowSpec, grid: &OversampledGrid) -> Result<()> {
    if spec.width != grid.kernel_w {
        return Err(Error::GridMismatch(format!(
            "window width {} vs grid kernel width {}",
            spec.width, grid.kernel_w
        )));
    }
    if ps.dim != grid.dim || ps.dim != spec.dim {
        return Err(Error::GridMismatch(format!(
            "dimension mismatch: particles {}, grid {}, window {}",
            ps.dim, grid.dim, spec.dim
        )));
    }
    if (ps.length - grid.length).abs() > 1e-12 * grid.length {
        return Err(Error::GridMismatch("domain length mismatch".into()));
    }
    Ok(())
}

/// CAS-loop floating-point accumulate on a grid cell component.
#[inline]
fn atomic_add_f64(slot: &AtomicU64, val: f64) {
    if val == 0.0 {
        return;
    }
    let mut cur = slot.load(Ordering::Relaxed);
    loop {
        let new = (f64::from_bits(cur) + val).to_bits();
        match slot.compare_exchange_weak(cur, new, Ordering::Relaxed, Ordering::Relaxed) {
            Ok(_) => return,
            Err(c) => cur = c,
        }
    }
}

/// View complex grid storage as independent atomic re/im words.
#[inline]
fn as_atomic(values: &mut [Complex64]) -> &[AtomicU64] {
    // Complex64 is two contiguous f64s; AtomicU64 has the layout of u64.
    unsafe { std::slice::from_raw_parts(values.as_mut_ptr() as *const AtomicU64, values.len() * 2) }
}

/// One application of the spreading operator: accumulate each particle's
/// strength times its separable window weights into the covered cells.
/// The grid is not zeroed first; contributions add to existing content.
pub fn spread(
    ps: &ParticleSet,
    spec: &WindowSpec,
    grid: &mut OversampledGrid,
    variant: &SpreadVariant,
    exec: ExecMode,
) -> Result<()> {
    validate(ps, spec, grid)?;
    match (variant, exec) {
        (SpreadVariant::Atomic, ExecMode::Deterministic) => spread_sequential(ps, spec, grid),
        (SpreadVariant::Atomic, ExecMode::Parallel) => spread_atomic_parallel(ps, spec, grid),
        (SpreadVariant::Tiled(p), _) => spread_tiled(ps, spec, grid, p, exec)?,
        (SpreadVariant::GridParallel(p), _) => spread_grid_parallel(ps, spec, grid, p, exec)?,
    }
    if !grid.decomposed {
        // Wrap boundary contributions back into the owned region.
        grid.fold_halo_periodic();
    }
    // Any previously filled halo no longer matches the owned data.
    grid.halo_generation = 0;
    Ok(())
}

/// Reference-order sequential deposit; also the Deterministic atomic path.
/// The extended region makes the x run contiguous, so the inner loop is a
/// plain strided accumulate.
fn spread_sequential(ps: &ParticleSet, spec: &WindowSpec, grid: &mut OversampledGrid) {
    let h = grid.spacing();
    let dim = ps.dim;
    let w = spec.width;
    let ext = grid.extents();
    let halo = grid.halo_width as i64;
    let start = grid.owned_start;
    for j in 0..ps.len() {
        let st = stencil_unchecked(ps.positions[j], spec, h);
        let f = ps.strengths[j];
        let lx = (st.base[0] - start[0] as i64 + halo) as usize;
        let ly = if dim > 1 { (st.base[1] - start[1] as i64 + halo) as usize } else { 0 };
        let lz = if dim > 2 { (st.base[2] - start[2] as i64 + halo) as usize } else { 0 };
        let nz = if dim > 2 { w } else { 1 };
        let ny = if dim > 1 { w } else { 1 };
        for kz in 0..nz {
            let wz = if dim > 2 { st.weights[2][kz] } else { 1.0 };
            let plane = (lz + kz) * ext[1];
            for ky in 0..ny {
                let wyz = wz * if dim > 1 { st.weights[1][ky] } else { 1.0 };
                let fyz = f * wyz;
                let row = ((plane + ly + ky) * ext[0] + lx) as usize;
                let cells = &mut grid.values[row..row + w];
                for (cell, &wx) in cells.iter_mut().zip(&st.weights[0][..w]) {
                    *cell += fyz * wx;
                }
            }
        }
    }
}

fn spread_atomic_parallel(ps: &ParticleSet, spec: &WindowSpec, grid: &mut OversampledGrid) {
    let h = grid.spacing();
    let dim = ps.dim;
    let w = spec.width;
    let grid_ref: &OversampledGrid = unsafe { &*(grid as *const OversampledGrid) };
    let slots = as_atomic(&mut grid.values);
    (0..ps.len()).into_par_iter().for_each(|j| {
        let st = stencil_unchecked(ps.positions[j], spec, h);
        let f = ps.strengths[j];
        let nz = if dim > 2 { w } else { 1 };
        let ny = if dim > 1 { w } else { 1 };
        for kz in 0..nz {
            let wz = if dim > 2 { st.weights[2][kz] } else { 1.0 };
            for ky in 0..ny {
                let wyz = wz * if dim > 1 { st.weights[1][ky] } else { 1.0 };
                let fyz = f * wyz;
                for kx in 0..w {
                    let g = [st.base[0] + kx as i64, st.base[1] + ky as i64, st.base[2] + kz as i64];
                    let off = write_offset(grid_ref, g, dim);
                    let v = fyz * st.weights[0][kx];
                    atomic_add_f64(&slots[2 * off], v.re);
                    atomic_add_f64(&slots[2 * off + 1], v.im);
                }
            }
        }
    });
}

/// Deposit one tile's particles into a private histogram of extent
/// prod(T_i + w), origin at tile start minus floor(w/2) in owned coordinates.
fn fill_tile_histogram(
    ps: &ParticleSet,
    spec: &WindowSpec,
    grid: &OversampledGrid,
    range: std::ops::Range<usize>,
    tile_start: [usize; 3],
    hist_ext: [usize; 3],
) -> Vec<Complex64> {
    let h = grid.spacing();
    let dim = ps.dim;
    let w = spec.width;
    let wlo = (w / 2) as i64;
    let mut hist = vec![Complex64::new(0.0, 0.0); hist_ext[0] * hist_ext[1] * hist_ext[2]];
    // Histogram origin in global coordinates.
    let mut origin = [0i64; 3];
    for a in 0..dim {
        origin[a] = tile_start[a] as i64 + grid.owned_start[a] as i64 - wlo;
    }
    for j in range {
        let st = stencil_unchecked(ps.positions[j], spec, h);
        let f = ps.strengths[j];
        let nz = if dim > 2 { w } else { 1 };
        let ny = if dim > 1 { w } else { 1 };
        for kz in 0..nz {
            let wz = if dim > 2 { st.weights[2][kz] } else { 1.0 };
            let cz = if dim > 2 { (st.base[2] + kz as i64 - origin[2]) as usize } else { 0 };
            for ky in 0..ny {
                let wyz = wz * if dim > 1 { st.weights[1][ky] } else { 1.0 };
                let cy = if dim > 1 { (st.base[1] + ky as i64 - origin[1]) as usize } else { 0 };
                let fyz = f * wyz;
                let row = (cz * hist_ext[1] + cy) * hist_ext[0];
                let cx0 = (st.base[0] - origin[0]) as usize;
                for kx in 0..w {
                    hist[row + cx0 + kx] += fyz * st.weights[0][kx];
                }
            }
        }
    }
    hist
}

fn flush_histogram_plain(
    grid: &mut OversampledGrid,
    hist: &[Complex64],
    tile_start: [usize; 3],
    hist_ext: [usize; 3],
    dim: usize,
) {
    let wlo = (grid.kernel_w / 2) as i64;
    let mut origin = [0i64; 3];
    for a in 0..dim {
        origin[a] = tile_start[a] as i64 + grid.owned_start[a] as i64 - wlo;
    }
    for cz in 0..hist_ext[2] {
        for cy in 0..hist_ext[1] {
            for cx in 0..hist_ext[0] {
                let v = hist[(cz * hist_ext[1] + cy) * hist_ext[0] + cx];
                if v == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let g = [origin[0] + cx as i64, origin[1] + cy as i64, origin[2] + cz as i64];
                let off = write_offset(grid, g, dim);
                grid.values[off] += v;
            }
        }
    }
}

fn spread_tiled(
    ps: &ParticleSet,
    spec: &WindowSpec,
    grid: &mut OversampledGrid,
    params: &TileParams,
    exec: ExecMode,
) -> Result<()> {
    let layout = clamp_layout(grid, params)?;
    let (sorted, offsets) = sort_bins(ps, grid, &layout);
    let hist_ext = layout.hist_ext_for(grid.dim);
    match exec {
        ExecMode::Deterministic => {
            for t in 0..layout.num_tiles() {
                if offsets[t] == offsets[t + 1] {
                    continue;
                }
                let (start, _) = layout.tile_box(t);
                let hist = fill_tile_histogram(&sorted, spec, grid, offsets[t]..offsets[t + 1], start, hist_ext);
                flush_histogram_plain(grid, &hist, start, hist_ext, ps.dim);
            }
        }
        ExecMode::Parallel => {
            let grid_ref: &OversampledGrid = unsafe { &*(grid as *const OversampledGrid) };
            let dim = ps.dim;
            let wlo = (grid_ref.kernel_w / 2) as i64;
            let slots = as_atomic(&mut grid.values);
            (0..layout.num_tiles()).into_par_iter().for_each(|t| {
                if offsets[t] == offsets[t + 1] {
                    return;
                }
                let (start, _) = layout.tile_box(t);
                let hist = fill_tile_histogram(&sorted, spec, grid_ref, offsets[t]..offsets[t + 1], start, hist_ext);
                // One atomic add per histogram cell (flush step).
                let mut origin = [0i64; 3];
                for a in 0..dim {
                    origin[a] = start[a] as i64 + grid_ref.owned_start[a] as i64 - wlo;
                }
                for cz in 0..hist_ext[2] {
                    for cy in 0..hist_ext[1] {
                        for cx in 0..hist_ext[0] {
                            let v = hist[(cz * hist_ext[1] + cy) * hist_ext[0] + cx];
                            if v == Complex64::new(0.0, 0.0) {
                                continue;
                            }
                            let g = [origin[0] + cx as i64, origin[1] + cy as i64, origin[2] + cz as i64];
                            let off = write_offset(grid_ref, g, dim);
                            atomic_add_f64(&slots[2 * off], v.re);
                            atomic_add_f64(&slots[2 * off + 1], v.im);
                        }
                    }
                }
            });
        }
    }
    Ok(())
}

/// Workers partition output cells by z-coordinate residue (axis 0 residue in
/// 1D), so every cell has exactly one writer and the particle loop order per
/// cell matches the sequential path: parallel output is bit-identical.
fn spread_grid_parallel(
    ps: &ParticleSet,
    spec: &WindowSpec,
    grid: &mut OversampledGrid,
    params: &TileParams,
    exec: ExecMode,
) -> Result<()> {
    let layout = clamp_layout(grid, params)?;
    let (sorted, _) = sort_bins(ps, grid, &layout);
    let workers = match exec {
        ExecMode::Deterministic => 1,
        ExecMode::Parallel => params.z_split.max(1),
    };
    let part_axis = if ps.dim > 2 { 2 } else { 0 };
    let h = grid.spacing();
    let dim = ps.dim;
    let w = spec.width;
    let grid_ref: &OversampledGrid = unsafe { &*(grid as *const OversampledGrid) };
    let values_ptr = SendPtr(grid.values.as_mut_ptr());
    std::thread::scope(|scope| {
        for worker in 0..workers {
            let sorted = &sorted;
            scope.spawn(move || {
                let values = values_ptr;
                for j in 0..sorted.len() {
                    let st = stencil_unchecked(sorted.positions[j], spec, h);
                    let f = sorted.strengths[j];
                    let nz = if dim > 2 { w } else { 1 };
                    let ny = if dim > 1 { w } else { 1 };
                    for kz in 0..nz {
                        let wz = if dim > 2 { st.weights[2][kz] } else { 1.0 };
                        for ky in 0..ny {
                            let wyz = wz * if dim > 1 { st.weights[1][ky] } else { 1.0 };
                            let fyz = f * wyz;
                            for kx in 0..w {
                                let g = [
                                    st.base[0] + kx as i64,
                                    st.base[1] + ky as i64,
                                    st.base[2] + kz as i64,
                                ];
                                if workers > 1 && g[part_axis].rem_euclid(workers as i64) != worker as i64 {
                                    continue;
                                }
                                let off = write_offset(grid_ref, g, dim);
                                // Disjoint by the residue partition.
                                unsafe { *values.0.add(off) += fyz * st.weights[0][kx] };
                            }
                        }
                    }
                }
            });
        }
    });
    Ok(())
}

#[derive(Clone, Copy)]
struct SendPtr(*mut Complex64);
unsafe impl Send for SendPtr {}
unsafe impl Sync for SendPtr {}

/// Clamp tile extents to the owned box so one layout default works across
/// grid sizes and rank-local boxes.
fn clamp_layout(grid: &OversampledGrid, params: &TileParams) -> Result<TileLayout> {
    let mut tile = [1usize; 3];
    for a in 0..grid.dim {
        tile[a] = params.tile[a].max(1).min(grid.owned_extent[a]);
    }
    build_tiles(grid, tile, params.z_split.max(1))
}

trait HistExt {
    fn hist_ext_for(&self, dim: usize) -> [usize; 3];
}

impl HistExt for TileLayout {
    fn hist_ext_for(&self, dim: usize) -> [usize; 3] {
        let mut e = [1usize; 3];
        for a in 0..dim {
            e[a] = self.tile[a] + self.kernel_w;
        }
        e
    }
}
