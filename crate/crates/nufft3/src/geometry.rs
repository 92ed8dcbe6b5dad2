//! Domain, fine-grid, and stencil index arithmetic: oversized grids with halo
//! margins, periodic wrapping, base-index/stencil computation, and tiling.

use crate::error::{Error, Result};
use crate::window::{WindowSpec, MAX_WIDTH};
use num_complex::Complex64;
use std::io::{Read, Write};

/// Periodic cubic domain `[0, L)^dim`.
#[derive(Debug, Clone, Copy)]
pub struct DomainBox {
    pub length: f64,
    pub dim: usize,
}

/// Wrap an index into `[0, M)`.
#[inline]
pub fn wrap_index(i: i64, m: usize) -> usize {
    let m = m as i64;
    (((i % m) + m) % m) as usize
}

/// Complex values over a (possibly rank-local) box of the oversampled fine
/// grid, extended by `halo_width` cells on every face.
///
/// Storage order is x fastest, z slowest. `decomposed` selects the write
/// discipline for spreading: periodic wrap-on-write (single rank) or
/// halo-cell writes resolved later by halo accumulation.
#[derive(Debug, Clone)]
pub struct OversampledGrid {
    pub dim: usize,
    pub modes_n: usize,
    /// Global fine-grid extent per axis (M = sigma N).
    pub fine_m: usize,
    pub length: f64,
    pub halo_width: usize,
    pub kernel_w: usize,
    /// Global index of the first owned cell per axis.
    pub owned_start: [usize; 3],
    pub owned_extent: [usize; 3],
    pub values: Vec<Complex64>,
    pub decomposed: bool,
    /// Zero means halo contents are stale; bumped by halo fill.
    pub halo_generation: u64,
}

impl OversampledGrid {
    /// Grid covering the whole fine grid on a single rank.
    pub fn new_single(dim: usize, modes_n: usize, fine_m: usize, length: f64, kernel_w: usize) -> Self {
        let mut owned_extent = [1usize; 3];
        for e in owned_extent.iter_mut().take(dim) {
            *e = fine_m;
        }
        Self::with_box(dim, modes_n, fine_m, length, kernel_w, [0; 3], owned_extent, false)
    }

    /// Rank-local grid owning the box `[start, start+extent)` of the global grid.
    #[allow(clippy::too_many_arguments)]
    pub fn new_local(
        dim: usize,
        modes_n: usize,
        fine_m: usize,
        length: f64,
        kernel_w: usize,
        start: [usize; 3],
        extent: [usize; 3],
    ) -> Self {
        Self::with_box(dim, modes_n, fine_m, length, kernel_w, start, extent, true)
    }

    #[allow(clippy::too_many_arguments)]
    fn with_box(
        dim: usize,
        modes_n: usize,
        fine_m: usize,
        length: f64,
        kernel_w: usize,
        owned_start: [usize; 3],
        owned_extent: [usize; 3],
        decomposed: bool,
    ) -> Self {
        let halo_width = kernel_w.div_ceil(2);
        let mut grid = OversampledGrid {
            dim,
            modes_n,
            fine_m,
            length,
            halo_width,
            kernel_w,
            owned_start,
            owned_extent,
            values: Vec::new(),
            decomposed,
            halo_generation: 0,
        };
        let ext = grid.extents();
        grid.values = vec![Complex64::new(0.0, 0.0); ext[0] * ext[1] * ext[2]];
        grid
    }

    /// Grid spacing h = L / M.
    #[inline]
    pub fn spacing(&self) -> f64 {
        self.length / self.fine_m as f64
    }

    /// Extended (owned + 2*halo) extents; unused axes have extent 1.
    #[inline]
    pub fn extents(&self) -> [usize; 3] {
        let mut e = [1usize; 3];
        for a in 0..self.dim {
            e[a] = self.owned_extent[a] + 2 * self.halo_width;
        }
        e
    }

    /// Linear offset of an extended-coordinate cell (0 <= c < extents).
    #[inline]
    pub fn offset(&self, c: [usize; 3]) -> usize {
        let e = self.extents();
        (c[2] * e[1] + c[1]) * e[0] + c[0]
    }

    /// Linear offset of an owned cell given its local owned coordinates.
    #[inline]
    pub fn owned_offset(&self, c: [usize; 3]) -> usize {
        let h = self.halo_width;
        let mut ext = [0usize; 3];
        for a in 0..3 {
            ext[a] = if a < self.dim { c[a] + h } else { 0 };
        }
        self.offset(ext)
    }

    pub fn zero(&mut self) {
        self.values.fill(Complex64::new(0.0, 0.0));
        self.halo_generation = 0;
    }

    /// Copy owned-region values out in storage order.
    pub fn owned_values(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.owned_len());
        let ext = self.owned_extent;
        for z in 0..ext[2] {
            for y in 0..ext[1] {
                let base = self.owned_offset([0, y, z]);
                out.extend_from_slice(&self.values[base..base + ext[0]]);
            }
        }
        out
    }

    /// Overwrite the owned region from a slice in storage order.
    pub fn set_owned(&mut self, data: &[Complex64]) {
        assert_eq!(data.len(), self.owned_len());
        let ext = self.owned_extent;
        let mut src = 0;
        for z in 0..ext[2] {
            for y in 0..ext[1] {
                let base = self.owned_offset([0, y, z]);
                self.values[base..base + ext[0]].copy_from_slice(&data[src..src + ext[0]]);
                src += ext[0];
            }
        }
        self.halo_generation = 0;
    }

    #[inline]
    pub fn owned_len(&self) -> usize {
        self.owned_extent[0] * self.owned_extent[1] * self.owned_extent[2]
    }

    /// Fill halo cells from the periodically wrapped owned region. Only valid
    /// on a single-rank (global) grid; decomposed grids use the exchange in
    /// `decomp`.
    pub fn fill_halo_periodic(&mut self) {
        assert!(!self.decomposed, "use decomp::halo_fill for rank-local grids");
        let ext = self.extents();
        let h = self.halo_width as i64;
        let m = self.fine_m;
        for z in 0..ext[2] {
            for y in 0..ext[1] {
                for x in 0..ext[0] {
                    let g = [x as i64 - h, y as i64 - h, z as i64 - h];
                    let in_owned = (0..self.dim).all(|a| g[a] >= 0 && (g[a] as usize) < m);
                    if in_owned {
                        continue;
                    }
                    let mut src = [0usize; 3];
                    for a in 0..self.dim {
                        src[a] = wrap_index(g[a], m);
                    }
                    let dst = self.offset([x, y, z]);
                    self.values[dst] = self.values[self.owned_offset(src)];
                }
            }
        }
        self.halo_generation += 1;
    }

    /// Fold halo-cell contents into the periodically wrapped owned cells and
    /// zero the halos — the adjoint of [`Self::fill_halo_periodic`], used
    /// after spreading writes into the extended region on a single rank.
    pub fn fold_halo_periodic(&mut self) {
        assert!(!self.decomposed, "use decomp::halo_accumulate for rank-local grids");
        let ext = self.extents();
        let h = self.halo_width as i64;
        let m = self.fine_m;
        for z in 0..ext[2] {
            for y in 0..ext[1] {
                for x in 0..ext[0] {
                    let g = [x as i64 - h, y as i64 - h, z as i64 - h];
                    let in_owned = (0..self.dim).all(|a| g[a] >= 0 && (g[a] as usize) < m);
                    if in_owned {
                        continue;
                    }
                    let src = self.offset([x, y, z]);
                    if self.values[src] == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let mut dst = [0usize; 3];
                    for a in 0..self.dim {
                        dst[a] = wrap_index(g[a], m);
                    }
                    let dst = self.owned_offset(dst);
                    let v = self.values[src];
                    self.values[dst] += v;
                    self.values[src] = Complex64::new(0.0, 0.0);
                }
            }
        }
        self.halo_generation = 0;
    }
}

/// One particle's separable stencil: first covered index and per-axis window
/// weights.
#[derive(Debug, Clone)]
pub struct Stencil {
    pub base: [i64; 3],
    pub width: usize,
    pub weights: [[f64; MAX_WIDTH]; 3],
}

/// Stencil base index and weights for a position, performing exactly
/// `dim * w` window evaluations.
///
/// Base index rule: `a = ceil(x/h - w/2)` per axis, the tightest w-point
/// covering of the kernel support; weights are `phi((x/h - (a+j)) * 2/w)`.
pub fn stencil_for(x: [f64; 3], spec: &WindowSpec, grid: &OversampledGrid) -> Result<Stencil> {
    for a in 0..spec.dim {
        if !(0.0..grid.length).contains(&x[a]) {
            return Err(Error::PositionOutOfDomain(x));
        }
    }
    Ok(stencil_unchecked(x, spec, grid.spacing()))
}

/// Same as [`stencil_for`] without the domain check; positions must already be
/// canonicalized into `[0, L)`.
#[inline]
pub fn stencil_unchecked(x: [f64; 3], spec: &WindowSpec, h: f64) -> Stencil {
    let w = spec.width;
    let half_w = w as f64 / 2.0;
    let inv_scale = 2.0 / w as f64;
    let mut st = Stencil {
        base: [0; 3],
        width: w,
        weights: [[0.0; MAX_WIDTH]; 3],
    };
    for a in 0..spec.dim {
        let t = x[a] / h;
        let base = (t - half_w).ceil() as i64;
        st.base[a] = base;
        for j in 0..w {
            st.weights[a][j] = crate::window::es_eval((t - (base + j as i64) as f64) * inv_scale, spec.beta);
        }
    }
    st
}

/// Partition of a grid's owned box into tiles for the tiled and grid-parallel
/// spreading kernels.
#[derive(Debug, Clone)]
pub struct TileLayout {
    pub dim: usize,
    pub tile: [usize; 3],
    pub z_split: usize,
    pub tiles_per_axis: [usize; 3],
    pub owned_extent: [usize; 3],
    pub kernel_w: usize,
}

/// Build a tile layout over `grid`'s owned box. Each tile's scratch histogram
/// has extent `prod(T_i + w)` to accommodate stencil overlap; `z_split` teams
/// cover disjoint z-slices of the stencil output.
pub fn build_tiles(grid: &OversampledGrid, tile: [usize; 3], z_split: usize) -> Result<TileLayout> {
    if z_split < 1 {
        return Err(Error::TileExtent("z_split must be >= 1".into()));
    }
    let mut tiles_per_axis = [1usize; 3];
    for a in 0..grid.dim {
        if tile[a] < 1 {
            return Err(Error::TileExtent(format!("tile extent {} on axis {a}", tile[a])));
        }
        if tile[a] > grid.owned_extent[a] {
            return Err(Error::TileExtent(format!(
                "tile extent {} exceeds owned box extent {} on axis {a}",
                tile[a], grid.owned_extent[a]
            )));
        }
        tiles_per_axis[a] = grid.owned_extent[a].div_ceil(tile[a]);
    }
    Ok(TileLayout {
        dim: grid.dim,
        tile,
        z_split,
        tiles_per_axis,
        owned_extent: grid.owned_extent,
        kernel_w: grid.kernel_w,
    })
}

impl TileLayout {
    #[inline]
    pub fn num_tiles(&self) -> usize {
        self.tiles_per_axis[0] * self.tiles_per_axis[1] * self.tiles_per_axis[2]
    }

    /// Start (in owned coordinates) and extent of tile `t`.
    pub fn tile_box(&self, t: usize) -> ([usize; 3], [usize; 3]) {
        let tx = t % self.tiles_per_axis[0];
        let ty = (t / self.tiles_per_axis[0]) % self.tiles_per_axis[1];
        let tz = t / (self.tiles_per_axis[0] * self.tiles_per_axis[1]);
        let idx = [tx, ty, tz];
        let mut start = [0usize; 3];
        let mut extent = [1usize; 3];
        for a in 0..self.dim {
            start[a] = idx[a] * self.tile[a];
            extent[a] = self.tile[a].min(self.owned_extent[a] - start[a]);
        }
        (start, extent)
    }

    /// Tile owning an owned-coordinate cell.
    #[inline]
    pub fn tile_of_cell(&self, c: [usize; 3]) -> usize {
        let mut idx = [0usize; 3];
        for a in 0..self.dim {
            idx[a] = c[a] / self.tile[a];
        }
        (idx[2] * self.tiles_per_axis[1] + idx[1]) * self.tiles_per_axis[0] + idx[0]
    }

    /// Histogram extent per tile: `T_i + w` per active axis.
    pub fn hist_extent(&self) -> [usize; 3] {
        let mut e = [1usize; 3];
        for a in 0..self.dim {
            e[a] = self.tile[a] + self.kernel_w;
        }
        e
    }
}

/// Write the binary grid dump: header (dim, N, M, halo_width as 64-bit LE
/// integers) followed by owned-region values as interleaved LE f64 pairs.
pub fn write_grid_dump<W: Write>(grid: &OversampledGrid, out: &mut W) -> Result<()> {
    for v in [grid.dim as u64, grid.modes_n as u64, grid.fine_m as u64, grid.halo_width as u64] {
        out.write_all(&v.to_le_bytes())?;
    }
    for v in grid.owned_values() {
        out.write_all(&v.re.to_le_bytes())?;
        out.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

/// Read back a binary grid dump produced by [`write_grid_dump`].
pub fn read_grid_dump<R: Read>(input: &mut R, length: f64, kernel_w: usize) -> Result<OversampledGrid> {
    let mut buf = [0u8; 8];
    let mut header = [0u64; 4];
    for h in header.iter_mut() {
        input.read_exact(&mut buf)?;
        *h = u64::from_le_bytes(buf);
    }
    let (dim, n, m, halo) = (header[0] as usize, header[1] as usize, header[2] as usize, header[3] as usize);
    // kernel_w is not in the header; check it is consistent with the stored halo.
    if kernel_w.div_ceil(2) != halo {
        return Err(Error::GridMismatch(format!(
            "dump halo {halo} does not match kernel width {kernel_w}"
        )));
    }
    let mut grid = OversampledGrid::new_single(dim, n, m, length, kernel_w);
    let mut data = vec![Complex64::new(0.0, 0.0); grid.owned_len()];
    for v in data.iter_mut() {
        input.read_exact(&mut buf)?;
        let re = f64::from_le_bytes(buf);
        input.read_exact(&mut buf)?;
        let im = f64::from_le_bytes(buf);
        *v = Complex64::new(re, im);
    }
    grid.set_owned(&data);
    Ok(grid)
}
