//! Simulated multi-rank domain decomposition: tensor-grid box partition,
//! particle ownership, and the two halo exchanges (fill before interpolation,
//! accumulate after spreading) over an in-process message-passing substrate.
//!
//! Corner and edge traffic is realized as an axis-by-axis sweep (x, then y,
//! then z) with face-only messages; sweeping carries diagonal contributions
//! transitively. Fill slabs span already-swept axes' extended range; accumulate
//! slabs span not-yet-swept axes' extended range (the adjoint schedule).

use crate::error::{Error, Result};
use crate::geometry::OversampledGrid;
use crate::points::ParticleSet;
use num_complex::Complex64;

/// Tensor-grid partition of the global fine grid across simulated ranks.
#[derive(Debug, Clone)]
pub struct DecompositionMap {
    pub dim: usize,
    pub fine_m: usize,
    pub ranks: [usize; 3],
    pub kernel_w: usize,
    pub halo_width: usize,
    /// Per-axis cut points, length P_a + 1; box r_a owns [cuts[r_a], cuts[r_a+1]).
    cuts: [Vec<usize>; 3],
}

/// One face message of a halo sweep.
#[derive(Debug, Clone)]
pub struct HaloMessage {
    pub src: usize,
    pub dst: usize,
    pub axis: usize,
    /// True when the payload travels toward lower coordinates.
    pub downward: bool,
    pub payload: Vec<Complex64>,
}

/// Message traffic counters for communication-volume reporting.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExchangeStats {
    pub messages: usize,
    pub values: usize,
}

impl ExchangeStats {
    fn add(&mut self, payload_len: usize) {
        self.messages += 1;
        self.values += payload_len;
    }
}

/// Partition M^dim across a (P1, P2, P3) rank grid. Box extents are M/P per
/// axis with any remainder cells going to the last rank along that axis.
pub fn partition(fine_m: usize, ranks: [usize; 3], kernel_w: usize, dim: usize) -> Result<DecompositionMap> {
    let halo_width = kernel_w.div_ceil(2);
    let mut cuts: [Vec<usize>; 3] = [vec![0, 1], vec![0, 1], vec![0, 1]];
    for a in 0..3 {
        let p = if a < dim { ranks[a] } else { 1 };
        if p == 0 {
            return Err(Error::RankGrid(format!("zero ranks on axis {a}")));
        }
        if a >= dim && ranks[a] > 1 {
            return Err(Error::RankGrid(format!("axis {a} beyond dimension {dim}")));
        }
        if p > fine_m {
            return Err(Error::RankGrid(format!("{p} ranks exceed {fine_m} cells on axis {a}")));
        }
        let base = fine_m / p;
        if base < halo_width {
            return Err(Error::RankGrid(format!(
                "box extent {base} on axis {a} smaller than halo width {halo_width}"
            )));
        }
        let mut c: Vec<usize> = (0..p).map(|r| r * base).collect();
        c.push(fine_m);
        cuts[a] = c;
    }
    Ok(DecompositionMap {
        dim,
        fine_m,
        ranks: [
            if dim > 0 { ranks[0] } else { 1 },
            if dim > 1 { ranks[1] } else { 1 },
            if dim > 2 { ranks[2] } else { 1 },
        ],
        kernel_w,
        halo_width,
        cuts,
    })
}

impl DecompositionMap {
    #[inline]
    pub fn num_ranks(&self) -> usize {
        self.ranks[0] * self.ranks[1] * self.ranks[2]
    }

    /// Per-axis rank coordinates of linear rank r (x fastest).
    #[inline]
    pub fn rank_coords(&self, r: usize) -> [usize; 3] {
        [
            r % self.ranks[0],
            (r / self.ranks[0]) % self.ranks[1],
            r / (self.ranks[0] * self.ranks[1]),
        ]
    }

    #[inline]
    pub fn rank_linear(&self, c: [usize; 3]) -> usize {
        (c[2] * self.ranks[1] + c[1]) * self.ranks[0] + c[0]
    }

    /// Owned box (global start, extent) of rank r.
    pub fn box_of(&self, r: usize) -> ([usize; 3], [usize; 3]) {
        let rc = self.rank_coords(r);
        let mut start = [0usize; 3];
        let mut extent = [1usize; 3];
        for a in 0..self.dim {
            start[a] = self.cuts[a][rc[a]];
            extent[a] = self.cuts[a][rc[a] + 1] - self.cuts[a][rc[a]];
        }
        (start, extent)
    }

    /// Rank owning a global fine-grid cell.
    pub fn rank_of_cell(&self, cell: [usize; 3]) -> usize {
        let mut rc = [0usize; 3];
        for a in 0..self.dim {
            // Equal boxes except the last; direct division then clamp.
            let base = self.cuts[a][1] - self.cuts[a][0];
            rc[a] = (cell[a] / base).min(self.ranks[a] - 1);
        }
        self.rank_linear(rc)
    }

    /// Neighbor of rank r one step along `axis` (periodic).
    pub fn neighbor(&self, r: usize, axis: usize, toward_high: bool) -> usize {
        let mut rc = self.rank_coords(r);
        let p = self.ranks[axis];
        rc[axis] = if toward_high { (rc[axis] + 1) % p } else { (rc[axis] + p - 1) % p };
        self.rank_linear(rc)
    }

    /// Fresh zeroed rank-local grids for this partition.
    pub fn make_local_grids(&self, modes_n: usize, length: f64) -> Vec<OversampledGrid> {
        (0..self.num_ranks())
            .map(|r| {
                let (start, extent) = self.box_of(r);
                OversampledGrid::new_local(self.dim, modes_n, self.fine_m, length, self.kernel_w, start, extent)
            })
            .collect()
    }
}

/// Split a particle set by owning rank (the rank whose box contains each
/// particle's fine-grid cell). Union of outputs is the input multiset; each
/// output's `ordering` records the original index of every particle so
/// per-rank results can be scattered back to the caller's order.
pub fn assign_particles(ps: &ParticleSet, map: &DecompositionMap) -> Vec<ParticleSet> {
    let h = ps.length / map.fine_m as f64;
    let nr = map.num_ranks();
    let mut positions: Vec<Vec<[f64; 3]>> = vec![Vec::new(); nr];
    let mut strengths: Vec<Vec<Complex64>> = vec![Vec::new(); nr];
    let mut origins: Vec<Vec<usize>> = vec![Vec::new(); nr];
    for j in 0..ps.len() {
        let mut cell = [0usize; 3];
        for a in 0..ps.dim {
            cell[a] = ((ps.positions[j][a] / h) as usize).min(map.fine_m - 1);
        }
        let r = map.rank_of_cell(cell);
        positions[r].push(ps.positions[j]);
        strengths[r].push(ps.strengths[j]);
        origins[r].push(j);
    }
    positions
        .into_iter()
        .zip(strengths)
        .zip(origins)
        .map(|((p, s), o)| ParticleSet {
            dim: ps.dim,
            length: ps.length,
            positions: p,
            strengths: s,
            real_input: ps.real_input,
            ordering: Some(o),
        })
        .collect()
}

/// Half-open extended-coordinate box.
type ExtBox = ([usize; 3], [usize; 3]);

fn box_len(b: &ExtBox) -> usize {
    (0..3).map(|a| b.1[a] - b.0[a]).product()
}

fn pack(grid: &OversampledGrid, b: &ExtBox) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(box_len(b));
    for z in b.0[2]..b.1[2] {
        for y in b.0[1]..b.1[1] {
            let base = grid.offset([b.0[0], y, z]);
            out.extend_from_slice(&grid.values[base..base + (b.1[0] - b.0[0])]);
        }
    }
    out
}

fn unpack_add(grid: &mut OversampledGrid, b: &ExtBox, payload: &[Complex64]) {
    let mut src = 0;
    let row = b.1[0] - b.0[0];
    for z in b.0[2]..b.1[2] {
        for y in b.0[1]..b.1[1] {
            let base = grid.offset([b.0[0], y, z]);
            for x in 0..row {
                grid.values[base + x] += payload[src + x];
            }
            src += row;
        }
    }
}

fn unpack_set(grid: &mut OversampledGrid, b: &ExtBox, payload: &[Complex64]) {
    let mut src = 0;
    let row = b.1[0] - b.0[0];
    for z in b.0[2]..b.1[2] {
        for y in b.0[1]..b.1[1] {
            let base = grid.offset([b.0[0], y, z]);
            grid.values[base..base + row].copy_from_slice(&payload[src..src + row]);
            src += row;
        }
    }
}

/// Slab range along `axis` in extended coordinates for the four slab kinds.
#[derive(Clone, Copy)]
enum Slab {
    LowHalo,
    HighHalo,
    LowOwnedBand,
    HighOwnedBand,
}

fn axis_range(grid: &OversampledGrid, axis: usize, slab: Slab) -> (usize, usize) {
    let h = grid.halo_width;
    let e = grid.owned_extent[axis];
    match slab {
        Slab::LowHalo => (0, h),
        Slab::HighHalo => (h + e, 2 * h + e),
        Slab::LowOwnedBand => (h, 2 * h),
        Slab::HighOwnedBand => (e, e + h),
    }
}

/// Build the full slab box: `axis` gets the slab range; already-swept axes
/// (`< axis` when `swept_extended`) span the extended range, the others the
/// owned range. `swept_extended` is true for fill, false for accumulate.
fn slab_box(grid: &OversampledGrid, axis: usize, slab: Slab, dim: usize, swept_extended: bool) -> ExtBox {
    let h = grid.halo_width;
    let ext = grid.extents();
    let mut lo = [0usize; 3];
    let mut hi = [1usize; 3];
    for a in 0..dim {
        let extended = if swept_extended { a < axis } else { a > axis };
        if a == axis {
            let (l, u) = axis_range(grid, axis, slab);
            lo[a] = l;
            hi[a] = u;
        } else if extended {
            lo[a] = 0;
            hi[a] = ext[a];
        } else {
            lo[a] = h;
            hi[a] = h + grid.owned_extent[a];
        }
    }
    (lo, hi)
}

/// Zero the full axis-`axis` halo planes of a grid.
fn zero_halo_planes(grid: &mut OversampledGrid, axis: usize) {
    let ext = grid.extents();
    for slab in [Slab::LowHalo, Slab::HighHalo] {
        let (l, u) = axis_range(grid, axis, slab);
        let mut lo = [0usize; 3];
        let mut hi = [ext[0], ext[1], ext[2]];
        lo[axis] = l;
        hi[axis] = u;
        let b = (lo, hi);
        let row = b.1[0] - b.0[0];
        for z in b.0[2]..b.1[2] {
            for y in b.0[1]..b.1[1] {
                let base = grid.offset([b.0[0], y, z]);
                grid.values[base..base + row].fill(Complex64::new(0.0, 0.0));
            }
        }
    }
}

/// Fold halo-cell spread contributions into the owning neighbors' owned
/// cells, sweeping x, y, z. Halo cells are zero on return; the owned boxes
/// jointly hold exactly what a single-rank spread would.
pub fn halo_accumulate(grids: &mut [OversampledGrid], map: &DecompositionMap) -> Result<ExchangeStats> {
    check_grids(grids, map)?;
    let mut stats = ExchangeStats::default();
    for axis in 0..map.dim {
        // Collect all messages for this axis before delivering any.
        let mut messages: Vec<HaloMessage> = Vec::new();
        for (r, grid) in grids.iter().enumerate() {
            for (slab, downward) in [(Slab::LowHalo, true), (Slab::HighHalo, false)] {
                let b = slab_box(grid, axis, slab, map.dim, false);
                let payload = pack(grid, &b);
                stats.add(payload.len());
                messages.push(HaloMessage {
                    src: r,
                    dst: map.neighbor(r, axis, !downward),
                    axis,
                    downward,
                    payload,
                });
            }
        }
        for grid in grids.iter_mut() {
            zero_halo_planes(grid, axis);
        }
        for msg in messages {
            let grid = &mut grids[msg.dst];
            let slab = if msg.downward { Slab::HighOwnedBand } else { Slab::LowOwnedBand };
            let b = slab_box(grid, axis, slab, map.dim, false);
            if box_len(&b) != msg.payload.len() {
                return Err(Error::MessageMismatch(format!(
                    "accumulate axis {axis}: payload {} vs slab {}",
                    msg.payload.len(),
                    box_len(&b)
                )));
            }
            unpack_add(grid, &b, &msg.payload);
        }
    }
    for grid in grids.iter_mut() {
        grid.halo_generation = 0;
    }
    Ok(stats)
}

/// Fill halo cells with neighbors' owned boundary values (periodic), sweeping
/// x, y, z; marks the grids fresh for interpolation.
pub fn halo_fill(grids: &mut [OversampledGrid], map: &DecompositionMap) -> Result<ExchangeStats> {
    check_grids(grids, map)?;
    let mut stats = ExchangeStats::default();
    for axis in 0..map.dim {
        let mut messages: Vec<HaloMessage> = Vec::new();
        for (r, grid) in grids.iter().enumerate() {
            for (slab, downward) in [(Slab::LowOwnedBand, true), (Slab::HighOwnedBand, false)] {
                let b = slab_box(grid, axis, slab, map.dim, true);
                let payload = pack(grid, &b);
                stats.add(payload.len());
                messages.push(HaloMessage {
                    src: r,
                    dst: map.neighbor(r, axis, !downward),
                    axis,
                    downward,
                    payload,
                });
            }
        }
        for msg in messages {
            let grid = &mut grids[msg.dst];
            let slab = if msg.downward { Slab::HighHalo } else { Slab::LowHalo };
            let b = slab_box(grid, axis, slab, map.dim, true);
            if box_len(&b) != msg.payload.len() {
                return Err(Error::MessageMismatch(format!(
                    "fill axis {axis}: payload {} vs slab {}",
                    msg.payload.len(),
                    box_len(&b)
                )));
            }
            unpack_set(grid, &b, &msg.payload);
        }
    }
    for grid in grids.iter_mut() {
        grid.halo_generation += 1;
    }
    Ok(stats)
}

fn check_grids(grids: &[OversampledGrid], map: &DecompositionMap) -> Result<()> {
    if grids.len() != map.num_ranks() {
        return Err(Error::MessageMismatch(format!(
            "{} grids for {} ranks",
            grids.len(),
            map.num_ranks()
        )));
    }
    for (r, g) in grids.iter().enumerate() {
        let (start, extent) = map.box_of(r);
        if g.owned_start != start || g.owned_extent != extent || g.halo_width != map.halo_width {
            return Err(Error::MessageMismatch(format!("rank {r} grid does not match partition box")));
        }
    }
    Ok(())
}

/// Assemble rank-local owned boxes into one single-rank global grid.
pub fn gather_global(grids: &[OversampledGrid], map: &DecompositionMap, modes_n: usize, length: f64) -> OversampledGrid {
    let mut global = OversampledGrid::new_single(map.dim, modes_n, map.fine_m, length, map.kernel_w);
    for grid in grids {
        let ext = grid.owned_extent;
        for z in 0..ext[2] {
            for y in 0..ext[1] {
                for x in 0..ext[0] {
                    let g = [
                        grid.owned_start[0] + x,
                        grid.owned_start[1] + y,
                        grid.owned_start[2] + z,
                    ];
                    let src = grid.owned_offset([x, y, z]);
                    let dst = global.owned_offset(g);
                    global.values[dst] = grid.values[src];
                }
            }
        }
    }
    global
}

/// Distribute a global grid's owned values back into rank-local boxes
/// (halo cells are left untouched).
pub fn scatter_global(global: &OversampledGrid, grids: &mut [OversampledGrid], _map: &DecompositionMap) {
    for grid in grids.iter_mut() {
        let ext = grid.owned_extent;
        for z in 0..ext[2] {
            for y in 0..ext[1] {
                for x in 0..ext[0] {
                    let g = [
                        grid.owned_start[0] + x,
                        grid.owned_start[1] + y,
                        grid.owned_start[2] + z,
                    ];
                    let dst = grid.owned_offset([x, y, z]);
                    grid.values[dst] = global.values[global.owned_offset(g)];
                }
            }
        }
        grid.halo_generation = 0;
    }
}
