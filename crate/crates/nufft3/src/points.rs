//! Nonuniform point container plus the spatial orderings (Morton curve, tile
//! bin sort) used by sorted interpolation and tiled spreading.

use crate::error::{Error, Result};
use crate::geometry::{OversampledGrid, TileLayout};
use num_complex::Complex64;
use std::io::{BufRead, Read, Write};

/// Particle positions in `[0, L)^dim` with complex strengths.
///
/// `ordering`, when present, is the permutation applied by a sort: entry `p`
/// is the original index of the particle now stored at slot `p`. It lets
/// interpolation return values in the caller's original order.
#[derive(Debug, Clone)]
pub struct ParticleSet {
    pub dim: usize,
    pub length: f64,
    pub positions: Vec<[f64; 3]>,
    pub strengths: Vec<Complex64>,
    /// True if the caller supplied real strengths; outputs are then reported
    /// with the same value kind.
    pub real_input: bool,
    pub ordering: Option<Vec<usize>>,
}

impl ParticleSet {
    /// Build a set from complex strengths, canonicalizing positions into
    /// `[0, L)` by periodic wrapping and rejecting non-finite data.
    pub fn new(dim: usize, length: f64, positions: Vec<[f64; 3]>, strengths: Vec<Complex64>) -> Result<Self> {
        Self::build(dim, length, positions, strengths, false)
    }

    /// Build a set from real strengths (stored as complex with zero imaginary
    /// part; outputs keep the real value kind).
    pub fn new_real(dim: usize, length: f64, positions: Vec<[f64; 3]>, strengths: &[f64]) -> Result<Self> {
        let cs = strengths.iter().map(|&s| Complex64::new(s, 0.0)).collect();
        Self::build(dim, length, positions, cs, true)
    }

    fn build(
        dim: usize,
        length: f64,
        mut positions: Vec<[f64; 3]>,
        strengths: Vec<Complex64>,
        real_input: bool,
    ) -> Result<Self> {
        assert_eq!(positions.len(), strengths.len());
        for (j, x) in positions.iter_mut().enumerate() {
            for a in 0..dim {
                if !x[a].is_finite() {
                    return Err(Error::PositionOutOfDomain(*x));
                }
                x[a] = x[a].rem_euclid(length);
                // rem_euclid can return `length` when x is a tiny negative value.
                if x[a] >= length {
                    x[a] = 0.0;
                }
            }
            for a in dim..3 {
                x[a] = 0.0;
            }
            if !strengths[j].re.is_finite() || !strengths[j].im.is_finite() {
                return Err(Error::NonFiniteStrength(j));
            }
        }
        Ok(ParticleSet {
            dim,
            length,
            positions,
            strengths,
            real_input,
            ordering: None,
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Fine-grid cell of particle `j` (floor of x/h per axis).
    pub fn cell(&self, j: usize, grid: &OversampledGrid) -> [usize; 3] {
        let h = grid.spacing();
        let mut c = [0usize; 3];
        for a in 0..self.dim {
            c[a] = ((self.positions[j][a] / h) as usize).min(grid.fine_m - 1);
        }
        c
    }

    fn permuted(&self, perm: Vec<usize>) -> ParticleSet {
        let positions = perm.iter().map(|&p| self.positions[p]).collect();
        let strengths = perm.iter().map(|&p| self.strengths[p]).collect();
        ParticleSet {
            dim: self.dim,
            length: self.length,
            positions,
            strengths,
            real_input: self.real_input,
            ordering: Some(perm),
        }
    }
}

/// Bit-interleave per-axis cell indices into a Morton key: x occupies bit 0
/// of each group, y bit 1, z bit 2.
pub fn morton_key(cell: [u64; 3], dim: usize, bits: u32) -> Result<u64> {
    if dim as u32 * bits > 63 {
        return Err(Error::MortonOverflow { index: 0, bits });
    }
    for &c in cell.iter().take(dim) {
        if bits < 64 && c >> bits != 0 {
            return Err(Error::MortonOverflow { index: c, bits });
        }
    }
    let mut key = 0u64;
    for b in 0..bits {
        for (a, &c) in cell.iter().enumerate().take(dim) {
            key |= ((c >> b) & 1) << (b as usize * dim + a);
        }
    }
    Ok(key)
}

/// Bits needed to index cells in `[0, m)`.
fn bits_for(m: usize) -> u32 {
    (usize::BITS - (m.max(1) - 1).leading_zeros()).max(1)
}

/// Stable sort by Morton key of each particle's fine-grid cell. Returns a
/// permuted copy; the original set is untouched.
pub fn sort_morton(ps: &ParticleSet, grid: &OversampledGrid) -> Result<ParticleSet> {
    let bits = bits_for(grid.fine_m);
    let mut keys = Vec::with_capacity(ps.len());
    for j in 0..ps.len() {
        let c = ps.cell(j, grid);
        keys.push(morton_key([c[0] as u64, c[1] as u64, c[2] as u64], ps.dim, bits)?);
    }
    let mut perm: Vec<usize> = (0..ps.len()).collect();
    perm.sort_by_key(|&j| keys[j]);
    Ok(ps.permuted(perm))
}

/// Counting sort of particles by owning tile. Returns the permuted copy and
/// `tile_offsets` with `num_tiles + 1` entries: tile t's particles occupy
/// `[tile_offsets[t], tile_offsets[t+1])`.
pub fn sort_bins(ps: &ParticleSet, grid: &OversampledGrid, tiles: &TileLayout) -> (ParticleSet, Vec<usize>) {
    let nt = tiles.num_tiles();
    let mut owner = Vec::with_capacity(ps.len());
    let mut counts = vec![0usize; nt + 1];
    for j in 0..ps.len() {
        let c = ps.cell(j, grid);
        // Owned coordinates for a single-rank grid equal global coordinates;
        // rank-local callers pass cells already shifted into the owned box.
        let mut local = [0usize; 3];
        for a in 0..ps.dim {
            local[a] = c[a] - grid.owned_start[a];
        }
        let t = tiles.tile_of_cell(local);
        owner.push(t);
        counts[t + 1] += 1;
    }
    for t in 0..nt {
        counts[t + 1] += counts[t];
    }
    let offsets = counts.clone();
    let mut perm = vec![0usize; ps.len()];
    let mut cursor = counts;
    for (j, &t) in owner.iter().enumerate() {
        perm[cursor[t]] = j;
        cursor[t] += 1;
    }
    (ps.permuted(perm), offsets)
}

/// Write particles as CSV with header `x,y,z,re,im`.
pub fn write_particles_csv<W: Write>(ps: &ParticleSet, out: &mut W) -> Result<()> {
    writeln!(out, "x,y,z,re,im")?;
    for j in 0..ps.len() {
        let p = ps.positions[j];
        let s = ps.strengths[j];
        writeln!(out, "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}", p[0], p[1], p[2], s.re, s.im)?;
    }
    Ok(())
}

/// Read particles from `x,y,z,re,im` CSV (header optional).
pub fn read_particles_csv<R: BufRead>(input: R, dim: usize, length: f64) -> Result<ParticleSet> {
    let mut positions = Vec::new();
    let mut strengths = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('x') || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::Config(format!("particle CSV line {}: expected 5 fields", lineno + 1)));
        }
        let mut v = [0.0f64; 5];
        for (i, f) in fields.iter().enumerate() {
            v[i] = f
                .trim()
                .parse()
                .map_err(|e| Error::Config(format!("particle CSV line {}: {e}", lineno + 1)))?;
        }
        positions.push([v[0], v[1], v[2]]);
        strengths.push(Complex64::new(v[3], v[4]));
    }
    ParticleSet::new(dim, length, positions, strengths)
}

/// Write particles as raw little-endian f64 groups (x, y, z, re, im).
pub fn write_particles_bin<W: Write>(ps: &ParticleSet, out: &mut W) -> Result<()> {
    for j in 0..ps.len() {
        for v in [
            ps.positions[j][0],
            ps.positions[j][1],
            ps.positions[j][2],
            ps.strengths[j].re,
            ps.strengths[j].im,
        ] {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Read raw little-endian particle records until EOF.
pub fn read_particles_bin<R: Read>(mut input: R, dim: usize, length: f64) -> Result<ParticleSet> {
    let mut positions = Vec::new();
    let mut strengths = Vec::new();
    let mut rec = [0u8; 40];
    loop {
        match input.read_exact(&mut rec) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => break,
            Err(e) => return Err(e.into()),
        }
        let mut v = [0.0f64; 5];
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = f64::from_le_bytes(rec[i * 8..i * 8 + 8].try_into().unwrap());
        }
        positions.push([v[0], v[1], v[2]]);
        strengths.push(Complex64::new(v[3], v[4]));
    }
    ParticleSet::new(dim, length, positions, strengths)
}
