//! Spectral transforms on the fine grid: full FFT wrapper, mode
//! truncation/zero-padding, and a pruned forward/inverse FFT built from one
//! Cooley-Tukey decomposition step (2^d parity sub-transforms of size (M/2)^d).
//!
//! Convention: forward = negative exponent, inverse = positive exponent, both
//! unnormalized. All 1/M^d normalization lives in the deconvolution table.

use crate::error::{Error, Result};
use crate::geometry::{wrap_index, OversampledGrid};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

/// Complex coefficients over the retained modes n in {-N/2, ..., N/2-1}^dim.
///
/// Storage: axis index `n + N/2`, x fastest, z slowest.
#[derive(Debug, Clone)]
pub struct ModeArray {
    pub modes_n: usize,
    pub dim: usize,
    pub values: Vec<Complex64>,
}

impl ModeArray {
    pub fn zeros(modes_n: usize, dim: usize) -> Self {
        assert!(modes_n % 2 == 0, "mode count must be even");
        ModeArray {
            modes_n,
            dim,
            values: vec![Complex64::new(0.0, 0.0); modes_n.pow(dim as u32)],
        }
    }

    /// Linear index of frequency `n` (entries beyond `dim` ignored).
    #[inline]
    pub fn index(&self, n: [i64; 3]) -> usize {
        let half = (self.modes_n / 2) as i64;
        let mut idx = 0usize;
        for a in (0..self.dim).rev() {
            debug_assert!(n[a] >= -half && n[a] < half);
            idx = idx * self.modes_n + (n[a] + half) as usize;
        }
        idx
    }

    #[inline]
    pub fn get(&self, n: [i64; 3]) -> Complex64 {
        self.values[self.index(n)]
    }

    #[inline]
    pub fn set(&mut self, n: [i64; 3], v: Complex64) {
        let i = self.index(n);
        self.values[i] = v;
    }

    /// Iterate storage index → frequency vector.
    pub fn freq_of(&self, mut idx: usize) -> [i64; 3] {
        let half = (self.modes_n / 2) as i64;
        let mut n = [0i64; 3];
        for a in n.iter_mut().take(self.dim) {
            *a = (idx % self.modes_n) as i64 - half;
            idx /= self.modes_n;
        }
        n
    }
}

/// Shared FFT backend: caches rustfft plans behind a mutex; execution is
/// lock-free once plans exist.
pub struct FftEngine {
    planner: Mutex<FftPlanner<f64>>,
}

impl std::fmt::Debug for FftEngine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("FftEngine")
    }
}

impl Default for FftEngine {
    fn default() -> Self {
        Self::new()
    }
}

impl FftEngine {
    pub fn new() -> Self {
        FftEngine {
            planner: Mutex::new(FftPlanner::new()),
        }
    }

    fn plan(&self, len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
        let mut planner = self.planner.lock().unwrap();
        if forward {
            planner.plan_fft_forward(len)
        } else {
            planner.plan_fft_inverse(len)
        }
    }

    /// In-place multi-dimensional DFT over an x-fastest array with the given
    /// extents (unused axes have extent 1).
    pub fn fft_nd(&self, values: &mut [Complex64], extents: [usize; 3], dim: usize, forward: bool) {
        assert_eq!(values.len(), extents[0] * extents[1] * extents[2]);
        for axis in 0..dim {
            let len = extents[axis];
            if len == 1 {
                continue;
            }
            let plan = self.plan(len, forward);
            match axis {
                0 => {
                    for row in values.chunks_exact_mut(len) {
                        plan.process(row);
                    }
                }
                _ => {
                    let stride = extents[..axis].iter().product::<usize>();
                    let block = stride * len;
                    let mut scratch = vec![Complex64::new(0.0, 0.0); len];
                    let outer: usize = extents[axis + 1..].iter().product::<usize>().max(1);
                    for o in 0..outer {
                        let base_o = o * block;
                        for s in 0..stride {
                            for j in 0..len {
                                scratch[j] = values[base_o + s + j * stride];
                            }
                            plan.process(&mut scratch);
                            for j in 0..len {
                                values[base_o + s + j * stride] = scratch[j];
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Forward DFT of the grid's owned region, returning all M^dim modes in
/// x-fastest order.
pub fn fft_forward(engine: &FftEngine, grid: &OversampledGrid) -> Vec<Complex64> {
    let mut data = grid.owned_values();
    let mut extents = [1usize; 3];
    for e in extents.iter_mut().take(grid.dim) {
        *e = grid.fine_m;
    }
    engine.fft_nd(&mut data, extents, grid.dim, true);
    data
}

/// Unnormalized inverse DFT over all M^dim modes, in place.
pub fn fft_inverse(engine: &FftEngine, data: &mut [Complex64], fine_m: usize, dim: usize) {
    let mut extents = [1usize; 3];
    for e in extents.iter_mut().take(dim) {
        *e = fine_m;
    }
    engine.fft_nd(data, extents, dim, false);
}

/// Per-axis array indices of the retained band: frequency n lives at index
/// wrap(n, M), i.e. {0..N/2-1} ∪ {M-N/2..M-1}.
#[inline]
fn retained_index(n: i64, m: usize) -> usize {
    wrap_index(n, m)
}

/// Extract the N^dim retained modes from a full M^dim spectrum.
pub fn truncate_modes(full: &[Complex64], fine_m: usize, modes_n: usize, dim: usize) -> ModeArray {
    assert!(fine_m >= modes_n);
    let mut out = ModeArray::zeros(modes_n, dim);
    let half = (modes_n / 2) as i64;
    for idx in 0..out.values.len() {
        let n = out.freq_of(idx);
        let mut src = 0usize;
        for a in (0..dim).rev() {
            debug_assert!(n[a] >= -half && n[a] < half);
            src = src * fine_m + retained_index(n[a], fine_m);
        }
        out.values[idx] = full[src];
    }
    out
}

/// Zero-pad retained modes back into a full M^dim spectrum (adjoint of
/// truncation).
pub fn pad_modes(modes: &ModeArray, fine_m: usize) -> Vec<Complex64> {
    assert!(fine_m >= modes.modes_n);
    let mut full = vec![Complex64::new(0.0, 0.0); fine_m.pow(modes.dim as u32)];
    for idx in 0..modes.values.len() {
        let n = modes.freq_of(idx);
        let mut dst = 0usize;
        for a in (0..modes.dim).rev() {
            dst = dst * fine_m + retained_index(n[a], fine_m);
        }
        full[dst] = modes.values[idx];
    }
    full
}

/// Pruned-FFT plan for the sigma = 2 case (M = 2N): parity twiddles and the
/// sub-transform concurrency level.
pub struct PrunedPlan {
    pub fine_m: usize,
    pub modes_n: usize,
    pub dim: usize,
    pub n_conc: usize,
    /// twiddle[k] = e^{-2 pi i k / M} for k in [0, M).
    twiddle: Vec<Complex64>,
    engine: Arc<FftEngine>,
}

impl std::fmt::Debug for PrunedPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PrunedPlan")
            .field("fine_m", &self.fine_m)
            .field("modes_n", &self.modes_n)
            .field("dim", &self.dim)
            .field("n_conc", &self.n_conc)
            .finish()
    }
}

impl PrunedPlan {
    pub fn new(fine_m: usize, modes_n: usize, dim: usize, n_conc: usize, engine: Arc<FftEngine>) -> Result<Self> {
        if fine_m != 2 * modes_n {
            return Err(Error::PrunedSize { m: fine_m, n: modes_n });
        }
        if n_conc < 1 {
            return Err(Error::Config("n_conc must be >= 1".into()));
        }
        let twiddle = (0..fine_m)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / fine_m as f64))
            .collect();
        Ok(PrunedPlan {
            fine_m,
            modes_n,
            dim,
            n_conc,
            twiddle,
            engine,
        })
    }

    #[inline]
    fn half(&self) -> usize {
        self.fine_m / 2
    }

    /// Extract the parity-p sub-array: sub[j] = x[2j + p] per axis.
    fn extract_parity(&self, data: &[Complex64], parity: [usize; 3]) -> Vec<Complex64> {
        let h = self.half();
        let m = self.fine_m;
        let mut sub = vec![Complex64::new(0.0, 0.0); h.pow(self.dim as u32)];
        match self.dim {
            1 => {
                for (j, s) in sub.iter_mut().enumerate() {
                    *s = data[2 * j + parity[0]];
                }
            }
            2 => {
                for jy in 0..h {
                    let src_y = (2 * jy + parity[1]) * m;
                    for jx in 0..h {
                        sub[jy * h + jx] = data[src_y + 2 * jx + parity[0]];
                    }
                }
            }
            _ => {
                for jz in 0..h {
                    let src_z = (2 * jz + parity[2]) * m * m;
                    for jy in 0..h {
                        let src_y = src_z + (2 * jy + parity[1]) * m;
                        let dst_y = (jz * h + jy) * h;
                        for jx in 0..h {
                            sub[dst_y + jx] = data[src_y + 2 * jx + parity[0]];
                        }
                    }
                }
            }
        }
        sub
    }

    fn parities(&self) -> Vec<[usize; 3]> {
        (0..1usize << self.dim)
            .map(|p| [p & 1, (p >> 1) & 1, (p >> 2) & 1])
            .collect()
    }

    /// Run `f` over the 2^dim parity tasks on a pool of `n_conc` workers.
    fn run_tasks<T: Send>(&self, tasks: Vec<[usize; 3]>, f: impl Fn([usize; 3]) -> T + Sync + Send) -> Vec<T> {
        let n_conc = self.n_conc.min(tasks.len()).max(1);
        if n_conc == 1 {
            return tasks.into_iter().map(f).collect();
        }
        let mut out: Vec<Option<T>> = tasks.iter().map(|_| None).collect();
        let chunk = tasks.len().div_ceil(n_conc);
        let f = &f;
        std::thread::scope(|scope| {
            for (slot_chunk, task_chunk) in out.chunks_mut(chunk).zip(tasks.chunks(chunk)) {
                scope.spawn(move || {
                    for (slot, &p) in slot_chunk.iter_mut().zip(task_chunk) {
                        *slot = Some(f(p));
                    }
                });
            }
        });
        out.into_iter().map(|t| t.unwrap()).collect()
    }

    /// Forward pruned transform: equals truncate(full forward DFT) to
    /// roundoff, computed from 2^dim sub-FFTs of size (M/2)^dim combined with
    /// twiddles at the retained wavevectors only.
    pub fn forward(&self, grid: &OversampledGrid) -> ModeArray {
        assert_eq!(grid.fine_m, self.fine_m);
        let data = grid.owned_values();
        let h = self.half();
        let mut sub_ext = [1usize; 3];
        for e in sub_ext.iter_mut().take(self.dim) {
            *e = h;
        }
        let parities = self.parities();
        let subs = self.run_tasks(parities.clone(), |p| {
            let mut sub = self.extract_parity(&data, p);
            self.engine.fft_nd(&mut sub, sub_ext, self.dim, true);
            sub
        });

        let mut out = ModeArray::zeros(self.modes_n, self.dim);
        for idx in 0..out.values.len() {
            let n = out.freq_of(idx);
            let mut k = [0usize; 3];
            let mut sub_idx = 0usize;
            for a in (0..self.dim).rev() {
                k[a] = retained_index(n[a], self.fine_m);
                sub_idx = sub_idx * h + k[a] % h;
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for (p, sub) in parities.iter().zip(&subs) {
                let mut tw = Complex64::new(1.0, 0.0);
                for a in 0..self.dim {
                    if p[a] == 1 {
                        tw *= self.twiddle[k[a]];
                    }
                }
                acc += tw * sub[sub_idx];
            }
            out.values[idx] = acc;
        }
        out
    }

    /// Inverse pruned transform: equals unnormalized inverse DFT of the
    /// zero-padded spectrum. Pre-multiplies by conjugate twiddles, runs 2^dim
    /// inverse sub-FFTs, and interleaves parity outputs.
    pub fn inverse(&self, modes: &ModeArray, out: &mut OversampledGrid) {
        assert_eq!(out.fine_m, self.fine_m);
        assert_eq!(modes.modes_n, self.modes_n);
        let h = self.half();
        let n_half = self.modes_n / 2;
        let mut sub_ext = [1usize; 3];
        for e in sub_ext.iter_mut().take(self.dim) {
            *e = h;
        }
        // With M = 2N each folded index k' in [0, N) receives exactly one
        // retained mode: k = k' for k' < N/2, else k = k' + N.
        let k_of = |kp: usize| if kp < n_half { kp } else { kp + self.modes_n };
        let parities = self.parities();
        let subs = self.run_tasks(parities, |p| {
            let mut sub = vec![Complex64::new(0.0, 0.0); h.pow(self.dim as u32)];
            for (sub_idx, s) in sub.iter_mut().enumerate() {
                let mut rem = sub_idx;
                let mut tw = Complex64::new(1.0, 0.0);
                let mut n = [0i64; 3];
                for a in 0..self.dim {
                    let kp = rem % h;
                    rem /= h;
                    let k = k_of(kp);
                    n[a] = if kp < n_half { kp as i64 } else { kp as i64 - self.modes_n as i64 };
                    if p[a] == 1 {
                        tw *= self.twiddle[k].conj();
                    }
                }
                *s = tw * modes.get(n);
            }
            self.engine.fft_nd(&mut sub, sub_ext, self.dim, false);
            sub
        });
        // Interleave parity outputs back onto the full grid.
        let parities = self.parities();
        let m = self.fine_m;
        let mut full = vec![Complex64::new(0.0, 0.0); m.pow(self.dim as u32)];
        for (p, sub) in parities.iter().zip(&subs) {
            for (sub_idx, &v) in sub.iter().enumerate() {
                let mut rem = sub_idx;
                let mut dst = 0usize;
                let mut mult = 1usize;
                for a in 0..self.dim {
                    let j = rem % h;
                    rem /= h;
                    dst += (2 * j + p[a]) * mult;
                    mult *= m;
                }
                full[dst] = v;
            }
        }
        out.set_owned(&full);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_vec(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    /// O(M^2d) direct DFT used as the oracle for the FFT wrapper.
    fn direct_dft(data: &[Complex64], m: usize, dim: usize, forward: bool) -> Vec<Complex64> {
        let total = m.pow(dim as u32);
        let sign = if forward { -1.0 } else { 1.0 };
        let decompose = |mut i: usize| {
            let mut c = [0usize; 3];
            for a in c.iter_mut().take(dim) {
                *a = i % m;
                i /= m;
            }
            c
        };
        (0..total)
            .map(|ki| {
                let k = decompose(ki);
                let mut acc = Complex64::new(0.0, 0.0);
                for (ji, &x) in data.iter().enumerate() {
                    let j = decompose(ji);
                    let phase: f64 = (0..dim).map(|a| k[a] as f64 * j[a] as f64).sum::<f64>();
                    acc += x * Complex64::from_polar(1.0, sign * 2.0 * PI * phase / m as f64);
                }
                acc
            })
            .collect()
    }

    fn grid_with(dim: usize, m: usize, data: &[Complex64]) -> OversampledGrid {
        let mut g = OversampledGrid::new_single(dim, m / 2, m, 2.0 * PI, 4);
        g.set_owned(data);
        g
    }

    #[test]
    fn forward_delta_and_constant() {
        let engine = FftEngine::new();
        let m = 8;
        let mut data = vec![Complex64::new(0.0, 0.0); m * m * m];
        data[0] = Complex64::new(1.0, 0.0);
        let spec = fft_forward(&engine, &grid_with(3, m, &data));
        assert!(spec.iter().all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-13));

        let c = Complex64::new(2.5, -1.0);
        let data = vec![c; m * m * m];
        let spec = fft_forward(&engine, &grid_with(3, m, &data));
        assert!((spec[0] - c * (m * m * m) as f64).norm() < 1e-10);
        assert!(spec[1..].iter().all(|v| v.norm() < 1e-9));
    }

    #[test]
    fn forward_matches_direct_dft() {
        let engine = FftEngine::new();
        for dim in 1..=3usize {
            let m = 8usize;
            let data = rand_vec(m.pow(dim as u32), 42 + dim as u64);
            let spec = fft_forward(&engine, &grid_with(dim, m, &data));
            let oracle = direct_dft(&data, m, dim, true);
            let scale: f64 = oracle.iter().map(|v| v.norm()).fold(0.0, f64::max);
            for (a, b) in spec.iter().zip(&oracle) {
                assert!((a - b).norm() <= 1e-12 * scale, "dim {dim}");
            }
        }
    }

    #[test]
    fn parseval_unnormalized() {
        let engine = FftEngine::new();
        let m = 8;
        let data = rand_vec(m * m * m, 9);
        let spec = fft_forward(&engine, &grid_with(3, m, &data));
        let input_sq: f64 = data.iter().map(|v| v.norm_sqr()).sum();
        let spec_sq: f64 = spec.iter().map(|v| v.norm_sqr()).sum();
        assert!((spec_sq - (m * m * m) as f64 * input_sq).abs() <= 1e-9 * spec_sq);
    }

    #[test]
    fn inverse_round_trip() {
        let engine = FftEngine::new();
        let m = 8;
        let data = rand_vec(m * m * m, 4);
        let mut spec = fft_forward(&engine, &grid_with(3, m, &data));
        fft_inverse(&engine, &mut spec, m, 3);
        let scale = (m * m * m) as f64;
        for (a, b) in spec.iter().zip(&data) {
            assert!((a / scale - b).norm() < 1e-12);
        }
    }

    #[test]
    fn truncate_1d_keeps_expected_indices() {
        // M = 4, N = 2: retained array indices {0, 3}.
        let full = vec![
            Complex64::new(10.0, 0.0),
            Complex64::new(20.0, 0.0),
            Complex64::new(30.0, 0.0),
            Complex64::new(40.0, 0.0),
        ];
        let modes = truncate_modes(&full, 4, 2, 1);
        // Frequencies: n = -1 (index 3 of full), n = 0 (index 0).
        assert_eq!(modes.get([-1, 0, 0]), full[3]);
        assert_eq!(modes.get([0, 0, 0]), full[0]);
    }

    #[test]
    fn truncate_identity_when_m_equals_n() {
        let m = 4;
        let full = rand_vec(m * m * m, 1);
        let modes = truncate_modes(&full, m, m, 3);
        // Same multiset of values, rearranged by the frequency shift.
        let mut a: Vec<u64> = full.iter().map(|v| v.re.to_bits()).collect();
        let mut b: Vec<u64> = modes.values.iter().map(|v| v.re.to_bits()).collect();
        a.sort_unstable();
        b.sort_unstable();
        assert_eq!(a, b);
    }

    #[test]
    fn truncate_matches_membership_oracle() {
        let m = 8;
        let n = 4;
        let full = rand_vec(m * m * m, 2);
        let modes = truncate_modes(&full, m, n, 3);
        // Oracle: scan all full indices; an index is retained iff each axis
        // index is in {0..N/2-1} or {M-N/2..M-1}.
        let member = |i: usize| i < n / 2 || i >= m - n / 2;
        let mut count = 0;
        for z in 0..m {
            for y in 0..m {
                for x in 0..m {
                    if member(x) && member(y) && member(z) {
                        let to_freq = |i: usize| if i < n / 2 { i as i64 } else { i as i64 - m as i64 };
                        let v = modes.get([to_freq(x), to_freq(y), to_freq(z)]);
                        assert_eq!(v, full[(z * m + y) * m + x]);
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(count, n * n * n);
    }

    #[test]
    fn pad_then_truncate_is_identity_and_support_is_exact() {
        let n = 4;
        let m = 8;
        let mut modes = ModeArray::zeros(n, 3);
        modes.values = rand_vec(modes.values.len(), 3);
        let full = pad_modes(&modes, m);
        let back = truncate_modes(&full, m, n, 3);
        assert_eq!(back.values, modes.values);
        // Support is exactly the retained index set.
        let member = |i: usize| i < n / 2 || i >= m - n / 2;
        for z in 0..m {
            for y in 0..m {
                for x in 0..m {
                    let v = full[(z * m + y) * m + x];
                    if !(member(x) && member(y) && member(z)) {
                        assert_eq!(v, Complex64::new(0.0, 0.0));
                    }
                }
            }
        }
    }

    #[test]
    fn pruned_forward_1d_delta() {
        let engine = Arc::new(FftEngine::new());
        let plan = PrunedPlan::new(4, 2, 1, 1, engine).unwrap();
        let mut data = vec![Complex64::new(0.0, 0.0); 4];
        data[0] = Complex64::new(1.0, 0.0);
        let grid = grid_with(1, 4, &data);
        let modes = plan.forward(&grid);
        assert!((modes.get([0, 0, 0]) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((modes.get([-1, 0, 0]) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn pruned_forward_matches_full_oracle() {
        let engine = Arc::new(FftEngine::new());
        for (dim, m) in [(1usize, 8usize), (1, 16), (3, 8), (3, 16)] {
            let n = m / 2;
            let data = rand_vec(m.pow(dim as u32), 77 + m as u64);
            let grid = grid_with(dim, m, &data);
            let oracle = truncate_modes(&fft_forward(&engine, &grid), m, n, dim);
            for n_conc in [1usize, 2, 4, 8] {
                let plan = PrunedPlan::new(m, n, dim, n_conc, engine.clone()).unwrap();
                let pruned = plan.forward(&grid);
                let scale: f64 = oracle.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
                for (a, b) in pruned.values.iter().zip(&oracle.values) {
                    assert!((a - b).norm() <= 1e-13 * scale, "dim {dim} m {m} n_conc {n_conc}");
                }
            }
        }
    }

    #[test]
    fn pruned_inverse_matches_full_oracle() {
        let engine = Arc::new(FftEngine::new());
        for (dim, m) in [(1usize, 8usize), (3, 8), (3, 16)] {
            let n = m / 2;
            let mut modes = ModeArray::zeros(n, dim);
            modes.values = rand_vec(modes.values.len(), 5 + m as u64);
            let mut oracle = pad_modes(&modes, m);
            fft_inverse(&engine, &mut oracle, m, dim);
            for n_conc in [1usize, 2, 4, 8] {
                let plan = PrunedPlan::new(m, n, dim, n_conc, engine.clone()).unwrap();
                let mut out = OversampledGrid::new_single(dim, n, m, 2.0 * PI, 4);
                plan.inverse(&modes, &mut out);
                let vals = out.owned_values();
                let scale: f64 = oracle.iter().map(|v| v.norm()).fold(0.0, f64::max);
                for (a, b) in vals.iter().zip(&oracle) {
                    assert!((a - b).norm() <= 1e-13 * scale, "dim {dim} m {m} n_conc {n_conc}");
                }
            }
        }
    }

    #[test]
    fn pruned_inverse_single_mode_is_plane_wave() {
        let engine = Arc::new(FftEngine::new());
        let plan = PrunedPlan::new(8, 4, 1, 1, engine).unwrap();
        let mut modes = ModeArray::zeros(4, 1);
        modes.set([1, 0, 0], Complex64::new(1.0, 0.0));
        let mut out = OversampledGrid::new_single(1, 4, 8, 2.0 * PI, 4);
        plan.inverse(&modes, &mut out);
        let vals = out.owned_values();
        for (j, v) in vals.iter().enumerate() {
            let expect = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / 8.0);
            assert!((v - expect).norm() < 1e-13);
        }
    }

    #[test]
    fn pruned_rejects_bad_sizes() {
        let engine = Arc::new(FftEngine::new());
        assert!(PrunedPlan::new(8, 3, 1, 1, engine.clone()).is_err());
        assert!(PrunedPlan::new(8, 4, 1, 0, engine).is_err());
    }
}
