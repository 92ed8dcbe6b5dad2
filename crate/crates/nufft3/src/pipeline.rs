//! End-to-end Type 1 (nonuniform -> modes) and Type 2 (modes -> nonuniform)
//! transform plans: spread/interpolate, (optionally pruned) FFT, mode
//! truncation/padding, and window deconvolution, with optional simulated
//! multi-rank decomposition and per-stage timing.
//!
//! Convention note: tolerances are interpreted in the max norm relative to
//! the 1-norm of the input strengths/coefficients.

use crate::decomp::{self, DecompositionMap, ExchangeStats};
use crate::error::{Error, Result};
use crate::geometry::OversampledGrid;
use crate::interp::{interpolate, InterpOrdering};
use crate::points::ParticleSet;
use crate::specfft::{fft_forward, fft_inverse, pad_modes, truncate_modes, FftEngine, ModeArray, PrunedPlan};
use crate::spread::{spread, ExecMode, SpreadVariant};
use crate::window::{build_deconv_table, select_params, DeconvTable, WindowSpec};
use num_complex::Complex64;
use std::sync::Arc;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FftStrategy {
    Full,
    /// Pruned Cooley-Tukey step with the given sub-transform concurrency.
    Pruned(usize),
}

/// Everything needed to build a plan; `Default` gives a 3D plan at 1e-6
/// tolerance with atomic spreading and the full FFT.
#[derive(Debug, Clone)]
pub struct PlanConfig {
    pub modes_n: usize,
    pub length: f64,
    pub tolerance: f64,
    pub dim: usize,
    pub variant: SpreadVariant,
    pub ordering: InterpOrdering,
    pub strategy: FftStrategy,
    pub exec: ExecMode,
    /// Simulated rank grid; `None` runs single-rank.
    pub ranks: Option<[usize; 3]>,
}

impl Default for PlanConfig {
    fn default() -> Self {
        PlanConfig {
            modes_n: 16,
            length: 2.0 * std::f64::consts::PI,
            tolerance: 1e-6,
            dim: 3,
            variant: SpreadVariant::Atomic,
            ordering: InterpOrdering::Direct,
            strategy: FftStrategy::Full,
            exec: ExecMode::Deterministic,
            ranks: None,
        }
    }
}

/// Wall-clock cost of one transform execution, split by stage.
#[derive(Debug, Clone, Copy, Default)]
pub struct StageTimings {
    /// Spread (Type 1) or interpolation (Type 2).
    pub grid_transfer: Duration,
    pub fft: Duration,
    pub deconv: Duration,
    pub halo: Duration,
    pub total: Duration,
}

impl StageTimings {
    pub fn csv_header() -> &'static str {
        "t_transfer_s,t_fft_s,t_deconv_s,t_halo_s,t_total_s"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{:.6e},{:.6e},{:.6e},{:.6e},{:.6e}",
            self.grid_transfer.as_secs_f64(),
            self.fft.as_secs_f64(),
            self.deconv.as_secs_f64(),
            self.halo.as_secs_f64(),
            self.total.as_secs_f64()
        )
    }
}

/// Materialized transform operator: all precomputation (window parameters,
/// deconvolution table, twiddles, partition) happens at construction so
/// executions are allocation-light and shareable across threads.
#[derive(Debug)]
pub struct NufftPlan {
    pub spec: WindowSpec,
    pub modes_n: usize,
    pub fine_m: usize,
    pub length: f64,
    pub dim: usize,
    pub deconv: DeconvTable,
    pub variant: SpreadVariant,
    pub ordering: InterpOrdering,
    pub strategy: FftStrategy,
    pub exec: ExecMode,
    pub decomp: Option<DecompositionMap>,
    pub engine: Arc<FftEngine>,
    pruned: Option<PrunedPlan>,
    /// Exchange traffic of the most recent decomposed execution.
    pub last_exchange: std::sync::Mutex<ExchangeStats>,
}

impl NufftPlan {
    pub fn new(cfg: PlanConfig) -> Result<Self> {
        if cfg.modes_n < 2 || cfg.modes_n % 2 != 0 {
            return Err(Error::Config(format!("mode count {} must be even and >= 2", cfg.modes_n)));
        }
        if !(cfg.length > 0.0) {
            return Err(Error::Config("domain length must be positive".into()));
        }
        let spec = select_params(cfg.tolerance, cfg.dim)?;
        let fine_m = 2 * cfg.modes_n;
        let deconv = build_deconv_table(&spec, cfg.modes_n, fine_m, cfg.length)?;
        let engine = Arc::new(FftEngine::new());
        let pruned = match cfg.strategy {
            FftStrategy::Full => None,
            FftStrategy::Pruned(n_conc) => {
                Some(PrunedPlan::new(fine_m, cfg.modes_n, cfg.dim, n_conc, engine.clone())?)
            }
        };
        let decomp = match cfg.ranks {
            None => None,
            Some(r) if r == [1, 1, 1] => None,
            Some(r) => Some(decomp::partition(fine_m, r, spec.width, cfg.dim)?),
        };
        Ok(NufftPlan {
            spec,
            modes_n: cfg.modes_n,
            fine_m,
            length: cfg.length,
            dim: cfg.dim,
            deconv,
            variant: cfg.variant,
            ordering: cfg.ordering,
            strategy: cfg.strategy,
            exec: cfg.exec,
            decomp,
            engine,
            pruned,
            last_exchange: std::sync::Mutex::new(ExchangeStats::default()),
        })
    }

    fn apply_deconv(&self, modes: &mut ModeArray) {
        for idx in 0..modes.values.len() {
            let n = modes.freq_of(idx);
            modes.values[idx] *= self.deconv.factor(n);
        }
    }

    /// Spread particles onto the fine grid: single-rank directly, or per-rank
    /// with halo accumulation and gather when decomposed.
    fn spread_to_global(&self, ps: &ParticleSet, timings: &mut StageTimings) -> Result<OversampledGrid> {
        match &self.decomp {
            None => {
                let t0 = Instant::now();
                let mut grid = OversampledGrid::new_single(self.dim, self.modes_n, self.fine_m, self.length, self.spec.width);
                spread(ps, &self.spec, &mut grid, &self.variant, self.exec)?;
                timings.grid_transfer += t0.elapsed();
                Ok(grid)
            }
            Some(map) => {
                let t0 = Instant::now();
                let parts = decomp::assign_particles(ps, map);
                let mut grids = map.make_local_grids(self.modes_n, self.length);
                for (grid, part) in grids.iter_mut().zip(&parts) {
                    spread(part, &self.spec, grid, &self.variant, self.exec)?;
                }
                timings.grid_transfer += t0.elapsed();
                let t1 = Instant::now();
                let stats = decomp::halo_accumulate(&mut grids, map)?;
                *self.last_exchange.lock().unwrap() = stats;
                timings.halo += t1.elapsed();
                Ok(decomp::gather_global(&grids, map, self.modes_n, self.length))
            }
        }
    }

    /// Type 1 transform: f_n = sum_j f_j e^{-i k_n . x_j} within the plan
    /// tolerance, k_n = (2 pi / L) n.
    pub fn type1(&self, ps: &ParticleSet) -> Result<ModeArray> {
        Ok(self.type1_timed(ps)?.0)
    }

    pub fn type1_timed(&self, ps: &ParticleSet) -> Result<(ModeArray, StageTimings)> {
        let start = Instant::now();
        let mut timings = StageTimings::default();
        if ps.dim != self.dim {
            return Err(Error::GridMismatch("particle dimension mismatch".into()));
        }
        let grid = self.spread_to_global(ps, &mut timings)?;
        let t0 = Instant::now();
        let mut modes = match &self.pruned {
            Some(plan) => plan.forward(&grid),
            None => truncate_modes(&fft_forward(&self.engine, &grid), self.fine_m, self.modes_n, self.dim),
        };
        timings.fft = t0.elapsed();
        let t1 = Instant::now();
        self.apply_deconv(&mut modes);
        timings.deconv = t1.elapsed();
        timings.total = start.elapsed();
        Ok((modes, timings))
    }

    /// Deconvolve (pre-correction), zero-pad, inverse FFT, and fill halos:
    /// the uniform-grid part of Type 2. Exposed so vector-field callers can
    /// fuse the per-particle gather across components.
    pub fn type2_grid(&self, modes: &ModeArray) -> Result<OversampledGrid> {
        Ok(self.type2_grid_timed(modes, &mut StageTimings::default())?)
    }

    fn type2_grid_timed(&self, modes: &ModeArray, timings: &mut StageTimings) -> Result<OversampledGrid> {
        if modes.modes_n != self.modes_n || modes.dim != self.dim {
            return Err(Error::GridMismatch("mode array shape mismatch".into()));
        }
        let t0 = Instant::now();
        let mut corrected = modes.clone();
        self.apply_deconv(&mut corrected);
        timings.deconv += t0.elapsed();
        let t1 = Instant::now();
        let mut grid = OversampledGrid::new_single(self.dim, self.modes_n, self.fine_m, self.length, self.spec.width);
        match &self.pruned {
            Some(plan) => plan.inverse(&corrected, &mut grid),
            None => {
                let mut full = pad_modes(&corrected, self.fine_m);
                fft_inverse(&self.engine, &mut full, self.fine_m, self.dim);
                grid.set_owned(&full);
            }
        }
        timings.fft += t1.elapsed();
        let t2 = Instant::now();
        grid.fill_halo_periodic();
        timings.halo += t2.elapsed();
        Ok(grid)
    }

    /// Type 2 transform: f(x_j) = sum_n f_n e^{+i k_n . x_j} within the plan
    /// tolerance. Results are in the caller's position order.
    pub fn type2(&self, modes: &ModeArray, positions: &[[f64; 3]]) -> Result<Vec<Complex64>> {
        Ok(self.type2_timed(modes, positions)?.0)
    }

    pub fn type2_timed(&self, modes: &ModeArray, positions: &[[f64; 3]]) -> Result<(Vec<Complex64>, StageTimings)> {
        let start = Instant::now();
        let mut timings = StageTimings::default();
        let ps = ParticleSet::new(
            self.dim,
            self.length,
            positions.to_vec(),
            vec![Complex64::new(0.0, 0.0); positions.len()],
        )?;
        let grid = self.type2_grid_timed(modes, &mut timings)?;
        let out = match &self.decomp {
            None => {
                let t0 = Instant::now();
                let vals = interpolate(&grid, &ps, &self.spec, self.ordering, self.exec)?;
                timings.grid_transfer += t0.elapsed();
                vals
            }
            Some(map) => {
                // Scatter the uniform grid to rank-local boxes, exchange
                // halos, gather per rank, and reassemble in caller order.
                let t0 = Instant::now();
                let mut grids = map.make_local_grids(self.modes_n, self.length);
                decomp::scatter_global(&grid, &mut grids, map);
                let stats = decomp::halo_fill(&mut grids, map)?;
                *self.last_exchange.lock().unwrap() = stats;
                timings.halo += t0.elapsed();
                let t1 = Instant::now();
                let h = self.length / self.fine_m as f64;
                let nr = map.num_ranks();
                let mut rank_indices: Vec<Vec<usize>> = vec![Vec::new(); nr];
                for (j, x) in ps.positions.iter().enumerate() {
                    let mut cell = [0usize; 3];
                    for a in 0..self.dim {
                        cell[a] = ((x[a] / h) as usize).min(self.fine_m - 1);
                    }
                    rank_indices[map.rank_of_cell(cell)].push(j);
                }
                let mut out = vec![Complex64::new(0.0, 0.0); ps.len()];
                for (r, indices) in rank_indices.iter().enumerate() {
                    if indices.is_empty() {
                        continue;
                    }
                    let part = ParticleSet {
                        dim: self.dim,
                        length: self.length,
                        positions: indices.iter().map(|&j| ps.positions[j]).collect(),
                        strengths: vec![Complex64::new(0.0, 0.0); indices.len()],
                        real_input: false,
                        ordering: None,
                    };
                    let vals = interpolate(&grids[r], &part, &self.spec, self.ordering, self.exec)?;
                    for (&j, v) in indices.iter().zip(vals) {
                        out[j] = v;
                    }
                }
                timings.grid_transfer += t1.elapsed();
                out
            }
        };
        timings.total = start.elapsed();
        Ok((out, timings))
    }
}

/// Max-norm error of `got` against `want`, relative to `scale`.
pub fn max_rel_error(got: &[Complex64], want: &[Complex64], scale: f64) -> f64 {
    got.iter()
        .zip(want)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
        / scale.max(f64::MIN_POSITIVE)
}

/// 1-norm of a complex slice (the error normalization used throughout).
pub fn one_norm(values: &[Complex64]) -> f64 {
    values.iter().map(|v| v.norm()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{nudft_type1, nudft_type2, DEFAULT_COST_CAP};
    use crate::spread::TileParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_set(n: usize, dim: usize, seed: u64) -> ParticleSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = 2.0 * PI;
        let positions = (0..n)
            .map(|_| {
                let mut p = [0.0; 3];
                for a in p.iter_mut().take(dim) {
                    *a = rng.gen_range(0.0..l);
                }
                p
            })
            .collect();
        let strengths = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        ParticleSet::new(dim, l, positions, strengths).unwrap()
    }

    fn plan(modes: usize, eps: f64) -> NufftPlan {
        NufftPlan::new(PlanConfig {
            modes_n: modes,
            tolerance: eps,
            ..PlanConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn type1_single_particle_at_origin() {
        let p = plan(8, 1e-6);
        let ps = ParticleSet::new(3, 2.0 * PI, vec![[0.0; 3]], vec![Complex64::new(1.0, 0.0)]).unwrap();
        let modes = p.type1(&ps).unwrap();
        for v in &modes.values {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-5);
        }
    }

    #[test]
    fn type1_matches_oracle_within_tolerance() {
        for eps in [1e-2, 1e-4, 1e-6, 1e-8] {
            let p = plan(16, eps);
            let ps = random_set(2000, 3, 5);
            let modes = p.type1(&ps).unwrap();
            let oracle = nudft_type1(&ps, 16, DEFAULT_COST_CAP).unwrap();
            let err = max_rel_error(&modes.values, &oracle.values, one_norm(&ps.strengths));
            assert!(err <= 10.0 * eps, "eps {eps}: err {err:.3e}");
        }
    }

    #[test]
    fn type1_error_decreases_with_tolerance() {
        let ps = random_set(500, 3, 6);
        let oracle = nudft_type1(&ps, 16, DEFAULT_COST_CAP).unwrap();
        let scale = one_norm(&ps.strengths);
        let mut last = f64::INFINITY;
        for eps in [1e-2, 1e-4, 1e-6, 1e-8, 1e-10] {
            let p = plan(16, eps);
            let modes = p.type1(&ps).unwrap();
            let err = max_rel_error(&modes.values, &oracle.values, scale);
            assert!(err <= 2.0 * last, "eps {eps}: {err:.3e} after {last:.3e}");
            last = err;
        }
    }

    #[test]
    fn type2_constant_and_plane_wave_modes() {
        let p = plan(8, 1e-6);
        let positions: Vec<[f64; 3]> = random_set(50, 3, 7).positions;
        let mut modes = ModeArray::zeros(8, 3);
        modes.set([0, 0, 0], Complex64::new(1.0, 0.0));
        let vals = p.type2(&modes, &positions).unwrap();
        for v in &vals {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-5);
        }

        let mut modes = ModeArray::zeros(8, 3);
        let n0 = [2i64, -3, 1];
        modes.set(n0, Complex64::new(1.0, 0.0));
        let vals = p.type2(&modes, &positions).unwrap();
        for (x, v) in positions.iter().zip(&vals) {
            let phase: f64 = (0..3).map(|a| n0[a] as f64 * x[a]).sum();
            assert!((v - Complex64::from_polar(1.0, phase)).norm() < 1e-5);
        }
    }

    #[test]
    fn type2_matches_oracle_within_tolerance() {
        for eps in [1e-3, 1e-6, 1e-9] {
            let p = plan(16, eps);
            let positions: Vec<[f64; 3]> = random_set(1500, 3, 8).positions;
            let mut modes = ModeArray::zeros(16, 3);
            let mut rng = ChaCha8Rng::seed_from_u64(17);
            for v in modes.values.iter_mut() {
                *v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
            let vals = p.type2(&modes, &positions).unwrap();
            let oracle = nudft_type2(&modes, &positions, 2.0 * PI, DEFAULT_COST_CAP).unwrap();
            let err = max_rel_error(&vals, &oracle, one_norm(&modes.values));
            assert!(err <= 10.0 * eps, "eps {eps}: err {err:.3e}");
        }
    }

    #[test]
    fn full_vs_pruned_strategy_identical() {
        let ps = random_set(800, 3, 9);
        let full = plan(16, 1e-6);
        let pruned = NufftPlan::new(PlanConfig {
            modes_n: 16,
            tolerance: 1e-6,
            strategy: FftStrategy::Pruned(4),
            ..PlanConfig::default()
        })
        .unwrap();
        let a = full.type1(&ps).unwrap();
        let b = pruned.type1(&ps).unwrap();
        let err = max_rel_error(&a.values, &b.values, one_norm(&a.values) / a.values.len() as f64);
        assert!(err <= 1e-12, "{err:.3e}");
    }

    #[test]
    fn strategy_invariance_across_variants_and_orderings() {
        let ps = random_set(600, 3, 10);
        let reference = plan(16, 1e-6).type1(&ps).unwrap();
        let scale: f64 = reference.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for variant in [
            SpreadVariant::Tiled(TileParams::default()),
            SpreadVariant::GridParallel(TileParams::default()),
        ] {
            let p = NufftPlan::new(PlanConfig {
                modes_n: 16,
                tolerance: 1e-6,
                variant,
                exec: ExecMode::Parallel,
                ..PlanConfig::default()
            })
            .unwrap();
            let modes = p.type1(&ps).unwrap();
            for (a, b) in modes.values.iter().zip(&reference.values) {
                assert!((a - b).norm() <= 1e-12 * scale, "{}", variant.name());
            }
        }
    }

    #[test]
    fn adjoint_consistency_of_pipelines() {
        // <type1(f), g>_modes = <f, type2(g)>_particles within tolerance.
        let p = plan(8, 1e-8);
        let ps = random_set(300, 3, 11);
        let mut g = ModeArray::zeros(8, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for v in g.values.iter_mut() {
            *v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        let t1 = p.type1(&ps).unwrap();
        let t2 = p.type2(&g, &ps.positions).unwrap();
        let lhs: Complex64 = t1.values.iter().zip(&g.values).map(|(a, b)| a * b.conj()).sum();
        let rhs: Complex64 = ps.strengths.iter().zip(&t2).map(|(a, b)| a * b.conj()).sum();
        assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm().max(1.0));
    }

    #[test]
    fn decomposed_matches_single_rank() {
        let ps = random_set(500, 3, 13);
        let single = plan(8, 1e-6);
        let reference = single.type1(&ps).unwrap();
        let scale: f64 = reference.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for ranks in [[2, 1, 1], [2, 2, 1], [2, 2, 2]] {
            let p = NufftPlan::new(PlanConfig {
                modes_n: 8,
                tolerance: 1e-6,
                ranks: Some(ranks),
                ..PlanConfig::default()
            })
            .unwrap();
            let modes = p.type1(&ps).unwrap();
            for (a, b) in modes.values.iter().zip(&reference.values) {
                assert!((a - b).norm() <= 1e-12 * scale, "ranks {ranks:?}");
            }
            assert!(p.last_exchange.lock().unwrap().messages > 0);

            // Type 2 as well.
            let mut modes_in = ModeArray::zeros(8, 3);
            let mut rng = ChaCha8Rng::seed_from_u64(14);
            for v in modes_in.values.iter_mut() {
                *v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
            let want = single.type2(&modes_in, &ps.positions).unwrap();
            let got = p.type2(&modes_in, &ps.positions).unwrap();
            let vscale: f64 = want.iter().map(|v| v.norm()).fold(0.0, f64::max);
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).norm() <= 1e-12 * vscale, "ranks {ranks:?}");
            }
        }
    }

    #[test]
    fn timings_nonnegative_and_sum_close_to_total() {
        let p = plan(16, 1e-6);
        let ps = random_set(2000, 3, 15);
        let (_, t) = p.type1_timed(&ps).unwrap();
        let sum = t.grid_transfer + t.fft + t.deconv + t.halo;
        assert!(sum <= t.total);
        assert!(t.total.as_secs_f64() - sum.as_secs_f64() <= 0.05 * t.total.as_secs_f64().max(1e-3));
    }

    #[test]
    fn plan_rejects_bad_configs() {
        assert!(NufftPlan::new(PlanConfig {
            modes_n: 7,
            ..PlanConfig::default()
        })
        .is_err());
        assert!(NufftPlan::new(PlanConfig {
            tolerance: 1.0,
            ..PlanConfig::default()
        })
        .is_err());
    }
}
