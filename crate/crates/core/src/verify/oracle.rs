//! Brute-force oracles over the feasible set: Monte Carlo sampling and an
//! exhaustive grid for small instances.
//!
//! Sampling is split into fixed-size blocks, each with its own ChaCha stream
//! derived from the seed, so results do not depend on the worker count and
//! sample `k` is the same point for every total sample count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::problem::{Allocation, AllocationProblem};

/// Pilot acceptance rate below which the sampler switches to hit-and-run.
pub const HIT_AND_RUN_THRESHOLD: f64 = 1e-3;
/// Acceptance rate below which forced rejection sampling gives up.
pub const STARVATION_THRESHOLD: f64 = 1e-6;
pub const GRID_MAX_DIM: usize = 4;

const PILOT_DRAWS: u64 = 20_000;
const PILOT_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerMode {
    /// Rejection unless the pilot acceptance rate is too low.
    Auto,
    Rejection,
    HitAndRun,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    Rejection,
    HitAndRun,
    /// The feasible set is a single point.
    Degenerate,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloConfig {
    pub samples: u64,
    pub seed: u64,
    pub mode: SamplerMode,
    pub block_size: u64,
    /// Hit-and-run moves between recorded samples.
    pub burn_in: usize,
}

impl MonteCarloConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        MonteCarloConfig {
            samples,
            seed,
            mode: SamplerMode::Auto,
            block_size: 4096,
            burn_in: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub best: Allocation,
    pub best_cost: f64,
    /// Number of feasible points evaluated.
    pub samples: u64,
    pub seed: u64,
    pub sampler: SamplerKind,
    /// Pilot acceptance rate of the rejection sampler, when measured.
    pub acceptance_rate: Option<f64>,
}

/// Minimum of `C` over `samples` points drawn from the feasible set.
pub fn monte_carlo_min(p: &AllocationProblem, samples: u64, seed: u64) -> Result<OracleResult> {
    monte_carlo_with(p, &MonteCarloConfig::new(samples, seed))
}

pub fn monte_carlo_with(p: &AllocationProblem, cfg: &MonteCarloConfig) -> Result<OracleResult> {
    let plan = Plan::new(p, cfg)?;
    if let Some(point) = plan.degenerate.clone() {
        let best_cost = p.total_cost(&point)?;
        return Ok(OracleResult {
            best: point,
            best_cost,
            samples: cfg.samples,
            seed: cfg.seed,
            sampler: SamplerKind::Degenerate,
            acceptance_rate: plan.rate,
        });
    }
    let blocks = cfg.samples.div_ceil(cfg.block_size);
    let best = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let points = plan.block(p, cfg, b)?;
            let base = b * cfg.block_size;
            Ok(points
                .into_iter()
                .enumerate()
                .map(|(k, x)| (p.cost_unchecked(&x), base + k as u64, x))
                .reduce(pick_min))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .reduce(pick_min);
    let (best_cost, _, best) = best.ok_or_else(|| {
        Error::InvalidConfig("monte carlo oracle needs at least one sample".into())
    })?;
    Ok(OracleResult {
        best: Allocation(best),
        best_cost,
        samples: cfg.samples,
        seed: cfg.seed,
        sampler: plan.kind,
        acceptance_rate: plan.rate,
    })
}

/// All sampled points in index order, for external inspection.
pub fn monte_carlo_samples(
    p: &AllocationProblem,
    cfg: &MonteCarloConfig,
) -> Result<Vec<Allocation>> {
    let plan = Plan::new(p, cfg)?;
    if let Some(point) = plan.degenerate.clone() {
        return Ok(vec![point; cfg.samples as usize]);
    }
    let blocks = cfg.samples.div_ceil(cfg.block_size);
    let chunks = (0..blocks)
        .into_par_iter()
        .map(|b| plan.block(p, cfg, b))
        .collect::<Result<Vec<_>>>()?;
    Ok(chunks.into_iter().flatten().map(Allocation).collect())
}

/// Lowest cost, ties broken by lowest index.
fn pick_min(a: (f64, u64, Vec<f64>), b: (f64, u64, Vec<f64>)) -> (f64, u64, Vec<f64>) {
    match a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)) {
        std::cmp::Ordering::Greater => b,
        _ => a,
    }
}

struct Plan {
    kind: SamplerKind,
    rate: Option<f64>,
    degenerate: Option<Allocation>,
    center: Vec<f64>,
    free: Vec<usize>,
}

impl Plan {
    fn new(p: &AllocationProblem, cfg: &MonteCarloConfig) -> Result<Self> {
        if cfg.samples == 0 {
            return Err(Error::InvalidConfig("samples must be >= 1".into()));
        }
        if cfg.block_size == 0 {
            return Err(Error::InvalidConfig("block_size must be >= 1".into()));
        }
        let free: Vec<usize> = (0..p.n()).filter(|&i| p.agent(i).width() > 0.0).collect();
        let center = chebyshev_like_center(p);
        let degenerate = p
            .degenerate_point()
            .or_else(|| (free.len() <= 1).then(|| Allocation(center.clone())));
        if degenerate.is_some() {
            return Ok(Plan {
                kind: SamplerKind::Degenerate,
                rate: None,
                degenerate,
                center,
                free,
            });
        }
        let (kind, rate) = match cfg.mode {
            SamplerMode::HitAndRun => (SamplerKind::HitAndRun, None),
            SamplerMode::Rejection | SamplerMode::Auto => {
                let rate = pilot_rate(p, cfg.seed);
                if cfg.mode == SamplerMode::Rejection {
                    if rate < STARVATION_THRESHOLD {
                        return Err(Error::SamplerStarved {
                            rate,
                            threshold: STARVATION_THRESHOLD,
                        });
                    }
                    (SamplerKind::Rejection, Some(rate))
                } else if rate < HIT_AND_RUN_THRESHOLD {
                    (SamplerKind::HitAndRun, Some(rate))
                } else {
                    (SamplerKind::Rejection, Some(rate))
                }
            }
        };
        Ok(Plan {
            kind,
            rate,
            degenerate: None,
            center,
            free,
        })
    }

    fn block(
        &self,
        p: &AllocationProblem,
        cfg: &MonteCarloConfig,
        b: u64,
    ) -> Result<Vec<Vec<f64>>> {
        let start = b * cfg.block_size;
        let count = cfg.block_size.min(cfg.samples - start) as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(b);
        match self.kind {
            SamplerKind::Rejection => {
                let rate = self.rate.unwrap_or(1.0).max(STARVATION_THRESHOLD);
                let max_draws = ((count as f64 / rate) * 100.0).ceil() as u64 + 10_000;
                let mut out = Vec::with_capacity(count);
                let mut draws = 0u64;
                while out.len() < count {
                    draws += 1;
                    if draws > max_draws {
                        return Err(Error::SamplerStarved {
                            rate: out.len() as f64 / draws as f64,
                            threshold: STARVATION_THRESHOLD,
                        });
                    }
                    let x = simplex_point(&mut rng, p.n(), p.total());
                    if in_boxes(p, &x) {
                        out.push(x);
                    }
                }
                Ok(out)
            }
            _ => Ok(self.hit_and_run(p, &mut rng, count, cfg.burn_in)),
        }
    }

    fn hit_and_run(
        &self,
        p: &AllocationProblem,
        rng: &mut ChaCha8Rng,
        count: usize,
        burn_in: usize,
    ) -> Vec<Vec<f64>> {
        let mut x = self.center.clone();
        let mut d = vec![0.0; p.n()];
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            for _ in 0..burn_in.max(1) {
                for &i in &self.free {
                    d[i] = rng.sample(StandardNormal);
                }
                let mean = self.free.iter().map(|&i| d[i]).sum::<f64>() / self.free.len() as f64;
                for &i in &self.free {
                    d[i] -= mean;
                }
                let (mut tmin, mut tmax) = (f64::NEG_INFINITY, f64::INFINITY);
                for &i in &self.free {
                    if d[i] == 0.0 {
                        continue;
                    }
                    let c = p.agent(i);
                    let a = (c.lower() - x[i]) / d[i];
                    let b = (c.upper() - x[i]) / d[i];
                    tmin = tmin.max(a.min(b));
                    tmax = tmax.min(a.max(b));
                }
                if !(tmin.is_finite() && tmax.is_finite()) || tmin >= tmax {
                    continue;
                }
                let t = rng.random_range(tmin..tmax);
                for &i in &self.free {
                    let c = p.agent(i);
                    x[i] = (x[i] + t * d[i]).clamp(c.lower(), c.upper());
                }
            }
            out.push(x.clone());
        }
        out
    }
}

/// Box midpoint pulled onto the sum plane: `lower + t (upper - lower)`.
fn chebyshev_like_center(p: &AllocationProblem) -> Vec<f64> {
    let width: f64 = p.agents().iter().map(|c| c.width()).sum();
    let t = if width > 0.0 {
        (p.total() - p.lower_sum()) / width
    } else {
        0.0
    };
    p.agents()
        .iter()
        .map(|c| c.lower() + t * c.width())
        .collect()
}

/// Uniform point of `{x >= 0, sum x = total}` via normalized exponential spacings.
fn simplex_point(rng: &mut ChaCha8Rng, n: usize, total: f64) -> Vec<f64> {
    let mut x: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = x.iter().sum();
    for v in &mut x {
        *v *= total / s;
    }
    x
}

fn in_boxes(p: &AllocationProblem, x: &[f64]) -> bool {
    p.agents()
        .iter()
        .zip(x)
        .all(|(c, &v)| c.lower() <= v && v <= c.upper())
}

fn pilot_rate(p: &AllocationProblem, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(PILOT_STREAM);
    let hits = (0..PILOT_DRAWS)
        .filter(|_| in_boxes(p, &simplex_point(&mut rng, p.n(), p.total())))
        .count();
    hits as f64 / PILOT_DRAWS as f64
}

/// Exhaustive scan of the feasible slice: the first `n - 1` coordinates walk
/// Best lattice point so far: cost and coordinates.
type Best = (f64, Vec<f64>);

/// `lower_i + k * resolution`, the last is fixed by the sum constraint.
pub fn grid_min(p: &AllocationProblem, resolution: f64) -> Result<OracleResult> {
    let n = p.n();
    if n > GRID_MAX_DIM {
        return Err(Error::DimensionTooLarge {
            n,
            max: GRID_MAX_DIM,
        });
    }
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "grid resolution must be > 0, got {resolution}"
        )));
    }
    let axes: Vec<Vec<f64>> = p.agents()[..n - 1]
        .iter()
        .map(|c| {
            let steps = (c.width() / resolution + 1e-9).floor() as usize;
            (0..=steps)
                .map(|k| (c.lower() + k as f64 * resolution).min(c.upper()))
                .collect()
        })
        .collect();
    let slack = 1e-9 * p.total();
    // Bounds on what the remaining coordinates can absorb, by depth.
    let tail_lower: Vec<f64> = (0..n)
        .map(|d| p.agents()[d..].iter().map(|c| c.lower()).sum())
        .collect();
    let tail_upper: Vec<f64> = (0..n)
        .map(|d| p.agents()[d..].iter().map(|c| c.upper()).sum())
        .collect();

    struct Scan<'a> {
        p: &'a AllocationProblem,
        axes: &'a [Vec<f64>],
        tail_lower: &'a [f64],
        tail_upper: &'a [f64],
        slack: f64,
    }
    impl Scan<'_> {
        fn walk(
            &self,
            depth: usize,
            prefix: &mut Vec<f64>,
            sum: f64,
            best: &mut Option<Best>,
            count: &mut u64,
        ) {
            let n = self.p.n();
            let total = self.p.total();
            if depth == n - 1 {
                let c = self.p.agent(n - 1);
                let v = total - sum;
                if v >= c.lower() - self.slack && v <= c.upper() + self.slack {
                    prefix.push(v.clamp(c.lower(), c.upper()));
                    let cost = self.p.cost_unchecked(prefix);
                    *count += 1;
                    if best.as_ref().is_none_or(|b| cost < b.0) {
                        *best = Some((cost, prefix.clone()));
                    }
                    prefix.pop();
                }
                return;
            }
            for &x in &self.axes[depth] {
                let s = sum + x;
                if s + self.tail_lower[depth + 1] > total + self.slack {
                    break;
                }
                if s + self.tail_upper[depth + 1] < total - self.slack {
                    continue;
                }
                prefix.push(x);
                self.walk(depth + 1, prefix, s, best, count);
                prefix.pop();
            }
        }
    }
    let scan = Scan {
        p,
        axes: &axes,
        tail_lower: &tail_lower,
        tail_upper: &tail_upper,
        slack,
    };

    let (best, count) = if n == 1 {
        let mut best = None;
        let mut count = 0;
        scan.walk(0, &mut Vec::new(), 0.0, &mut best, &mut count);
        (best, count)
    } else {
        let parts: Vec<(Option<Best>, u64)> = axes[0]
            .par_iter()
            .map(|&x0| {
                let mut best = None;
                let mut count = 0;
                let mut prefix = vec![x0];
                if x0 + tail_lower[1] <= p.total() + slack
                    && x0 + tail_upper[1] >= p.total() - slack
                {
                    scan.walk(1, &mut prefix, x0, &mut best, &mut count);
                }
                (best, count)
            })
            .collect();
        let count = parts.iter().map(|p| p.1).sum();
        // Strict improvement only, so the lowest first-axis index wins ties.
        let best = parts
            .into_iter()
            .filter_map(|p| p.0)
            .fold(None, |acc: Option<Best>, cur| match acc {
                Some(a) if a.0 <= cur.0 => Some(a),
                _ => Some(cur),
            });
        (best, count)
    };
    let (best_cost, best) = best.ok_or(Error::EmptyGrid(resolution))?;
    Ok(OracleResult {
        best: Allocation(best),
        best_cost,
        samples: count,
        seed: 0,
        sampler: SamplerKind::Grid,
        acceptance_rate: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::CostModel;
    use crate::graph::Graph;
    use crate::instances;
    use crate::lambda_solver::solve_lambda;

    #[test]
    fn samples_are_feasible_and_deterministic() {
        let p = instances::tab3();
        let cfg = MonteCarloConfig::new(5000, 7);
        let pts = monte_carlo_samples(&p, &cfg).unwrap();
        assert_eq!(pts.len(), 5000);
        for x in &pts {
            assert!(p.in_feasible_set(x, p.default_tol()).unwrap());
        }
        assert_eq!(pts, monte_carlo_samples(&p, &cfg).unwrap());
        let a = monte_carlo_min(&p, 5000, 7).unwrap();
        let b = monte_carlo_min(&p, 5000, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.sampler, SamplerKind::Rejection);
    }

    #[test]
    fn best_cost_nonincreasing_in_prefix_length() {
        let p = instances::tab1();
        let mut last = f64::INFINITY;
        for n in [1u64, 10, 100, 5000, 9000, 20_000] {
            let r = monte_carlo_min(&p, n, 3).unwrap();
            assert!(r.best_cost <= last);
            last = r.best_cost;
        }
    }

    #[test]
    fn hit_and_run_stays_feasible() {
        let p = instances::fig3();
        let mut cfg = MonteCarloConfig::new(2000, 11);
        cfg.mode = SamplerMode::HitAndRun;
        let pts = monte_carlo_samples(&p, &cfg).unwrap();
        for x in &pts {
            assert!(p.in_feasible_set(x, p.default_tol()).unwrap());
        }
        let r = monte_carlo_with(&p, &cfg).unwrap();
        assert_eq!(r.sampler, SamplerKind::HitAndRun);
        let opt = p.total_cost(&solve_lambda(&p).unwrap().allocation).unwrap();
        assert!(r.best_cost >= opt - 1e-9 * opt);
    }

    #[test]
    fn thin_boxes_switch_to_hit_and_run() {
        // Six agents pinned in narrow boxes: almost no simplex point lands inside.
        let agents = (0..6)
            .map(|i| CostModel::quadratic(0.01, 1.0, 100.0 + i as f64, 102.0 + i as f64).unwrap())
            .collect();
        let p = AllocationProblem::new(Graph::path(6).unwrap(), agents, 622.0).unwrap();
        let r = monte_carlo_min(&p, 100, 1).unwrap();
        assert_eq!(r.sampler, SamplerKind::HitAndRun);
        let mut cfg = MonteCarloConfig::new(100, 1);
        cfg.mode = SamplerMode::Rejection;
        assert!(matches!(
            monte_carlo_with(&p, &cfg),
            Err(Error::SamplerStarved { .. })
        ));
    }

    #[test]
    fn degenerate_instance_returns_bounds() {
        let agents = vec![
            CostModel::quadratic(0.01, 5.0, 100.0, 300.0).unwrap(),
            CostModel::quadratic(0.02, 4.0, 50.0, 250.0).unwrap(),
        ];
        let p = AllocationProblem::new(Graph::path(2).unwrap(), agents, 150.0).unwrap();
        for n in [1, 10, 1000] {
            let r = monte_carlo_min(&p, n, 0).unwrap();
            assert_eq!(r.best, p.lower_bounds());
            assert_eq!(r.sampler, SamplerKind::Degenerate);
        }
    }

    #[test]
    fn grid_single_agent() {
        let c = CostModel::quadratic(0.5, 1.0, 0.0, 10.0).unwrap();
        let p =
            AllocationProblem::new(Graph::from_edge_list(1, &[]).unwrap(), vec![c], 4.0).unwrap();
        let r = grid_min(&p, 0.5).unwrap();
        assert_eq!(r.best, Allocation(vec![4.0]));
        assert_eq!(r.samples, 1);
    }

    #[test]
    fn grid_guards() {
        let p = instances::fig3();
        assert_eq!(
            grid_min(&p, 1.0).unwrap_err(),
            Error::DimensionTooLarge { n: 6, max: 4 }
        );
        assert!(grid_min(&instances::tab3(), 0.0).is_err());
    }

    #[test]
    fn grid_minimizer_is_sum_exact() {
        let p = instances::tab3();
        let r = grid_min(&p, 1.0).unwrap();
        assert!((r.best.sum() - 1150.0).abs() < 1e-9);
        assert!(p.in_feasible_set(&r.best, 1e-9).unwrap());
    }
}
