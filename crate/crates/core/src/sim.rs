//! Monte-Carlo harness: one trial runs channel draw, RF selection, ZF, the
//! SVD split and both metric evaluations; sweeps repeat trials over a grid of
//! user counts or RF-chain counts.
//!
//! Every trial owns a random stream seeded from
//! `(master_seed, K, N_RF, trial_index, attempt)`, so results do not depend on
//! evaluation order or on whether trials run in parallel.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::channel::{generate_channel, ArrayGeometry, ChannelError};
use crate::config::{ConfigError, SystemConfig};
use crate::metrics::{Algorithm, MetricsError, MetricsRecord};
use crate::precoding::{
    equivalent_channel, m_max, select_rf_precoder, svdde, zf_baseband, PrecodingError,
};

/// Attempts per trial before a rank-deficient channel becomes a hard error.
pub const RETRY_BUDGET: u32 = 16;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Precoding(#[from] PrecodingError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("trial {trial_index}: equivalent channel rank-deficient in all {RETRY_BUDGET} attempts")]
    RetriesExhausted { trial_index: u64 },
    #[error("cannot aggregate an empty sample")]
    EmptySample,
    #[error("sweep value {value} for {axis} outside [{lo}, {hi}]")]
    AxisRange {
        axis: &'static str,
        value: usize,
        lo: usize,
        hi: usize,
    },
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one attempt of one trial at one scenario point.
pub fn trial_seed(master_seed: u64, n_users: usize, n_rf: usize, trial_index: u64, attempt: u32) -> u64 {
    [n_users as u64, n_rf as u64, trial_index, attempt as u64]
        .iter()
        .fold(splitmix64(master_seed), |h, &x| splitmix64(h ^ x))
}

/// Both algorithms evaluated on one channel draw.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub zf: MetricsRecord,
    pub svdde: MetricsRecord,
    /// `||F_BB_opt - C R||_F^2` at the rank used.
    pub error_f2: f64,
    /// Attempts discarded for a rank-deficient equivalent channel.
    pub discarded: u32,
}

/// Runs one trial. Rank-deficient equivalent channels are redrawn from a
/// derived sub-seed up to [`RETRY_BUDGET`] times.
pub fn run_trial(cfg: &SystemConfig, trial_index: u64) -> Result<TrialOutcome, SimError> {
    cfg.validate()?;
    let m = match cfg.m_override {
        Some(m) => m,
        None => m_max(cfg.n_rf, cfg.n_users)?,
    };
    let geom = ArrayGeometry::<f64>::from_config(cfg);
    for attempt in 0..RETRY_BUDGET {
        let seed = trial_seed(cfg.master_seed, cfg.n_users, cfg.n_rf, trial_index, attempt);
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let chan = generate_channel::<f64, _>(cfg, &mut rng)?;
        let rf = select_rf_precoder(&chan, &geom, cfg.n_rf, cfg.codebook_size())?;
        let h_eq = equivalent_channel(&chan, &rf)?;
        let zf = match zf_baseband(&h_eq, &rf, cfg.tx_power_w, cfg.normalization) {
            Ok(bb) => bb,
            Err(PrecodingError::RankDeficient(_)) => continue,
            Err(e) => return Err(e.into()),
        };
        let (factors, split) = svdde(&zf.f_bb, m, &rf, cfg.tx_power_w, cfg.normalization)?;
        let zf_rec = MetricsRecord::evaluate(cfg, &chan, &rf, &zf, Algorithm::Zf, cfg.n_users)?;
        let sv_rec = MetricsRecord::evaluate(cfg, &chan, &rf, &split, Algorithm::Svdde, m)?;
        return Ok(TrialOutcome {
            zf: zf_rec,
            svdde: sv_rec,
            error_f2: factors.error_f2,
            discarded: attempt,
        });
    }
    Err(SimError::RetriesExhausted { trial_index })
}

/// Sample mean and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub se: f64,
}

/// Neumaier-compensated sum.
fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Mean and `stddev / sqrt(n)` (sample stddev, `n - 1` denominator).
///
/// Values are sorted before a compensated reduction, so any permutation of the
/// input gives bit-identical output.
pub fn aggregate(values: &[f64]) -> Result<Stat, SimError> {
    if values.is_empty() {
        return Err(SimError::EmptySample);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mean = compensated_sum(sorted.iter().copied()) / n;
    if sorted.len() == 1 {
        return Ok(Stat { mean, se: 0.0 });
    }
    let mut dev: Vec<f64> = sorted.iter().map(|v| (v - mean) * (v - mean)).collect();
    dev.sort_by(f64::total_cmp);
    let var = compensated_sum(dev) / (n - 1.0);
    Ok(Stat {
        mean,
        se: (var / n).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Users,
    RfChains,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Users => "n_users",
            SweepAxis::RfChains => "n_rf",
        }
    }
}

/// Aggregates at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub axis_value: usize,
    pub trials: usize,
    pub error_f2: Stat,
    pub thr_zf: Stat,
    pub thr_svdde: Stat,
    pub ptot_zf: Stat,
    pub ptot_svdde: Stat,
    pub ee_zf: Stat,
    pub ee_svdde: Stat,
    pub m_used: usize,
    /// Total discarded rank-deficient draws over all trials.
    pub discarded: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn axis_values(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.axis_value).collect()
    }
}

/// Runs `cfg.trials` trials at one configuration and aggregates them.
pub fn run_point(cfg: &SystemConfig, axis_value: usize) -> Result<SweepPoint, SimError> {
    cfg.validate()?;
    let indices: Vec<u64> = (0..cfg.trials as u64).collect();
    let outcomes: Vec<TrialOutcome> = if cfg.parallel {
        indices
            .par_iter()
            .map(|&t| run_trial(cfg, t))
            .collect::<Result<_, _>>()?
    } else {
        indices
            .iter()
            .map(|&t| run_trial(cfg, t))
            .collect::<Result<_, _>>()?
    };
    let stat = |f: &dyn Fn(&TrialOutcome) -> f64| {
        aggregate(&outcomes.iter().map(f).collect::<Vec<_>>())
    };
    Ok(SweepPoint {
        axis_value,
        trials: outcomes.len(),
        error_f2: stat(&|o| o.error_f2)?,
        thr_zf: stat(&|o| o.zf.throughput_bps)?,
        thr_svdde: stat(&|o| o.svdde.throughput_bps)?,
        ptot_zf: stat(&|o| o.zf.power.p_total)?,
        ptot_svdde: stat(&|o| o.svdde.power.p_total)?,
        ee_zf: stat(&|o| o.zf.ee_bps_per_w)?,
        ee_svdde: stat(&|o| o.svdde.ee_bps_per_w)?,
        m_used: outcomes[0].svdde.m_used,
        discarded: outcomes.iter().map(|o| o.discarded).sum(),
    })
}

fn sweep(cfg: &SystemConfig, axis: SweepAxis, values: &[usize]) -> Result<SweepResult, SimError> {
    let points = values
        .iter()
        .map(|&v| {
            let mut point_cfg = cfg.clone();
            match axis {
                SweepAxis::Users => {
                    if v < 2 || v > cfg.n_rf {
                        return Err(SimError::AxisRange {
                            axis: axis.name(),
                            value: v,
                            lo: 2,
                            hi: cfg.n_rf,
                        });
                    }
                    point_cfg.n_users = v;
                }
                SweepAxis::RfChains => {
                    if v < cfg.n_users || v > cfg.n_tx {
                        return Err(SimError::AxisRange {
                            axis: axis.name(),
                            value: v,
                            lo: cfg.n_users,
                            hi: cfg.n_tx,
                        });
                    }
                    point_cfg.n_rf = v;
                }
            }
            run_point(&point_cfg, v)
        })
        .collect::<Result<_, _>>()?;
    Ok(SweepResult { axis, points })
}

/// Sweeps the number of users `K`; every value must lie in `[2, N_RF]`.
pub fn sweep_users(cfg: &SystemConfig, k_values: &[usize]) -> Result<SweepResult, SimError> {
    sweep(cfg, SweepAxis::Users, k_values)
}

/// Sweeps the number of RF chains; every value must lie in `[K, N_T]`.
pub fn sweep_rf_chains(cfg: &SystemConfig, n_rf_values: &[usize]) -> Result<SweepResult, SimError> {
    sweep(cfg, SweepAxis::RfChains, n_rf_values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SystemConfig {
        SystemConfig {
            n_tx: 32,
            n_rf: 10,
            n_users: 4,
            n_paths: 6,
            trials: 6,
            ..Default::default()
        }
    }

    #[test]
    fn aggregate_values() {
        assert_eq!(aggregate(&[5.0]).unwrap(), Stat { mean: 5.0, se: 0.0 });
        assert_eq!(aggregate(&[1.0, 3.0]).unwrap(), Stat { mean: 2.0, se: 1.0 });
        assert!(matches!(aggregate(&[]), Err(SimError::EmptySample)));
    }

    #[test]
    fn aggregate_is_permutation_invariant() {
        let v: Vec<f64> = (0..50).map(|i| ((i * 37) % 11) as f64 * 0.1 + 1e-3 * i as f64).collect();
        let mut r = v.clone();
        r.reverse();
        r.rotate_left(17);
        assert_eq!(aggregate(&v).unwrap(), aggregate(&r).unwrap());
    }

    #[test]
    fn seeds_differ_across_coordinates() {
        let base = trial_seed(1, 8, 60, 0, 0);
        assert_ne!(base, trial_seed(2, 8, 60, 0, 0));
        assert_ne!(base, trial_seed(1, 9, 60, 0, 0));
        assert_ne!(base, trial_seed(1, 8, 61, 0, 0));
        assert_ne!(base, trial_seed(1, 8, 60, 1, 0));
        assert_ne!(base, trial_seed(1, 8, 60, 0, 1));
        assert_eq!(base, trial_seed(1, 8, 60, 0, 0));
    }

    #[test]
    fn trial_is_deterministic() {
        let cfg = small();
        assert_eq!(run_trial(&cfg, 3).unwrap(), run_trial(&cfg, 3).unwrap());
        assert_ne!(run_trial(&cfg, 3).unwrap(), run_trial(&cfg, 4).unwrap());
    }

    #[test]
    fn full_rank_override_matches_zf() {
        let cfg = SystemConfig {
            m_override: Some(4),
            ..small()
        };
        for t in 0..4 {
            let o = run_trial(&cfg, t).unwrap();
            assert_eq!(o.error_f2, 0.0);
            let rel = (o.svdde.throughput_bps - o.zf.throughput_bps).abs() / o.zf.throughput_bps;
            assert!(rel <= 1e-9, "{rel}");
        }
    }

    #[test]
    fn flop_budget_respected() {
        let cfg = small();
        for t in 0..4 {
            let o = run_trial(&cfg, t).unwrap();
            assert!(o.svdde.flops.lambda3 <= o.svdde.flops.lambda1);
            assert_eq!(o.svdde.m_used, m_max(10, 4).unwrap());
            assert_eq!(o.zf.m_used, 4);
        }
    }

    #[test]
    fn tiny_codebook_exhausts_retries() {
        // Shared angles with one path make H rank one, so K = 2 can never be nulled.
        let cfg = SystemConfig {
            n_paths: 1,
            n_users: 2,
            angle_model: crate::config::AngleModel::Shared,
            ..small()
        };
        assert!(matches!(
            run_trial(&cfg, 0),
            Err(SimError::RetriesExhausted { trial_index: 0 })
        ));
    }

    #[test]
    fn degenerate_sweep_matches_trial() {
        let cfg = SystemConfig {
            trials: 1,
            ..small()
        };
        let res = sweep_users(&cfg, &[2]).unwrap();
        let o = run_trial(
            &SystemConfig {
                n_users: 2,
                ..cfg.clone()
            },
            0,
        )
        .unwrap();
        let p = &res.points[0];
        assert_eq!(p.trials, 1);
        assert_eq!(p.error_f2.mean, o.error_f2);
        assert_eq!(p.thr_zf.mean, o.zf.throughput_bps);
        assert_eq!(p.ee_svdde.mean, o.svdde.ee_bps_per_w);
        assert_eq!(p.error_f2.se, 0.0);
    }

    #[test]
    fn point_order_and_parallelism_do_not_matter() {
        let cfg = small();
        let a = sweep_users(&cfg, &[2, 3, 4]).unwrap();
        let serial = SystemConfig {
            parallel: false,
            ..cfg.clone()
        };
        let b = sweep_users(&serial, &[4, 2, 3]).unwrap();
        for p in &a.points {
            let q = b.points.iter().find(|q| q.axis_value == p.axis_value).unwrap();
            assert_eq!(p, q);
        }
    }

    #[test]
    fn rf_sweep_uses_rank_bound() {
        let cfg = SystemConfig {
            trials: 2,
            ..small()
        };
        let res = sweep_rf_chains(&cfg, &[6, 10]).unwrap();
        assert_eq!(res.axis_values(), vec![6, 10]);
        for p in &res.points {
            assert_eq!(p.m_used, m_max(p.axis_value, cfg.n_users).unwrap());
        }
    }

    #[test]
    fn sweep_axis_ranges() {
        let cfg = small();
        assert!(matches!(sweep_users(&cfg, &[1]), Err(SimError::AxisRange { .. })));
        assert!(matches!(sweep_users(&cfg, &[11]), Err(SimError::AxisRange { .. })));
        assert!(matches!(sweep_rf_chains(&cfg, &[3]), Err(SimError::AxisRange { .. })));
        assert!(matches!(sweep_rf_chains(&cfg, &[33]), Err(SimError::AxisRange { .. })));
    }
}
