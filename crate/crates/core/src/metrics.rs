//! SINR, sum throughput, flop accounting, power consumption and energy
//! efficiency.
//!
//! Flop counts use 6 flops per complex multiply and 2 per complex add, so one
//! output entry of an `n x k` complex matrix-vector product costs `8k - 2`.

use std::fmt;

use thiserror::Error;

use crate::channel::ChannelRealization;
use crate::config::{SinrForm, SystemConfig};
use crate::precoding::{BasebandPrecoder, RfPrecoder};
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("noise power must be positive, got {0}")]
    NonPositiveNoise(f64),
    #[error("total power must be positive, got {0}")]
    NonPositivePower(f64),
    #[error("lambda3 needs a truncation rank")]
    MissingRank,
    #[error("flop counts need N_RF >= 1 and K >= 1, got N_RF = {n_rf}, K = {k}")]
    EmptyDimensions { n_rf: usize, k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Equivalent zero-forcing, one baseband layer.
    Zf,
    /// ZF followed by the rank-`m` SVD split into two layers.
    Svdde,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Zf => "zf",
            Algorithm::Svdde => "svdde",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlopKind {
    /// `F_BB s`.
    Lambda1,
    /// `A B s` with the full `K`-rank split.
    Lambda2,
    /// `C R s` with a rank-`m` split.
    Lambda3,
}

/// Matrix-vector flops for precoding one symbol vector.
pub fn flop_count(
    kind: FlopKind,
    n_rf: usize,
    k: usize,
    m: Option<usize>,
) -> Result<u64, MetricsError> {
    if n_rf == 0 || k == 0 {
        return Err(MetricsError::EmptyDimensions { n_rf, k });
    }
    let (n, k) = (n_rf as u64, k as u64);
    Ok(match kind {
        FlopKind::Lambda1 => 8 * n * k - 2 * n,
        FlopKind::Lambda2 => 8 * (n * k + k * k) - 2 * (n + k),
        FlopKind::Lambda3 => {
            let m = m.ok_or(MetricsError::MissingRank)? as u64;
            8 * (n * m + m * k) - 2 * (n + m)
        }
    })
}

/// Flops to compute the precoder once per coherence block.
pub fn algorithm_flops(algorithm: Algorithm, n_rf: usize, k: usize, m: usize) -> u64 {
    let (n, k, m) = (n_rf as u64, k as u64, m as u64);
    let zf_core = 9 * n * k * k + 3 * n * k;
    match algorithm {
        Algorithm::Zf => k * k * k + zf_core,
        Algorithm::Svdde => zf_core + 4 * n * n * k + 23 * k * k * k + 2 * m * n,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlopReport {
    pub lambda1: u64,
    pub lambda2: u64,
    /// At the rank actually used.
    pub lambda3: u64,
    /// Per-symbol flops of this algorithm minus `lambda1`.
    pub phi: i64,
    /// Per-symbol flops charged to the baseband power.
    pub delta: u64,
    /// Per-block algorithm flops.
    pub omega: u64,
}

impl FlopReport {
    pub fn new(algorithm: Algorithm, n_rf: usize, k: usize, m: usize) -> Result<Self, MetricsError> {
        let lambda1 = flop_count(FlopKind::Lambda1, n_rf, k, None)?;
        let lambda2 = flop_count(FlopKind::Lambda2, n_rf, k, None)?;
        let lambda3 = flop_count(FlopKind::Lambda3, n_rf, k, Some(m))?;
        let delta = match algorithm {
            Algorithm::Zf => lambda1,
            Algorithm::Svdde => lambda3,
        };
        Ok(Self {
            lambda1,
            lambda2,
            lambda3,
            phi: delta as i64 - lambda1 as i64,
            delta,
            omega: algorithm_flops(algorithm, n_rf, k, m),
        })
    }
}

/// Baseband-unit power: per-symbol precoding plus per-block precoder computation.
pub fn bb_power(delta: u64, omega: u64, cfg: &SystemConfig) -> f64 {
    let w = cfg.bandwidth_hz;
    let per_block = cfg.w_c_hz * cfg.t_c_s;
    w * delta as f64 / cfg.l_bs_flops_per_w + (w / per_block) * omega as f64 / cfg.l_bs_flops_per_w
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBreakdown {
    pub p_pa: f64,
    pub p_ps_network: f64,
    pub p_rf_chains: f64,
    pub p_bb: f64,
    pub p_total: f64,
}

pub fn total_power(cfg: &SystemConfig, p_bb: f64) -> PowerBreakdown {
    let p_pa = cfg.tx_power_w / cfg.pa_efficiency;
    let p_ps_network = (cfg.n_tx * cfg.n_rf) as f64 * cfg.p_ps_w;
    let p_rf_chains = cfg.n_rf as f64 * cfg.p_rf_w;
    PowerBreakdown {
        p_pa,
        p_ps_network,
        p_rf_chains,
        p_bb,
        p_total: p_pa + p_ps_network + p_rf_chains + p_bb,
    }
}

pub fn energy_efficiency(r_sum: f64, p_total: f64) -> Result<f64, MetricsError> {
    if !(p_total > 0.0) {
        return Err(MetricsError::NonPositivePower(p_total));
    }
    Ok(r_sum / p_total)
}

/// `W sum_k log2(1 + SINR_k)`.
pub fn throughput(sinrs: &[f64], bandwidth_hz: f64) -> f64 {
    bandwidth_hz * sinrs.iter().map(|s| s.ln_1p()).sum::<f64>() / std::f64::consts::LN_2
}

/// Per-user SINR for the composite precoder `F_RF F_BB`.
///
/// With `q[k][i] = |h_k^H F_RF f_i|^2`, the standard form is
/// `q[k][k] / (noise + sum_{i != k} q[k][i])`; the literal form squares
/// every `q` term.
pub fn sinr_per_user<T: Real>(
    chan: &ChannelRealization<T>,
    rf: &RfPrecoder<T>,
    bb: &BasebandPrecoder<T>,
    noise_w: T,
    form: SinrForm,
) -> Result<Vec<T>, MetricsError> {
    if !(noise_w > T::zero()) {
        return Err(MetricsError::NonPositiveNoise(noise_w.to_f64().unwrap_or(f64::NAN)));
    }
    let k = chan.n_users();
    let shapes_ok = chan.h.rows() == rf.f_rf.rows()
        && rf.f_rf.cols() == bb.f_bb.rows()
        && bb.f_bb.cols() == k;
    if !shapes_ok {
        return Err(MetricsError::Dimension(format!(
            "H {:?}, F_RF {:?}, F_BB {:?}",
            chan.h.shape(),
            rf.f_rf.shape(),
            bb.f_bb.shape()
        )));
    }
    let precoder = rf.f_rf.matmul(&bb.f_bb);
    let effective = chan
        .h
        .adjoint_mul(&precoder)
        .map_err(|e| MetricsError::Dimension(e.to_string()))?;
    let term = |q: T| match form {
        SinrForm::Standard => q,
        SinrForm::PaperLiteral => q * q,
    };
    Ok((0..k)
        .map(|u| {
            let signal = term(effective[(u, u)].norm_sqr());
            let interference = (0..k)
                .filter(|&i| i != u)
                .fold(T::zero(), |acc, i| acc + term(effective[(u, i)].norm_sqr()));
            signal / (noise_w + interference)
        })
        .collect())
}

/// Everything measured for one algorithm on one channel draw.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub algorithm: Algorithm,
    pub sinr_per_user: Vec<f64>,
    pub throughput_bps: f64,
    pub power: PowerBreakdown,
    pub ee_bps_per_w: f64,
    pub flops: FlopReport,
    /// Rank of the baseband split; `K` for ZF.
    pub m_used: usize,
}

impl MetricsRecord {
    pub fn evaluate(
        cfg: &SystemConfig,
        chan: &ChannelRealization<f64>,
        rf: &RfPrecoder<f64>,
        bb: &BasebandPrecoder<f64>,
        algorithm: Algorithm,
        m_used: usize,
    ) -> Result<Self, MetricsError> {
        let sinr = sinr_per_user(chan, rf, bb, cfg.noise_power_w(), cfg.sinr_form)?;
        let throughput_bps = throughput(&sinr, cfg.bandwidth_hz);
        let flops = FlopReport::new(algorithm, cfg.n_rf, cfg.n_users, m_used)?;
        let power = total_power(cfg, bb_power(flops.delta, flops.omega, cfg));
        let ee_bps_per_w = energy_efficiency(throughput_bps, power.p_total)?;
        Ok(Self {
            algorithm,
            sinr_per_user: sinr,
            throughput_bps,
            power,
            ee_bps_per_w,
            flops,
            m_used,
        })
    }
}
