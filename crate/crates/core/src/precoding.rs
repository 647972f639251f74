//! RF beam selection, equivalent zero-forcing baseband precoding and the
//! SVD-based split of the baseband matrix into two thinner layers.

use thiserror::Error;

use crate::channel::{ArrayGeometry, ChannelRealization};
use crate::config::Normalization;
use crate::linalg::{solve_hermitian, thin_svd, CMatrix, LinalgError};
use crate::scalar::{Real, C};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PrecodingError {
    #[error("cannot select {n_rf} RF beams from a codebook of {codebook_size}")]
    CodebookTooSmall { n_rf: usize, codebook_size: usize },
    #[error("need at least K = {k} RF chains, got {n_rf}")]
    TooFewRfChains { n_rf: usize, k: usize },
    #[error("rank-deficient equivalent channel: {0}")]
    RankDeficient(LinalgError),
    #[error("no admissible truncation rank for N_RF = {n_rf}, K = {k}")]
    NoAdmissibleRank { n_rf: usize, k: usize },
    #[error("truncation rank m = {m} outside [1, {k}]")]
    RankOutOfRange { m: usize, k: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Constant-modulus RF precoder built from codebook steering vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct RfPrecoder<T: Real> {
    /// `N_T x N_RF`.
    pub f_rf: CMatrix<T>,
    pub selected_angles: Vec<T>,
    pub codebook_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasebandPrecoder<T: Real> {
    /// `N_RF x K`.
    pub f_bb: CMatrix<T>,
    pub normalization: Normalization,
    pub tx_power_w: T,
}

impl<T: Real> BasebandPrecoder<T> {
    pub fn n_users(&self) -> usize {
        self.f_bb.cols()
    }
}

/// Rank-`m` factors `C R` of a baseband matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SvddeFactors<T: Real> {
    /// `N_RF x m`, columns `sigma_i u_i`.
    pub c: CMatrix<T>,
    /// `m x K`, rows `v_i^H`.
    pub r: CMatrix<T>,
    pub m: usize,
    /// `||F - C R||_F^2 = sum_{i > m} sigma_i^2`.
    pub error_f2: T,
}

/// Codebook angles with `sin(theta)` uniformly spaced on `[-1, 1)`.
pub fn codebook_angles<T: Real>(size: usize) -> Vec<T> {
    let two = T::lit(2.0);
    let n = T::from_count(size);
    (0..size)
        .map(|g| (-T::one() + two * T::from_count(g) / n).asin())
        .collect()
}

/// Picks `n_rf` distinct codebook beams with the largest aggregate channel
/// gain `sum_k |a(theta)^H h_k|^2`. Ties go to the lower codebook index.
pub fn select_rf_precoder<T: Real>(
    chan: &ChannelRealization<T>,
    geom: &ArrayGeometry<T>,
    n_rf: usize,
    codebook_size: usize,
) -> Result<RfPrecoder<T>, PrecodingError> {
    if n_rf > codebook_size {
        return Err(PrecodingError::CodebookTooSmall {
            n_rf,
            codebook_size,
        });
    }
    let k = chan.n_users();
    if n_rf < k {
        return Err(PrecodingError::TooFewRfChains { n_rf, k });
    }
    if chan.h.rows() != geom.n_tx {
        return Err(PrecodingError::Dimension(format!(
            "channel has {} antennas, array has {}",
            chan.h.rows(),
            geom.n_tx
        )));
    }
    let angles = codebook_angles::<T>(codebook_size);
    // Split real/imaginary planes keep the inner loop free of complex shuffles.
    let n = geom.n_tx;
    let h_re: Vec<Vec<T>> = (0..k).map(|u| chan.h.col(u).iter().map(|z| z.re).collect()).collect();
    let h_im: Vec<Vec<T>> = (0..k).map(|u| chan.h.col(u).iter().map(|z| z.im).collect()).collect();
    let mut beam = vec![C::new(T::zero(), T::zero()); n];
    let (mut b_re, mut b_im) = (vec![T::zero(); n], vec![T::zero(); n]);
    let scores: Vec<T> = angles
        .iter()
        .map(|&t| {
            scoring_beam(geom, t, &mut beam);
            for (p, z) in beam.iter().enumerate() {
                b_re[p] = z.re;
                b_im[p] = z.im;
            }
            (0..k).fold(T::zero(), |acc, u| {
                let (mut re, mut im) = (T::zero(), T::zero());
                let h = h_re[u].iter().zip(&h_im[u]);
                for ((&br, &bi), (&hr, &hi)) in b_re.iter().zip(&b_im).zip(h) {
                    // conj(b) * h
                    re += br * hr + bi * hi;
                    im += br * hi - bi * hr;
                }
                acc + re * re + im * im
            })
        })
        .collect();
    let mut order: Vec<usize> = (0..codebook_size).collect();
    order.sort_by(|&i, &j| {
        scores[j]
            .partial_cmp(&scores[i])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    order.truncate(n_rf);
    let cols: Vec<Vec<C<T>>> = order.iter().map(|&i| geom.steering(angles[i])).collect();
    Ok(RfPrecoder {
        f_rf: CMatrix::from_columns(&cols),
        selected_angles: order.iter().map(|&i| angles[i]).collect(),
        codebook_size,
    })
}

/// Steering vector used only for scoring: a phase recurrence re-anchored
/// exactly every `ANCHOR` antennas, so the drift stays at a few ulps while
/// most sin/cos evaluations are skipped.
fn scoring_beam<T: Real>(geom: &ArrayGeometry<T>, theta: T, out: &mut [C<T>]) {
    const ANCHOR: usize = 32;
    let amp = T::one() / T::from_count(geom.n_tx).sqrt();
    let step = T::TAU() * geom.spacing_wavelengths * theta.sin();
    let rot = C::from_polar(T::one(), step);
    for p in 0..out.len() {
        out[p] = if p % ANCHOR == 0 {
            C::from_polar(amp, step * T::from_count(p))
        } else {
            out[p - 1] * rot
        };
    }
}

/// `H_eq = H^H F_RF`, `K x N_RF`.
pub fn equivalent_channel<T: Real>(
    chan: &ChannelRealization<T>,
    rf: &RfPrecoder<T>,
) -> Result<CMatrix<T>, PrecodingError> {
    chan.h
        .adjoint_mul(&rf.f_rf)
        .map_err(|e| PrecodingError::Dimension(e.to_string()))
}

/// Equivalent ZF `F_BB = H_eq^H (H_eq H_eq^H)^{-1} D`.
///
/// `D` gives every user the same radiated power `P_T / K` through `F_RF`.
/// Under [`Normalization::PaperLiteral`] the result is then scaled to unit
/// Frobenius norm.
pub fn zf_baseband<T: Real>(
    h_eq: &CMatrix<T>,
    rf: &RfPrecoder<T>,
    p_t: T,
    normalization: Normalization,
) -> Result<BasebandPrecoder<T>, PrecodingError> {
    let (k, n_rf) = h_eq.shape();
    if rf.f_rf.cols() != n_rf {
        return Err(PrecodingError::Dimension(format!(
            "H_eq is {k}x{n_rf} but F_RF has {} columns",
            rf.f_rf.cols()
        )));
    }
    let gram = h_eq.matmul(&h_eq.adjoint());
    // (G^{-1} H_eq)^H = H_eq^H G^{-1} since G is Hermitian.
    let z = solve_hermitian(&gram, h_eq).map_err(|e| match e {
        LinalgError::IllConditioned(_) | LinalgError::NotPositiveDefinite => {
            PrecodingError::RankDeficient(e)
        }
        other => PrecodingError::Linalg(other),
    })?;
    let mut f_bb = z.adjoint();
    let effective = rf.f_rf.matmul(&f_bb);
    let per_user = p_t / T::from_count(k);
    for j in 0..k {
        let d = (per_user / effective.col_norm_sq(j)).sqrt();
        for x in f_bb.col_mut(j) {
            *x *= d;
        }
    }
    let f_bb = match normalization {
        Normalization::PowerExact => f_bb,
        Normalization::PaperLiteral => {
            let n = f_bb.frobenius_norm();
            f_bb.scale_real(T::one() / n)
        }
    };
    Ok(BasebandPrecoder {
        f_bb,
        normalization,
        tx_power_w: p_t,
    })
}

/// Largest `m` whose two-layer product `C R s` costs no more flops than
/// `F_BB s`: `floor(N_RF K / (N_RF + K - 1/4))`, computed in integers.
pub fn m_max(n_rf: usize, k: usize) -> Result<usize, PrecodingError> {
    let num = 4 * n_rf as u128 * k as u128;
    let den = 4 * n_rf as u128 + 4 * k as u128 - 1;
    let m = (num / den) as usize;
    if m < 1 {
        return Err(PrecodingError::NoAdmissibleRank { n_rf, k });
    }
    Ok(m)
}

/// Scales `f_bb` per `normalization`.
fn normalize<T: Real>(
    f_bb: CMatrix<T>,
    rf: &RfPrecoder<T>,
    p_t: T,
    normalization: Normalization,
) -> CMatrix<T> {
    let s = match normalization {
        Normalization::PaperLiteral => T::one() / f_bb.frobenius_norm(),
        Normalization::PowerExact => (p_t / rf.f_rf.matmul(&f_bb).frobenius_norm_sq()).sqrt(),
    };
    f_bb.scale_real(s)
}

fn check_rank(m: usize, k: usize) -> Result<(), PrecodingError> {
    if m < 1 || m > k {
        return Err(PrecodingError::RankOutOfRange { m, k });
    }
    Ok(())
}

/// Splits `F_BB_opt` into `C = [sigma_1 u_1 .. sigma_m u_m]` and
/// `R = [v_1 .. v_m]^H`, then rescales `C R` into a baseband precoder.
pub fn svdde<T: Real>(
    f_bb_opt: &CMatrix<T>,
    m: usize,
    rf: &RfPrecoder<T>,
    p_t: T,
    normalization: Normalization,
) -> Result<(SvddeFactors<T>, BasebandPrecoder<T>), PrecodingError> {
    let (n_rf, k) = f_bb_opt.shape();
    check_rank(m, k)?;
    if rf.f_rf.cols() != n_rf {
        return Err(PrecodingError::Dimension(format!(
            "F_BB has {n_rf} rows but F_RF has {} columns",
            rf.f_rf.cols()
        )));
    }
    let svd = thin_svd(f_bb_opt)?;
    let sigma = &svd.singular_values;
    let c = CMatrix::from_fn(n_rf, m, |i, j| svd.u[(i, j)] * sigma[j]);
    let r = CMatrix::from_fn(m, k, |i, j| svd.v[(j, i)].conj());
    let error_f2 = tail_energy(sigma, m);
    let product = c.matmul(&r);
    let f_bb = normalize(product, rf, p_t, normalization);
    Ok((
        SvddeFactors { c, r, m, error_f2 },
        BasebandPrecoder {
            f_bb,
            normalization,
            tx_power_w: p_t,
        },
    ))
}

/// `sum_{i > m} sigma_i^2`, smallest terms first.
fn tail_energy<T: Real>(sigma: &[T], m: usize) -> T {
    sigma[m..]
        .iter()
        .rev()
        .fold(T::zero(), |acc, &s| acc + s * s)
}

/// Truncation error `||F - C R||_F^2` for each requested rank, from one SVD.
pub fn decomposition_error_curve<T: Real>(
    f_bb_opt: &CMatrix<T>,
    m_values: &[usize],
) -> Result<Vec<T>, PrecodingError> {
    let k = f_bb_opt.cols();
    for &m in m_values {
        check_rank(m, k)?;
    }
    let svd = thin_svd(f_bb_opt)?;
    Ok(m_values
        .iter()
        .map(|&m| tail_energy(&svd.singular_values, m))
        .collect())
}
