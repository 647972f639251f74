//! Saleh-Valenzuela multipath channels seen through a uniform linear array.

use num_traits::Zero;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::config::{AngleModel, ConfigError, SystemConfig};
use crate::linalg::CMatrix;
use crate::scalar::{Real, C};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Transmit ULA.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry<T: Real> {
    pub n_tx: usize,
    /// `d_T / lambda`.
    pub spacing_wavelengths: T,
    pub wavelength_m: T,
}

impl<T: Real> ArrayGeometry<T> {
    pub fn from_config(cfg: &SystemConfig) -> Self {
        Self {
            n_tx: cfg.n_tx,
            spacing_wavelengths: T::lit(cfg.spacing_wavelengths),
            wavelength_m: T::lit(cfg.wavelength_m()),
        }
    }

    /// Entries `(1/sqrt(N_T)) exp(j p 2 pi (d/lambda) sin theta)`, `p = 0..N_T`.
    pub fn steering(&self, theta: T) -> Vec<C<T>> {
        let amp = T::one() / T::from_count(self.n_tx).sqrt();
        let step = T::TAU() * self.spacing_wavelengths * theta.sin();
        (0..self.n_tx)
            .map(|p| C::from_polar(amp, step * T::from_count(p)))
            .collect()
    }
}

/// Array response `a(theta)` as an `N_T x 1` matrix; unit Euclidean norm.
pub fn array_response<T: Real>(theta: T, geom: &ArrayGeometry<T>) -> CMatrix<T> {
    CMatrix::from_columns(&[geom.steering(theta)])
}

/// `d^(-alpha)`.
pub fn large_scale_fading<T: Real>(d: T, alpha: T) -> Result<T, ChannelError> {
    if !(d > T::zero()) {
        return Err(ChannelError::NonPositiveDistance(d.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(d.powf(-alpha))
}

/// One channel draw and the geometry that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization<T: Real> {
    /// `N_T x K`, column `k` is `h_k`.
    pub h: CMatrix<T>,
    /// `path_angles[k][l]`; every row is identical under [`AngleModel::Shared`].
    pub path_angles: Vec<Vec<T>>,
    /// `path_gains[k][l]`.
    pub path_gains: Vec<Vec<C<T>>>,
    pub distances_m: Vec<T>,
    pub large_scale: Vec<T>,
    pub angle_model: AngleModel,
}

impl<T: Real> ChannelRealization<T> {
    pub fn n_users(&self) -> usize {
        self.h.cols()
    }

    pub fn n_paths(&self) -> usize {
        self.path_gains.first().map_or(0, Vec::len)
    }

    /// Rebuilds `H` from the stored angles, gains and large-scale coefficients.
    pub fn reassemble(&self, geom: &ArrayGeometry<T>) -> CMatrix<T> {
        assemble_channel(geom, &self.path_angles, &self.path_gains, &self.large_scale)
    }
}

/// `h_k = sqrt(N_T xi_k / L) sum_l g_l^k a(theta_l^k)` for every user.
pub fn assemble_channel<T: Real>(
    geom: &ArrayGeometry<T>,
    angles: &[Vec<T>],
    gains: &[Vec<C<T>>],
    large_scale: &[T],
) -> CMatrix<T> {
    let n = geom.n_tx;
    let cols: Vec<Vec<C<T>>> = gains
        .iter()
        .zip(angles)
        .zip(large_scale)
        .map(|((g, th), &xi)| {
            let paths = T::from_count(g.len());
            let scale = (T::from_count(n) * xi / paths).sqrt();
            let mut h = vec![C::zero(); n];
            for (&gl, &theta) in g.iter().zip(th) {
                for (hp, ap) in h.iter_mut().zip(geom.steering(theta)) {
                    *hp += gl * ap;
                }
            }
            h.iter().map(|z| z * scale).collect()
        })
        .collect();
    CMatrix::from_columns(&cols)
}

/// Circularly-symmetric complex Gaussian with the given variance.
pub fn complex_gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C<T> {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C::new(T::lit(re * s), T::lit(im * s))
}

fn azimuth<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let half = std::f64::consts::FRAC_PI_2;
    loop {
        let x = rng.random_range(-half..half);
        if x > -half {
            return x;
        }
    }
}

/// Draws a channel for `cfg.n_users` users.
///
/// Sampling order is fixed (angles, gains, distances) so a seeded stream
/// always yields the same realization.
pub fn generate_channel<T: Real, R: Rng + ?Sized>(
    cfg: &SystemConfig,
    rng: &mut R,
) -> Result<ChannelRealization<T>, ChannelError> {
    cfg.validate()?;
    let (k, l) = (cfg.n_users, cfg.n_paths);
    let path_angles: Vec<Vec<T>> = match cfg.angle_model {
        AngleModel::Shared => {
            let shared: Vec<T> = (0..l).map(|_| T::lit(azimuth(rng))).collect();
            vec![shared; k]
        }
        AngleModel::PerUser => (0..k)
            .map(|_| (0..l).map(|_| T::lit(azimuth(rng))).collect())
            .collect(),
    };
    let path_gains: Vec<Vec<C<T>>> = (0..k)
        .map(|_| {
            (0..l)
                .map(|p| complex_gaussian(rng, cfg.path_variance(p)))
                .collect()
        })
        .collect();
    let distances: Vec<f64> = (0..k)
        .map(|_| rng.random_range(cfg.d_min_m..=cfg.d_max_m))
        .collect();
    let alpha = T::lit(cfg.path_loss_exp);
    let distances_m: Vec<T> = distances.into_iter().map(T::lit).collect();
    let large_scale = distances_m
        .iter()
        .map(|&d| large_scale_fading(d, alpha))
        .collect::<Result<Vec<_>, _>>()?;
    let geom = ArrayGeometry::from_config(cfg);
    let h = assemble_channel(&geom, &path_angles, &path_gains, &large_scale);
    Ok(ChannelRealization {
        h,
        path_angles,
        path_gains,
        distances_m,
        large_scale,
        angle_model: cfg.angle_model,
    })
}
