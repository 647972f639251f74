//! Link-level simulator for multi-user mmWave massive-MIMO hybrid precoding.
//!
//! The baseband zero-forcing precoder is split into two thinner matrices by a
//! truncated SVD whose rank is capped so the split never costs more flops per
//! symbol than the original product. The crate measures what that split costs
//! in sum throughput and energy efficiency.
//!
//! The numerical core ([`linalg`], [`channel`], [`precoding`] and the SINR part
//! of [`metrics`]) is generic over the real scalar via [`Real`]. The aliases
//! below fix it to `f64`, which is what the simulator uses.

pub mod channel;
pub mod config;
pub mod linalg;
pub mod metrics;
pub mod output;
pub mod precoding;
pub mod scalar;
pub mod sim;

pub use config::{AngleModel, ConfigError, NoiseModel, Normalization, SinrForm, SystemConfig};
pub use scalar::{Real, C};

pub type Complex = scalar::C<f64>;
pub type Matrix = linalg::CMatrix<f64>;
pub type ThinSvd = linalg::ThinSvd<f64>;
pub type Geometry = channel::ArrayGeometry<f64>;
pub type Channel = channel::ChannelRealization<f64>;
pub type RfPrecoder = precoding::RfPrecoder<f64>;
pub type BasebandPrecoder = precoding::BasebandPrecoder<f64>;
pub type SvddeFactors = precoding::SvddeFactors<f64>;
