//! Energy-efficiency analysis for point-to-point MIMO links over slow (block)
//! fading channels.
//!
//! The crate models a link that spends `t_s` of every `T_s` symbols on
//! training, transmits with total radiated power `P`, and pays `aP + b` watts
//! for it. Efficiency is measured in successfully delivered bits per joule.
//! Two regimes are covered:
//!
//! * **Imperfect CSI at both ends** ([`efficiency::nu_t`]): the transmitter
//!   water-fills over the eigenmodes of the channel estimate and success is a
//!   finite-block function `F_L` of the mutual-information margin.
//! * **No CSI at the transmitter** ([`efficiency::nu_r`]): uniform precoding,
//!   success is the probability over fading that the mutual-information lower
//!   bound reaches the target spectral efficiency.
//!
//! The [`optimize`] module finds the best transmit power, training length and
//! antenna count, and [`experiment`] turns these into reproducible CSV sweeps.

pub mod channel;
pub mod config;
pub mod efficiency;
pub mod error;
pub mod experiment;
pub mod optimize;
pub mod precoding;
pub mod rng;
pub mod success;

pub use channel::{ChannelEstimate, ChannelMatrix, EffectiveSnr, Snr};
pub use config::SystemConfig;
pub use efficiency::{EfficiencyResult, PowerModel};
pub use error::{Error, Result};
pub use precoding::{MutualInfo, PowerAllocation, PrecodingMatrix, SvdFactors};
pub use success::{BlockParams, FlVariant, SuccessCurve, SuccessProb, SuccessSource};
