//! Maximising energy efficiency over power, training length and antenna
//! count.
//!
//! Every continuous search runs golden-section in `ln P` after a coarse
//! pre-scan ([`search`]). Where the optimum has a first-order condition it is
//! solved independently by bisection and reported next to the search result.

pub mod antennas;
pub mod power;
pub mod search;
pub mod siso;
pub mod training;

pub use antennas::{antenna_curves, optimal_antennas, optimal_antennas_with, AntennaRow, AntennaTable};
pub use power::{
    optimal_power_csitr, optimal_power_csitr_link, optimal_power_infinite_block,
    optimal_power_infinite_block_link, optimal_power_nocsit, optimal_power_nocsit_with, PowerMode,
};
pub use search::{maximize_unimodal, Bracket, Flags, OptimumReport, PRESCAN_POINTS};
pub use siso::{siso_lowsnr_ratio_numeric, siso_lowsnr_root, SisoRoot};
pub use training::{
    nocsit_at_training, optimal_training, optimal_training_csitr, optimal_training_with, TrainingOptimum,
};
