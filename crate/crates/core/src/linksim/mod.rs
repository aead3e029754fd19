//! Monte-Carlo uncoded BER harness: channel models, 16-QAM, LS channel
//! estimation, and SNR sweeps over the preprocessing backends.

mod channel;
mod qam;
mod sweep;

pub use channel::{gen_channel, gen_channel_with, los_angles, ChannelKind, ChannelModel, HALF_SPAN_DEG};
pub use qam::{demap, Constellation};
pub use sweep::{
    ber_sweep, dft_pilots, ls_channel_estimate, run_trial, sweep_metadata, transmit, trial_rng,
    BerCurve, BerRecord, Estimation, Preprocessor, SweepConfig, TrialOutcome,
};
