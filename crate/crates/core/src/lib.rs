//! Polar codes over the binary insertion, deletion and substitution channel.
//!
//! The codeword is cut into short blocks separated by long guard bands. The
//! receiver splits its output at the guards without knowing where they are.
//! Each block then acts as a deletion channel with zero padding, and an
//! outer polar code runs over these block channels.
//!
//! Channel arithmetic is generic over the scalar type. `f64` is the default
//! everywhere, and exact rationals work wherever no logarithm is needed.

pub mod aladdin;
pub mod bits;
pub mod channel;
pub mod genie;
pub mod guard;
pub mod mi;
pub mod pad;
pub mod polar;
pub mod rng;
pub mod scalar;
pub mod stats;
pub mod trellis;

pub use aladdin::{aladdin_parse, run_coupled_trial, BadEventCounts, CoupledTrialReport, ParseResult, RngDithers};
pub use bits::{bits, BitString};
pub use channel::{
    channel_stats, lemma1_constants, misclassification_bound, output_distribution, transmit, window_majority_test,
    ChannelError, ChannelSpec, ChannelStats, Lemma1Constants,
};
pub use genie::{genie_parse, sample_dzp, DzpBlockOutput, GenieParse, PadContext, PadFlags, PadSide, Site};
pub use guard::{encode_with_guards, split_blocks, GuardConfig, GuardError, GuardLayout};
pub use mi::{exact_mi_sandwich, monte_carlo_mi, MiError, MiSandwich, MonteCarloMi};
pub use pad::{exact_pad_model, estimate_pad_model, factored_pad_model, PadError, PadModel};
pub use polar::{construct_code, polar_encode, sc_decode, sc_decode_tables, PolarConfig, PolarError};
pub use rng::{trial_rng, TrialRng};
pub use scalar::{Prob, Real};
pub use trellis::{block_likelihood_table, dzp_joint_prob, ids_joint_prob, BlockTable, LogProb, NoPads, PadLaw, TrellisError};

/// Exact rational probabilities.
pub type Rational = num_rational::Ratio<i64>;

/// Channel with `f64` probabilities.
pub type Channel = ChannelSpec<f64>;
/// Channel with `f32` probabilities.
pub type ChannelF32 = ChannelSpec<f32>;
/// Channel with exact rational probabilities.
pub type ExactChannel = ChannelSpec<Rational>;

pub type Stats = ChannelStats<f64>;
pub type ExactStats = ChannelStats<Rational>;
