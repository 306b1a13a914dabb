//! One driver per subcommand. Each returns a [`Report`] and leaves writing
//! it to the caller.

mod e2e;
mod lemma1;
mod mi;
mod pad_model;
mod parse_agreement;
mod stats;

pub use e2e::cmd_e2e;
pub use lemma1::cmd_lemma1;
pub use mi::cmd_mi;
pub use pad_model::{cmd_pad_model, load_or_build_pad_model};
pub use parse_agreement::cmd_parse_agreement;
pub use stats::cmd_stats;

use ids_polar::{trial_rng, TrialRng};

/// Generator for trial `t` of arm `arm`. Arms occupy disjoint index ranges
/// so that independent sweeps never share a stream.
pub(crate) fn arm_rng(seed: u64, arm: u64, t: u64) -> TrialRng {
    trial_rng(seed, (arm << 40) | t)
}
