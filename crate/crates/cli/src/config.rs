//! Experiment configuration: one TOML file plus command-line overrides.

use std::path::{Path, PathBuf};

use ids_polar::guard::GuardConfig;
use ids_polar::mi::MAX_EXACT_MI_BLOCK;
use ids_polar::trellis::MAX_EXHAUSTIVE_BLOCK;
use ids_polar::{Channel, PadContext};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub p_insert: f64,
    pub p_delete: f64,
    pub p_substitute: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CodeSection {
    pub n: u32,
    pub n0: u32,
    pub xi: f64,
    /// Fixed code rate. When absent, `e2e` uses the mutual-information proxy.
    pub target_rate: Option<f64>,
}

impl Default for CodeSection {
    fn default() -> Self {
        Self {
            n: 10,
            n0: 3,
            xi: 0.2,
            target_rate: None,
        }
    }
}

/// Explicit pad context; each field defaults to the value implied by the
/// code section.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContextOverride {
    pub ell_zero: Option<usize>,
    pub ell_mid: Option<usize>,
    pub h: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Lemma1Section {
    /// Window lengths as multiples of `h0`, rounded up.
    pub h0_multiples: Vec<f64>,
    /// Additional absolute window lengths.
    pub h_values: Vec<usize>,
    /// Accept window lengths below `h0`, where the bound is not claimed.
    pub allow_below_h0: bool,
}

impl Default for Lemma1Section {
    fn default() -> Self {
        Self {
            h0_multiples: vec![1.0, 2.0],
            h_values: Vec::new(),
            allow_below_h0: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MiMode {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MiSection {
    pub mode: MiMode,
    pub block_len: usize,
    pub context: ContextOverride,
}

impl Default for MiSection {
    fn default() -> Self {
        Self {
            mode: MiMode::Exact,
            block_len: 4,
            context: ContextOverride::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParseAgreementSection {
    /// Sweep over `n0`; empty means the code section's `n0` only.
    pub n0_values: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PadMode {
    Exact,
    Empirical,
    Factored,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct E2eSection {
    /// Sweep over `n`; empty means the code section's `n` only.
    pub n_values: Vec<u32>,
    pub construction_trials: u64,
    /// Rate as a fraction of the per-bit `I(X; Y★)` at the proxy block length.
    pub mi_proxy_factor: f64,
    pub mi_proxy_block_len: usize,
    /// Pad law used by the decoder. `exact` needs `ell(n0) <= 6`.
    pub pad_mode: PadMode,
    pub pad_trials: u64,
}

impl Default for E2eSection {
    fn default() -> Self {
        Self {
            n_values: Vec::new(),
            construction_trials: 1000,
            mi_proxy_factor: 0.5,
            mi_proxy_block_len: 4,
            pad_mode: PadMode::Exact,
            pad_trials: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PadModelSection {
    pub mode: PadMode,
    pub context: ContextOverride,
}

impl Default for PadModelSection {
    fn default() -> Self {
        Self {
            mode: PadMode::Exact,
            context: ContextOverride::default(),
        }
    }
}

fn default_seed() -> u64 {
    1
}

fn default_trials() -> u64 {
    1000
}

fn default_out() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    pub channel: ChannelSection,
    #[serde(default)]
    pub code: CodeSection,
    #[serde(default)]
    pub lemma1: Lemma1Section,
    #[serde(default)]
    pub mi: MiSection,
    #[serde(default)]
    pub parse_agreement: ParseAgreementSection,
    #[serde(default)]
    pub e2e: E2eSection,
    #[serde(default)]
    pub pad_model: PadModelSection,
}

/// Values given on the command line take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(channel: ChannelSection) -> Self {
        Self {
            seed: default_seed(),
            trials: default_trials(),
            out: default_out(),
            channel,
            code: CodeSection::default(),
            lemma1: Lemma1Section::default(),
            mi: MiSection::default(),
            parse_agreement: ParseAgreementSection::default(),
            e2e: E2eSection::default(),
            pad_model: PadModelSection::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        Self::from_toml(&text)
    }

    pub fn apply(mut self, o: &Overrides) -> Self {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(t) = o.trials {
            self.trials = t;
        }
        if let Some(out) = &o.out {
            self.out = out.clone();
        }
        self
    }

    /// Channel parameters without the advantage check, which `stats`
    /// reports on its own.
    pub fn channel_probabilities(&self) -> (f64, f64, f64) {
        let c = &self.channel;
        (c.p_insert, c.p_delete, c.p_substitute)
    }

    pub fn channel(&self) -> Result<Channel, CliError> {
        let (pi, pd, ps) = self.channel_probabilities();
        Ok(Channel::new(pi, pd, ps)?)
    }

    pub fn guard(&self) -> Result<GuardConfig, CliError> {
        self.guard_with(self.code.n, self.code.n0)
    }

    pub fn guard_with(&self, n: u32, n0: u32) -> Result<GuardConfig, CliError> {
        Ok(GuardConfig::new(n, n0, self.code.xi)?)
    }

    /// Pad context of the narrowest guard band, with overrides applied.
    pub fn pad_context(&self, spec: &Channel, o: &ContextOverride) -> Result<PadContext, CliError> {
        let base = PadContext::for_guard(&self.guard()?, spec.stats().beta);
        let h = o.h.unwrap_or(base.h);
        if h == 0 {
            return Err(CliError::Config("context.h must be at least 1".into()));
        }
        Ok(PadContext::new(
            o.ell_zero.unwrap_or(base.ell_zero),
            o.ell_mid.unwrap_or(base.ell_mid),
            h,
        ))
    }

    pub fn n0_sweep(&self) -> Vec<u32> {
        if self.parse_agreement.n0_values.is_empty() {
            vec![self.code.n0]
        } else {
            self.parse_agreement.n0_values.clone()
        }
    }

    pub fn n_sweep(&self) -> Vec<u32> {
        if self.e2e.n_values.is_empty() {
            vec![self.code.n]
        } else {
            self.e2e.n_values.clone()
        }
    }

    /// Checks shared by every subcommand.
    pub fn validate_common(&self) -> Result<(), CliError> {
        if self.trials == 0 {
            return Err(CliError::Config("trials must be at least 1".into()));
        }
        Ok(())
    }

    pub fn validate_mi(&self) -> Result<(), CliError> {
        let len = self.mi.block_len;
        if len == 0 {
            return Err(CliError::Config("mi.block_len must be at least 1".into()));
        }
        if self.mi.mode == MiMode::Exact && len > MAX_EXACT_MI_BLOCK {
            return Err(CliError::Config(format!(
                "mi.block_len = {len} is too large for exact mode (limit {MAX_EXACT_MI_BLOCK}); \
                 set mi.mode = \"monte-carlo\" or reduce the block length"
            )));
        }
        if len > MAX_EXHAUSTIVE_BLOCK {
            return Err(CliError::Config(format!(
                "mi.block_len = {len} exceeds the exhaustive limit {MAX_EXHAUSTIVE_BLOCK}"
            )));
        }
        Ok(())
    }

    pub fn validate_e2e(&self) -> Result<(), CliError> {
        let n0 = self.code.n0;
        if n0 >= usize::BITS || (1usize << n0) > MAX_EXHAUSTIVE_BLOCK {
            return Err(CliError::Config(format!(
                "code.n0 = {n0} gives blocks of {} bits; decoding scores every block exhaustively \
                 and needs 2^n0 <= {MAX_EXHAUSTIVE_BLOCK}, so use n0 <= 3",
                1usize << n0
            )));
        }
        for &n in &self.n_sweep() {
            self.guard_with(n, self.code.n0)?;
        }
        if let Some(r) = self.code.target_rate {
            if !(0.0..1.0).contains(&r) {
                return Err(CliError::Config(format!("code.target_rate = {r} must lie in [0, 1)")));
            }
        } else {
            let f = self.e2e.mi_proxy_factor;
            if !(f > 0.0 && f < 1.0) {
                return Err(CliError::Config(format!("e2e.mi_proxy_factor = {f} must lie in (0, 1)")));
            }
            let b = self.e2e.mi_proxy_block_len;
            if b == 0 || b > MAX_EXACT_MI_BLOCK {
                return Err(CliError::Config(format!(
                    "e2e.mi_proxy_block_len = {b} must lie in 1..={MAX_EXACT_MI_BLOCK}"
                )));
            }
        }
        if self.e2e.construction_trials == 0 {
            return Err(CliError::Config("e2e.construction_trials must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
seed = 7
trials = 50

[channel]
p_insert = 0.01
p_delete = 0.01
p_substitute = 0.01

[code]
n = 8
n0 = 3
xi = 0.2
target_rate = 0.5

[parse_agreement]
n0_values = [2, 3]
"#;

    #[test]
    fn parses_sample_with_defaults() {
        let cfg = ExperimentConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.trials, 50);
        assert_eq!(cfg.out, PathBuf::from("results"));
        assert_eq!(cfg.code.target_rate, Some(0.5));
        assert_eq!(cfg.n0_sweep(), vec![2, 3]);
        assert_eq!(cfg.n_sweep(), vec![8]);
        assert_eq!(cfg.mi, MiSection::default());
    }

    #[test]
    fn overrides_win() {
        let cfg = ExperimentConfig::from_toml(SAMPLE).unwrap().apply(&Overrides {
            seed: Some(9),
            trials: None,
            out: Some("elsewhere".into()),
        });
        assert_eq!((cfg.seed, cfg.trials), (9, 50));
        assert_eq!(cfg.out, PathBuf::from("elsewhere"));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(ExperimentConfig::from_toml("[channel]\np_insert = 0.1\np_delete = 0\np_substitute = 0\nbogus = 1").is_err());
        let mut cfg = ExperimentConfig::from_toml(SAMPLE).unwrap();
        cfg.code.n0 = 4;
        let msg = cfg.validate_e2e().unwrap_err().to_string();
        assert!(msg.contains("n0 <= 3"), "{msg}");
        cfg.code.n0 = 3;
        cfg.mi.block_len = 5;
        assert!(cfg.validate_mi().unwrap_err().to_string().contains("monte-carlo"));
        cfg.channel.p_delete = 1.5;
        assert!(cfg.channel().is_err());
    }
}
