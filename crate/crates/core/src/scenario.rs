//! Scenario files: one self-contained description of a link simulation.

use crate::channel::ChannelSpec;
use crate::config::{
    CheckedConfig, ConfigError, FdssSpec, SpreadingSpec, WaveformConfig,
};
use crate::ofdm::{BandPlan, OfdmError};
use crate::receiver::{ReceiverChain, ReceiverConfig, ReceiverError};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Band(#[from] OfdmError),
    #[error(transparent)]
    Receiver(#[from] ReceiverError),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

/// Which subcarriers carry co-scheduled traffic next to the WUS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BandSpec {
    /// The WUS alone on the grid.
    #[default]
    WusOnly,
    /// QPSK on every subcarrier of a centered active band not taken by
    /// the WUS block.
    Centered { n_active: usize },
}

fn default_channel() -> ChannelSpec {
    ChannelSpec::Awgn
}
fn default_fdss() -> FdssSpec {
    FdssSpec::none()
}
fn default_spreading() -> SpreadingSpec {
    SpreadingSpec::all_one()
}
fn default_trials() -> usize {
    1000
}
fn default_symbols() -> usize {
    1
}
fn default_seed() -> u64 {
    1
}

/// Everything a link run needs. Only `config` is mandatory in files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub config: WaveformConfig,
    #[serde(default = "default_fdss")]
    pub fdss: FdssSpec,
    #[serde(default = "default_spreading")]
    pub spreading: SpreadingSpec,
    #[serde(default)]
    pub band: BandSpec,
    #[serde(default = "default_channel")]
    pub channel: ChannelSpec,
    #[serde(default)]
    pub receiver: ReceiverConfig,
    /// OFDM symbols per Monte Carlo trial (one channel draw covers all).
    #[serde(default = "default_symbols")]
    pub symbols_per_trial: usize,
    /// Default SNR grid in dB; commands may override it.
    #[serde(default)]
    pub snr_db: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Cross-checks every part against the validated numerology.
    pub fn validate(self) -> Result<CheckedScenario, ScenarioError> {
        let cc = self.config.clone().validate()?;
        let mut violations = self.fdss.validate(cc.n_sc);
        violations.extend(self.spreading.validate(cc.n_seg(), cc.n_bit));
        if !violations.is_empty() {
            return Err(ConfigError { violations }.into());
        }
        match self.band {
            BandSpec::WusOnly => {}
            BandSpec::Centered { n_active } => {
                BandPlan::centered(&cc, n_active)?;
            }
        }
        let ds = self.receiver.downsample;
        if ds == 0 || cc.n_cp % ds != 0 || cc.n_fft % ds != 0 {
            return Err(ReceiverError::NotAligned { cp: cc.n_cp, body: cc.n_fft, ds }.into());
        }
        ReceiverChain::new(&self.receiver, &cc)?;
        if let ChannelSpec::Tdlc { delay_scaling } = self.channel {
            if !delay_scaling.is_finite() || delay_scaling < 0.0 {
                return Err(ScenarioError::Invalid(format!(
                    "delay_scaling must be a nonnegative number, got {delay_scaling}"
                )));
            }
        }
        if self.symbols_per_trial == 0 {
            return Err(ScenarioError::Invalid("symbols_per_trial must be positive".into()));
        }
        if self.trials == 0 {
            return Err(ScenarioError::Invalid("trials must be positive".into()));
        }
        if !self.receiver.tau_err.is_finite() || self.receiver.tau_err < 0.0 {
            return Err(ScenarioError::Invalid(format!(
                "tau_err must be a nonnegative number, got {}",
                self.receiver.tau_err
            )));
        }
        Ok(CheckedScenario { cc, scenario: self })
    }
}

/// A scenario that has passed validation, plus its checked numerology.
#[derive(Debug, Clone)]
pub struct CheckedScenario {
    scenario: Scenario,
    cc: CheckedConfig,
}

impl std::ops::Deref for CheckedScenario {
    type Target = Scenario;
    fn deref(&self) -> &Scenario {
        &self.scenario
    }
}

impl CheckedScenario {
    pub fn cc(&self) -> &CheckedConfig {
        &self.cc
    }

    pub fn band_plan(&self) -> BandPlan {
        match self.scenario.band {
            BandSpec::WusOnly => BandPlan::wus_only(&self.cc),
            BandSpec::Centered { n_active } => BandPlan::centered(&self.cc, n_active)
                .expect("band plan validated with the scenario"),
        }
    }

    pub fn receiver_chain(&self) -> ReceiverChain {
        ReceiverChain::new(&self.scenario.receiver, &self.cc)
            .expect("receiver validated with the scenario")
    }

    /// Short stable identifier of the full parameterization.
    pub fn fingerprint(&self) -> String {
        let canonical =
            serde_json::to_string(&self.scenario).expect("scenario serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        hex[..16].to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_json() -> String {
        r#"{
            "config": {
                "n_fft": 512, "n_cp": 36, "f_sc": 30000.0,
                "n_sc": 132, "n_gb": 6, "n_symb": 132, "n_bit": 4,
                "manchester": true, "l_shift": 0, "phi": 0.0, "p_s": 1.0
            }
        }"#
        .to_string()
    }

    #[test]
    fn minimal_scenario_fills_defaults_and_validates() {
        let sc = Scenario::from_json(&base_json()).unwrap();
        assert_eq!(sc.band, BandSpec::WusOnly);
        assert_eq!(sc.channel, ChannelSpec::Awgn);
        assert_eq!(sc.trials, 1000);
        assert_eq!(sc.symbols_per_trial, 1);
        let checked = sc.validate().unwrap();
        assert_eq!(checked.cc().n_seg(), 33);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = base_json().replace("\"config\"", "\"typo_field\": 1, \"config\"");
        assert!(Scenario::from_json(&text).is_err());
    }

    #[test]
    fn full_scenario_round_trips_through_json() {
        let mut sc = Scenario::from_json(&base_json()).unwrap();
        sc.band = BandSpec::Centered { n_active: 288 };
        sc.channel = ChannelSpec::Tdlc { delay_scaling: 300e-9 };
        sc.spreading = SpreadingSpec::zc(1, 0).with_guards(2, 3);
        sc.snr_db = vec![-2.0, 0.0, 2.0];
        let text = serde_json::to_string_pretty(&sc).unwrap();
        let back = Scenario::from_json(&text).unwrap();
        assert_eq!(back, sc);
        back.validate().unwrap();
    }

    #[test]
    fn fingerprints_are_stable_and_sensitive() {
        let a = Scenario::from_json(&base_json()).unwrap().validate().unwrap();
        let b = Scenario::from_json(&base_json()).unwrap().validate().unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint().len(), 16);
        let mut other = Scenario::from_json(&base_json()).unwrap();
        other.seed = 99;
        let other = other.validate().unwrap();
        assert_ne!(a.fingerprint(), other.fingerprint());
    }

    #[test]
    fn bad_pieces_are_rejected_with_context() {
        // Broken numerology.
        let mut sc = Scenario::from_json(&base_json()).unwrap();
        sc.config.n_symb = 130;
        assert!(matches!(sc.validate(), Err(ScenarioError::Config(_))));

        // Downsampling misaligned with the CP.
        let mut sc = Scenario::from_json(&base_json()).unwrap();
        sc.receiver.downsample = 8; // 36 % 8 != 0
        assert!(matches!(sc.validate(), Err(ScenarioError::Receiver(_))));

        // Negative channel scaling.
        let mut sc = Scenario::from_json(&base_json()).unwrap();
        sc.channel = ChannelSpec::Tdlc { delay_scaling: -1.0 };
        assert!(matches!(sc.validate(), Err(ScenarioError::Invalid(_))));

        // Guards eating the whole sequence.
        let mut sc = Scenario::from_json(&base_json()).unwrap();
        sc.spreading = SpreadingSpec::zc(1, 0).with_guards(20, 20);
        assert!(matches!(sc.validate(), Err(ScenarioError::Config(_))));

        // Zero-trial runs make no sense.
        let mut sc = Scenario::from_json(&base_json()).unwrap();
        sc.trials = 0;
        assert!(matches!(sc.validate(), Err(ScenarioError::Invalid(_))));
    }

    #[test]
    fn oversized_active_band_is_rejected() {
        let mut sc = Scenario::from_json(&base_json()).unwrap();
        sc.band = BandSpec::Centered { n_active: 1024 };
        assert!(matches!(sc.validate(), Err(ScenarioError::Band(_))));
    }
}
