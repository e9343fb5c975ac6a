//! Scenario builders shared by the integration suites: the evaluation
//! link numerology (512-FFT, 30 kHz, TDL-C) in all its waveform variants.

use ooksim_core::channel::ChannelSpec;
use ooksim_core::config::{FdssKind, FdssSpec, SpreadKind, SpreadingSpec, WaveformConfig};
use ooksim_core::receiver::ReceiverConfig;
use ooksim_core::scenario::{BandSpec, Scenario};
use ooksim_core::spreading::flatten_phase;

/// Waveform variants of the evaluation scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Variant {
    /// All-one overlay, no phase ramp, no shaping.
    Plain,
    /// All-one overlay with the flattening ramp.
    Rect,
    /// Flattening ramp plus Kaiser shaping.
    RectKaiser { beta: f64 },
    /// Least-squares window via the equivalent-generation path.
    Ls,
    /// Frequency repetition from a shorter precoder, flattened and
    /// half-pulse time shifted.
    Rep { n_symb: usize },
    /// Zadoff-Chu overlay over the full allocation.
    Zc { root: u64 },
}

pub fn eval_config(n_symb: usize, phi: f64) -> WaveformConfig {
    WaveformConfig {
        n_fft: 512,
        n_cp: 36,
        f_sc: 30e3,
        f0: None,
        n_sc: 132,
        n_gb: 6,
        n_symb,
        n_bit: 4,
        manchester: true,
        l_shift: 0,
        phi,
        p_s: 1.0,
        alternate_phi_sign: false,
    }
}

/// One evaluation-link scenario over TDL-C fading.
pub fn eval_scenario(variant: Variant) -> Scenario {
    let (config, fdss, spreading) = match variant {
        Variant::Plain => (eval_config(132, 0.0), FdssSpec::none(), SpreadingSpec::all_one()),
        Variant::Rect => (
            eval_config(132, flatten_phase(132, 132, 0)),
            FdssSpec::none(),
            SpreadingSpec::all_one(),
        ),
        Variant::RectKaiser { beta } => (
            eval_config(132, flatten_phase(132, 132, 0)),
            FdssSpec { kind: FdssKind::Kaiser { beta }, t_shift: None },
            SpreadingSpec::all_one(),
        ),
        Variant::Ls => (
            eval_config(132, 0.0),
            FdssSpec { kind: FdssKind::LsEquivalent, t_shift: None },
            SpreadingSpec::all_one(),
        ),
        Variant::Rep { n_symb } => (
            eval_config(n_symb, flatten_phase(n_symb, n_symb, 0)),
            // Half-pulse shift centers each pulse away from the wrap seam.
            FdssSpec { kind: FdssKind::None, t_shift: Some(512.0 / (2.0 * n_symb as f64)) },
            SpreadingSpec::all_one(),
        ),
        Variant::Zc { root } => (
            eval_config(132, 0.0),
            FdssSpec::none(),
            SpreadingSpec { kind: SpreadKind::Zc { root, shift: 0 }, n_lgp: 0, n_rgp: 0 },
        ),
    };
    Scenario {
        config,
        fdss,
        spreading,
        band: BandSpec::Centered { n_active: 288 },
        channel: ChannelSpec::Tdlc { delay_scaling: 3e-7 },
        receiver: ReceiverConfig::default(),
        symbols_per_trial: 1,
        snr_db: Vec::new(),
        trials: 1000,
        seed: 1,
    }
}

/// Timing-error variant: ZC overlay with a uniform offset budget, with or
/// without guard-pulse concentration.
pub fn timing_scenario(tau_err: f64, guards: Option<(usize, usize)>) -> Scenario {
    let mut sc = eval_scenario(Variant::Zc { root: 1 });
    sc.receiver.tau_err = tau_err;
    if let Some((n_lgp, n_rgp)) = guards {
        sc.spreading.n_lgp = n_lgp;
        sc.spreading.n_rgp = n_rgp;
    }
    sc
}
