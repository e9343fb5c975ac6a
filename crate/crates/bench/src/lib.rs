//! Shared fixtures for the criterion benches: the evaluation-grade
//! link scenario (512-FFT, 30 kHz spacing, TDL-C fading, ZC spreading)
//! that the benches exercise end to end.

use ooksim_core::scenario::CheckedScenario;
use ooksim_core::Scenario;

/// Full-size link scenario matching the BER evaluation numerology.
pub fn evaluation_scenario() -> CheckedScenario {
    let text = r#"{
        "config": {
            "n_fft": 512, "n_cp": 36, "f_sc": 30000.0,
            "n_sc": 132, "n_gb": 6, "n_symb": 132, "n_bit": 4,
            "manchester": true, "l_shift": 0, "phi": 0.0, "p_s": 1.0
        },
        "spreading": { "kind": { "zc": { "root": 1, "shift": 0 } } },
        "band": { "centered": { "n_active": 288 } },
        "channel": { "tdlc": { "delay_scaling": 3e-7 } },
        "seed": 1
    }"#;
    Scenario::from_json(text)
        .expect("fixture parses")
        .validate()
        .expect("fixture validates")
}
