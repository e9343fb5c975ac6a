//! Waveform synthesis and link-level simulation for OFDM-based on-off keying.
//!
//! The transmitter builds an OOK wake-up signal inside a CP-OFDM grid by
//! spreading Manchester-coded bits with an overlaid sequence, DFT-precoding
//! the result, and mapping the output onto the allocated subcarriers with an
//! optional spectral-shaping window. The same frame can be produced three
//! ways, and the crate keeps all of them:
//!
//! * the main path (spread, precode, frequency-domain post-processing),
//! * a fast path that evaluates the precoder output analytically from the
//!   bit DFT and the overlaid-sequence spectrum ([`fastpath`]),
//! * a least-squares construction that upsamples the bits directly on the
//!   full FFT grid ([`ls`]).
//!
//! On top of the generator sit an OFDM link ([`ofdm`]), a tapped-delay-line
//! fading channel ([`channel`]), an envelope-detection receiver
//! ([`receiver`]), and a deterministic Monte Carlo harness ([`harness`]).

pub mod bits;
pub mod channel;
pub mod config;
pub mod export;
pub mod fastpath;
pub mod fourier;
pub mod harness;
pub mod ls;
pub mod metrics;
pub mod ofdm;
pub mod precoder;
pub mod receiver;
pub mod rng;
pub mod scenario;
pub mod selftest;
pub mod spreading;

pub use bits::{BitDftTable, BitSpectrum, CodedBits, InfoBits};
pub use config::{CheckedConfig, ConfigError, FdssKind, FdssSpec, SpreadKind, SpreadingSpec, WaveformConfig};
pub use num_complex::Complex64;
pub use precoder::WusSymbol;
pub use scenario::Scenario;
