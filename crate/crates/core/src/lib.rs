//! Spike-waveform compression and classification pipeline.
//!
//! The crate implements the full processing chain for single-channel
//! extracellular spike data:
//!
//! * [`spikegen`] — synthetic spike datasets with controllable inter-class
//!   similarity and noise, plus the 16-entry combination schedule used by the
//!   dynamic test.
//! * [`preprocess`] — peak alignment, 48-sample cropping and per-waveform
//!   z-score normalization.
//! * [`sampler`] — adaptive level-crossing compression: slope/curvature-driven
//!   resolution selection, exact-8 point retention and piecewise-linear
//!   reconstruction.
//! * [`network`] — a from-scratch multi-task fully connected network (shared
//!   encoder, compression-index head, classification head) trained jointly
//!   with Adam, batch norm and dropout.
//! * [`meta`] — few-shot calibration: freeze the shallow encoder layer and
//!   fine-tune the deep parameters on an N-way k-shot support set.
//! * [`eval`] — the compression-fidelity study and the 16-combination
//!   static-vs-adaptive dynamic test, with machine-readable reports.
//! * [`io`] — on-disk formats: dataset directories, model checkpoints and the
//!   CSV/JSON report files.
//!
//! All randomness is driven by explicit 64-bit seeds ([`seeds`]); identical
//! seeds produce bit-identical datasets, training trajectories and reports.

pub mod error;
pub mod eval;
pub mod io;
pub mod meta;
pub mod network;
pub mod preprocess;
pub mod sampler;
pub mod seeds;
pub mod spikegen;

pub use error::{Error, Result};

/// Samples per raw generated waveform.
pub const RAW_LEN: usize = 64;
/// Samples per aligned network-input window.
pub const WINDOW_LEN: usize = 48;
/// Retained points per compressed spike; 48 / 8 gives the 6:1 ratio.
pub const RETAINED_POINTS: usize = 8;
