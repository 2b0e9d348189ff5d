//! Few-shot calibration (in progress).
