//! Peak alignment, cropping and z-score normalization.
//!
//! Raw 64-sample waveforms are aligned on their maximum-|amplitude| sample,
//! cropped to a 48-sample window with the peak anchored at window index 16
//! (extracellular spikes carry most morphology after the peak, so the anchor
//! sits a third of the way in), and normalized to zero mean and unit
//! population standard deviation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spikegen::{LabelledDataset, RawSpike, Split};
use crate::WINDOW_LEN;

/// Window index the detected peak is anchored to.
pub const PEAK_ANCHOR: usize = 16;

/// A normalized 48-sample network input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignedSpike {
    /// 48 z-scored samples; the max-|value| sample sits at index 16.
    pub samples: Vec<f64>,
    pub label: Option<usize>,
    /// Peak index in the waveform this spike was cut from.
    pub peak_index_in_source: usize,
    /// Pre-normalization window mean.
    pub mu: f64,
    /// Pre-normalization window population std.
    pub sigma: f64,
}

impl AlignedSpike {
    /// Wrap already-normalized samples, e.g. rows loaded from disk. The row
    /// is treated as its own source: anchor 16, mu 0, sigma 1.
    pub fn from_stored(samples: Vec<f64>, label: Option<usize>) -> Result<Self> {
        if samples.len() != WINDOW_LEN {
            return Err(Error::Format(format!(
                "aligned spike must have {WINDOW_LEN} samples, got {}",
                samples.len()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite sample in stored spike".into()));
        }
        Ok(AlignedSpike {
            samples,
            label,
            peak_index_in_source: PEAK_ANCHOR,
            mu: 0.0,
            sigma: 1.0,
        })
    }
}

/// Index of the maximum-|value| sample; smallest index wins ties.
pub fn detect_peak(x: &[f64]) -> Result<usize> {
    if x.is_empty() {
        return Err(Error::DegenerateInput("empty waveform".into()));
    }
    let mut best = 0usize;
    let mut best_abs = 0.0f64;
    for (i, &v) in x.iter().enumerate() {
        if v.abs() > best_abs {
            best_abs = v.abs();
            best = i;
        }
    }
    if best_abs == 0.0 {
        return Err(Error::DegenerateInput("all-zero waveform".into()));
    }
    Ok(best)
}

/// Cut the 48-sample window that places `peak` at index 16. Samples outside
/// the source are filled by edge replication.
pub fn align_and_crop(x: &[f64], peak: usize) -> Vec<f64> {
    let n = x.len() as i64;
    let start = peak as i64 - PEAK_ANCHOR as i64;
    (0..WINDOW_LEN as i64)
        .map(|i| x[(start + i).clamp(0, n - 1) as usize])
        .collect()
}

/// Z-scored window plus the statistics it was normalized with.
#[derive(Clone, Debug, PartialEq)]
pub struct ZScored {
    pub samples: Vec<f64>,
    pub mu: f64,
    pub sigma: f64,
}

/// Normalize to zero mean / unit population std over all window samples.
pub fn zscore(window: &[f64]) -> Result<ZScored> {
    let n = window.len() as f64;
    let mu = window.iter().sum::<f64>() / n;
    let var = window.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n;
    let sigma = var.sqrt();
    if sigma <= 1e-12 {
        return Err(Error::FlatWaveform(sigma));
    }
    Ok(ZScored {
        samples: window.iter().map(|v| (v - mu) / sigma).collect(),
        mu,
        sigma,
    })
}

/// Full pipeline: detect peak, align, crop, normalize.
pub fn preprocess_waveform(x: &[f64], label: Option<usize>) -> Result<AlignedSpike> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite sample in waveform".into()));
    }
    let peak = detect_peak(x)?;
    let window = align_and_crop(x, peak);
    let z = zscore(&window)?;
    Ok(AlignedSpike {
        samples: z.samples,
        label,
        peak_index_in_source: peak,
        mu: z.mu,
        sigma: z.sigma,
    })
}

/// A dataset of aligned spikes, parallel to [`LabelledDataset`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreprocessedDataset {
    pub id: String,
    pub class_names: Vec<String>,
    pub spikes: Vec<AlignedSpike>,
    pub splits: Vec<Split>,
}

impl PreprocessedDataset {
    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn indices_of(&self, split: Split) -> Vec<usize> {
        (0..self.spikes.len())
            .filter(|&i| self.splits[i] == split)
            .collect()
    }
}

/// Preprocess every spike of a raw dataset, keeping labels and split tags.
pub fn preprocess_dataset(ds: &LabelledDataset) -> Result<PreprocessedDataset> {
    let mut spikes = Vec::with_capacity(ds.spikes.len());
    let mut splits = Vec::with_capacity(ds.spikes.len());
    for RawSpike {
        waveform,
        label,
        split,
    } in &ds.spikes
    {
        spikes.push(preprocess_waveform(waveform, Some(*label))?);
        splits.push(*split);
    }
    Ok(PreprocessedDataset {
        id: ds.id.clone(),
        class_names: ds.class_names.clone(),
        spikes,
        splits,
    })
}
