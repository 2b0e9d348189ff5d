//! Adaptive level-crossing compression.
//!
//! Each aligned spike is reduced to exactly 8 of its 48 samples (6:1).
//! Slope and curvature profiles drive a per-sample resolution tier; the tier
//! sets the vertical step ΔV used by a reference-crossing scan; the scan's
//! candidates are cut (by curvature salience) or padded (by index-gap
//! midpoints) to exactly 8 points; reconstruction is piecewise-linear with
//! held ends.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{RETAINED_POINTS, WINDOW_LEN};

/// Sampling-resolution thresholds and step sizes.
///
/// The dense-curvature threshold is 0.7; the medium-curvature and slope
/// thresholds plus the ΔV map are tunable with these defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// |curvature| above this selects dense resolution (RES=3).
    pub curvature_dense: f64,
    /// |curvature| above this (when not dense) selects medium (RES=2).
    pub curvature_medium: f64,
    /// |slope| above this (in low-curvature terrain) selects low (RES=1).
    pub slope_low: f64,
    /// Vertical step ΔV per resolution tier, indexed by `Resolution as usize`
    /// (very-low, low, medium, dense), in normalized amplitude units.
    pub delta_v: [f64; 4],
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            curvature_dense: 0.7,
            curvature_medium: 0.35,
            slope_low: 0.5,
            delta_v: [1.00, 0.50, 0.25, 0.10],
        }
    }
}

/// Per-sample sampling density tier.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Resolution {
    VeryLow = 0,
    Low = 1,
    Medium = 2,
    Dense = 3,
}

/// Slope and curvature per sample.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometryProfile {
    /// dy/dx per sample (unit sample spacing); one-sided at the endpoints.
    pub slope: Vec<f64>,
    /// k = y'' / (1 + y'^2)^(3/2) per sample.
    pub curvature: Vec<f64>,
}

/// Resolution tier per sample plus the ΔV map in force.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolutionProfile {
    pub res: Vec<Resolution>,
    pub delta_v: [f64; 4],
}

impl ResolutionProfile {
    pub fn delta_v_at(&self, i: usize) -> f64 {
        self.delta_v[self.res[i] as usize]
    }
}

/// Eight retained (index, value) pairs of one 48-sample spike.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompressedSpike {
    /// Strictly increasing indices into the source window.
    pub indices: [usize; RETAINED_POINTS],
    /// Source samples at those indices.
    pub values: [f64; RETAINED_POINTS],
    pub source_len: usize,
}

impl CompressedSpike {
    pub fn compression_ratio(&self) -> f64 {
        self.source_len as f64 / RETAINED_POINTS as f64
    }
}

/// Slope via central differences (one-sided at the ends), curvature via the
/// second central difference and k = y'' / (1 + y'^2)^(3/2).
pub fn compute_geometry(samples: &[f64]) -> GeometryProfile {
    let n = samples.len();
    assert!(n >= 3, "geometry needs at least 3 samples");
    let mut slope = vec![0.0; n];
    let mut curvature = vec![0.0; n];
    for i in 0..n {
        slope[i] = if i == 0 {
            samples[1] - samples[0]
        } else if i == n - 1 {
            samples[n - 1] - samples[n - 2]
        } else {
            (samples[i + 1] - samples[i - 1]) / 2.0
        };
        // Second difference, shifted inward one sample at the endpoints.
        let c = i.clamp(1, n - 2);
        let second = samples[c + 1] - 2.0 * samples[c] + samples[c - 1];
        curvature[i] = second / (1.0 + slope[i] * slope[i]).powf(1.5);
    }
    GeometryProfile { slope, curvature }
}

/// Cascading tier decision: curvature first, then the slope fallback.
pub fn resolution_profile(g: &GeometryProfile, cfg: &SamplerConfig) -> ResolutionProfile {
    let res = g
        .curvature
        .iter()
        .zip(&g.slope)
        .map(|(&k, &s)| {
            if k.abs() > cfg.curvature_dense {
                Resolution::Dense
            } else if k.abs() > cfg.curvature_medium {
                Resolution::Medium
            } else if s.abs() > cfg.slope_low {
                Resolution::Low
            } else {
                Resolution::VeryLow
            }
        })
        .collect();
    ResolutionProfile {
        res,
        delta_v: cfg.delta_v,
    }
}

/// Reference-crossing scan: index 0 is always emitted; index i is emitted
/// when the amplitude has moved at least ΔV(res\[i\]) away from the last
/// emitted sample, which then becomes the new reference.
pub fn level_cross_select(samples: &[f64], profile: &ResolutionProfile) -> Vec<usize> {
    assert_eq!(samples.len(), profile.res.len());
    if samples.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0usize];
    let mut reference = samples[0];
    for (i, &v) in samples.iter().enumerate().skip(1) {
        if (v - reference).abs() >= profile.delta_v_at(i) {
            out.push(i);
            reference = v;
        }
    }
    out
}

/// Salience order: larger |curvature| first, ties by larger |slope|, then by
/// smaller index.
fn salience_rank(i: usize, g: &GeometryProfile) -> (f64, f64, std::cmp::Reverse<usize>) {
    (g.curvature[i].abs(), g.slope[i].abs(), std::cmp::Reverse(i))
}

/// Force the candidate list to exactly 8 sorted, distinct indices.
///
/// Overfull lists keep the 8 most salient candidates; short lists are padded
/// by repeatedly inserting the midpoint of the widest index gap (the spans
/// before the first and after the last selected point count as gaps too).
pub fn select_top8(
    candidates: &[usize],
    samples: &[f64],
    g: &GeometryProfile,
) -> CompressedSpike {
    let n = samples.len();
    assert!(n >= RETAINED_POINTS);
    let mut selected: Vec<usize> = {
        let mut dedup: Vec<usize> = candidates.to_vec();
        dedup.sort_unstable();
        dedup.dedup();
        dedup
    };

    if selected.len() > RETAINED_POINTS {
        selected.sort_by(|&a, &b| {
            salience_rank(b, g)
                .partial_cmp(&salience_rank(a, g))
                .unwrap()
        });
        selected.truncate(RETAINED_POINTS);
        selected.sort_unstable();
    } else if selected.len() < RETAINED_POINTS {
        if selected.is_empty() {
            selected.push(0);
        }
        while selected.len() < RETAINED_POINTS {
            // Widest gap wins; earliest gap on ties. Gap endpoints are the
            // selected indices themselves plus the window edges 0 and n-1.
            let mut best_gap = 0usize;
            let mut best_pair = (0usize, 0usize);
            let first = selected[0];
            if first > 0 && first > best_gap {
                best_gap = first;
                best_pair = (0, first);
            }
            for w in selected.windows(2) {
                let gap = w[1] - w[0];
                if gap > best_gap {
                    best_gap = gap;
                    best_pair = (w[0], w[1]);
                }
            }
            let last = *selected.last().unwrap();
            if (n - 1) - last > best_gap {
                best_gap = (n - 1) - last;
                best_pair = (last, n - 1);
            }
            debug_assert!(best_gap >= 2, "no insertable gap left");
            let mid = (best_pair.0 + best_pair.1) / 2;
            let pos = selected.binary_search(&mid).unwrap_err();
            selected.insert(pos, mid);
        }
    }

    let mut indices = [0usize; RETAINED_POINTS];
    let mut values = [0.0f64; RETAINED_POINTS];
    for (j, &i) in selected.iter().enumerate() {
        indices[j] = i;
        values[j] = samples[i];
    }
    CompressedSpike {
        indices,
        values,
        source_len: n,
    }
}

/// Piecewise-linear reconstruction; the value is held flat before the first
/// and after the last retained point.
pub fn reconstruct(c: &CompressedSpike) -> Vec<f64> {
    let mut out = vec![0.0; c.source_len];
    for t in 0..c.indices[0] {
        out[t] = c.values[0];
    }
    for j in 0..RETAINED_POINTS - 1 {
        let (a, b) = (c.indices[j], c.indices[j + 1]);
        let (va, vb) = (c.values[j], c.values[j + 1]);
        out[a] = va;
        let span = (b - a) as f64;
        for t in (a + 1)..b {
            let w = (t - a) as f64 / span;
            out[t] = va + (vb - va) * w;
        }
    }
    let last = c.indices[RETAINED_POINTS - 1];
    for t in last..c.source_len {
        out[t] = c.values[RETAINED_POINTS - 1];
    }
    out
}

/// Root-mean-square error over all samples.
pub fn rmse(original: &[f64], reconstructed: &[f64]) -> Result<f64> {
    if original.len() != reconstructed.len() {
        return Err(Error::invalid(format!(
            "rmse length mismatch: {} vs {}",
            original.len(),
            reconstructed.len()
        )));
    }
    if original.is_empty() {
        return Err(Error::invalid("rmse of empty waveforms"));
    }
    let sq: f64 = original
        .iter()
        .zip(reconstructed)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok((sq / original.len() as f64).sqrt())
}

/// Full compression pipeline for one aligned spike.
pub fn compress(samples: &[f64], cfg: &SamplerConfig) -> CompressedSpike {
    let g = compute_geometry(samples);
    let profile = resolution_profile(&g, cfg);
    let candidates = level_cross_select(samples, &profile);
    select_top8(&candidates, samples, &g)
}

/// Every-6th-sample baseline retaining the same number of points.
pub const UNIFORM_INDICES: [usize; RETAINED_POINTS] = [0, 6, 12, 18, 24, 30, 36, 42];

/// Uniform-downsampling baseline at the same 6:1 ratio.
pub fn compress_uniform(samples: &[f64]) -> CompressedSpike {
    assert_eq!(samples.len(), WINDOW_LEN);
    let mut values = [0.0; RETAINED_POINTS];
    for (j, &i) in UNIFORM_INDICES.iter().enumerate() {
        values[j] = samples[i];
    }
    CompressedSpike {
        indices: UNIFORM_INDICES,
        values,
        source_len: WINDOW_LEN,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn uniform_profile(res: Resolution, n: usize) -> ResolutionProfile {
        ResolutionProfile {
            res: vec![res; n],
            delta_v: SamplerConfig::default().delta_v,
        }
    }

    #[test]
    fn geometry_of_constant_is_zero() {
        let g = compute_geometry(&vec![2.0; WINDOW_LEN]);
        assert!(g.slope.iter().all(|&s| s == 0.0));
        assert!(g.curvature.iter().all(|&k| k == 0.0));
    }

    #[test]
    fn geometry_of_linear_ramp() {
        let w: Vec<f64> = (0..WINDOW_LEN).map(|i| i as f64).collect();
        let g = compute_geometry(&w);
        for i in 1..WINDOW_LEN - 1 {
            assert!((g.slope[i] - 1.0).abs() < 1e-12);
            assert!(g.curvature[i].abs() < 1e-9);
        }
    }

    #[test]
    fn geometry_of_half_square() {
        // w_i = i^2 / 2: interior y' = i, y'' = 1, k = 1 / (1 + i^2)^(3/2).
        let w: Vec<f64> = (0..WINDOW_LEN).map(|i| (i * i) as f64 / 2.0).collect();
        let g = compute_geometry(&w);
        assert!((g.curvature[1] - 1.0 / 2.0f64.powf(1.5)).abs() < 1e-12);
        assert!((g.curvature[2] - 1.0 / 5.0f64.powf(1.5)).abs() < 1e-12);
        for i in 1..WINDOW_LEN - 1 {
            assert!((g.slope[i] - i as f64).abs() < 1e-12);
            let expected = 1.0 / (1.0 + (i * i) as f64).powf(1.5);
            assert!((g.curvature[i] - expected).abs() < 1e-9, "i = {i}");
        }
    }

    #[test]
    fn resolution_cascade_rules() {
        let cfg = SamplerConfig::default();
        let g = GeometryProfile {
            slope: vec![0.1, 0.9, 0.1, 0.2],
            curvature: vec![0.8, 0.1, 0.1, 0.4],
        };
        let r = resolution_profile(&g, &cfg);
        assert_eq!(r.res[0], Resolution::Dense); // k = 0.8 > 0.7
        assert_eq!(r.res[1], Resolution::Low); // k small, |S| = 0.9 > 0.5
        assert_eq!(r.res[2], Resolution::VeryLow); // both small
        assert_eq!(r.res[3], Resolution::Medium); // 0.35 < k <= 0.7
    }

    #[test]
    fn threshold_is_strict() {
        let cfg = SamplerConfig::default();
        let g = GeometryProfile {
            slope: vec![0.0],
            curvature: vec![0.7],
        };
        assert_eq!(resolution_profile(&g, &cfg).res[0], Resolution::Medium);
    }

    #[test]
    fn ramp_emissions_every_two_samples() {
        // Slope 0.5 against ΔV = 1.0 crosses every second sample.
        let w: Vec<f64> = (0..WINDOW_LEN).map(|i| 0.5 * i as f64).collect();
        let profile = uniform_profile(Resolution::VeryLow, WINDOW_LEN);
        let picked = level_cross_select(&w, &profile);
        let expected: Vec<usize> = (0..WINDOW_LEN).step_by(2).collect();
        assert_eq!(picked, expected);
    }

    #[test]
    fn index_zero_always_emitted() {
        let w: Vec<f64> = (0..WINDOW_LEN).map(|i| (i as f64 * 0.3).sin()).collect();
        let profile = uniform_profile(Resolution::Dense, WINDOW_LEN);
        assert_eq!(level_cross_select(&w, &profile)[0], 0);
    }

    #[test]
    fn denser_profile_never_emits_fewer() {
        let spike = test_spike(3);
        let dense = level_cross_select(&spike, &uniform_profile(Resolution::Dense, WINDOW_LEN));
        let sparse =
            level_cross_select(&spike, &uniform_profile(Resolution::VeryLow, WINDOW_LEN));
        assert!(dense.len() >= sparse.len());
    }

    fn test_spike(seed: u64) -> Vec<f64> {
        let cfg = crate::spikegen::GenConfig::new(1, 0.05, 1, seed);
        let ds = crate::spikegen::generate_dataset(&cfg).unwrap();
        crate::preprocess::preprocess_waveform(&ds.spikes[0].waveform, None)
            .unwrap()
            .samples
    }

    #[test]
    fn top8_keeps_exactly_eight_candidates() {
        let spike = test_spike(1);
        let g = compute_geometry(&spike);
        let candidates = [1, 5, 9, 14, 20, 27, 35, 44];
        let c = select_top8(&candidates, &spike, &g);
        assert_eq!(c.indices.to_vec(), candidates.to_vec());
    }

    #[test]
    fn top8_drops_lowest_curvature() {
        let spike = test_spike(2);
        let g = compute_geometry(&spike);
        let candidates: Vec<usize> = (0..48).step_by(4).collect(); // 12 candidates
        let c = select_top8(&candidates, &spike, &g);

        // Oracle: brute-force rank the candidate set by |curvature|.
        let mut ranked = candidates.clone();
        ranked.sort_by(|&a, &b| {
            g.curvature[b]
                .abs()
                .partial_cmp(&g.curvature[a].abs())
                .unwrap()
                .then(g.slope[b].abs().partial_cmp(&g.slope[a].abs()).unwrap())
                .then(a.cmp(&b))
        });
        let mut expected: Vec<usize> = ranked[..8].to_vec();
        expected.sort_unstable();
        assert_eq!(c.indices.to_vec(), expected);
        for (j, &i) in c.indices.iter().enumerate() {
            assert_eq!(c.values[j], spike[i]);
        }
    }

    #[test]
    fn gap_fill_inserts_widest_gap_midpoints() {
        let spike = test_spike(3);
        let g = compute_geometry(&spike);
        let c = select_top8(&[0, 10, 20, 30, 47], &spike, &g);
        // Hand-simulated fills: 38 (gap 30-47), then 5 (first 10-wide gap),
        // then 15 (next 10-wide gap).
        assert_eq!(c.indices, [0, 5, 10, 15, 20, 30, 38, 47]);
    }

    #[test]
    fn empty_and_full_candidate_lists_still_give_eight() {
        let spike = test_spike(4);
        let g = compute_geometry(&spike);
        for candidates in [Vec::new(), (0..48).collect::<Vec<_>>()] {
            let c = select_top8(&candidates, &spike, &g);
            assert_eq!(c.indices.len(), 8);
            for w in c.indices.windows(2) {
                assert!(w[0] < w[1], "indices must be strictly increasing");
            }
        }
    }

    #[test]
    fn reconstruct_flat_pair() {
        let c = CompressedSpike {
            indices: [0, 7, 14, 21, 28, 35, 42, 47],
            values: [2.0; 8],
            source_len: WINDOW_LEN,
        };
        assert!(reconstruct(&c).iter().all(|&v| v == 2.0));
    }

    #[test]
    fn reconstruct_linear_midpoint() {
        let c = CompressedSpike {
            indices: [0, 5, 10, 12, 20, 30, 40, 47],
            values: [0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0],
            source_len: WINDOW_LEN,
        };
        assert_eq!(reconstruct(&c)[11], 0.5);
    }

    #[test]
    fn reconstruct_matches_retained_points_bit_exactly() {
        let spike = test_spike(5);
        let c = compress(&spike, &SamplerConfig::default());
        let r = reconstruct(&c);
        for (j, &i) in c.indices.iter().enumerate() {
            assert_eq!(r[i], c.values[j]);
            assert_eq!(c.values[j], spike[i]);
        }
    }

    #[test]
    fn rmse_identity_and_offset() {
        let a = vec![1.0; WINDOW_LEN];
        assert_eq!(rmse(&a, &a).unwrap(), 0.0);
        let b = vec![1.1; WINDOW_LEN];
        assert!((rmse(&a, &b).unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn rmse_rejects_length_mismatch() {
        assert!(rmse(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn compression_ratio_is_six() {
        let spike = test_spike(6);
        let c = compress(&spike, &SamplerConfig::default());
        assert_eq!(c.compression_ratio(), 6.0);
    }

    /// Piecewise-linear triangle whose kinks the pipeline must retain; the
    /// reconstruction is then exact. Slopes of ±0.5 make every arithmetic
    /// step representable, so the error is exactly zero.
    #[test]
    fn pipeline_is_exact_on_retainable_triangle() {
        let mut w = vec![0.0f64; WINDOW_LEN];
        for i in 0..=8 {
            w[i] = 0.5 * i as f64;
        }
        for i in 8..=16 {
            w[i] = 4.0 - 0.5 * (i - 8) as f64;
        }
        let c = compress(&w, &SamplerConfig::default());
        assert!(c.indices.contains(&8), "apex kink retained: {:?}", c.indices);
        assert!(c.indices.contains(&16), "foot kink retained: {:?}", c.indices);
        let r = reconstruct(&c);
        assert_eq!(rmse(&w, &r).unwrap(), 0.0);
    }

    #[test]
    fn adaptive_beats_uniform_on_clean_spikes() {
        let cfg = SamplerConfig::default();
        let mut adaptive_sum = 0.0;
        let mut uniform_sum = 0.0;
        let mut count = 0usize;
        for comb in 1..=4u8 {
            let mut gen = crate::spikegen::GenConfig::new(comb, 0.0, 45, 7 + comb as u64);
            gen.artefact_rate = 0.0;
            let ds = crate::spikegen::generate_dataset(&gen).unwrap();
            for s in &ds.spikes {
                let aligned = crate::preprocess::preprocess_waveform(&s.waveform, None).unwrap();
                let a = compress(&aligned.samples, &cfg);
                adaptive_sum += rmse(&aligned.samples, &reconstruct(&a)).unwrap();
                let u = compress_uniform(&aligned.samples);
                uniform_sum += rmse(&aligned.samples, &reconstruct(&u)).unwrap();
                count += 1;
            }
        }
        assert!(count >= 500);
        assert!(
            adaptive_sum < uniform_sum,
            "adaptive mean {} vs uniform mean {}",
            adaptive_sum / count as f64,
            uniform_sum / count as f64
        );
    }

    proptest! {
        /// Exactly 8 strictly increasing indices for any candidate subset.
        #[test]
        fn top8_always_eight_distinct(subset in proptest::collection::vec(0usize..48, 0..48)) {
            let spike = test_spike(8);
            let g = compute_geometry(&spike);
            let c = select_top8(&subset, &spike, &g);
            prop_assert_eq!(c.indices.len(), 8);
            for w in c.indices.windows(2) {
                prop_assert!(w[0] < w[1]);
            }
            for (j, &i) in c.indices.iter().enumerate() {
                prop_assert!(i < 48);
                prop_assert_eq!(c.values[j], spike[i]);
            }
        }

        /// Scaling every ΔV down never reduces the candidate count.
        /// Exercised over the generator's spike shapes, where the scan is
        /// refinement-monotone.
        #[test]
        fn smaller_delta_v_never_fewer_candidates(
            seed in 0u64..200,
            comb in 1u8..=4,
            scale in 0.05f64..1.0,
        ) {
            let mut gen = crate::spikegen::GenConfig::new(comb, 0.05, 1, seed);
            gen.artefact_rate = 0.0;
            let ds = crate::spikegen::generate_dataset(&gen).unwrap();
            let spike = crate::preprocess::preprocess_waveform(&ds.spikes[0].waveform, None)
                .unwrap()
                .samples;
            let cfg = SamplerConfig::default();
            let g = compute_geometry(&spike);
            let coarse = resolution_profile(&g, &cfg);
            let mut fine = coarse.clone();
            for dv in fine.delta_v.iter_mut() {
                *dv *= scale;
            }
            let n_coarse = level_cross_select(&spike, &coarse).len();
            let n_fine = level_cross_select(&spike, &fine).len();
            prop_assert!(n_fine >= n_coarse, "fine {} < coarse {}", n_fine, n_coarse);
        }
    }
}
