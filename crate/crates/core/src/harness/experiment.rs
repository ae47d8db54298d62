//! Seeded Monte Carlo runner: one channel per realization, every selected
//! method on it, results normalized to the exhaustive-search rate.

use rayon::prelude::*;

use super::config::ExperimentConfig;
use crate::channel::{generate_channel, strip_los};
use crate::effective::{discretize_link, beamformed_link, Beam};
use crate::error::Result;
use crate::training::{Method, TrainingContext, TrainingResult};

/// The `index`-th output of a SplitMix64 stream seeded with `master`.
/// Realization `r` always receives the same seed regardless of how many
/// realizations are run.
pub fn child_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealizationRecord {
    pub realization_id: usize,
    pub method: Method,
    /// 0 for methods without a K.
    pub k: usize,
    pub rate_bits_s_hz: f64,
    /// `None` when exhaustive search was not part of the run.
    pub rate_rel_to_es: Option<f64>,
    pub n_siso_iter: usize,
    pub n_mimo_iter: usize,
    /// `(i₁, i₂, j₁, j₂)`, 0-based.
    pub selection: [usize; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: Method,
    pub k: usize,
    pub n: usize,
    pub mean_rate: f64,
    pub mean_rel_rate: Option<f64>,
    pub median_rel_rate: Option<f64>,
    pub mean_n_siso_iter: f64,
    pub mean_n_mimo_iter: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub records: Vec<RealizationRecord>,
    pub summary: Vec<SummaryRow>,
    /// Per realization, share of omni direct-link energy falling past the
    /// last tap.
    pub dropped_energy_fraction: Vec<f64>,
}

struct Realization {
    records: Vec<RealizationRecord>,
    dropped_fraction: f64,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let codebook = cfg.build_codebook()?;
    let pattern = cfg.pattern()?;
    let sampling = cfg.sampling()?;
    let rate_cfg = cfg.rate_config()?;
    let ks = cfg.sorted_k_values();

    let realizations = (0..cfg.n_realizations)
        .into_par_iter()
        .map(|r| -> Result<Realization> {
            let seed = child_seed(cfg.seed, r as u64);
            let mut channel = generate_channel(&cfg.channel_params, seed)?;
            if cfg.nlos {
                channel = strip_los(&channel)?;
            }

            let mut total = 0.0;
            let mut dropped = 0.0;
            for paa in 0..2 {
                let rays = beamformed_link(&channel, paa, paa, &Beam::QuasiOmni, &Beam::QuasiOmni);
                total += rays.iter().map(|w| w.amplitude.norm_sqr()).sum::<f64>();
                dropped += discretize_link(&rays, sampling).dropped_energy;
            }

            let ctx = TrainingContext::new(&channel, &codebook, pattern, sampling, rate_cfg)?;
            let mut results: Vec<TrainingResult> = Vec::new();
            if cfg.runs(Method::Es) {
                results.push(ctx.exhaustive_search());
            }
            if cfg.runs(Method::Sls) {
                results.push(ctx.siso_sls()?);
            }
            if cfg.runs(Method::Kbest) {
                results.extend(ctx.k_best_sweep(&ks)?);
            }

            let es_rate = results.iter().find(|t| t.method == Method::Es).map(|t| t.rate);
            let records = results
                .iter()
                .map(|t| RealizationRecord {
                    realization_id: r,
                    method: t.method,
                    k: t.k.unwrap_or(0),
                    rate_bits_s_hz: t.rate,
                    rate_rel_to_es: es_rate.map(|es| if es > 0.0 { t.rate / es } else { 1.0 }),
                    n_siso_iter: t.n_siso_iter,
                    n_mimo_iter: t.n_mimo_iter,
                    selection: t.selection.indices(),
                })
                .collect();
            Ok(Realization { records, dropped_fraction: dropped / total })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut records = Vec::new();
    let mut dropped_energy_fraction = Vec::with_capacity(realizations.len());
    for r in realizations {
        records.extend(r.records);
        dropped_energy_fraction.push(r.dropped_fraction);
    }
    records.sort_by_key(|r| (r.realization_id, r.method, r.k));
    let summary = summarize(&records);
    Ok(ExperimentOutput { records, summary, dropped_energy_fraction })
}

/// Per-(method, K) means and medians over realizations.
pub fn summarize(records: &[RealizationRecord]) -> Vec<SummaryRow> {
    let mut keys: Vec<(Method, usize)> = records.iter().map(|r| (r.method, r.k)).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|(method, k)| {
            let rows: Vec<&RealizationRecord> =
                records.iter().filter(|r| r.method == method && r.k == k).collect();
            let n = rows.len();
            let mean = |f: &dyn Fn(&RealizationRecord) -> f64| rows.iter().map(|r| f(r)).sum::<f64>() / n as f64;
            let rel: Option<Vec<f64>> = rows.iter().map(|r| r.rate_rel_to_es).collect();
            SummaryRow {
                method,
                k,
                n,
                mean_rate: mean(&|r| r.rate_bits_s_hz),
                mean_rel_rate: rel.as_ref().map(|v| v.iter().sum::<f64>() / n as f64),
                median_rel_rate: rel.map(median),
                mean_n_siso_iter: mean(&|r| r.n_siso_iter as f64),
                mean_n_mimo_iter: mean(&|r| r.n_mimo_iter as f64),
            }
        })
        .collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}
