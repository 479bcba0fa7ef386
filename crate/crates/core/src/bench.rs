//! Stage-level cost of the confidence stage, encoder excluded.
//!
//! Wall-clock times are measured locally. FLOP counts are analytic
//! estimates from the operation shapes, not hardware counters:
//!
//! | stage     | estimate per instance        |
//! |-----------|------------------------------|
//! | DFT       | `5 * pad * log2(pad) * D`    |
//! | Laplacian | `2 * T^2 * D + 9 * T^3`      |
//! | shape     | `T^2 * D`                    |
//! | local     | `4 * T * D`                  |
//! | trees     | `n_trees * max_depth` compares |
//!
//! Reported reference ratios from the original evaluation are kept in
//! [`REFERENCE_RELATIVE_COST`] for documentation only; nothing here measures
//! those baselines.

use std::fmt;
use std::time::Instant;

use crate::descriptors::{descriptor, GranularityConfig, DFT_PAD};
use crate::estimator::ConfidenceModel;
use crate::trajectory::{normalize_length, Trajectory, MAX_TOKENS};
use crate::{Error, Result};

/// `(method, relative FLOPs, relative latency)` with this pipeline (structure
/// plus semantic features) at 1.0. Documentation values, never measured.
pub const REFERENCE_RELATIVE_COST: [(&str, f64, f64); 3] = [
    ("structural confidence", 1.0, 1.0),
    ("RACE-style pipeline", 4.0, 3.0),
    ("SelfCheckGPT (NLI)", 6.0, 5.0),
];

/// `(relative FLOPs, runtime, memory)` of this pipeline against a
/// five-sample SelfCheckGPT-style baseline on FEVER. Documentation values.
pub const REFERENCE_VS_SAMPLING: (f64, f64, f64) = (0.03, 0.04, 0.07);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlopEstimate {
    pub dft: f64,
    pub laplacian: f64,
    pub shape: f64,
    pub local: f64,
    pub trees: f64,
}

impl FlopEstimate {
    pub fn descriptor_total(&self) -> f64 {
        self.dft + self.laplacian + self.shape + self.local
    }
}

pub fn flop_estimate(t: usize, d: usize, pad: usize, model: Option<&ConfidenceModel>) -> FlopEstimate {
    let (t, d, pad) = (t as f64, d as f64, pad as f64);
    FlopEstimate {
        dft: 5.0 * pad * pad.log2() * d,
        laplacian: 2.0 * t * t * d + 9.0 * t * t * t,
        shape: t * t * d,
        local: 4.0 * t * d,
        trees: model.map_or(0.0, |m| (m.trees.len() * m.max_depth()) as f64),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub repetitions: usize,
    pub instances: usize,
    /// Mean seconds per repetition for each stage.
    pub io_seconds: f64,
    pub descriptor_seconds: f64,
    pub inference_seconds: f64,
    pub total_seconds: f64,
    /// Descriptor plus inference latency per instance, in seconds.
    pub latency_mean: f64,
    pub latency_p95: f64,
    pub descriptor_mean: f64,
    pub max_tokens: usize,
    pub hidden_dim: usize,
    /// Analytic estimate for the longest instance.
    pub flops: FlopEstimate,
}

impl BenchReport {
    pub fn stage_sum(&self) -> f64 {
        self.io_seconds + self.descriptor_seconds + self.inference_seconds
    }
}

/// Runs `repetitions` measured passes after one warm-up pass. Each pass
/// loads the input with `load` (I/O stage), extracts descriptors for every
/// instance, and scores them with `model` when one is given.
pub fn run_bench<F>(
    mut load: F,
    model: Option<&ConfidenceModel>,
    granularity: &GranularityConfig,
    repetitions: usize,
) -> Result<BenchReport>
where
    F: FnMut() -> Result<Vec<Trajectory>>,
{
    if repetitions < 3 {
        return Err(Error::InvalidArgument(format!("{repetitions} repetitions, at least 3 required")));
    }
    granularity.validate()?;

    let mut io = 0.0;
    let mut desc = 0.0;
    let mut infer = 0.0;
    let mut total = 0.0;
    let mut latencies = Vec::new();
    let mut descriptor_only = Vec::new();
    let mut shape = (0, 0, 0);

    for rep in 0..=repetitions {
        let measured = rep > 0;
        let start = Instant::now();
        let records = load()?;
        let loaded = Instant::now();
        if records.is_empty() {
            return Err(Error::InvalidArgument("benchmark input has no records".into()));
        }
        let records = records
            .into_iter()
            .map(|r| normalize_length(r, MAX_TOKENS))
            .collect::<Result<Vec<_>>>()?;
        let normalized = Instant::now();

        let mut rep_desc = normalized - loaded;
        let mut rep_infer = std::time::Duration::ZERO;
        for record in &records {
            let t0 = Instant::now();
            let u = descriptor(record.matrix(), granularity)?.to_vec();
            let t1 = Instant::now();
            if let Some(model) = model {
                let features = match model.n_features {
                    n if n == u.len() => u,
                    n => {
                        return Err(Error::DimensionMismatch {
                            expected: n,
                            actual: u.len(),
                        })
                    }
                };
                std::hint::black_box(model.predict(&features)?);
            }
            let t2 = Instant::now();
            rep_desc += t1 - t0;
            rep_infer += t2 - t1;
            if measured {
                latencies.push((t2 - t0).as_secs_f64());
                descriptor_only.push((t1 - t0).as_secs_f64());
            }
        }
        let end = Instant::now();

        if measured {
            io += (loaded - start).as_secs_f64();
            desc += rep_desc.as_secs_f64();
            infer += rep_infer.as_secs_f64();
            total += (end - start).as_secs_f64();
        }
        shape = records.iter().fold(shape, |acc, r| {
            if r.len() > acc.0 {
                (r.len(), r.dim(), records.len())
            } else {
                (acc.0, r.dim(), records.len())
            }
        });
    }

    let reps = repetitions as f64;
    latencies.sort_by(f64::total_cmp);
    let p95_index = ((latencies.len() as f64 * 0.95).ceil() as usize).clamp(1, latencies.len()) - 1;
    let (max_tokens, hidden_dim, instances) = shape;
    Ok(BenchReport {
        repetitions,
        instances,
        io_seconds: io / reps,
        descriptor_seconds: desc / reps,
        inference_seconds: infer / reps,
        total_seconds: total / reps,
        latency_mean: latencies.iter().sum::<f64>() / latencies.len() as f64,
        latency_p95: latencies[p95_index],
        descriptor_mean: descriptor_only.iter().sum::<f64>() / descriptor_only.len() as f64,
        max_tokens,
        hidden_dim,
        flops: flop_estimate(max_tokens, hidden_dim, DFT_PAD, model),
    })
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ms = |s: f64| s * 1e3;
        writeln!(f, "repetitions = {}", self.repetitions)?;
        writeln!(f, "instances = {}", self.instances)?;
        writeln!(f, "max_tokens = {}", self.max_tokens)?;
        writeln!(f, "hidden_dim = {}", self.hidden_dim)?;
        writeln!(f, "io_ms = {:.4}", ms(self.io_seconds))?;
        writeln!(f, "descriptor_ms = {:.4}", ms(self.descriptor_seconds))?;
        writeln!(f, "inference_ms = {:.4}", ms(self.inference_seconds))?;
        writeln!(f, "total_ms = {:.4}", ms(self.total_seconds))?;
        writeln!(f, "latency_mean_ms = {:.4}", ms(self.latency_mean))?;
        writeln!(f, "latency_p95_ms = {:.4}", ms(self.latency_p95))?;
        writeln!(f, "flops_dft = {:.0}", self.flops.dft)?;
        writeln!(f, "flops_laplacian = {:.0}", self.flops.laplacian)?;
        writeln!(f, "flops_shape = {:.0}", self.flops.shape)?;
        writeln!(f, "flops_local = {:.0}", self.flops.local)?;
        write!(f, "flops_trees = {:.0}", self.flops.trees)
    }
}
