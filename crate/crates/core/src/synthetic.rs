//! Seeded synthetic trajectories for demos, benchmarks and tests.
//!
//! "Correct" instances drift smoothly along a few low-frequency directions;
//! "incorrect" ones follow the same drift with per-token jitter added, which
//! raises high-frequency power and step-length variance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::trajectory::{Label, Trajectory};
use crate::Result;

#[derive(Debug, Clone, Copy)]
pub struct SyntheticSpec {
    pub count: usize,
    pub min_tokens: usize,
    pub max_tokens: usize,
    pub dim: usize,
    /// Per-token jitter amplitude applied to incorrect instances.
    pub jitter: f32,
    pub semantic_dim: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            count: 100,
            min_tokens: 8,
            max_tokens: 64,
            dim: 16,
            jitter: 0.6,
            semantic_dim: 0,
            seed: 42,
        }
    }
}

/// Alternating correct/incorrect labels, starting with correct.
pub fn labeled_trajectories(spec: &SyntheticSpec) -> Result<Vec<Trajectory>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    (0..spec.count)
        .map(|i| {
            let correct = i % 2 == 0;
            let rows = rng.random_range(spec.min_tokens.max(2)..=spec.max_tokens.max(spec.min_tokens.max(2)));
            let states = trajectory_states(&mut rng, rows, spec.dim, if correct { 0.0 } else { spec.jitter });
            let t = Trajectory::new(format!("syn-{i:05}"), Label::from(correct), states, spec.dim)?;
            if spec.semantic_dim > 0 {
                let semantic = (0..spec.semantic_dim)
                    .map(|_| rng.random_range(-1.0f32..1.0) + if correct { 0.3 } else { -0.3 })
                    .collect();
                t.with_semantic(semantic)
            } else {
                Ok(t)
            }
        })
        .collect()
}

/// One unlabeled trajectory of the given shape.
pub fn random_trajectory(rows: usize, dim: usize, jitter: f32, seed: u64) -> Result<Trajectory> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = trajectory_states(&mut rng, rows, dim, jitter);
    Trajectory::new(format!("rand-{seed}"), Label::Unknown, states, dim)
}

fn trajectory_states(rng: &mut ChaCha8Rng, rows: usize, dim: usize, jitter: f32) -> Vec<f32> {
    let offset: Vec<f32> = (0..dim).map(|_| rng.random_range(-1.0f32..1.0)).collect();
    let phase: Vec<f32> = (0..dim).map(|_| rng.random_range(0.0f32..std::f32::consts::TAU)).collect();
    let freq: Vec<f32> = (0..dim).map(|_| rng.random_range(0.5f32..2.0)).collect();
    let mut out = Vec::with_capacity(rows * dim);
    for t in 0..rows {
        let s = t as f32 / rows as f32;
        for d in 0..dim {
            let smooth = offset[d] + 0.8 * (std::f32::consts::TAU * freq[d] * s + phase[d]).sin();
            let noise = if jitter > 0.0 { rng.random_range(-jitter..jitter) } else { 0.0 };
            out.push(smooth + noise);
        }
    }
    out
}
