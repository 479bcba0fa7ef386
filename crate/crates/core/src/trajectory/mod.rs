//! Hidden-state trajectories and their on-disk container.

pub mod format;

pub use format::{read_trajectories, write_trajectories, Flags, Header};

use crate::{Error, Result};

/// Longest trajectory kept by [`normalize_length`].
pub const MAX_TOKENS: usize = 256;

/// Correctness of the generated answer a trajectory was extracted from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Incorrect,
    Correct,
    Unknown,
}

impl Label {
    pub fn from_byte(byte: u8) -> Option<Self> {
        match byte {
            0 => Some(Label::Incorrect),
            1 => Some(Label::Correct),
            255 => Some(Label::Unknown),
            _ => None,
        }
    }

    pub fn to_byte(self) -> u8 {
        match self {
            Label::Incorrect => 0,
            Label::Correct => 1,
            Label::Unknown => 255,
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Label::Incorrect => Some(false),
            Label::Correct => Some(true),
            Label::Unknown => None,
        }
    }
}

impl From<bool> for Label {
    fn from(correct: bool) -> Self {
        if correct {
            Label::Correct
        } else {
            Label::Incorrect
        }
    }
}

/// One instance: a `T x D` matrix of final-layer states plus metadata.
///
/// States are stored row-major as `f32`, matching the container format.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub id: String,
    pub label: Label,
    states: Vec<f32>,
    dim: usize,
    pub semantic: Option<Vec<f32>>,
}

impl Trajectory {
    /// Builds a trajectory from row-major states. `states.len()` must be a
    /// nonzero multiple of `dim` and every entry finite.
    pub fn new(id: impl Into<String>, label: Label, states: Vec<f32>, dim: usize) -> Result<Self> {
        if dim == 0 || states.is_empty() || !states.len().is_multiple_of(dim) {
            return Err(Error::InvalidArgument(format!(
                "{} state values do not form rows of width {dim}",
                states.len()
            )));
        }
        if states.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("trajectory states"));
        }
        Ok(Trajectory {
            id: id.into(),
            label,
            states,
            dim,
            semantic: None,
        })
    }

    pub fn with_semantic(mut self, semantic: Vec<f32>) -> Result<Self> {
        if semantic.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("semantic embedding"));
        }
        self.semantic = Some(semantic);
        Ok(self)
    }

    /// Number of tokens `T`.
    pub fn len(&self) -> usize {
        self.states.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Hidden size `D`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn states(&self) -> &[f32] {
        &self.states
    }

    pub fn row(&self, t: usize) -> &[f32] {
        &self.states[t * self.dim..(t + 1) * self.dim]
    }

    pub fn matrix(&self) -> StateMatrix<'_> {
        StateMatrix {
            data: &self.states,
            dim: self.dim,
        }
    }
}

/// Caps a trajectory at `cap` tokens, keeping the prefix.
///
/// Shorter trajectories are returned unchanged; zero padding is applied only
/// inside the frequency-domain features, never to stored rows.
pub fn normalize_length(mut raw: Trajectory, cap: usize) -> Result<Trajectory> {
    if cap == 0 {
        return Err(Error::InvalidArgument("length cap must be positive".into()));
    }
    let rows = raw.len();
    if rows < 2 {
        return Err(Error::DegenerateTrajectory { rows });
    }
    if rows > cap {
        raw.states.truncate(cap * raw.dim);
    }
    Ok(raw)
}

/// Borrowed row-major `T x D` view of hidden states.
#[derive(Debug, Clone, Copy)]
pub struct StateMatrix<'a> {
    data: &'a [f32],
    dim: usize,
}

impl<'a> StateMatrix<'a> {
    pub fn new(data: &'a [f32], dim: usize) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::InvalidArgument(format!(
                "{} values do not form rows of width {dim}",
                data.len()
            )));
        }
        Ok(StateMatrix { data, dim })
    }

    pub fn rows(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, t: usize) -> &'a [f32] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &'a [f32] {
        self.data
    }

    /// Rows `start..start + len`.
    pub fn window(&self, start: usize, len: usize) -> StateMatrix<'a> {
        StateMatrix {
            data: &self.data[start * self.dim..(start + len) * self.dim],
            dim: self.dim,
        }
    }

    pub(crate) fn check(&self) -> Result<()> {
        let rows = self.rows();
        if rows < 2 {
            return Err(Error::DegenerateTrajectory { rows });
        }
        if self.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("hidden states"));
        }
        Ok(())
    }
}
