//! Structural confidence estimation.
//!
//! Turns a token-level hidden-state trajectory `H = (h_1, ..., h_T)` into a
//! fixed 70-dimensional structural descriptor and maps that descriptor to a
//! correctness probability with a gradient-boosted tree ensemble. Everything
//! downstream of the encoder lives here: the STRJ trajectory container,
//! descriptor extraction, the estimator (plus PCA and a k-means outlier
//! baseline), evaluation metrics and a stage-level benchmark.
//!
//! ```
//! use structural_confidence::descriptors::{descriptor, GranularityConfig};
//! use structural_confidence::trajectory::StateMatrix;
//!
//! let rows: Vec<f32> = (0..40).map(|i| (i as f32 * 0.3).sin()).collect();
//! let h = StateMatrix::new(&rows, 4).unwrap();
//! let u = descriptor(h, &GranularityConfig::default()).unwrap();
//! assert_eq!(u.to_vec().len(), 70);
//! ```

pub mod bench;
pub mod config;
pub mod descriptors;
mod error;
pub mod estimator;
pub mod metrics;
pub mod synthetic;
pub mod table;
pub mod trajectory;

pub use error::{Error, ErrorKind, Result};
