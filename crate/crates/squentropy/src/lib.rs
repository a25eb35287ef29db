//! A small laboratory for training neural classifiers under the squentropy
//! loss and comparing it against cross-entropy and the rescaled square
//! loss, with calibration analysis built in.
//!
//! Squentropy adds the mean square of the non-true logits to the usual
//! cross-entropy term. That one-line change tends to keep accuracy while
//! shrinking the logit scale, which shows up here as smaller last-layer
//! weight norms and, next to the plain square loss, far better
//! calibration. This crate provides everything needed to run that
//! comparison end to end on small problems:
//!
//! - [`loss`]: the three losses on raw logits, each returning value and
//!   gradient through one dispatch point.
//! - [`mlp`]: plain ReLU networks with explicit forward caches, backprop,
//!   and bit-exact text checkpoints.
//! - [`trainer`]: seeded minibatch SGD with weight decay, per-epoch
//!   history, evaluation, and multi-seed sweeps.
//! - [`calibration`]: expected calibration error with a fixed, documented
//!   binning rule.
//! - [`data`]: the two-spiral generator, CSV loading, standardization, and
//!   stratified splits.
//! - [`diagnostics`]: decision-boundary rasters and deterministic SVG
//!   charts.
//! - [`numerics`]: the dense matrix type and the seeded generator
//!   everything draws from.
//! - [`config`]: run configuration files and the JSON report format.
//!
//! Determinism is a design rule throughout: a run is pinned by its seed
//! and config, down to the bytes of its report.
//!
//! ```
//! use squentropy::config::RunConfig;
//! use squentropy::data::{generate_spiral, SpiralConfig};
//! use squentropy::trainer::{evaluate, train};
//!
//! let (train_set, test_set) = generate_spiral(&SpiralConfig {
//!     n_train: 60,
//!     n_test: 20,
//!     ..SpiralConfig::default()
//! })?;
//! let mut config = RunConfig::spiral_defaults();
//! config.epochs = 30;
//! let train_config = config.to_train_config(train_set.d(), train_set.class_count())?;
//! let (params, history) = train(&train_set, &train_config)?;
//! let (accuracy, report) = evaluate(&params, &test_set, config.bins_k);
//! assert_eq!(history.len(), 30);
//! assert!(accuracy >= 0.5);
//! assert!(report.ece <= 1.0);
//! # Ok::<(), squentropy::Error>(())
//! ```

pub mod calibration;
pub mod config;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod loss;
pub mod mlp;
pub mod numerics;
pub mod trainer;

pub use error::{Error, Result};
pub use loss::{cross_entropy, rescaled_square, softmax, squentropy, Loss, RescaleParams};
pub use mlp::{Architecture, MlpParameters};
pub use trainer::{evaluate, sweep, train, BatchSize, TrainConfig};
