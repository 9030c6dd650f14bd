//! Label-noise filtering for categorical training data.
//!
//! A naive Bayes model fitted on the training set classifies every row.
//! Misclassified rows become noise candidates, and only those whose
//! likelihood falls strictly below the weakest correctly classified row are
//! removed. The cleaned data then trains a C4.5-style decision tree, and
//! [`eval`] compares that pipeline against no filtering and against
//! removing every misclassified row.
//!
//! ```
//! use noise_sieve::fixtures::table1;
//! use noise_sieve::nbc::SmoothingPolicy;
//! use noise_sieve::noise::{detect_noise, filter_dataset};
//!
//! let data = table1();
//! let report = detect_noise(&data, SmoothingPolicy::default()).unwrap();
//! assert_eq!(report.noise_ids, [3, 8]);
//! let clean = filter_dataset(&data, &report).unwrap();
//! assert_eq!(clean.len(), 7);
//! ```

pub mod dataset;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod ingest;
pub mod nbc;
pub mod noise;
pub mod synth;
pub mod tree;

pub use error::{Error, Result};
