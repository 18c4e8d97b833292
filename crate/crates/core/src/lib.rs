//! The Yin-Yang classification dataset: geometry, seeded sampling, spike
//! encodings, a small reference network and the benchmark protocols built on
//! them.
//!
//! ```
//! use yinyang::geometry::GeometryParams;
//! use yinyang::sampler::generate;
//!
//! let ds = generate(42, 300, &GeometryParams::default()).unwrap();
//! assert_eq!(ds.class_counts(), [100, 100, 100]);
//! ```

pub mod config;
pub mod encoders;
pub mod experiments;
pub mod error;
pub mod geometry;
pub mod io;
pub mod plot;
pub mod rng;
pub mod sampler;
pub mod tinynet;

pub use error::{Error, Result};
