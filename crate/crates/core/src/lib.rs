//! Contour detection by patch analogy.
//!
//! A query image is labelled pixel by pixel: each 3×3 neighbourhood is
//! compared with the straight-edge windows of a synthetic two-intensity
//! pattern, and takes the contour label of the closest one. Running a
//! schedule of patterns with increasing thresholds gives a stack of maps
//! whose consecutive agreement defines a contour level.

pub mod error;
pub mod eval;
pub mod image;
pub mod matcher;
pub mod multiscale;
pub mod patterns;
pub mod pnm;
pub mod synth;
pub mod theory;
pub mod transform;

pub use error::{Error, Result};
pub use image::{to_gray, window_at, ColorImage, GrayImage, Window};
pub use matcher::{best_match, detect, detect_detailed, detect_exemplar, detect_stack, similarity, ContourMap, Detection, MatchResult};
pub use patterns::{reference_neighborhoods, schedule, synthesize_pattern_pair, IntensityPair, PatternPair, PatternSchedule, Polarity};
