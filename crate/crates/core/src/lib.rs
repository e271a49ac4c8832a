//! Distribution-free change point detection for multivariate series.
//!
//! Observations are pooled and mapped onto a fixed low-discrepancy
//! reference set in the unit cube through a minimum-cost assignment; the
//! images act as multivariate ranks. A two-sample energy statistic on the
//! ranks scores every candidate split, and hierarchical bisection with
//! permutation testing turns the scores into significant change points.
//! Because only ranks enter the statistic, the null distribution never
//! depends on what generated the data.
//!
//! ```
//! use rankcp_core::detect::{e_divisive, DetectConfig};
//! use rankcp_core::series::Series;
//! use rankcp_core::statistic::StatConfig;
//!
//! let rows: Vec<Vec<f64>> = (0..40)
//!     .map(|i| vec![(i as f64 * 0.37).sin() + if i < 20 { 0.0 } else { 8.0 }])
//!     .collect();
//! let series = Series::new(rows, None).unwrap();
//! let config = DetectConfig {
//!     stat: StatConfig { min_size: 5, ..Default::default() },
//!     permutations: 99,
//!     ..Default::default()
//! };
//! let report = e_divisive(&series, &config).unwrap();
//! assert_eq!(report.change_points.len(), 1);
//! assert_eq!(report.change_points[0].index, 20);
//! ```

pub mod detect;
pub mod error;
pub mod rankmap;
pub mod sequence;
pub mod series;
pub mod simulate;
pub mod statistic;

pub use error::{Error, Result};
pub use series::Series;
