//! Dyadic second-difference coefficients of paths on `[0, 1]`, Besov
//! sequence-space norms, and Monte Carlo checks of their behaviour for the
//! uniform empirical process, Brownian motion and the Brownian bridge.
//!
//! ```
//! use besov_empirica::{extract_coefficients, reconstruct_path, DyadicPathValues};
//!
//! let path = DyadicPathValues::new(1, vec![0.0, 1.0, 0.0]).unwrap();
//! let coeffs = extract_coefficients(&path).unwrap();
//! assert_eq!(coeffs.levels()[0], vec![2.0]);
//! assert_eq!(reconstruct_path(&coeffs).unwrap().values(), path.values());
//! ```

pub mod besov;
pub mod cli;
pub mod dyadic;
pub mod empirical;
pub mod error;
pub mod gaussian;
pub mod io;
pub mod montecarlo;
pub mod sampling;

pub use besov::{besov_norm, level_statistic, little_o_profile, BesovParams, LevelProfile};
pub use dyadic::{extract_coefficients, reconstruct_path, CoefficientTriangle, DyadicPathValues};
pub use empirical::{empirical_coefficients, CdfVersion, ContinuousEcdf};
pub use error::{Error, Result};
pub use gaussian::{brownian_bridge, brownian_motion, gaussian_coefficients, GaussianPath};
pub use sampling::{sample_uniform, EmpiricalSample, SeedSpec, Substream};
