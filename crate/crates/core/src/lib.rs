//! Tensor-ring completion.
//!
//! Recovers missing entries of an N-way array by fitting a tensor-ring
//! decomposition whose cores are kept low-rank through nuclear-norm
//! regularization of their three unfoldings, solved with ADMM
//! ([`solver::trlrf_solve`]). An alternating least squares solver for the
//! plain observed-entry fit ([`solver::trals_solve`]) serves as a baseline.
//!
//! ```
//! use ringfill::{experiment, ObservationMask, SeededRng, SolverConfig};
//! use ringfill::tensor::{project, Selection};
//!
//! let mut rng = SeededRng::new(1);
//! let truth = experiment::synthetic_tensor(&[6, 6, 6], &[2, 2, 2], 0.5, &mut rng).unwrap();
//! let mask = ObservationMask::sample(vec![6, 6, 6], 0.3, &mut rng).unwrap();
//! let observed = project(&truth, &mask, Selection::Observed).unwrap();
//!
//! let mut config = SolverConfig::new(vec![2, 2, 2]);
//! config.k_max = 50;
//! let result = ringfill::solver::trlrf_solve(&observed, &mask, &config).unwrap();
//! assert_eq!(result.estimate.shape(), &[6, 6, 6]);
//! ```

pub mod error;
pub mod experiment;
pub mod io;
pub mod metrics;
pub mod par;
pub mod ring;
pub mod rng;
pub mod solver;
pub mod spectral;
pub mod tensor;

pub use error::{Error, Result};
pub use par::Execution;
pub use ring::{CoreMode, TrFactors};
pub use rng::SeededRng;
pub use solver::{SolveResult, SolverConfig, TralsConfig, XInit};
pub use tensor::{DenseTensor, ObservationMask, Selection};
