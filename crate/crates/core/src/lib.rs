//! Multipartite concurrence for pure and mixed states.
//!
//! The crate is organised bottom-up:
//!
//! - [`tensor`]: pure states, density matrices, partial traces and purity.
//! - [`combinatorics`]: exact binomials, subset and set-partition enumeration.
//! - [`concurrence`]: the N-partite, bipartite and partition concurrences of pure states.
//! - [`wclass`]: closed forms for N-qubit W-class states and the relations between
//!   the N-partite and (N-1)-partite concurrences.
//! - [`bounds`]: lower-bound combinators for mixed-state concurrence.
//! - [`roof`]: a heuristic convex-roof upper estimate plus the two-qubit Wootters formula.
//! - [`verify`]: a self-checking harness comparing every closed form against
//!   brute-force partial traces.
//!
//! ```
//! use wconcur::{concurrence::concurrence_pure, wclass::{WCoefficients, w_concurrence_sq}};
//!
//! let a = WCoefficients::uniform(3);
//! let c = concurrence_pure(&a.to_state()).unwrap();
//! assert!((c * c - w_concurrence_sq(&a)).abs() < 1e-12);
//! ```

pub mod bounds;
pub mod combinatorics;
pub mod concurrence;
mod error;
pub mod io;
pub mod roof;
pub mod sampling;
pub mod tensor;
pub mod verify;
pub mod wclass;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use bounds::BoundReport;
pub use combinatorics::Partition;
pub use roof::{Decomposition, EstimatorConfig};
pub use tensor::{DensityMatrix, PureState, SubsystemSet};
pub use wclass::WCoefficients;
