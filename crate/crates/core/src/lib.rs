//! Exact simulation of qubit thermalization in a collision model.
//!
//! A system qubit meets a stream of fresh bath qubits, each prepared in the
//! thermal state `ξ = p|0⟩⟨0| + q|1⟩⟨1|`, and interacts with each of them once
//! through a two-qubit unitary "machine". The crate covers:
//!
//! - [`machines`]: the complete family `U(φ, θ, α)` of thermalizing machines,
//!   their Bell-diagonal and Hamiltonian forms, the partial swap and
//!   local-unitary classification;
//! - [`channel`]: the one-collision channel, its iteration and closed forms;
//! - [`thermo`]: relaxation times in the continuous-collision limit and the
//!   fluctuation-dissipation relation;
//! - [`entanglement`]: Wootters concurrence and the entangling power of a
//!   machine;
//! - [`trajectories`]: exact system+bath evolution and the collision-order
//!   reversal experiment;
//! - [`cli`]: the experiment runner behind the `thermal-machines` binary.
//!
//! Qubit 0 is always the system; ancillas follow in collision order and
//! tensor products are taken in index order.

pub mod channel;
pub mod cli;
pub mod entanglement;
pub mod error;
pub mod linalg;
pub mod machines;
pub mod optimize;
pub mod thermo;
pub mod trajectories;
pub mod verify;

pub use channel::{BathSpec, IterationMode, Trajectory};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, DensityMatrix, QubitState, Tolerances};
pub use machines::{CanonicalParams, MachineParams};
