//! Entanglement-assisted channel capacities, quantum feedback protocol
//! simulation, and numerical checks of the entropic inequalities behind the
//! feedback capacity bounds.

pub mod capacity;
pub mod channels;
pub mod ensemble;
pub mod entropy;
pub mod error;
pub mod feedback;
pub mod par;
pub mod rates;
pub mod suites;
pub mod tensor;

pub use channels::{QuantumChannel, StinespringIsometry, ChoiMatrix};
pub use ensemble::LabeledEnsemble;
pub use entropy::EntropyValue;
pub use error::{QfcError, Result};
pub use par::Execution;
pub use tensor::{ComplexMatrix, MultipartiteState, PureState, SubsystemSpec};
