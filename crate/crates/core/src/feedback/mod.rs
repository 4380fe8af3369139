//! n-round quantum feedback protocols and the conditional-mutual-information
//! bounds that cap what feedback can add.
//!
//! A round `k` runs, per message branch:
//! 1. Alice applies `V^i_k` to `Q_k`, the feedback registers `X_1..X_{k-1}`
//!    she has received, and her ancillas `Z_1..Z_k`;
//! 2. the channel acts on `Q_k` (its Stinespring environment `E_k` is kept
//!    but belongs to neither party);
//! 3. Bob applies the message-independent `U_k` to `Q_1..Q_k`, `X_k` and
//!    `Y_0..Y_k`;
//! 4. `X_k` is handed to Alice over the noiseless feedback line.
//!
//! Branches are tracked as pure states; the message register `M` is never
//! materialized because it stays classical.

mod delta;
mod monotonicity;
mod protocol;

pub use crate::ensemble::LabeledEnsemble;
pub use delta::{
    constant_ensemble, delta_conditional_mi, dense_coding_ensemble, max_delta_search, random_delta_ensemble,
    DeltaSearchResult, SENT, SIDE,
};
pub use monotonicity::{verify_monotonicity_step, MonotonicityStep, MESSAGE_LABEL, MONOTONICITY_TOL};
pub use protocol::{
    check_budget, embed_operator, simulate_feedback_protocol, tracked_dimension, simulate_many, witness_protocol, FeedbackDims, FeedbackProtocol,
    InitialState, ProtocolTrajectory, RoundRecord,
};

use crate::ensemble::LabeledEnsemble as Ensemble;
use crate::error::Result;

/// Block-diagonal cq-state `Σ p_i |i⟩⟨i|_M ⊗ ρ^i` with `M` first.
pub fn assemble_cq_state(ens: &Ensemble) -> Result<crate::tensor::MultipartiteState> {
    ens.assemble_cq_state(MESSAGE_LABEL)
}
