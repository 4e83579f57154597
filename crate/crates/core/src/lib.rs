//! Finite-dimensional simulation of entanglement mediation between two quantum
//! systems `A` and `B` through a mediator `G`.
//!
//! A classical mediator is a leg whose dynamics commute with dephasing in its
//! canonical basis. Protocols built from local `A–G` and `G–B` steps over such
//! a mediator carry an explicit triseparable decomposition at every step, so
//! the `A–B` marginal stays separable. The same engine with the mediator left
//! quantum produces entanglement, and finite-round LOCC protocols compile into
//! classical-mediator protocols.

pub mod channel;
pub mod entanglement;
pub mod error;
pub mod layout;
pub mod linalg;
pub mod locc;
pub mod protocol;
pub mod random;
pub mod state;
pub mod tol;

pub use channel::{
    g_classicalize, is_g_classical, random_channel, random_stochastic, step_channel,
    tensor_channels, Channel, HeisenbergMap, Side, StepChannel,
};
pub use entanglement::{
    ensemble_reconstruct, ensemble_step, negativity, partial_transpose,
    reduced_separable_certificate, Cut, EnsembleTerm, SeparableTerm, TriseparableEnsemble,
};
pub use error::{Error, Result};
pub use layout::{Subsystem, SystemLayout};
pub use locc::{
    compile_to_mediator, locc_choi, simulate_locc, verify_equivalence, Equivalence, Instrument,
    LoccProtocol, Party, Round,
};
pub use protocol::{
    bmv_scenario, fuzz_protocol, fuzz_protocols, random_protocol, FuzzCase, FuzzConfig, MediatorMode, Protocol, Trajectory,
    TrajectoryRecord,
};
pub use state::{
    classical_state, lift_local, partial_trace, pinch, product_state, ClassicalDistribution,
    DensityState, Operator,
};
