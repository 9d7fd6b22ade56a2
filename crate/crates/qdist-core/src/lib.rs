//! Classical and quantum distinguishability measures: minimum-error
//! discrimination, fidelity, relative-information bounds, accessible
//! information bounds, broadcasting checks and inference/disturbance
//! tradeoffs.
//!
//! Informations are in nats throughout.

pub mod accinfo;
pub mod broadcast;
pub mod classical;
pub mod error;
pub mod kullback;
pub mod linops;
pub mod oracle;
pub mod qdisc;
pub mod states;
pub mod tradeoff;

pub use error::{Error, Result};
pub use linops::{CMat, EigenDecomposition, HermitianMatrix};
pub use states::{BlochVector, DensityOperator, Keep, Povm};
pub use classical::{ChernoffResult, Distribution};
pub use kullback::KullbackBounds;
pub use qdisc::{FidelityResult, HelstromResult};
pub use accinfo::{BinaryChannel, BoundCurve, BoundKind};
pub use oracle::{Functional, FunctionalKind};
pub use broadcast::Channel;
pub use tradeoff::{KrausOperation, TradeoffPoint};
