//! Dense numeric substrate for the two neural generators: matrices,
//! recurrent cells with hand-written backward passes, softmax and
//! cross-entropy, Adam, dropout, checkpoints and a finite-difference
//! gradient oracle.

mod adam;
pub mod checkpoint;
pub mod gradcheck;
mod gru;
mod layers;
mod lstm;
mod matrix;
pub mod ops;
mod params;
pub mod rng;
pub(crate) mod training;

pub use adam::{AdamConfig, AdamState};
pub use checkpoint::Checkpoint;
pub use gradcheck::{grad_check, GradCheckConfig, GradCheckReport};
pub use gru::{GruCell, GruStepGrads, GruTrace};
pub use layers::{Embedding, Linear};
pub use lstm::{LstmCell, LstmStepGrads, LstmTrace};
pub use matrix::{dot, Matrix};
pub use ops::{cross_entropy, dropout_mask, log_softmax, softmax, Dropout};
pub use params::{clip_global_norm, Parameters};
pub use training::{EpochRecord, TrainingLog};

pub(crate) use matrix::check_len as matrix_check;
pub(crate) use params::prefixed;
