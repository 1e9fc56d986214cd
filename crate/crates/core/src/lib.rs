pub mod cli;
pub mod cluster;
pub mod data;
pub mod error;
pub mod eval;
pub mod graph;
pub mod linalg;
mod matrix_serde;
pub mod model;
pub mod npt;
pub mod svdd;
pub mod trainer;

pub use error::{Error, Result};
pub use model::GessvddModel;
pub use trainer::{predict, train, Direction, Hyperparams, Kernel, UpdateRule, Variant};
