//! From-scratch classical learning core: dense and LSTM layers with exact
//! backward passes, MSE loss, Adam, and a binary checkpoint format.

mod adam;
pub mod checkpoint;
mod dense;
mod init;
mod loss;
mod lstm;
mod params;

pub use adam::{Adam, DEFAULT_LEARNING_RATE};
pub use dense::{Activation, DenseCache, DenseGrads, DenseLayer};
pub use init::glorot_uniform;
pub use loss::mse_loss_and_grad;
pub use lstm::{LstmCache, LstmCell, LstmGrads, LstmOutput, LstmStepCache};
pub use params::{ParamBlock, ParameterBundle, Parameterized};

/// Global-norm threshold applied to every optimizer step.
pub const GRAD_CLIP_NORM: f64 = 5.0;
