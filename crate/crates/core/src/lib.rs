//! Hybrid quantum-classical time-series forecasting.
//!
//! A frozen LSTM encoder compresses each window of a flow series into a
//! short latent vector; a regressor then predicts the next reading. The
//! regressor's first stage is either classical (a wide dense layer or an
//! LSTM) or a simulated variational circuit (single block or data
//! re-uploading). Models are scored with gap k-fold cross-validation.

pub mod autoencoder;
pub mod data;
pub mod error;
pub mod eval;
pub mod models;
pub mod nn;
pub mod qsim;
pub mod train;

pub use error::{Error, Result};
