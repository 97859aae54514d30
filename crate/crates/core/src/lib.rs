pub mod audio;
pub mod cli;
pub mod dsp;
pub mod error;
pub mod geometry;
pub mod interpolation;
pub mod ir_store;
pub mod layouts;
pub mod mixer;

pub use error::{Error, Result};
