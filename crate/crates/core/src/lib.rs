pub mod cli;
pub mod climit;
pub mod error;
pub mod qsystems;
pub mod spectral;
pub mod wavepacket;

pub use error::{Error, Result};
