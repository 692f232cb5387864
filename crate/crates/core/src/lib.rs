pub mod artifacts;
pub mod config;
pub mod corpus;
pub mod error;
pub mod mapgen;
pub mod pipeline;
pub mod server;
pub mod sim;
pub mod store;

pub use error::{Error, Result};
