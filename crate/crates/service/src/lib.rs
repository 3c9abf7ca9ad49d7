//! Configuration, batch simulation, validation and the trial-conduct service
//! built on the `pedoop` engine.

pub mod conduct;
pub mod config;
pub mod error;
pub mod events;
pub mod http;
pub mod simulate;
pub mod store;
pub mod tables;
pub mod validate;

pub use error::ServiceError;
