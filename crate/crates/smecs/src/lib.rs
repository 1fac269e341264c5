//! Command line, HTTP service and transports around [`smecs_core`].

pub mod api;
pub mod cli;
pub mod config;
pub mod store;
pub mod transport;
