//! Build pipeline, versioned repository and HTTP server for semantic lecture notes.

pub mod config;
pub mod http;
pub mod pipeline;
pub mod repo;
