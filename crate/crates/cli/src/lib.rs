//! Command-line driver and HTTP session service for `stml`.

pub mod commands;
pub mod http_oracle;
pub mod service;
