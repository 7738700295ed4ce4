//! Command implementations and the prediction service for the `polygrid`
//! binary.

pub mod commands;
pub mod service;
