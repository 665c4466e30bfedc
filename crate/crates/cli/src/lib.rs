//! Configuration-driven experiment runner for the `ergonode` library.

pub mod commands;
pub mod config;
pub mod pipeline;
