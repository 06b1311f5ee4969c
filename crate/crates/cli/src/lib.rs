//! Command-line checker and local HTTP service for Rimay requirements.

pub mod commands;
pub mod config;
pub mod persist;
pub mod service;
