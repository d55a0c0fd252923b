//! Experiment front end for the assimilation laboratory: configuration,
//! orchestration, CSV/snapshot persistence and plot-script emission.

pub mod commands;
pub mod config;
pub mod output;
pub mod runner;

use thiserror::Error;

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum AppError {
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
    #[error("io error: {0}")]
    Io(String),
}

impl AppError {
    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Config(_) => 1,
            AppError::Runtime(_) => 2,
            AppError::Io(_) => 3,
        }
    }
}

impl From<config::ConfigError> for AppError {
    fn from(e: config::ConfigError) -> Self {
        AppError::Config(e.to_string())
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Io(e.to_string())
    }
}

impl From<dda_core::dda::DdaError> for AppError {
    fn from(e: dda_core::dda::DdaError) -> Self {
        AppError::Runtime(e.to_string())
    }
}

impl From<dda_core::lorenz::LorenzError> for AppError {
    fn from(e: dda_core::lorenz::LorenzError) -> Self {
        AppError::Runtime(e.to_string())
    }
}

impl From<dda_core::nse2d::NseError> for AppError {
    fn from(e: dda_core::nse2d::NseError) -> Self {
        AppError::Runtime(e.to_string())
    }
}
