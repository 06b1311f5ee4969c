use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use rimay_core::lexicon::{load_lexicon, Lexicon};
use rimay_core::model::SymbolTable;
use rimay_core::parser::ParserContext;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const CONFIG_ENV: &str = "RIMAY_CONFIG";
pub const DEFAULT_BIND: &str = "127.0.0.1:7878";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {message}")]
    Invalid { path: PathBuf, message: String },
    #[error("{path}: {message}")]
    Load { path: PathBuf, message: String },
    #[error("invalid bind address `{0}`: expected host:port with port in 1..=65535")]
    Bind(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LogLevel {
    Error,
    Warn,
    #[default]
    Info,
    Debug,
    Trace,
}

impl LogLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            LogLevel::Error => "error",
            LogLevel::Warn => "warn",
            LogLevel::Info => "info",
            LogLevel::Debug => "debug",
            LogLevel::Trace => "trace",
        }
    }
}

/// Settings read from the file named by `RIMAY_CONFIG`; command-line flags
/// override individual fields.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bind_address: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lexicon_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cors_allowed_origin: Option<String>,
    #[serde(default)]
    pub log_level: LogLevel,
}

impl ServiceConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = read(path)?;
        let mut config: ServiceConfig = serde_json::from_str(&text).map_err(|e| ConfigError::Invalid {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        // Relative paths in the file are relative to the file itself.
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut config.lexicon_path, &mut config.model_path].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }

    /// Config named by `RIMAY_CONFIG`, or defaults when unset.
    pub fn from_env() -> Result<Self, ConfigError> {
        match std::env::var_os(CONFIG_ENV) {
            Some(path) if !path.is_empty() => Self::from_file(Path::new(&path)),
            _ => Ok(Self::default()),
        }
    }

    pub fn bind(&self) -> Result<SocketAddr, ConfigError> {
        let raw = self.bind_address.as_deref().unwrap_or(DEFAULT_BIND);
        let addr: SocketAddr = raw.parse().map_err(|_| ConfigError::Bind(raw.to_string()))?;
        if addr.port() == 0 {
            return Err(ConfigError::Bind(raw.to_string()));
        }
        Ok(addr)
    }

    pub fn load_lexicon(&self) -> Result<Lexicon, ConfigError> {
        match &self.lexicon_path {
            None => Ok(Lexicon::default_lexicon()),
            Some(path) => load_lexicon(&read(path)?).map_err(|e| ConfigError::Load {
                path: path.clone(),
                message: e.to_string(),
            }),
        }
    }

    pub fn load_model(&self) -> Result<SymbolTable, ConfigError> {
        match &self.model_path {
            None => Ok(SymbolTable::new()),
            Some(path) => SymbolTable::import_model(&read(path)?).map_err(|e| ConfigError::Load {
                path: path.clone(),
                message: e.to_string(),
            }),
        }
    }

    pub fn context(&self) -> Result<ParserContext, ConfigError> {
        Ok(ParserContext::new(self.load_lexicon()?, self.load_model()?))
    }
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })
}
