//! Exit-code contract: 0 success, 1 usage or config, 2 data validation,
//! 3 provider failure, 4 partial batch failure.

use std::fmt;

use manualcode::config::ConfigError;
use manualcode::corpus::CorpusError;
use manualcode::eval::EvalError;
use manualcode::gateway::{GatewayError, MockScriptError};
use manualcode::jsonl::JsonlError;
use manualcode::manual::ManualError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Usage = 1,
    Data = 2,
    Provider = 3,
    Partial = 4,
}

#[derive(Debug)]
pub struct Failure {
    pub code: ExitCode,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn new(code: ExitCode, error: impl Into<anyhow::Error>) -> Self {
        Self {
            code,
            error: error.into(),
        }
    }

    pub fn usage(message: impl fmt::Display) -> Self {
        Self::new(ExitCode::Usage, anyhow::anyhow!("{message}"))
    }

    pub fn data(message: impl fmt::Display) -> Self {
        Self::new(ExitCode::Data, anyhow::anyhow!("{message}"))
    }

    pub fn context(self, message: impl fmt::Display + Send + Sync + 'static) -> Self {
        Self {
            code: self.code,
            error: self.error.context(message),
        }
    }
}

pub type CliResult<T> = Result<T, Failure>;

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Self::new(ExitCode::Usage, e)
    }
}

impl From<ManualError> for Failure {
    fn from(e: ManualError) -> Self {
        Self::new(ExitCode::Data, e)
    }
}

impl From<CorpusError> for Failure {
    fn from(e: CorpusError) -> Self {
        Self::new(ExitCode::Data, e)
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        Self::new(ExitCode::Data, e)
    }
}

impl From<JsonlError> for Failure {
    fn from(e: JsonlError) -> Self {
        Self::new(ExitCode::Data, e)
    }
}

impl From<MockScriptError> for Failure {
    fn from(e: MockScriptError) -> Self {
        Self::new(ExitCode::Usage, e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::new(ExitCode::Data, e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Self::new(ExitCode::Data, e)
    }
}

impl From<GatewayError> for Failure {
    fn from(e: GatewayError) -> Self {
        let code = match &e {
            GatewayError::InvalidConfig(_) => ExitCode::Usage,
            GatewayError::Auth(_) | GatewayError::ExhaustedRetries { .. } | GatewayError::Rejected(_) => {
                ExitCode::Provider
            }
            GatewayError::AllItemsFailed { .. } => ExitCode::Provider,
            _ => ExitCode::Data,
        };
        Self::new(code, e)
    }
}
