use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LlmError {
    #[error("backend unavailable: {0}")]
    Unavailable(String),

    #[error("request timed out")]
    Timeout,

    #[error("transport error: {0}")]
    Transport(String),

    #[error("authentication failed: {0}")]
    Auth(String),

    #[error("rate limited")]
    RateLimited,

    #[error("malformed response: {0}")]
    BadResponse(String),

    #[error("invalid llm config: {0}")]
    Config(String),
}

/// Why a completion could not be mapped to an offered option.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("no offered option found in the completion")]
    NoMatch,

    #[error("option `{0}` is not among the offered options")]
    OutOfRange(String),
}
