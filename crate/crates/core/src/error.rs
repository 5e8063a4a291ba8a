use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("address {addr:#x} out of range (capacity {capacity:#x})")]
    AddressOutOfRange { addr: u64, capacity: u64 },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("config error at `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("trace line {line}: {msg}")]
    Trace { line: usize, msg: String },

    #[error("invalid workload parameter: {0}")]
    Workload(String),

    #[error("report schema mismatch: expected version {expected}, found {found}")]
    SchemaMismatch { expected: u32, found: u32 },

    #[error("report decode error: {0}")]
    Report(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config { key: key.into(), msg: msg.into() }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
