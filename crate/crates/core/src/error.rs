use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("behaviour sampling gave up after {attempts} draws: {constraint}")]
    Sampling { constraint: String, attempts: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("topology error: {0}")]
    Topology(String),

    #[error("load flow did not converge in {iterations} iterations (last residual {residual:.3e} p.u.)")]
    Divergence { iterations: usize, residual: f64 },

    #[error("unknown bus id {0}")]
    UnknownBus(usize),

    #[error("{name} = {value} outside [{min}, {max}]")]
    Range {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("division by zero: {0}")]
    DivisionByZero(String),

    #[error("dispatch infeasible: demand {demand_kw:.3} kW outside the dispatchable range (capacity {available_kw:.3} kW)")]
    Capacity { demand_kw: f64, available_kw: f64 },

    #[error("station {station} balance residual {residual_kw:.3e} kW at hour {hour}")]
    Accounting {
        station: usize,
        hour: usize,
        residual_kw: f64,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config parse: {0}")]
    TomlDe(#[from] toml::de::Error),

    #[error("config serialize: {0}")]
    TomlSer(#[from] toml::ser::Error),

    #[error("stage `{stage}` failed (config {digest}): {source}")]
    Stage {
        stage: &'static str,
        digest: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
