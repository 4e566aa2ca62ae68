use thiserror::Error;

/// Errors shared by all modules in this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A text input (edge list, index list) failed to parse. `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A node ID referenced something outside the graph or table.
    #[error("node id {id} out of range ({num_nodes} nodes)")]
    NodeOutOfRange { id: u64, num_nodes: u64 },

    /// An element offset fell outside a feature table.
    #[error("element offset {offset} out of range ({len} elements)")]
    ElementOutOfRange { offset: u64, len: u64 },

    /// A parameter violated a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A feature table or strategy would not fit in device memory.
    #[error("device memory exhausted: need {required} bytes, capacity {capacity} bytes")]
    DeviceCapacity { required: u64, capacity: u64 },

    /// A binary input had the wrong magic, length, or internal structure.
    #[error("bad file format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
