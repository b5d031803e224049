use std::path::PathBuf;

/// Errors surfaced by the segmentation toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot decode {path}: {source}")]
    Decode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("cannot encode {path}: {source}")]
    Encode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    /// 16-bit, alpha, or otherwise unsupported pixel layouts.
    #[error("unsupported pixel format in {path}: {detail}")]
    UnsupportedFormat { path: PathBuf, detail: String },

    #[error("kernel dimensions must be odd, got {rows}x{cols}")]
    EvenKernel { rows: usize, cols: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Empty or full mask where a two-sided partition is required.
    #[error("degenerate mask (empty or full)")]
    DegenerateMask,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
