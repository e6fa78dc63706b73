use std::fmt;

/// Pipeline stage a failure is attributed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Load,
    Resample,
    Direction,
    Repeat1d,
    Labels,
    Descriptors,
    Crf,
    Flow,
    Texture,
    Render,
    Encode,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Load => "load",
            Stage::Resample => "resample",
            Stage::Direction => "direction",
            Stage::Repeat1d => "repeat1d",
            Stage::Labels => "labels",
            Stage::Descriptors => "descriptors",
            Stage::Crf => "crf",
            Stage::Flow => "flow",
            Stage::Texture => "texture",
            Stage::Render => "render",
            Stage::Encode => "encode",
        };
        f.write_str(name)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("[{stage}] {message}")]
    Stage { stage: Stage, message: String },

    #[error("linear system is singular: {0}")]
    Singular(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error("gif encoding failed: {0}")]
    Gif(#[from] gif::EncodingError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn stage(stage: Stage, msg: impl Into<String>) -> Self {
        Error::Stage {
            stage,
            message: msg.into(),
        }
    }

    /// The stage tag, if this error came out of a pipeline stage.
    pub fn stage_tag(&self) -> Option<Stage> {
        match self {
            Error::Stage { stage, .. } => Some(*stage),
            _ => None,
        }
    }

    /// Attach a stage tag to an untagged error.
    pub fn at(self, stage: Stage) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            other => Error::Stage {
                stage,
                message: other.to_string(),
            },
        }
    }

    /// Short machine-readable code used by the HTTP service and the C API.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::Config(_) => "config",
            Error::Stage { .. } => "stage_failure",
            Error::Singular(_) => "singular_system",
            Error::Io(_) => "io",
            Error::Image(_) => "image",
            Error::Gif(_) => "gif",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
