use std::path::{Path, PathBuf};

/// Errors raised anywhere in the pipeline.
///
/// Variants map onto the process exit codes used by the `spanforge` binary:
/// configuration problems exit with 2, bad input data with 3 and failures
/// during computation with 4.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: {message}", path.display())]
    Load { path: PathBuf, message: String },

    #[error("corpus error: {0}")]
    Corpus(String),

    #[error("labeling error: {0}")]
    Labeling(String),

    #[error("sampling error: stratum `{stratum}` has {available} samples, {requested} requested")]
    Sampling {
        stratum: String,
        requested: usize,
        available: usize,
    },

    #[error("training error: {0}")]
    Training(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("[{stage}] {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().to_path_buf(),
            source,
        }
    }

    pub fn parse(path: impl AsRef<Path>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.as_ref().to_path_buf(),
            line,
            message: message.into(),
        }
    }

    pub fn load(path: impl AsRef<Path>, message: impl Into<String>) -> Self {
        Error::Load {
            path: path.as_ref().to_path_buf(),
            message: message.into(),
        }
    }

    /// Wraps the error with the name of the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// The innermost error, with stage wrappers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::Config(_) => 2,
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::Load { .. }
            | Error::Corpus(_)
            | Error::Labeling(_)
            | Error::Sampling { .. } => 3,
            Error::Training(_) | Error::Argument(_) => 4,
            Error::Stage { .. } => unreachable!("root() strips stage wrappers"),
        }
    }
}

/// Attach a stage name to any error flowing out of a `Result`.
pub trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.in_stage(stage))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_root_cause() {
        assert_eq!(Error::Config("x".into()).exit_code(), 2);
        let nested = Error::Sampling {
            stratum: "None".into(),
            requested: 10,
            available: 5,
        }
        .in_stage("sample")
        .in_stage("train");
        assert_eq!(nested.exit_code(), 3);
        assert!(nested.to_string().starts_with("[train] [sample]"));
        assert_eq!(Error::Training("diverged".into()).exit_code(), 4);
    }
}
