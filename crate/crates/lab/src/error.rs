use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{0}")]
    Usage(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: gpphs_core::Error,
    },

    #[error("{}: {message}", path.display())]
    Artifact { path: PathBuf, message: String },
}

impl LabError {
    pub fn artifact(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        LabError::Artifact {
            path: path.into(),
            message: message.to_string(),
        }
    }

    /// 2 for configuration and usage problems, 1 for failures while running a stage.
    pub fn exit_code(&self) -> u8 {
        match self {
            LabError::Config(_) | LabError::Usage(_) => 2,
            LabError::Stage { .. } | LabError::Artifact { .. } => 1,
        }
    }
}

pub(crate) trait StageContext<T> {
    fn stage(self, stage: &'static str) -> Result<T, LabError>;
}

impl<T> StageContext<T> for gpphs_core::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T, LabError> {
        self.map_err(|source| LabError::Stage { stage, source })
    }
}
