use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("model evaluation produced a non-finite value at x = {state}")]
    ModelEvaluation { state: String },

    #[error("invalid model construction: {0}")]
    Construction(String),

    #[error("simulation diverged at t = {last_time}: {reason}")]
    SimulationDiverged { last_time: f64, reason: String },

    #[error("trajectory has {len} samples but the filter window needs {window}")]
    TooShort { len: usize, window: usize },

    #[error("matrix is not positive definite after jitter escalation to {jitter:e}")]
    Conditioning { jitter: f64 },

    #[error("training failed: {0}")]
    Training(String),

    #[error("controller synthesis failed: {0}")]
    Synthesis(String),

    #[error("reference plan failed at t = {time} (residual {residual:e})")]
    PlanFailed { time: f64, residual: f64 },

    #[error("time {time} is outside the reference plan [{start}, {end}]")]
    OutsidePlan { time: f64, start: f64, end: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub(crate) fn fmt_state(x: &nalgebra::DVector<f64>) -> String {
    use core::fmt::Write;
    let mut s = String::from("(");
    for (i, v) in x.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        let _ = write!(s, "{v}");
    }
    s.push(')');
    s
}
