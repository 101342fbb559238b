use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The integrator output hit a supply rail: the drive grew faster than the loop can fold.
    #[error("integrator saturated at the {rail_v} V rail at t = {t_s} s")]
    RailSaturation { t_s: f64, rail_v: f64 },

    #[error(
        "fold loop oscillates at t = {t_s} s ({bounces} back-to-back folds); hysteresis {hysteresis_v} V is too small"
    )]
    Oscillation {
        t_s: f64,
        bounces: usize,
        hysteresis_v: f64,
    },

    #[error("{marked} of {total} samples flagged as reset samples; the fold transitions are not brief")]
    DegenerateInput { marked: usize, total: usize },

    #[error("stage `{stage}` failed: {source} [config: {config}]")]
    Stage {
        stage: &'static str,
        config: String,
        #[source]
        source: Box<Error>,
    },
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidArgument(msg()))
    }
}
