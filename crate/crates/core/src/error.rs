use thiserror::Error;

/// Errors raised by scenario construction and the optimization stages.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("config file: {0}")]
    ConfigFile(String),

    #[error("degenerate geometry in slot {slot}: {link} distance is zero")]
    DegenerateGeometry { slot: usize, link: &'static str },

    #[error("slot {slot}: energy threshold unreachable (reflection upper bound {hi} below lower bound {lo})")]
    EnergyInfeasible { slot: usize, lo: f64, hi: f64 },

    #[error("slot {slot}: no kinematically feasible position")]
    InfeasibleKinematics { slot: usize },

    #[error("baseline infeasible: uniform speed {speed} m/s outside [{v_min}, {v_max}]")]
    BaselineInfeasible { speed: f64, v_min: f64, v_max: f64 },

    #[error("plan has {got} slots, expected {expected}")]
    SlotCountMismatch { expected: usize, got: usize },

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("oracle: {0}")]
    Oracle(String),

    #[error("writing results: {0}")]
    Output(String),
}

pub type Result<T> = std::result::Result<T, Error>;
