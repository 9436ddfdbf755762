use thiserror::Error;

use crate::channel::Topology;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid antenna configuration: M={m}, N={n}")]
    InvalidConfig { m: usize, n: usize },

    #[error("cannot reduce ({m}, {n}) antennas to ({m_new}, {n_new})")]
    Reduction { m: usize, n: usize, m_new: usize, n_new: usize },

    #[error("{topology:?} alignment system needs (M, N, d) = ({}, {}, {d}) but got ({m}, {n}, {d})", .base.0 * .d, .base.1 * .d)]
    WrongRatio {
        topology: Topology,
        m: usize,
        n: usize,
        d: usize,
        base: (usize, usize),
    },

    #[error("{what}: rank {rank}, expected {expected}")]
    RankDeficient {
        what: String,
        rank: usize,
        expected: usize,
    },

    #[error("{what}: ill-conditioned draw (singular value gap {gap:.3e})")]
    IllConditioned { what: String, gap: f64 },

    #[error("{what}: no usable draw after {attempts} attempts")]
    RetriesExhausted { what: String, attempts: usize },

    #[error("pair ({i},{j}) intersection has dimension {dim}, need {needed}")]
    InsufficientIntersection {
        i: u8,
        j: u8,
        dim: usize,
        needed: usize,
    },

    #[error("demand d={d} is infeasible: {reason}")]
    Infeasible { d: usize, reason: String },

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
