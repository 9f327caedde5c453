//! Trajectory generation, controller tracking, recorded-length replay,
//! and tracking-error statistics.

mod io;
mod spline;
mod stats;
mod track;

pub use io::{
    read_length_log_csv, read_record_csv, read_trajectory_csv, replay_recorded_lengths,
    write_record_csv, write_trajectory_csv, LengthLog,
};
pub use spline::{cubic_spline_trajectory, random_waypoints, TrajSample, Trajectory};
pub use stats::{error_stats, ErrorStats};
pub use track::{track, Controller, TrackOptions, TrackingRecord};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrajError {
    #[error("speed_max must be > 0 (got {0})")]
    InfeasibleSpeed(f64),
    #[error("waypoint count must be >= {min} (got {got})")]
    InvalidCount { min: usize, got: usize },
    #[error("waypoint {index} lies outside the workspace")]
    WaypointOutsideWorkspace { index: usize },
    #[error("dt must be > 0 (got {0})")]
    BadDt(f64),
    #[error("empty tracking record")]
    EmptyRecord,
    #[error("record has no reference positions to compare against")]
    MissingReference,
    #[error("malformed CSV at line {line}: {reason}")]
    MalformedCsv { line: usize, reason: String },
    #[error("non-monotone time at line {line}: {t_prev} -> {t}")]
    NonMonotoneTime { line: usize, t_prev: f64, t: f64 },
    #[error(transparent)]
    Sim(#[from] crate::sim::SimError),
    #[error(transparent)]
    Td3(#[from] crate::td3::Td3Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
