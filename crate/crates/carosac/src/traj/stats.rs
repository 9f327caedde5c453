//! Tracking-error statistics: per-axis RMSE and MAE plus the mean
//! Euclidean error and the per-sample error series.

use serde::Serialize;

use super::track::TrackingRecord;
use super::TrajError;

#[derive(Debug, Clone, Serialize)]
pub struct ErrorStats {
    pub rmse_xyz: [f64; 3],
    pub mae_xyz: [f64; 3],
    pub mean_euclidean: f64,
    pub samples: usize,
    #[serde(skip)]
    pub per_sample_euclidean: Vec<f64>,
}

pub fn error_stats(rec: &TrackingRecord) -> Result<ErrorStats, TrajError> {
    if rec.len() == 0 {
        return Err(TrajError::EmptyRecord);
    }
    let reference = rec.reference.as_ref().ok_or(TrajError::MissingReference)?;
    let n = rec.achieved.len() as f64;
    let mut sq = [0.0; 3];
    let mut abs = [0.0; 3];
    let mut per_sample = Vec::with_capacity(rec.achieved.len());
    for (r, a) in reference.iter().zip(rec.achieved.iter()) {
        let d = a.0 - r.0;
        for k in 0..3 {
            sq[k] += d[k] * d[k];
            abs[k] += d[k].abs();
        }
        per_sample.push(d.norm());
    }
    Ok(ErrorStats {
        rmse_xyz: std::array::from_fn(|k| (sq[k] / n).sqrt()),
        mae_xyz: std::array::from_fn(|k| abs[k] / n),
        mean_euclidean: per_sample.iter().sum::<f64>() / n,
        samples: rec.achieved.len(),
        per_sample_euclidean: per_sample,
    })
}

impl ErrorStats {
    /// Summary JSON (stable field order, exact float round-trip).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain struct serializes")
    }
}
