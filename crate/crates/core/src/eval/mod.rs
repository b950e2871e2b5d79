//! Evaluation metrics and the sliding-window baseline.

mod ari;
mod change_point;
mod sliding_window;
mod tracking;

pub use ari::{adjusted_rand_index, ari_assigned, drift_ratio, record_ari, steady_only_ari};
pub use change_point::{
    change_point_f1, detections, mean_recognition_lag, ChangeReport, DetectionSource,
};
pub use sliding_window::SlidingWindowChain;
pub use tracking::{abs_error, track_emc, track_mcsw, tracking_error, TrackingReport};
