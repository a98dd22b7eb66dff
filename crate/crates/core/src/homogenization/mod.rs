//! Homogenization of the oscillating potential: mean values, weak* probes,
//! the limit operator, h-sweeps and the inverse-eigenvalue bound.

pub mod bounds;
pub mod sweep;
pub mod weak;

pub use bounds::{glimit_consistency, inverse_bound_check, BoundPoint, InverseBoundReport, LimitReport, SequencePair};
pub use sweep::{
    assemble_homogenized, converged, decreasing_within, fit_loglog, gap_sweep, srs_from_sweep, srs_study,
    ConvergenceRecord, GapSweep, Probe, ResolventSample, SrsReport, SrsSeries, Subspace, SweepSetup, DECREASE_TOL,
    EIGENSPACE_TOL, POINT_CAP,
};
pub use weak::{mean_value, period_average, weak_star_probe, TestFunction};
