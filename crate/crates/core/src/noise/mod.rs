//! NISQ noise emulation and error mitigation.
//!
//! Noise is sampled as stochastic Pauli trajectories on the statevector;
//! averaging over trajectories recovers the depolarizing channel.

mod dd;
mod model;
mod readout;
mod trajectory;
mod twirl;
mod zne;

pub use dd::{insert_dd, MIN_DD_WINDOW};
pub use model::{DdScheme, FitKind, MitigationConfig, NoiseModel, ReadoutMitigation, TwirlingConfig, ZneConfig};
pub use readout::{
    apply_confusion, confusion_from_noise, invert_confusion, readout_mitigate, ConfusionMatrix, QuasiDistribution,
    SINGULAR_TOLERANCE,
};
pub use trajectory::{mean_infidelity, noisy_expectation, over_rotate_zz, run_noisy, TrajectorySimulator};
pub use twirl::{twirl, twirl_once};
pub use zne::{extrapolate, extrapolate_points, fold_global, zne_run, FitResult, ZnePoint, ZneResult};
