//! Return probability, site magnetization and modified OTOCs, estimated
//! exactly or from shots on a noiseless or noisy backend.

mod backend;
mod cue;
mod measures;
mod otoc;
mod series;

pub use backend::{
    measure_noisy, measurement_basis, transpile, Backend, EstimationMode, Executor, GateCounts, NoisyBackend, Sample,
    StepMeasurement, TranspileConfig, Transpiled,
};
pub use cue::{sample_cue_2x2, sample_cue_local};
pub use measures::{magnetization_series, return_probability};
pub use otoc::{modified_otoc, unitary_seed, ExcitedState, OtocConfig, SitePauli};
pub use series::{TimeSeries, CSV_COLUMNS};
