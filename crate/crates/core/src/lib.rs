//! Numerical laboratory for anisotropic Trudinger-Moser inequalities:
//! Finsler gauges and their sharp constants, rearrangement and
//! symmetrization of grid functions, radial profile functionals, the
//! weighted sequence minimization, and supremum searches with sharpness
//! sweeps along concentrating sequences.

pub mod error;
pub mod functionals;
pub mod gauge;
pub mod io;
pub mod numeric;
pub mod profile;
pub mod rearrange;
pub mod seqopt;
pub mod supsearch;

pub use error::{Error, Result};
pub use functionals::{
    ConstraintKind, FunctionalValue, Inequality, IntegrandVariant, TmParams,
};
pub use gauge::{Gauge, GaugeConstants, GaugeSpec};
pub use profile::RadialProfile;
pub use rearrange::{DecreasingRearrangement, SampledFunction};
pub use seqopt::{MuResult, SeqVector};
pub use supsearch::{GrowthReport, ProfileFamily, SupEstimate};
