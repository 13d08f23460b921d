//! Non-Markovianity quantifiers: the deviation-from-semigroup measure,
//! trace-distance backflow, CP-divisibility scans and Holevo curves.

mod divisibility;
mod holevo;
mod sss;

pub use divisibility::{
    blp_measure, cp_divisibility_scan, divisibility_boundary, uniform_grid, BlpResult, BoundaryEstimate,
    DivisibilityReport, StepReport, StepStatus,
};
pub use holevo::{holevo_curve, holevo_dephasing_closed_form, HolevoEnsemble};
pub use sss::{
    sss_choi_form, sss_measure, sss_rate_form, zeta_of, ChoiDetails, MeasureForm, MeasureResult, ReferenceMode,
    SssConfig,
};
