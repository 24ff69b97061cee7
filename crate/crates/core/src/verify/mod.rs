//! Exact-diagonalization oracle and convergence studies.

mod exact;
mod fit;
mod observable;
mod output;
mod study;

pub use exact::{cluster, exact_spectrum, ClusterReport, ExactLevel, ExactSpectrum};
pub use fit::{fit_slope, SlopeFit, MIN_FIT_POINTS};
pub use observable::{observable_expansion, Observable, ObservableSeries};
pub use output::{format_float, study_csv, study_summary_json, to_json};
pub use study::{
    energy_convergence_study, one_body_observable, projector_convergence_study, two_body_observable,
    wavefunction_convergence_study, ExactData, ProjectorStudy, StudyPoint, StudyReport, StudySetup, EXACT_ZERO,
    MIN_R2,
};
