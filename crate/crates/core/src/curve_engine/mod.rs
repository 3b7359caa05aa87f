//! Translated curve measures on the quotient and the statistics computed from
//! them.

mod curve;
mod measure;
mod observable;

pub use curve::{default_w0, normalizer_z, AnalyticCurve, ZetaPart, DERIVATIVE_EPS};
pub use measure::{
    discrepancy, nondivergence_fraction, translate_curve, w_invariance_defect, DefectReport,
    DiscrepancyReport, EmpiricalMeasure, Moments, ObservableDiscrepancy, Sample, SamplingRule,
    TranslateOptions,
};
pub use observable::{calibrate, default_battery, Observable, ObservableKind, Reference};
