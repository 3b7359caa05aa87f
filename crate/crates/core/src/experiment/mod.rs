//! Configuration-driven experiment runner: a fixed registry, TOML configs
//! with line-precise errors, and CSV/JSON report emission.

mod config;
mod registry;
mod report;
mod run;

pub use config::{
    load_config, parse_config, CurveSection, DegenerateConfig, DegenerateTolerances,
    EquidistributionConfig, EquidistributionTolerances, ExperimentConfig, FamilySection,
    GoodFunctionConfig, HaarCalibrationConfig, HaarCalibrationTolerances, HaarSection,
    NondivergenceConfig, NondivergenceTolerances, RepConfig, TorusConfig, TorusTolerances,
    WInvarianceConfig, WInvarianceTolerances,
};
pub use registry::{list_experiments, ExperimentKind, RegistryEntry};
pub use report::{PlotData, Relation, Report, ReportRow, Summary, REPORT_FILE, SUMMARY_FILE};
pub use run::{run_default, run_experiment};
