use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error};

/// The fixed set of runnable experiments, in listing order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    CoreEquidistributionN2,
    CoreEquidistributionN3,
    TorusSweep,
    WInvariance,
    NondivergenceSweep,
    RepVerification,
    GoodFunction,
    DegeneratePicard,
    HaarCalibration,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::CoreEquidistributionN2,
        ExperimentKind::CoreEquidistributionN3,
        ExperimentKind::TorusSweep,
        ExperimentKind::WInvariance,
        ExperimentKind::NondivergenceSweep,
        ExperimentKind::RepVerification,
        ExperimentKind::GoodFunction,
        ExperimentKind::DegeneratePicard,
        ExperimentKind::HaarCalibration,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::CoreEquidistributionN2 => "core_equidistribution_n2",
            ExperimentKind::CoreEquidistributionN3 => "core_equidistribution_n3",
            ExperimentKind::TorusSweep => "torus_sweep",
            ExperimentKind::WInvariance => "w_invariance",
            ExperimentKind::NondivergenceSweep => "nondivergence_sweep",
            ExperimentKind::RepVerification => "rep_verification",
            ExperimentKind::GoodFunction => "good_function",
            ExperimentKind::DegeneratePicard => "degenerate_picard",
            ExperimentKind::HaarCalibration => "haar_calibration",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ExperimentKind::CoreEquidistributionN2 => {
                "discrepancy of geodesic translates of a curve on the modular surface over a t-sweep"
            }
            ExperimentKind::CoreEquidistributionN3 => {
                "discrepancy of geodesic translates of a planar curve in the Picard 3-manifold"
            }
            ExperimentKind::TorusSweep => "Fourier coefficients of dilated curves on the flat torus",
            ExperimentKind::WInvariance => {
                "invariance defect of normalized translates under a unipotent direction"
            }
            ExperimentKind::NondivergenceSweep => {
                "mass of translated curve measures below a cusp height"
            }
            ExperimentKind::RepVerification => {
                "exact determinant identity and norm inequalities in SL(2) irreducibles"
            }
            ExperimentKind::GoodFunction => "(C, alpha)-good fits for polynomial families",
            ExperimentKind::DegeneratePicard => {
                "real curve in the Picard manifold: concentration on the modular surface"
            }
            ExperimentKind::HaarCalibration => {
                "self-consistency of Haar reference samples and observable references"
            }
        }
    }

    /// The statement an experiment exercises.
    pub fn exercises(self) -> &'static str {
        match self {
            ExperimentKind::CoreEquidistributionN2 => {
                "expanding translates of a curve not contained in a subsphere equidistribute (n = 2)"
            }
            ExperimentKind::CoreEquidistributionN3 => {
                "expanding translates of a curve not contained in a sphere or affine line equidistribute (n = 3)"
            }
            ExperimentKind::TorusSweep => {
                "dilates of a curve outside rational hyperplanes equidistribute on T^n"
            }
            ExperimentKind::WInvariance => {
                "limits of normalized translates are invariant under u(s w0)"
            }
            ExperimentKind::NondivergenceSweep => {
                "translated curve measures do not escape into the cusp"
            }
            ExperimentKind::RepVerification => {
                "det B = t^(r(m-r+1)) and max(|v+|, |(uv)+0|) >= kappa |v|"
            }
            ExperimentKind::GoodFunction => {
                "|{t in J : |xi(t)| < r}| <= C (r / sup_J |xi|)^alpha |J|"
            }
            ExperimentKind::DegeneratePicard => {
                "curves with boundary image in a subsphere concentrate on the totally geodesic submanifold"
            }
            ExperimentKind::HaarCalibration => "reference measure sanity",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
                invalid(format!("unknown experiment `{s}`; expected one of {}", names.join(", ")))
            })
    }
}

/// One line of the registry listing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RegistryEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub exercises: &'static str,
}

pub fn list_experiments() -> Vec<RegistryEntry> {
    ExperimentKind::ALL
        .iter()
        .map(|k| RegistryEntry {
            name: k.name(),
            description: k.description(),
            exercises: k.exercises(),
        })
        .collect()
}
