//! Curves whose boundary image lies in a proper subsphere, and the resulting
//! concentration of translates on the immersed modular surface inside the
//! Picard manifold.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve_engine::{
    calibrate, default_battery, discrepancy, translate_curve, AnalyticCurve, EmpiricalMeasure,
    Observable, Sample, TranslateOptions,
};
use crate::error::{invalid, Result};
use crate::group::{
    make_flow, stereographic, unipotent, wrap_angle, BoundaryPoint, Direction, FrameCoordinate,
    GroupElement, Model, UpperSpacePoint,
};
use crate::lattice::{haar_sample, reduce, LatticeTag, QuotientPoint};

/// Tolerance for fits of constructed point sets.
pub const CONSTRUCTED_TOLERANCE: f64 = 1e-8;
/// Tolerance for fits of sampled curve images.
pub const SAMPLED_TOLERANCE: f64 = 1e-4;

/// The smallest affine flat containing a point cloud on `S^{n-1}` up to a
/// tolerance. Its intersection with the sphere is a subsphere of dimension
/// `dimension`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsphereFit {
    pub dimension: usize,
    /// Dimension of the fitted affine flat.
    pub flat_dimension: usize,
    pub center: Vec<f64>,
    /// Orthonormal directions spanning the flat.
    pub span: Vec<Vec<f64>>,
    /// Orthonormal normals to the flat.
    pub normals: Vec<Vec<f64>>,
    pub residual: f64,
    /// `flat_residuals[k]`: largest distance to the best `k`-flat.
    pub flat_residuals: Vec<f64>,
}

impl SubsphereFit {
    /// Whether the points span the whole sphere.
    pub fn is_full(&self) -> bool {
        self.flat_dimension == self.center.len()
    }
}

/// Principal-component fit of the smallest affine flat within `tol` of all
/// points.
pub fn fit_min_subsphere(points: &[Vec<f64>], tol: f64) -> Result<SubsphereFit> {
    if points.len() < 2 {
        return Err(invalid("a subsphere fit needs at least two points"));
    }
    let n = points[0].len();
    if n < 2 || points.iter().any(|p| p.len() != n) {
        return Err(invalid("points must share one ambient dimension of at least 2"));
    }
    if let Some(p) = points
        .iter()
        .find(|p| (p.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs() > 1e-9)
    {
        return Err(invalid(format!("point {p:?} is not on the unit sphere")));
    }
    if !(tol >= 0.0) {
        return Err(invalid("tolerance must be nonnegative"));
    }
    let count = points.len() as f64;
    let center: Vec<f64> = (0..n)
        .map(|i| points.iter().map(|p| p[i]).sum::<f64>() / count)
        .collect();
    let centered: Vec<DVector<f64>> = points
        .iter()
        .map(|p| DVector::from_iterator(n, p.iter().zip(&center).map(|(x, c)| x - c)))
        .collect();
    let mut cov = DMatrix::<f64>::zeros(n, n);
    for v in &centered {
        cov += v * v.transpose();
    }
    let eigen = SymmetricEigen::new(cov / count);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]));
    let axes: Vec<DVector<f64>> = order
        .iter()
        .map(|&i| eigen.eigenvectors.column(i).into_owned())
        .collect();
    // distance to the k-flat is the norm of the component along axes k..n
    let flat_residuals: Vec<f64> = (0..=n)
        .map(|k| {
            centered
                .iter()
                .map(|v| axes[k..].iter().map(|a| a.dot(v).powi(2)).sum::<f64>().sqrt())
                .fold(0.0, f64::max)
        })
        .collect();
    let flat_dimension = (0..=n).find(|&k| flat_residuals[k] <= tol).unwrap_or(n);
    let to_vec = |a: &DVector<f64>| a.iter().copied().collect::<Vec<f64>>();
    Ok(SubsphereFit {
        dimension: flat_dimension.max(1) - 1,
        flat_dimension,
        center,
        span: axes[..flat_dimension].iter().map(to_vec).collect(),
        normals: axes[flat_dimension..].iter().map(to_vec).collect(),
        residual: flat_residuals[flat_dimension],
        flat_residuals,
    })
}

/// Stereographic images of `φ(s)` on a midpoint grid, as boundary points of
/// the given model.
pub fn curve_visual_image(c: &AnalyticCurve, model: Model, count: usize) -> Result<Vec<Vec<f64>>> {
    if c.model() == Model::Complex && model == Model::Real {
        return Err(invalid("a curve in R² has no image on the circle"));
    }
    if count == 0 {
        return Err(invalid("count must be at least 1"));
    }
    let (a, b) = c.interval();
    (0..count)
        .map(|j| {
            let s = a + (j as f64 + 0.5) * (b - a) / count as f64;
            let v = c.eval(s)?;
            let p = Complex64::new(v[0], v.get(1).copied().unwrap_or(0.0));
            Ok(stereographic(model, BoundaryPoint::Finite(p)))
        })
        .collect()
}

/// The immersed totally geodesic submanifolds realized here.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubmanifoldTag {
    /// The vertical plane over `R`, a copy of `H²` in `H³`.
    RealPlaneInH3,
}

/// Hyperbolic distance from a point of `H³` to the vertical plane over `R`.
pub fn plane_distance_h3(p: &UpperSpacePoint) -> f64 {
    (p.horizontal.im.abs() / p.height).asinh()
}

/// Reinterprets a frame over the real plane as a frame of `H²` and reduces it
/// for the modular group.
pub fn restrict_to_plane(q: &QuotientPoint) -> Result<QuotientPoint> {
    let frame = q.frame();
    let v = frame.direction.as_vector();
    let modular = FrameCoordinate {
        base: UpperSpacePoint {
            horizontal: Complex64::new(frame.base.horizontal.re, 0.0),
            height: frame.base.height,
        },
        direction: Direction::Angle(wrap_angle(v[2].atan2(v[0]))),
    };
    reduce(LatticeTag::Modular, &modular)
}

/// Haar references used by the degenerate experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct DegenerateReferences {
    pub modular_battery: Vec<Observable>,
    pub picard_plane_mean: f64,
    pub picard_plane_std_error: f64,
}

impl DegenerateReferences {
    pub fn build(haar_count: usize, seed: u64, height_cap: f64) -> Result<Self> {
        let modular = haar_sample(LatticeTag::Modular, haar_count, seed, height_cap)?;
        let mut modular_battery = default_battery(LatticeTag::Modular);
        calibrate(&mut modular_battery, &modular)?;
        let picard = haar_sample(LatticeTag::Picard, haar_count, seed.wrapping_add(1), height_cap)?;
        let n = picard.points.len() as f64;
        let values: Vec<f64> = picard.points.iter().map(|q| plane_distance_h3(q.base())).collect();
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        // points above the cap lie within asinh(1/(2·cap)) of the plane; counted as 0
        let keep = 1.0 - picard.tail_mass;
        Ok(DegenerateReferences {
            modular_battery,
            picard_plane_mean: keep * mean,
            picard_plane_std_error: keep * (var / n).sqrt(),
        })
    }
}

/// JSON record; the first three fields are the headline statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegenerateReport {
    pub max_plane_distance: f64,
    pub modular_discrepancy: f64,
    pub picard_separation_sigma: f64,
    pub t: f64,
    pub count: usize,
    pub modular_error_bar: f64,
    pub max_imaginary_entry: f64,
    pub empirical_plane_mean: f64,
    pub picard_plane_mean: f64,
}

/// Translates a real curve in the Picard quotient and compares the result
/// with the modular-surface and Picard Haar references.
pub fn degenerate_experiment(
    c: &AnalyticCurve,
    t: f64,
    count: usize,
    seed: u64,
    references: &DegenerateReferences,
) -> Result<DegenerateReport> {
    if c.is_constant() {
        return Err(invalid("constant curve has a single boundary point"));
    }
    if c.model() != Model::Real {
        return Err(invalid("the degenerate experiment needs a real-valued curve"));
    }
    let base = GroupElement::identity(Model::Complex);
    let m = translate_curve(c, &base, LatticeTag::Picard, t, count, seed, &TranslateOptions::default())?;
    let flow = make_flow(Model::Complex, t);
    let max_imaginary_entry = m
        .samples
        .par_iter()
        .map(|s| {
            let g = flow * unipotent(Model::Complex, c.point(s.s.unwrap_or(c.interval().0))?);
            Ok(g.entries().iter().flatten().map(|z| z.im.abs()).fold(0.0, f64::max))
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let distances: Vec<f64> = m.samples.iter().map(|s| plane_distance_h3(s.point.base())).collect();
    let max_plane_distance = distances.iter().copied().fold(0.0, f64::max);
    let empirical_plane_mean = m
        .samples
        .iter()
        .zip(&distances)
        .map(|(s, d)| s.weight * d)
        .sum::<f64>();
    let restricted = EmpiricalMeasure {
        samples: m
            .samples
            .par_iter()
            .map(|s| {
                Ok(Sample {
                    point: restrict_to_plane(&s.point)?,
                    weight: s.weight,
                    s: s.s,
                    exact: s.exact,
                })
            })
            .collect::<Result<Vec<_>>>()?,
        lattice: LatticeTag::Modular,
        base: GroupElement::identity(Model::Real),
        ..m.clone()
    };
    let report = discrepancy(&restricted, &references.modular_battery)?;
    let empirical_var = m
        .samples
        .iter()
        .zip(&distances)
        .map(|(s, d)| s.weight * (d - empirical_plane_mean).powi(2))
        .sum::<f64>();
    let empirical_se = (empirical_var / m.len() as f64).sqrt();
    let sigma = references.picard_plane_std_error.hypot(empirical_se);
    Ok(DegenerateReport {
        max_plane_distance,
        modular_discrepancy: report.max_defect,
        picard_separation_sigma: (references.picard_plane_mean - empirical_plane_mean) / sigma,
        t,
        count,
        modular_error_bar: report.error_bar,
        max_imaginary_entry,
        empirical_plane_mean,
        picard_plane_mean: references.picard_plane_mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::hyperbolic_distance;
    use proptest::prelude::*;

    fn rotation(seed: u64) -> [[f64; 3]; 3] {
        // Rodrigues rotation about a seed-dependent axis
        let a = seed as f64 * 0.731 + 0.2;
        let axis = [a.cos() * 0.6, a.sin() * 0.6, 0.8];
        let angle = 0.3 + seed as f64 * 1.1;
        let (s, c) = angle.sin_cos();
        let [x, y, z] = axis;
        [
            [c + x * x * (1.0 - c), x * y * (1.0 - c) - z * s, x * z * (1.0 - c) + y * s],
            [y * x * (1.0 - c) + z * s, c + y * y * (1.0 - c), y * z * (1.0 - c) - x * s],
            [z * x * (1.0 - c) - y * s, z * y * (1.0 - c) + x * s, c + z * z * (1.0 - c)],
        ]
    }

    fn rotate(r: &[[f64; 3]; 3], p: &[f64]) -> Vec<f64> {
        r.iter().map(|row| row.iter().zip(p).map(|(a, b)| a * b).sum()).collect()
    }

    fn great_circle(count: usize) -> Vec<Vec<f64>> {
        (0..count)
            .map(|j| {
                let t = j as f64 * 0.37;
                vec![t.cos(), 0.0, t.sin()]
            })
            .collect()
    }

    #[test]
    fn coincident_points_fit_a_point() {
        let p = vec![0.6, 0.0, 0.8];
        let fit = fit_min_subsphere(&[p.clone(), p.clone(), p], CONSTRUCTED_TOLERANCE).unwrap();
        assert_eq!(fit.dimension, 0);
        assert!(fit.residual <= 1e-15);
    }

    #[test]
    fn great_circle_fits_a_circle() {
        let fit = fit_min_subsphere(&great_circle(40), CONSTRUCTED_TOLERANCE).unwrap();
        assert_eq!(fit.dimension, 1);
        assert!(fit.residual <= 1e-9);
        assert!(!fit.is_full());
    }

    #[test]
    fn parabola_image_is_full() {
        let c = AnalyticCurve::new((0.0, 1.0), vec![vec![0.0, 1.0], vec![0.0, 0.0, 1.0]]).unwrap();
        let image = curve_visual_image(&c, Model::Complex, 500).unwrap();
        let fit = fit_min_subsphere(&image, SAMPLED_TOLERANCE).unwrap();
        assert_eq!(fit.dimension, 2);
        assert!(fit.is_full());
        assert!(fit.flat_residuals[2] > 1e-3);
    }

    #[test]
    fn real_curve_image_is_a_circle() {
        let c = AnalyticCurve::new((0.0, 1.0), vec![vec![0.0, 1.0, -3.0]]).unwrap();
        let image = curve_visual_image(&c, Model::Complex, 500).unwrap();
        let fit = fit_min_subsphere(&image, SAMPLED_TOLERANCE).unwrap();
        assert_eq!(fit.dimension, 1);
        // a line in the plane lies on a circle through the pole as well
        let line = AnalyticCurve::new((0.0, 1.0), vec![vec![0.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let fit = fit_min_subsphere(&curve_visual_image(&line, Model::Complex, 500).unwrap(), SAMPLED_TOLERANCE).unwrap();
        assert_eq!(fit.dimension, 1);
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert!(fit_min_subsphere(&[vec![1.0, 0.0, 0.0]], 1e-8).is_err());
        assert!(fit_min_subsphere(&[vec![1.0, 0.0, 0.0], vec![0.5, 0.0, 0.0]], 1e-8).is_err());
        assert!(fit_min_subsphere(&[vec![1.0, 0.0, 0.0], vec![1.0, 0.0]], 1e-8).is_err());
    }

    #[test]
    fn plane_distance_examples() {
        let on = UpperSpacePoint::new(Complex64::new(0.3, 0.0), 2.0).unwrap();
        assert_eq!(plane_distance_h3(&on), 0.0);
        let p = UpperSpacePoint::new(Complex64::new(0.0, 1.0), 1.0).unwrap();
        assert!((plane_distance_h3(&p) - 0.881_373_587_019_543).abs() < 1e-12);
    }

    /// Minimizes the distance to points `(x, 0, h)` of the plane by nested
    /// golden-section search.
    fn distance_to_plane_oracle(p: &UpperSpacePoint) -> f64 {
        fn golden(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
            let g = (5f64.sqrt() - 1.0) / 2.0;
            for _ in 0..200 {
                let c = b - g * (b - a);
                let d = a + g * (b - a);
                if f(c) < f(d) {
                    b = d;
                } else {
                    a = c;
                }
            }
            f((a + b) / 2.0)
        }
        let at = |x: f64, ln_h: f64| {
            let q = UpperSpacePoint::new(Complex64::new(x, 0.0), ln_h.exp()).unwrap();
            hyperbolic_distance(p, &q)
        };
        let x0 = p.horizontal.re;
        golden(|x| golden(|lh| at(x, lh), p.height.ln() - 10.0, p.height.ln() + 10.0), x0 - 10.0, x0 + 10.0)
    }

    #[test]
    fn plane_distance_matches_minimization() {
        for (x, y, h) in [(0.0, 1.0, 1.0), (0.3, -0.4, 0.7), (-2.0, 0.05, 3.0), (1.0, 2.5, 0.2)] {
            let p = UpperSpacePoint::new(Complex64::new(x, y), h).unwrap();
            assert!((plane_distance_h3(&p) - distance_to_plane_oracle(&p)).abs() < 1e-7);
        }
    }

    proptest! {
        #[test]
        fn fit_is_rotation_equivariant(seed in 0u64..1000, kind in 0usize..3) {
            let pts = match kind {
                0 => great_circle(30),
                1 => (0..30).map(|j| { let t = j as f64 * 0.2; vec![0.6 * t.cos(), 0.6 * t.sin(), 0.8] }).collect(),
                _ => curve_visual_image(&AnalyticCurve::new((0.0, 1.0), vec![vec![0.0, 1.0], vec![0.0, 0.0, 1.0]]).unwrap(), Model::Complex, 50).unwrap(),
            };
            let r = rotation(seed);
            let rotated: Vec<Vec<f64>> = pts.iter().map(|p| rotate(&r, p)).collect();
            let a = fit_min_subsphere(&pts, CONSTRUCTED_TOLERANCE).unwrap();
            let b = fit_min_subsphere(&rotated, CONSTRUCTED_TOLERANCE).unwrap();
            prop_assert_eq!(a.dimension, b.dimension);
            prop_assert!((a.residual - b.residual).abs() <= 1e-9);
        }

        #[test]
        fn plane_distance_is_invariant_under_real_subgroup(
            a in 0.3f64..3.0, b in -2.0f64..2.0, c in -2.0f64..2.0,
            x in -2.0f64..2.0, y in -2.0f64..2.0, h in 0.1f64..5.0,
        ) {
            let d = (1.0 + b * c) / a;
            let g = GroupElement::from_real(a, b, c, d).unwrap().to_complex();
            let p = UpperSpacePoint::new(Complex64::new(x, y), h).unwrap();
            let q = g.act(&p);
            prop_assert!((plane_distance_h3(&p) - plane_distance_h3(&q)).abs() <= 1e-9);
            prop_assert!(plane_distance_h3(&p) >= 0.0);
            prop_assert_eq!(plane_distance_h3(&p) == 0.0, y == 0.0);
        }
    }

    #[test]
    fn experiment_stays_on_the_plane() {
        let refs = DegenerateReferences::build(200_000, 5, 50.0).unwrap();
        let c = AnalyticCurve::new((0.0, 1.0), vec![vec![0.0, 1.0]]).unwrap();
        let r = degenerate_experiment(&c, 8.0, 20_000, 0, &refs).unwrap();
        assert!(r.max_plane_distance <= 1e-6);
        assert!(r.max_imaginary_entry <= 1e-9);
        assert!(r.modular_discrepancy < 0.05);
        assert!(r.picard_separation_sigma > 5.0);
        let flat = AnalyticCurve::constant((0.0, 1.0), &[0.2]).unwrap();
        assert!(degenerate_experiment(&flat, 1.0, 10, 0, &refs).is_err());
        let plane = AnalyticCurve::new((0.0, 1.0), vec![vec![0.0, 1.0], vec![0.0, 0.0, 1.0]]).unwrap();
        assert!(degenerate_experiment(&plane, 1.0, 10, 0, &refs).is_err());
    }

    #[test]
    fn restricted_points_agree_with_modular_translate() {
        let c = AnalyticCurve::new((0.0, 1.0), vec![vec![0.0, 1.0]]).unwrap();
        let picard = translate_curve(&c, &GroupElement::identity(Model::Complex), LatticeTag::Picard, 5.0, 200, 0, &TranslateOptions::default()).unwrap();
        let modular = translate_curve(&c, &GroupElement::identity(Model::Real), LatticeTag::Modular, 5.0, 200, 0, &TranslateOptions::default()).unwrap();
        for (p, m) in picard.samples.iter().zip(&modular.samples) {
            let r = restrict_to_plane(&p.point).unwrap();
            assert!((r.base().horizontal - m.point.base().horizontal).norm() < 1e-9);
            assert!((r.base().height - m.point.base().height).abs() < 1e-9);
        }
    }
}
