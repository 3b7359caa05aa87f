//! Matrix models of the isometry groups of the hyperbolic plane and hyperbolic
//! 3-space.
//!
//! Both models use 2×2 matrices of determinant one. The real model
//! `PSL(2,R)` acts on the upper half-plane, the complex model `PSL(2,C)` on
//! upper half-space. Points of `R^{n-1}` (the Lie algebra of the expanding
//! horospherical subgroup, and the finite part of the ideal boundary) are
//! carried as a [`Complex64`] whose imaginary part is zero in the real model.
//!
//! # Quotient convention
//!
//! Experiments are phrased for points `g·Γ` of `G/Γ` with the flow acting on
//! the left. Computation happens in `Γ\G`: the point `gΓ` is stored as the
//! coset `Γg⁻¹`, whose base point `g⁻¹·o` is reduced by the left Möbius action
//! of `Γ`. Under this dictionary left translation by `h` on `G/Γ` becomes right
//! translation by `h⁻¹` on `Γ\G`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Determinant drift tolerated after a product before renormalizing.
pub const DET_TOLERANCE: f64 = 1e-12;

/// Compensated dot product (twice the working precision).
fn dot2(terms: &[(f64, f64)]) -> f64 {
    let mut sum = 0.0;
    let mut err = 0.0;
    for &(x, y) in terms {
        let p = x * y;
        let pe = x.mul_add(y, -p);
        let t = sum + p;
        let z = t - sum;
        err += (sum - (t - z)) + (p - z) + pe;
        sum = t;
    }
    sum + err
}

/// Scale-invariant threshold for the Bruhat big-cell test.
pub const BRUHAT_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// `PSL(2,R)` acting on `H²`.
    Real,
    /// `PSL(2,C)` acting on `H³`.
    Complex,
}

impl Model {
    /// Dimension `n` of the hyperbolic space.
    pub fn dimension(self) -> usize {
        match self {
            Model::Real => 2,
            Model::Complex => 3,
        }
    }

    /// Dimension of the horospherical subgroup, `n - 1`.
    pub fn boundary_dimension(self) -> usize {
        self.dimension() - 1
    }
}

/// Reads a point of `R^{n-1}` given as a slice of length 1 or 2.
pub fn horizontal_from_slice(v: &[f64]) -> Result<(Model, Complex64)> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(invalid(format!("non-finite coordinate in {v:?}")));
    }
    match v {
        [x] => Ok((Model::Real, Complex64::new(*x, 0.0))),
        [x, y] => Ok((Model::Complex, Complex64::new(*x, *y))),
        _ => Err(invalid(format!(
            "expected 1 or 2 coordinates, got {}",
            v.len()
        ))),
    }
}

/// An element of `PSL(2,R)` or `PSL(2,C)`, stored as a representative matrix
/// of determinant one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupElement {
    entries: [[Complex64; 2]; 2],
    model: Model,
}

impl GroupElement {
    /// Builds an element from a matrix whose determinant is one up to `1e-8`.
    pub fn new(model: Model, entries: [[Complex64; 2]; 2]) -> Result<Self> {
        let flat = entries.iter().flatten();
        if flat.clone().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid("matrix entries must be finite"));
        }
        if model == Model::Real && flat.clone().any(|z| z.im != 0.0) {
            return Err(invalid("real model requires real entries"));
        }
        let g = GroupElement { entries, model };
        let det = g.det();
        if (det - 1.0).norm() > 1e-8 {
            return Err(invalid(format!("determinant {det} is not 1")));
        }
        Ok(g.renormalized())
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let r = |x| Complex64::new(x, 0.0);
        Self::new(Model::Real, [[r(a), r(b)], [r(c), r(d)]])
    }

    pub fn from_complex(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        Self::new(Model::Complex, [[a, b], [c, d]])
    }

    /// Constructs without validation; entries must already have unit determinant.
    pub(crate) fn raw(model: Model, entries: [[Complex64; 2]; 2]) -> Self {
        GroupElement { entries, model }
    }

    pub fn identity(model: Model) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        GroupElement::raw(model, [[one, zero], [zero, one]])
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn entries(&self) -> [[Complex64; 2]; 2] {
        self.entries
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row][col]
    }

    /// `ad - bc`, evaluated with error-free products so that the rounding
    /// error is relative to the result rather than to the entries.
    pub fn det(&self) -> Complex64 {
        let [[a, b], [c, d]] = self.entries;
        Complex64::new(
            dot2(&[(a.re, d.re), (-a.im, d.im), (-b.re, c.re), (b.im, c.im)]),
            dot2(&[(a.re, d.im), (a.im, d.re), (-b.re, c.im), (-b.im, c.re)]),
        )
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn inverse(&self) -> Self {
        let [[a, b], [c, d]] = self.entries;
        GroupElement::raw(self.model, [[d, -b], [-c, a]])
    }

    /// Reinterprets a real element inside the complex model.
    pub fn to_complex(&self) -> Self {
        GroupElement::raw(Model::Complex, self.entries)
    }

    /// Divides by a square root of the determinant and, in the real model,
    /// fixes the sign so that the first nonzero entry is positive.
    pub fn renormalized(self) -> Self {
        let det = self.det();
        let mut entries = self.entries;
        if det != Complex64::new(1.0, 0.0) {
            let s = det.sqrt();
            for z in entries.iter_mut().flatten() {
                *z /= s;
            }
        }
        if self.model == Model::Real {
            for z in entries.iter_mut().flatten() {
                z.im = 0.0;
            }
            let first = entries.iter().flatten().find(|z| z.re != 0.0).copied();
            if let Some(first) = first {
                if first.re < 0.0 {
                    for z in entries.iter_mut().flatten() {
                        *z = -*z;
                    }
                }
            }
        }
        GroupElement::raw(self.model, entries)
    }

    /// Entrywise distance between `self` and `±other`, whichever is smaller.
    pub fn projective_distance(&self, other: &GroupElement) -> f64 {
        let diff = |sign: f64| {
            self.entries
                .iter()
                .flatten()
                .zip(other.entries.iter().flatten())
                .map(|(x, y)| (x - y * sign).norm_sqr())
                .sum::<f64>()
                .sqrt()
        };
        diff(1.0).min(diff(-1.0))
    }

    /// Equality in `PSL`, relative to the size of the matrices.
    pub fn approx_eq(&self, other: &GroupElement, tol: f64) -> bool {
        self.projective_distance(other) <= tol * self.norm().max(other.norm()).max(1.0)
    }

    /// Möbius action on upper half-space.
    pub fn act(&self, p: &UpperSpacePoint) -> UpperSpacePoint {
        let [[a, b], [c, d]] = self.entries;
        let z = p.horizontal;
        let h = p.height;
        let cz_d = c * z + d;
        let denom = cz_d.norm_sqr() + c.norm_sqr() * h * h;
        let horizontal = ((a * z + b) * cz_d.conj() + a * c.conj() * (h * h)) / denom;
        UpperSpacePoint {
            horizontal,
            height: h / denom,
        }
    }

    /// Möbius action on the ideal boundary `R^{n-1} ∪ {∞}`.
    pub fn act_boundary(&self, p: BoundaryPoint) -> BoundaryPoint {
        let [[a, b], [c, d]] = self.entries;
        match p {
            BoundaryPoint::Infinity => {
                if c.norm() == 0.0 {
                    BoundaryPoint::Infinity
                } else {
                    BoundaryPoint::Finite(a / c)
                }
            }
            BoundaryPoint::Finite(z) => {
                let den = c * z + d;
                if den.norm() == 0.0 {
                    BoundaryPoint::Infinity
                } else {
                    BoundaryPoint::Finite((a * z + b) / den)
                }
            }
        }
    }
}

impl Mul for GroupElement {
    type Output = GroupElement;

    fn mul(self, rhs: GroupElement) -> GroupElement {
        assert_eq!(self.model, rhs.model, "multiplying elements of different models");
        let x = self.entries;
        let y = rhs.entries;
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = x[i][0] * y[0][j] + x[i][1] * y[1][j];
            }
        }
        GroupElement::raw(self.model, out).renormalized()
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [[a, b], [c, d]] = self.entries;
        match self.model {
            Model::Real => write!(f, "[[{}, {}], [{}, {}]]", a.re, b.re, c.re, d.re),
            Model::Complex => write!(f, "[[{a}, {b}], [{c}, {d}]]"),
        }
    }
}

/// A point of the ideal boundary: a finite coordinate in `R^{n-1}` or `∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundaryPoint {
    Finite(Complex64),
    Infinity,
}

/// A point of the upper half-space model. In `H²` the horizontal coordinate
/// is real.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperSpacePoint {
    pub horizontal: Complex64,
    pub height: f64,
}

impl UpperSpacePoint {
    pub fn new(horizontal: Complex64, height: f64) -> Result<Self> {
        if !(height > 0.0) || !height.is_finite() {
            return Err(invalid(format!("height must be positive, got {height}")));
        }
        if !horizontal.re.is_finite() || !horizontal.im.is_finite() {
            return Err(invalid("horizontal coordinate must be finite"));
        }
        Ok(UpperSpacePoint { horizontal, height })
    }

    /// The base point `o` = `i` resp. `j` fixed by the maximal compact subgroup.
    pub fn origin() -> Self {
        UpperSpacePoint {
            horizontal: Complex64::new(0.0, 0.0),
            height: 1.0,
        }
    }
}

/// Unit tangent direction at a base point. Euclidean-normalized; the last
/// component is vertical.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Direction {
    /// Angle in `[0, 2π)` from the positive horizontal axis; `π/2` points up.
    Angle(f64),
    /// Unit vector `(x, y, vertical)` in `R³`.
    Vector([f64; 3]),
}

impl Direction {
    pub const REFERENCE_ANGLE: f64 = PI / 2.0;

    fn from_components(model: Model, horizontal: Complex64, vertical: f64) -> Self {
        match model {
            Model::Real => {
                Direction::Angle(wrap_angle(vertical.atan2(horizontal.re)))
            }
            Model::Complex => {
                let n = (horizontal.norm_sqr() + vertical * vertical).sqrt();
                Direction::Vector([horizontal.re / n, horizontal.im / n, vertical / n])
            }
        }
    }

    /// Horizontal and vertical components of the unit vector.
    pub fn components(&self) -> (Complex64, f64) {
        match *self {
            Direction::Angle(theta) => (Complex64::new(theta.cos(), 0.0), theta.sin()),
            Direction::Vector([x, y, z]) => (Complex64::new(x, y), z),
        }
    }

    pub fn as_vector(&self) -> [f64; 3] {
        let (w, z) = self.components();
        [w.re, w.im, z]
    }

    pub fn model(&self) -> Model {
        match self {
            Direction::Angle(_) => Model::Real,
            Direction::Vector(_) => Model::Complex,
        }
    }
}

pub fn wrap_angle(theta: f64) -> f64 {
    let w = theta.rem_euclid(2.0 * PI);
    if w >= 2.0 * PI {
        0.0
    } else {
        w
    }
}

/// A point of the unit tangent bundle: base point plus direction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameCoordinate {
    pub base: UpperSpacePoint,
    pub direction: Direction,
}

impl FrameCoordinate {
    pub fn model(&self) -> Model {
        self.direction.model()
    }
}

pub(crate) fn unipotent(model: Model, v: Complex64) -> GroupElement {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    GroupElement::raw(model, [[one, v], [zero, one]])
}

/// `u(v) = exp(v)`: the upper unipotent matrix with off-diagonal entry `v`.
pub fn make_unipotent(v: &[f64]) -> Result<GroupElement> {
    let (model, z) = horizontal_from_slice(v)?;
    Ok(unipotent(model, z))
}

/// `a_t = diag(e^{t/2}, e^{-t/2})`, so that `a_t u(v) a_t⁻¹ = u(e^t v)`.
pub fn make_flow(model: Model, t: f64) -> GroupElement {
    let e = Complex64::new((t / 2.0).exp(), 0.0);
    let zero = Complex64::new(0.0, 0.0);
    GroupElement::raw(model, [[e, zero], [zero, e.inv()]])
}

/// `diag(λ, 1/λ)` for a complex `λ`: an element of the centralizer `MA`.
pub(crate) fn diagonal(model: Model, lambda: Complex64) -> GroupElement {
    let zero = Complex64::new(0.0, 0.0);
    GroupElement::raw(model, [[lambda, zero], [zero, lambda.inv()]])
}

/// Splits `g = ζ·u(v)` with `ζ` lower triangular.
pub fn bruhat_split(g: &GroupElement) -> Result<(GroupElement, Complex64)> {
    let [[a, b], [c, _]] = g.entries;
    let tolerance = BRUHAT_TOLERANCE * g.norm();
    if a.norm() <= tolerance {
        return Err(Error::BruhatSingular {
            g11: a.norm(),
            tolerance,
        });
    }
    let v = b / a;
    let zero = Complex64::new(0.0, 0.0);
    let zeta = GroupElement::raw(g.model, [[a, zero], [c, a.inv()]]);
    Ok((zeta, v))
}

/// The point `p(g)` of `P⁻\G`, realized as the `N`-coordinate of the Bruhat
/// split, or `∞` on the small cell.
pub fn boundary_point(g: &GroupElement) -> BoundaryPoint {
    match bruhat_split(g) {
        Ok((_, v)) => BoundaryPoint::Finite(v),
        Err(_) => BoundaryPoint::Infinity,
    }
}

/// Inverse stereographic projection onto the unit sphere `S^{n-1} ⊂ R^n`.
/// `0` maps to the south pole and `∞` to the north pole `(0, …, 0, 1)`.
pub fn stereographic(model: Model, p: BoundaryPoint) -> Vec<f64> {
    match (model, p) {
        (Model::Real, BoundaryPoint::Infinity) => vec![0.0, 1.0],
        (Model::Complex, BoundaryPoint::Infinity) => vec![0.0, 0.0, 1.0],
        (Model::Real, BoundaryPoint::Finite(v)) => {
            let x = v.re;
            let d = 1.0 + x * x;
            vec![2.0 * x / d, (x * x - 1.0) / d]
        }
        (Model::Complex, BoundaryPoint::Finite(v)) => {
            let r2 = v.norm_sqr();
            let d = 1.0 + r2;
            vec![2.0 * v.re / d, 2.0 * v.im / d, (r2 - 1.0) / d]
        }
    }
}

/// Base point `g·o` and the direction `g_*(up)` of the frame represented by `g`.
pub fn frame_coordinates(g: &GroupElement) -> FrameCoordinate {
    let base = g.act(&UpperSpacePoint::origin());
    let [[a, _], [c, _]] = g.entries;
    let sh = base.height.sqrt();
    // first column of k in the Iwasawa factorization g = u(x) a(h) k
    let alpha = (a - base.horizontal * c) / sh;
    let gamma = c * sh;
    let scale = alpha.norm_sqr() + gamma.norm_sqr();
    let horizontal = alpha * gamma.conj() * (2.0 / scale);
    let vertical = (alpha.norm_sqr() - gamma.norm_sqr()) / scale;
    FrameCoordinate {
        base,
        direction: Direction::from_components(g.model, horizontal, vertical),
    }
}

/// A group element whose frame is `frame`: `u(x)·a(h)·k` with `k` in the
/// maximal compact subgroup.
pub fn frame_element(frame: &FrameCoordinate) -> GroupElement {
    let model = frame.model();
    let (w, vz) = frame.direction.components();
    let (alpha, gamma) = if vz >= 0.0 {
        let alpha = ((1.0 + vz) / 2.0).sqrt();
        (Complex64::new(alpha, 0.0), w.conj() / (2.0 * alpha))
    } else {
        let gamma = ((1.0 - vz) / 2.0).sqrt();
        (w / (2.0 * gamma), Complex64::new(gamma, 0.0))
    };
    let k = GroupElement::raw(model, [[alpha, -gamma.conj()], [gamma, alpha.conj()]]);
    let sh = Complex64::new(frame.base.height.sqrt(), 0.0);
    let a = diagonal(model, sh);
    unipotent(model, frame.base.horizontal) * a * k
}

/// Hyperbolic distance in the upper half-space model.
pub fn hyperbolic_distance(p: &UpperSpacePoint, q: &UpperSpacePoint) -> f64 {
    let dz = (p.horizontal - q.horizontal).norm_sqr();
    let dh = p.height - q.height;
    let chord = (dz + dh * dh).sqrt();
    2.0 * (chord / (2.0 * (p.height * q.height).sqrt())).asinh()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn real_element(a: f64, b: f64, c: f64) -> GroupElement {
        // complete (a b; c d) to determinant one
        let d = (1.0 + b * c) / a;
        GroupElement::from_real(a, b, c, d).unwrap()
    }

    #[test]
    fn unipotent_examples() {
        assert_eq!(make_unipotent(&[0.0]).unwrap(), GroupElement::identity(Model::Real));
        let u = make_unipotent(&[2.0]).unwrap();
        assert_eq!(u.entries()[0][1], c(2.0, 0.0));
        let u = make_unipotent(&[1.0, 1.0]).unwrap();
        assert_eq!(u.model(), Model::Complex);
        assert_eq!(u.entries()[0][1], c(1.0, 1.0));
        assert!(make_unipotent(&[f64::NAN]).is_err());
        assert!(make_unipotent(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn flow_examples() {
        assert!(make_flow(Model::Real, 0.0).approx_eq(&GroupElement::identity(Model::Real), 0.0));
        let a1 = make_flow(Model::Real, 1.0);
        let conj = a1 * make_unipotent(&[1.0]).unwrap() * a1.inverse();
        assert!((conj.entry(0, 1).re - std::f64::consts::E).abs() < 1e-12);
        let a3 = make_flow(Model::Real, 1.0) * make_flow(Model::Real, 2.0);
        assert!(a3.projective_distance(&make_flow(Model::Real, 3.0)) < 1e-12);
    }

    #[test]
    fn bruhat_examples() {
        let (zeta, v) = bruhat_split(&real_element(1.0, 2.0, 0.0)).unwrap();
        assert!(zeta.approx_eq(&GroupElement::identity(Model::Real), 1e-15));
        assert_eq!(v, c(2.0, 0.0));

        let g = GroupElement::from_real(2.0, 1.0, 1.0, 1.0).unwrap();
        let (zeta, v) = bruhat_split(&g).unwrap();
        assert!((v.re - 0.5).abs() < 1e-15);
        let expected = GroupElement::from_real(2.0, 0.0, 1.0, 0.5).unwrap();
        assert!(zeta.approx_eq(&expected, 1e-15));
        // oracle: plain matrix product
        assert!((zeta * unipotent(Model::Real, v)).approx_eq(&g, 1e-14));

        let w = GroupElement::from_real(0.0, 1.0, -1.0, 0.0).unwrap();
        assert!(matches!(bruhat_split(&w), Err(Error::BruhatSingular { .. })));
    }

    #[test]
    fn boundary_examples() {
        let u = make_unipotent(&[0.7]).unwrap();
        assert_eq!(boundary_point(&u), BoundaryPoint::Finite(c(0.7, 0.0)));
        assert_eq!(
            boundary_point(&GroupElement::identity(Model::Real)),
            BoundaryPoint::Finite(c(0.0, 0.0))
        );
        let zeta = GroupElement::from_real(2.0, 0.0, 1.0, 0.5).unwrap();
        let g = zeta * make_unipotent(&[3.0]).unwrap();
        match boundary_point(&g) {
            BoundaryPoint::Finite(v) => assert!((v.re - 3.0).abs() < 1e-14),
            BoundaryPoint::Infinity => panic!(),
        }
        let w = GroupElement::from_real(0.0, 1.0, -1.0, 0.0).unwrap();
        assert_eq!(boundary_point(&w), BoundaryPoint::Infinity);
    }

    #[test]
    fn stereographic_examples() {
        assert_eq!(stereographic(Model::Real, BoundaryPoint::Finite(c(0.0, 0.0))), vec![0.0, -1.0]);
        assert_eq!(stereographic(Model::Complex, BoundaryPoint::Infinity), vec![0.0, 0.0, 1.0]);
        let p = stereographic(Model::Real, BoundaryPoint::Finite(c(1.0, 0.0)));
        assert!((p[0] - 1.0).abs() < 1e-15 && p[1].abs() < 1e-15);
        // v = tan(θ/2) traces the circle: S(tan(θ/2)) = (sin θ, -cos θ)
        for k in 1..40 {
            let theta = -3.0 + 0.15 * k as f64;
            let p = stereographic(Model::Real, BoundaryPoint::Finite(c((theta / 2.0).tan(), 0.0)));
            assert!((p[0] - theta.sin()).abs() < 1e-12);
            assert!((p[1] + theta.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn frame_examples() {
        let f = frame_coordinates(&GroupElement::identity(Model::Real));
        assert_eq!(f.base, UpperSpacePoint::origin());
        match f.direction {
            Direction::Angle(a) => assert!((a - Direction::REFERENCE_ANGLE).abs() < 1e-15),
            _ => panic!(),
        }
        let f = frame_coordinates(&make_flow(Model::Real, 1.3));
        assert!(f.base.horizontal.norm() < 1e-15);
        assert!((f.base.height - 1.3f64.exp()).abs() < 1e-12);
        let f = frame_coordinates(&make_unipotent(&[3.0]).unwrap());
        assert!((f.base.horizontal.re - 3.0).abs() < 1e-15 && (f.base.height - 1.0).abs() < 1e-15);

        let f = frame_coordinates(&GroupElement::identity(Model::Complex));
        assert_eq!(f.direction, Direction::Vector([0.0, 0.0, 1.0]));
    }

    #[test]
    fn frame_direction_points_to_forward_endpoint() {
        // the geodesic g·a_t·o converges to g·∞; compare with a short step along it
        let (a, b, cc) = (c(1.2, 0.3), c(-0.4, 0.5), c(0.7, -0.2));
        let g = GroupElement::from_complex(a, b, cc, (1.0 + b * cc) / a).unwrap();
        let f0 = frame_coordinates(&g);
        let eps = 1e-6;
        let f1 = (g * make_flow(Model::Complex, eps)).act(&UpperSpacePoint::origin());
        let dz = (f1.horizontal - f0.base.horizontal) / eps;
        let dh = (f1.height - f0.base.height) / eps;
        let n = (dz.norm_sqr() + dh * dh).sqrt();
        let v = f0.direction.as_vector();
        assert!((dz.re / n - v[0]).abs() < 1e-5);
        assert!((dz.im / n - v[1]).abs() < 1e-5);
        assert!((dh / n - v[2]).abs() < 1e-5);
    }

    #[test]
    fn distance_examples() {
        let o = UpperSpacePoint::origin();
        assert_eq!(hyperbolic_distance(&o, &o), 0.0);
        let e = UpperSpacePoint::new(c(0.0, 0.0), std::f64::consts::E).unwrap();
        assert!((hyperbolic_distance(&o, &e) - 1.0).abs() < 1e-14);
        let q = UpperSpacePoint::new(c(1.0, 0.0), 1.0).unwrap();
        assert!((hyperbolic_distance(&o, &q) - 1.5f64.acosh()).abs() < 1e-14);
        assert!(UpperSpacePoint::new(c(0.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn distance_matches_integrated_geodesic_length() {
        // (0,1) → (1,1) lies on the semicircle centred at 1/2 of radius √5/2;
        // integrate |dγ|/y along it with the midpoint rule
        let r = 5f64.sqrt() / 2.0;
        let t0 = (1.0f64).atan2(-0.5);
        let t1 = (1.0f64).atan2(0.5);
        let n = 200_000;
        let h = (t1 - t0) / n as f64;
        let len: f64 = (0..n)
            .map(|k| {
                let t = t0 + (k as f64 + 0.5) * h;
                r * h / (r * t.sin())
            })
            .sum();
        assert!((len.abs() - 1.5f64.acosh()).abs() < 1e-8);
    }

    fn arb_real() -> impl Strategy<Value = GroupElement> {
        (0.2f64..3.0, -3.0f64..3.0, -3.0f64..3.0, prop::bool::ANY).prop_map(|(a, b, c, neg)| {
            let a = if neg { -a } else { a };
            let d = (1.0 + b * c) / a;
            GroupElement::from_real(a, b, c, d).unwrap()
        })
    }

    fn arb_complex() -> impl Strategy<Value = GroupElement> {
        (0.5f64..2.0, -1.5f64..1.5, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
            .prop_map(|(ar, ai, br, bi, cr, ci)| {
                let a = c(ar, ai);
                let b = c(br, bi);
                let cc = c(cr, ci);
                let d = (1.0 + b * cc) / a;
                GroupElement::from_complex(a, b, cc, d).unwrap()
            })
    }

    proptest! {
        #[test]
        fn unipotent_homomorphism(v in -10.0f64..10.0, w in -10.0f64..10.0, x in -10.0f64..10.0, y in -10.0f64..10.0) {
            let lhs = make_unipotent(&[v, x]).unwrap() * make_unipotent(&[w, y]).unwrap();
            let rhs = make_unipotent(&[v + w, x + y]).unwrap();
            prop_assert!(lhs.projective_distance(&rhs) <= 1e-12 * (1.0 + rhs.norm()));
        }

        #[test]
        fn character_law(t in -5.0f64..5.0, v in -10.0f64..10.0, w in -10.0f64..10.0) {
            let a = make_flow(Model::Complex, t);
            let lhs = a * make_unipotent(&[v, w]).unwrap() * a.inverse();
            let rhs = make_unipotent(&[t.exp() * v, t.exp() * w]).unwrap();
            prop_assert!(lhs.projective_distance(&rhs) <= 1e-10 * rhs.norm());
        }

        #[test]
        fn determinant_stays_one(g in arb_complex(), h in arb_complex()) {
            let p = g * h;
            prop_assert!((p.det() - 1.0).norm() <= DET_TOLERANCE);
        }

        #[test]
        fn bruhat_roundtrip(g in arb_complex()) {
            let (zeta, v) = bruhat_split(&g).unwrap();
            prop_assert!(zeta.entry(0, 1).norm() == 0.0);
            let back = zeta * unipotent(Model::Complex, v);
            prop_assert!(back.projective_distance(&g) <= 1e-11 * g.norm());
        }

        #[test]
        fn boundary_left_invariant(g in arb_real(), l in 0.2f64..3.0, m in -3.0f64..3.0) {
            let zeta = GroupElement::from_real(l, 0.0, m, 1.0 / l).unwrap();
            let (BoundaryPoint::Finite(p), BoundaryPoint::Finite(q)) =
                (boundary_point(&g), boundary_point(&(zeta * g))) else { panic!() };
            prop_assert!((p - q).norm() <= 1e-12 * (1.0 + p.norm()));
        }

        #[test]
        fn stereographic_unit_norm(x in -1e4f64..1e4, y in -1e4f64..1e4) {
            let p = stereographic(Model::Complex, BoundaryPoint::Finite(c(x, y)));
            let n: f64 = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!((n - 1.0).abs() <= 1e-12);
            let p = stereographic(Model::Real, BoundaryPoint::Finite(c(x, 0.0)));
            let n: f64 = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!((n - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn flow_is_unit_speed(g in arb_complex(), t in -3.0f64..3.0) {
            let p = frame_coordinates(&g).base;
            let q = frame_coordinates(&(g * make_flow(Model::Complex, t))).base;
            prop_assert!((hyperbolic_distance(&p, &q) - t.abs()).abs() <= 1e-9);
        }

        #[test]
        fn frame_section_roundtrip(g in arb_complex()) {
            let f = frame_coordinates(&g);
            let back = frame_coordinates(&frame_element(&f));
            prop_assert!((back.base.horizontal - f.base.horizontal).norm() < 1e-10);
            prop_assert!((back.base.height - f.base.height).abs() < 1e-10 * f.base.height);
            let (u, v) = (back.direction.as_vector(), f.direction.as_vector());
            for i in 0..3 { prop_assert!((u[i] - v[i]).abs() < 1e-10); }
        }

        #[test]
        fn frame_section_roundtrip_real(g in arb_real()) {
            let f = frame_coordinates(&g);
            let back = frame_coordinates(&frame_element(&f));
            let (u, v) = (back.direction.as_vector(), f.direction.as_vector());
            for i in 0..3 { prop_assert!((u[i] - v[i]).abs() < 1e-10); }
            prop_assert_eq!(frame_element(&f).model(), Model::Real);
        }

        #[test]
        fn distance_symmetric_and_triangle(
            x1 in -3.0f64..3.0, h1 in 0.1f64..5.0,
            x2 in -3.0f64..3.0, h2 in 0.1f64..5.0,
            x3 in -3.0f64..3.0, h3 in 0.1f64..5.0,
        ) {
            let p = UpperSpacePoint::new(c(x1, 0.0), h1).unwrap();
            let q = UpperSpacePoint::new(c(x2, 0.0), h2).unwrap();
            let r = UpperSpacePoint::new(c(x3, 0.0), h3).unwrap();
            let dpq = hyperbolic_distance(&p, &q);
            prop_assert!((dpq - hyperbolic_distance(&q, &p)).abs() < 1e-12);
            prop_assert!(dpq <= hyperbolic_distance(&p, &r) + hyperbolic_distance(&r, &q) + 1e-12);
            // closed form through arccosh
            let cosh = 1.0 + ((x1 - x2).powi(2) + (h1 - h2).powi(2)) / (2.0 * h1 * h2);
            prop_assert!((dpq - cosh.acosh()).abs() < 1e-7 * (1.0 + dpq));
        }
    }
}
