//! Bounded domains in C^N (balls and Hermitian ellipsoids), complex lines,
//! and the disc slices a line cuts out of a domain.
//!
//! Slices are exact discs for both supported domain families, so the planar
//! domain cut by a line is available in closed form. Lines whose slice radius
//! falls below `TRANSVERSALITY_SCALE` times the domain scale are treated as
//! missing the domain: a near-tangent slice has no usable boundary circle.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Slice radii at or below this fraction of the domain scale count as tangent.
pub const TRANSVERSALITY_SCALE: f64 = 1e-6;

const HERMITIAN_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// JSON helpers: complex scalars as [re, im], points as arrays of pairs.
// ---------------------------------------------------------------------------

pub(crate) fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub(crate) fn unpair(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn pairs(coords: &[Complex64]) -> Vec<[f64; 2]> {
    coords.iter().copied().map(pair).collect()
}

fn unpairs(pairs: Vec<[f64; 2]>) -> Vec<Complex64> {
    pairs.into_iter().map(unpair).collect()
}

// ---------------------------------------------------------------------------
// Points and lines
// ---------------------------------------------------------------------------

/// A point of C^N, N >= 1, with finite coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexPoint {
    coords: Vec<Complex64>,
}

impl ComplexPoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidInput("a point needs at least one coordinate".into()));
        }
        if coords.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("point coordinates must be finite".into()));
        }
        Ok(Self { coords })
    }

    pub fn origin(dim: usize) -> Self {
        Self { coords: vec![Complex64::new(0.0, 0.0); dim.max(1)] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Hermitian inner product `sum_j a_j * conj(b_j)`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn add_scaled(&self, scale: Complex64, dir: &Self) -> Self {
        Self {
            coords: self
                .coords
                .iter()
                .zip(&dir.coords)
                .map(|(a, b)| a + scale * b)
                .collect(),
        }
    }

    /// Realification: (Re z_1, Im z_1, ..., Re z_N, Im z_N).
    pub fn to_real(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.coords.len());
        for z in &self.coords {
            out.push(z.re);
            out.push(z.im);
        }
        out
    }

    pub fn from_real(reals: &[f64]) -> Result<Self> {
        if reals.len() < 2 || reals.len() % 2 != 0 {
            return Err(Error::InvalidInput("real vector length must be even and positive".into()));
        }
        Self::new(
            reals
                .chunks_exact(2)
                .map(|c| Complex64::new(c[0], c[1]))
                .collect(),
        )
    }

    fn to_dvector(&self) -> DVector<Complex64> {
        DVector::from_column_slice(&self.coords)
    }

    fn from_dvector(v: DVector<Complex64>) -> Self {
        Self { coords: v.iter().copied().collect() }
    }
}

impl Serialize for ComplexPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        pairs(&self.coords).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<[f64; 2]> = Deserialize::deserialize(d)?;
        ComplexPoint::new(unpairs(raw)).map_err(D::Error::custom)
    }
}

/// An affine complex line `{Z + zeta * W : zeta in C}` with `|W| = 1`.
#[derive(Clone, Debug)]
pub struct ComplexLine {
    base: ComplexPoint,
    direction: ComplexPoint,
}

impl ComplexLine {
    /// Normalizes the direction; rejects zero directions and dimension mismatches.
    pub fn new(base: ComplexPoint, direction: ComplexPoint) -> Result<Self> {
        if base.dim() != direction.dim() {
            return Err(Error::DimensionMismatch { expected: base.dim(), found: direction.dim() });
        }
        let norm = direction.norm();
        if norm < 1e-14 {
            return Err(Error::InvalidInput("line direction must be nonzero".into()));
        }
        let direction = ComplexPoint {
            coords: direction.coords.iter().map(|z| z / norm).collect(),
        };
        Ok(Self { base, direction })
    }

    /// The coordinate axis `e_axis` through the origin of C^dim.
    pub fn coordinate_axis(dim: usize, axis: usize) -> Result<Self> {
        if axis >= dim {
            return Err(Error::InvalidInput(format!("axis {axis} out of range for C^{dim}")));
        }
        let mut dir = vec![Complex64::new(0.0, 0.0); dim];
        dir[axis] = Complex64::new(1.0, 0.0);
        Self::new(ComplexPoint::origin(dim), ComplexPoint::new(dir)?)
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn base(&self) -> &ComplexPoint {
        &self.base
    }

    pub fn direction(&self) -> &ComplexPoint {
        &self.direction
    }

    /// The ambient point `Z + zeta * W`.
    pub fn point(&self, zeta: Complex64) -> ComplexPoint {
        self.base.add_scaled(zeta, &self.direction)
    }
}

impl Serialize for ComplexLine {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Raw<'a> {
            base: &'a ComplexPoint,
            direction: &'a ComplexPoint,
        }
        Raw { base: &self.base, direction: &self.direction }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexLine {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            base: ComplexPoint,
            direction: ComplexPoint,
        }
        let raw = Raw::deserialize(d)?;
        ComplexLine::new(raw.base, raw.direction).map_err(D::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Domains
// ---------------------------------------------------------------------------

/// An open Euclidean ball in C^N.
#[derive(Clone, Debug)]
pub struct Ball {
    center: ComplexPoint,
    radius: f64,
}

impl Ball {
    pub fn new(center: ComplexPoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidInput("ball radius must be positive".into()));
        }
        Ok(Self { center, radius })
    }

    pub fn unit(dim: usize) -> Self {
        Self { center: ComplexPoint::origin(dim), radius: 1.0 }
    }

    pub fn center(&self) -> &ComplexPoint {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// `{z : (z - c)^* Q (z - c) < 1}` for a positive-definite Hermitian `Q`.
#[derive(Clone, Debug)]
pub struct HermitianEllipsoid {
    center: ComplexPoint,
    form: DMatrix<Complex64>,
    /// Q^{-1/2}; maps the unit sphere onto the ellipsoid boundary (after translation).
    inv_sqrt: DMatrix<Complex64>,
    /// Largest semi-axis, 1/sqrt(lambda_min).
    scale: f64,
}

impl HermitianEllipsoid {
    pub fn new(center: ComplexPoint, form: DMatrix<Complex64>) -> Result<Self> {
        let n = center.dim();
        if form.nrows() != n || form.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: form.nrows() });
        }
        let deviation = (&form - form.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if deviation > HERMITIAN_TOL {
            return Err(Error::InvalidInput(format!(
                "form is not Hermitian (max |Q - Q*| entry {deviation:.3e})"
            )));
        }
        let sym = (&form + form.adjoint()).scale(0.5);
        let eig = sym.clone().symmetric_eigen();
        let min_eig = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min_eig > 0.0) {
            return Err(Error::InvalidInput(format!(
                "form must be positive definite (min eigenvalue {min_eig:.3e})"
            )));
        }
        let mut inv_sqrt_diag = DMatrix::<Complex64>::zeros(n, n);
        for (i, lambda) in eig.eigenvalues.iter().enumerate() {
            inv_sqrt_diag[(i, i)] = Complex64::new(1.0 / lambda.sqrt(), 0.0);
        }
        let inv_sqrt = &eig.eigenvectors * inv_sqrt_diag * eig.eigenvectors.adjoint();
        Ok(Self { center, form: sym, inv_sqrt, scale: 1.0 / min_eig.sqrt() })
    }

    pub fn center(&self) -> &ComplexPoint {
        &self.center
    }

    pub fn form(&self) -> &DMatrix<Complex64> {
        &self.form
    }

    fn quadratic(&self, z: &ComplexPoint) -> f64 {
        let v = z.sub(&self.center).to_dvector();
        (v.adjoint() * &self.form * v)[(0, 0)].re
    }
}

/// A supported domain family; slices by complex lines are exact discs.
#[derive(Clone, Debug)]
pub enum Domain {
    Ball(Ball),
    Ellipsoid(HermitianEllipsoid),
}

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Ball(b) => b.center.dim(),
            Domain::Ellipsoid(e) => e.center.dim(),
        }
    }

    pub fn center(&self) -> &ComplexPoint {
        match self {
            Domain::Ball(b) => &b.center,
            Domain::Ellipsoid(e) => &e.center,
        }
    }

    /// Largest distance from the center to the boundary.
    pub fn radius_scale(&self) -> f64 {
        match self {
            Domain::Ball(b) => b.radius,
            Domain::Ellipsoid(e) => e.scale,
        }
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.radius_scale()
    }

    /// Defining-equation residual: negative inside, zero on the boundary.
    pub fn defining_value(&self, z: &ComplexPoint) -> f64 {
        match self {
            Domain::Ball(b) => z.sub(&b.center).norm() - b.radius,
            Domain::Ellipsoid(e) => e.quadratic(z) - 1.0,
        }
    }

    pub fn contains(&self, z: &ComplexPoint) -> bool {
        self.defining_value(z) < 0.0
    }

    pub fn slice(&self, line: &ComplexLine) -> Result<Option<DiscSlice>> {
        match self {
            Domain::Ball(b) => slice_ball(b, line),
            Domain::Ellipsoid(e) => slice_ellipsoid(e, line),
        }
    }

    /// Deterministic pseudo-random boundary points (exact up to rounding).
    pub fn boundary_samples(&self, count: usize, rng: &mut ChaCha8Rng) -> Vec<ComplexPoint> {
        let n = self.dim();
        (0..count)
            .map(|_| {
                let dir = random_unit_vector(n, rng);
                match self {
                    Domain::Ball(b) => b.center.add_scaled(Complex64::new(b.radius, 0.0), &dir),
                    Domain::Ellipsoid(e) => {
                        let mapped = &e.inv_sqrt * dir.to_dvector();
                        e.center.add_scaled(Complex64::new(1.0, 0.0), &ComplexPoint::from_dvector(mapped))
                    }
                }
            })
            .collect()
    }

    /// Uniform interior point (uniform in the ball; affine image for ellipsoids).
    pub fn interior_sample(&self, rng: &mut ChaCha8Rng) -> ComplexPoint {
        let n = self.dim();
        let dir = random_unit_vector(n, rng);
        let u: f64 = rng.gen();
        let rho = u.powf(1.0 / (2 * n) as f64);
        match self {
            Domain::Ball(b) => b.center.add_scaled(Complex64::new(rho * b.radius, 0.0), &dir),
            Domain::Ellipsoid(e) => {
                let mapped = &e.inv_sqrt * dir.to_dvector().scale(rho);
                e.center.add_scaled(Complex64::new(1.0, 0.0), &ComplexPoint::from_dvector(mapped))
            }
        }
    }

    /// Regular grid of interior starts: `density` points per real axis over a
    /// cube inscribed in the domain, so every grid point is interior.
    pub fn interior_grid(&self, density: usize) -> Vec<ComplexPoint> {
        let n = self.dim();
        let dims = 2 * n;
        let half = match self {
            Domain::Ball(b) => b.radius / (dims as f64).sqrt(),
            // cube inscribed in the largest ball inside the ellipsoid
            Domain::Ellipsoid(e) => {
                let eig = e.form.clone().symmetric_eigen();
                let lambda_max = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
                (1.0 / lambda_max.sqrt()) / (dims as f64).sqrt()
            }
        };
        let axis: Vec<f64> = if density == 1 {
            vec![0.0]
        } else {
            (0..density)
                .map(|i| -half + 2.0 * half * i as f64 / (density - 1) as f64)
                .collect()
        };
        let mut points = Vec::with_capacity(density.pow(dims as u32));
        let mut idx = vec![0usize; dims];
        loop {
            let offset: Vec<f64> = idx.iter().map(|&i| axis[i]).collect();
            let center = self.center().to_real();
            let coords: Vec<f64> = center.iter().zip(&offset).map(|(c, o)| c + o).collect();
            points.push(ComplexPoint::from_real(&coords).expect("grid point is finite"));
            let mut k = 0;
            loop {
                idx[k] += 1;
                if idx[k] < density {
                    break;
                }
                idx[k] = 0;
                k += 1;
                if k == dims {
                    return points;
                }
            }
        }
    }
}

impl Serialize for Domain {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        #[serde(tag = "type", rename_all = "lowercase")]
        enum Raw<'a> {
            Ball { center: &'a ComplexPoint, radius: f64 },
            Ellipsoid { center: &'a ComplexPoint, form: Vec<Vec<[f64; 2]>> },
        }
        let raw = match self {
            Domain::Ball(b) => Raw::Ball { center: &b.center, radius: b.radius },
            Domain::Ellipsoid(e) => Raw::Ellipsoid {
                center: &e.center,
                form: (0..e.form.nrows())
                    .map(|i| (0..e.form.ncols()).map(|j| pair(e.form[(i, j)])).collect())
                    .collect(),
            },
        };
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Domain {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(tag = "type", rename_all = "lowercase")]
        enum Raw {
            Ball { center: ComplexPoint, radius: f64 },
            Ellipsoid { center: ComplexPoint, form: Vec<Vec<[f64; 2]>> },
        }
        match Raw::deserialize(d)? {
            Raw::Ball { center, radius } => {
                Ball::new(center, radius).map(Domain::Ball).map_err(D::Error::custom)
            }
            Raw::Ellipsoid { center, form } => {
                let n = center.dim();
                if form.len() != n || form.iter().any(|row| row.len() != n) {
                    return Err(D::Error::custom("form must be an N x N matrix"));
                }
                let matrix = DMatrix::from_fn(n, n, |i, j| unpair(form[i][j]));
                HermitianEllipsoid::new(center, matrix)
                    .map(Domain::Ellipsoid)
                    .map_err(D::Error::custom)
            }
        }
    }
}

fn random_unit_vector(dim: usize, rng: &mut ChaCha8Rng) -> ComplexPoint {
    loop {
        let coords: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = coords.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return ComplexPoint { coords: coords.into_iter().map(|z| z / norm).collect() };
        }
    }
}

// ---------------------------------------------------------------------------
// Slices
// ---------------------------------------------------------------------------

/// The planar disc `{zeta : Z + zeta W in D}` cut out of a domain by a line.
#[derive(Clone, Debug)]
pub struct DiscSlice {
    center: Complex64,
    radius: f64,
    line: ComplexLine,
}

impl DiscSlice {
    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn line(&self) -> &ComplexLine {
        &self.line
    }

    /// The ambient point `Z + zeta W` for a slice coordinate `zeta`.
    pub fn ambient(&self, zeta: Complex64) -> ComplexPoint {
        self.line.point(zeta)
    }
}

impl Serialize for DiscSlice {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Raw<'a> {
            center: [f64; 2],
            radius: f64,
            line: &'a ComplexLine,
        }
        Raw { center: pair(self.center), radius: self.radius, line: &self.line }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DiscSlice {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            center: [f64; 2],
            radius: f64,
            line: ComplexLine,
        }
        let raw = Raw::deserialize(d)?;
        if !(raw.radius >= 0.0) {
            return Err(D::Error::custom("slice radius must be nonnegative"));
        }
        Ok(DiscSlice { center: unpair(raw.center), radius: raw.radius, line: raw.line })
    }
}

/// Slice of a ball: `|zeta - a|^2 < r^2 - |v_perp|^2` with `a = -<Z-c, W>`.
pub fn slice_ball(ball: &Ball, line: &ComplexLine) -> Result<Option<DiscSlice>> {
    if ball.center.dim() != line.dim() {
        return Err(Error::DimensionMismatch { expected: ball.center.dim(), found: line.dim() });
    }
    let v = line.base.sub(&ball.center);
    let a = -v.inner(&line.direction);
    let perp_sq = v.norm().powi(2) - a.norm_sqr();
    let radius_sq = ball.radius * ball.radius - perp_sq;
    finish_slice(a, radius_sq, ball.radius, line)
}

/// Slice of a Hermitian ellipsoid via completing the square in `zeta`.
pub fn slice_ellipsoid(ell: &HermitianEllipsoid, line: &ComplexLine) -> Result<Option<DiscSlice>> {
    if ell.center.dim() != line.dim() {
        return Err(Error::DimensionMismatch { expected: ell.center.dim(), found: line.dim() });
    }
    let v = line.base.sub(&ell.center).to_dvector();
    let w = line.direction.to_dvector();
    let alpha = (w.adjoint() * &ell.form * &w)[(0, 0)].re;
    let beta = (w.adjoint() * &ell.form * &v)[(0, 0)];
    let gamma = (v.adjoint() * &ell.form * &v)[(0, 0)].re;
    // alpha |zeta|^2 + 2 Re(conj(zeta) beta) + gamma < 1
    let a = -beta / alpha;
    let radius_sq = (1.0 - gamma) / alpha + beta.norm_sqr() / (alpha * alpha);
    finish_slice(a, radius_sq, ell.scale, line)
}

fn finish_slice(
    center: Complex64,
    radius_sq: f64,
    domain_scale: f64,
    line: &ComplexLine,
) -> Result<Option<DiscSlice>> {
    if radius_sq <= 0.0 {
        return Ok(None);
    }
    let radius = radius_sq.sqrt();
    if radius <= TRANSVERSALITY_SCALE * domain_scale {
        return Ok(None);
    }
    Ok(Some(DiscSlice { center, radius, line: line.clone() }))
}

/// `n` equally spaced slice-boundary parameters with their ambient points.
pub fn boundary_circle_points(
    slice: &DiscSlice,
    n: usize,
) -> Result<Vec<(Complex64, ComplexPoint)>> {
    if slice.radius <= 0.0 {
        return Err(Error::DegenerateSlice);
    }
    if n < 4 {
        return Err(Error::InvalidInput("need at least 4 circle points".into()));
    }
    Ok((0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            let zeta = slice.center + slice.radius * Complex64::new(theta.cos(), theta.sin());
            (zeta, slice.ambient(zeta))
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Canonical frame
// ---------------------------------------------------------------------------

/// Affine unitary change of coordinates sending a line to the first axis:
/// `w = U (z - Z)` with `U W = e_1`, so line points `Z + zeta W` become `zeta e_1`.
#[derive(Clone, Debug)]
pub struct CanonicalFrame {
    unitary: DMatrix<Complex64>,
    base: ComplexPoint,
}

impl CanonicalFrame {
    pub fn unitary(&self) -> &DMatrix<Complex64> {
        &self.unitary
    }

    pub fn base(&self) -> &ComplexPoint {
        &self.base
    }

    pub fn to_frame(&self, z: &ComplexPoint) -> ComplexPoint {
        ComplexPoint::from_dvector(&self.unitary * z.sub(&self.base).to_dvector())
    }

    pub fn from_frame(&self, w: &ComplexPoint) -> ComplexPoint {
        self.base
            .add_scaled(Complex64::new(1.0, 0.0), &ComplexPoint::from_dvector(self.unitary.adjoint() * w.to_dvector()))
    }

    /// Row `i` of the unitary, as the coefficients of the linear functional
    /// `z mapsto (U (z - Z))_i`.
    pub fn coordinate_functional(&self, i: usize) -> (Vec<Complex64>, Complex64) {
        let row: Vec<Complex64> = (0..self.unitary.ncols()).map(|j| self.unitary[(i, j)]).collect();
        let constant = -row
            .iter()
            .zip(self.base.coords())
            .map(|(u, z)| u * z)
            .sum::<Complex64>();
        (row, constant)
    }
}

/// Completes the line direction to an orthonormal basis (modified Gram-Schmidt
/// over the standard basis, re-orthogonalized once) and returns the adjoint,
/// so `U W = e_1` and `U` is unitary to machine precision. A line already on
/// the first axis yields the identity.
pub fn canonical_frame(line: &ComplexLine) -> CanonicalFrame {
    let n = line.dim();
    let mut columns: Vec<DVector<Complex64>> = Vec::with_capacity(n);
    columns.push(line.direction.to_dvector());
    for j in 0..n {
        if columns.len() == n {
            break;
        }
        let mut v = DVector::<Complex64>::zeros(n);
        v[j] = Complex64::new(1.0, 0.0);
        for _ in 0..2 {
            for c in &columns {
                let proj = c.dotc(&v);
                v -= c * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            columns.push(v.unscale(norm));
        }
    }
    debug_assert_eq!(columns.len(), n);
    let mut basis = DMatrix::<Complex64>::zeros(n, n);
    for (j, c) in columns.iter().enumerate() {
        basis.set_column(j, c);
    }
    CanonicalFrame { unitary: basis.adjoint(), base: line.base.clone() }
}

/// Max-entry deviation of `U* U` from the identity.
pub fn unitarity_defect(u: &DMatrix<Complex64>) -> f64 {
    let n = u.nrows();
    let prod = u.adjoint() * u;
    let mut defect = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let expect = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            defect = defect.max((prod[(i, j)] - expect).norm());
        }
    }
    defect
}
