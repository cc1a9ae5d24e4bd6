//! Degree of a boundary map, computed literally: find every zero of the map
//! inside the domain, check each is regular, and sum orientation signs of the
//! real Jacobian. This is the independent oracle the slice reductions are
//! checked against.
//!
//! The zero search is multistart damped Newton with central finite-difference
//! Jacobians, run at two grid densities; disagreement between the two zero
//! sets is a hard `SuspectMissedZeros` error rather than a silent best guess.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::domains::{ComplexPoint, DiscSlice, Domain};
use crate::error::{Error, Result};
use crate::params::Params;
use crate::winding::WindingResult;

/// Newton polish target for the residual norm.
const POLISH_TOL: f64 = 1e-11;
/// Finite-difference step, as a fraction of the domain diameter.
const FD_STEP_SCALE: f64 = 1e-5;
const MAX_NEWTON_ITERS: usize = 60;
/// A zero is regular when |det DG| exceeds this.
const REGULARITY_TOL: f64 = 1e-8;
/// Dimension cap for the grid search (the start grid lives in R^{2N}).
const MAX_COMPLEX_DIM: usize = 3;

const BOUNDARY_SALT: u64 = 0x626f756e64;
const STARTS_SALT: u64 = 0x73746172747a;

/// One verified zero: location in R^{2N}, orientation of the derivative, and
/// the residual the polish achieved.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ZeroRecord {
    pub location: Vec<f64>,
    pub jacobian_sign: i8,
    pub residual_norm: f64,
}

/// How a degree was established.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum DegreeEvidence {
    /// Signed count of regular zeros found inside the domain.
    #[serde(rename_all = "camelCase")]
    ZeroCount { zeros: Vec<ZeroRecord> },
    /// Winding of a one-variable restriction along a slice boundary circle.
    #[serde(rename_all = "camelCase")]
    SliceWinding { slice: DiscSlice, winding: WindingResult },
}

/// An integer degree with its evidence trail and the boundary margin that
/// makes it well-defined.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DegreeCertificate {
    pub degree: i64,
    pub evidence: DegreeEvidence,
    pub boundary_margin: f64,
}

// ---------------------------------------------------------------------------
// Real-linear maps on C^N = R^{2N}
// ---------------------------------------------------------------------------

/// An R-linear map of C^N, stored as its 2N x 2N real matrix in coordinates
/// (Re z_1, Im z_1, ..., Re z_N, Im z_N).
#[derive(Clone, Debug, PartialEq)]
pub struct RealLinearMap {
    matrix: DMatrix<f64>,
}

impl RealLinearMap {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let rows = matrix.nrows();
        if rows == 0 || rows % 2 != 0 || matrix.ncols() != rows {
            return Err(Error::InvalidInput("matrix must be square with even size".into()));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("matrix entries must be finite".into()));
        }
        Ok(Self { matrix })
    }

    pub fn identity(complex_dim: usize) -> Self {
        Self { matrix: DMatrix::identity(2 * complex_dim, 2 * complex_dim) }
    }

    /// Realification of a complex matrix: each entry `a + ib` becomes the
    /// block `[[a, -b], [b, a]]`.
    pub fn from_complex_matrix(m: &DMatrix<Complex64>) -> Self {
        let n = m.nrows();
        let mut out = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let z = m[(i, j)];
                out[(2 * i, 2 * j)] = z.re;
                out[(2 * i, 2 * j + 1)] = -z.im;
                out[(2 * i + 1, 2 * j)] = z.im;
                out[(2 * i + 1, 2 * j + 1)] = z.re;
            }
        }
        Self { matrix: out }
    }

    /// Multiplication by `i` on C^N.
    pub fn multiplication_by_i(complex_dim: usize) -> Self {
        let mut out = DMatrix::zeros(2 * complex_dim, 2 * complex_dim);
        for k in 0..complex_dim {
            out[(2 * k, 2 * k + 1)] = -1.0;
            out[(2 * k + 1, 2 * k)] = 1.0;
        }
        Self { matrix: out }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn complex_dim(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn apply(&self, z: &ComplexPoint) -> Result<ComplexPoint> {
        if z.dim() != self.complex_dim() {
            return Err(Error::DimensionMismatch { expected: self.complex_dim(), found: z.dim() });
        }
        let v = DVector::from_vec(z.to_real());
        ComplexPoint::from_real((&self.matrix * v).as_slice())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.matrix.nrows() != other.matrix.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.nrows(),
                found: other.matrix.nrows(),
            });
        }
        Ok(Self { matrix: &self.matrix + &other.matrix })
    }

    /// `self` after `other` (matrix product).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.matrix.ncols() != other.matrix.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.ncols(),
                found: other.matrix.nrows(),
            });
        }
        Ok(Self { matrix: &self.matrix * &other.matrix })
    }

    /// Splits into complex-linear and complex-antilinear parts, returned as
    /// complex matrices `L`, `B` with `A(z) = L z + B conj(z)`.
    pub fn complex_parts(&self) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
        let n = self.complex_dim();
        let j = Self::multiplication_by_i(n).matrix;
        let jmj = &j * &self.matrix * &j;
        let linear = (&self.matrix - &jmj).scale(0.5);
        let anti = (&self.matrix + &jmj).scale(0.5);
        let to_complex = |m: &DMatrix<f64>| {
            DMatrix::from_fn(n, n, |i, k| Complex64::new(m[(2 * i, 2 * k)], m[(2 * i + 1, 2 * k)]))
        };
        (to_complex(&linear), to_complex(&anti))
    }
}

impl Serialize for RealLinearMap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = (0..self.matrix.nrows())
            .map(|i| (0..self.matrix.ncols()).map(|j| self.matrix[(i, j)]).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RealLinearMap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let rows: Vec<Vec<f64>> = Deserialize::deserialize(d)?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(D::Error::custom("matrix rows must all have the same length"));
        }
        RealLinearMap::new(DMatrix::from_fn(n, n, |i, j| rows[i][j])).map_err(D::Error::custom)
    }
}

/// Sign of the determinant; the map must be comfortably nonsingular.
pub fn orientation_sign(m: &RealLinearMap) -> Result<i8> {
    let det = m.matrix.determinant();
    if det.abs() <= 1e-12 {
        return Err(Error::SingularMap);
    }
    Ok(if det > 0.0 { 1 } else { -1 })
}

/// True when the map commutes with multiplication by `i` (max-entry norm of
/// the commutator below 1e-10).
pub fn is_complex_linear(m: &RealLinearMap) -> bool {
    let j = RealLinearMap::multiplication_by_i(m.complex_dim()).matrix;
    let commutator = &m.matrix * &j - &j * &m.matrix;
    commutator.iter().map(|v| v.abs()).fold(0.0, f64::max) < 1e-10
}

// ---------------------------------------------------------------------------
// Homotopy nonvanishing
// ---------------------------------------------------------------------------

/// Outcome of checking `(1-lambda) F + lambda G != 0` over a sample set.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HomotopyCheck {
    pub ok: bool,
    pub min_modulus: f64,
    pub failure: Option<HomotopyFailure>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HomotopyFailure {
    pub lambda: f64,
    pub sample_index: usize,
    pub modulus: f64,
}

/// Checks the straight-line homotopy between two boundary maps for zeros, on
/// a lambda grid of at least 33 steps. `ok` certifies (at the sampling
/// resolution) that the two maps have equal degree.
pub fn homotopy_nonvanishing<F, G>(
    f: F,
    g: G,
    samples: &[ComplexPoint],
    lambda_steps: usize,
    zero_tol_scale: f64,
) -> HomotopyCheck
where
    F: Fn(&ComplexPoint) -> Vec<Complex64>,
    G: Fn(&ComplexPoint) -> Vec<Complex64>,
{
    let steps = lambda_steps.max(33);
    let f_vals: Vec<Vec<Complex64>> = samples.iter().map(|z| f(z)).collect();
    let g_vals: Vec<Vec<Complex64>> = samples.iter().map(|z| g(z)).collect();
    let mut min_modulus = f64::INFINITY;
    let mut max_modulus = 0.0f64;
    let mut worst = (0.0f64, 0usize);
    for step in 0..steps {
        let lambda = step as f64 / (steps - 1) as f64;
        for (idx, (fv, gv)) in f_vals.iter().zip(&g_vals).enumerate() {
            let norm_sq: f64 = fv
                .iter()
                .zip(gv)
                .map(|(a, b)| (a * (1.0 - lambda) + b * lambda).norm_sqr())
                .sum();
            let modulus = norm_sq.sqrt();
            max_modulus = max_modulus.max(modulus);
            if modulus < min_modulus {
                min_modulus = modulus;
                worst = (lambda, idx);
            }
        }
    }
    let ok = min_modulus > zero_tol_scale * max_modulus;
    HomotopyCheck {
        ok,
        min_modulus,
        failure: (!ok).then(|| HomotopyFailure {
            lambda: worst.0,
            sample_index: worst.1,
            modulus: min_modulus,
        }),
    }
}

// ---------------------------------------------------------------------------
// Zero counting
// ---------------------------------------------------------------------------

/// Degree by signed zero count: multistart Newton from an interior grid of at
/// least `grid_density^{2N}` points plus as many seeded random starts, zeros
/// polished to residual below 1e-11, deduplicated, and checked regular. The
/// whole search runs again at doubled grid density; any difference in the two
/// zero sets aborts with `SuspectMissedZeros`.
pub fn zero_count_degree<F>(
    map: F,
    domain: &Domain,
    grid_density: usize,
    seed: u64,
    params: &Params,
) -> Result<DegreeCertificate>
where
    F: Fn(&ComplexPoint) -> Vec<Complex64>,
{
    params.validate()?;
    let n = domain.dim();
    if n > MAX_COMPLEX_DIM {
        return Err(Error::InvalidInput(format!(
            "zero counting searches R^{{2N}}; N <= {MAX_COMPLEX_DIM} supported, got {n}"
        )));
    }
    if grid_density == 0 {
        return Err(Error::InvalidInput("grid density must be positive".into()));
    }

    // boundary margin: the degree is only defined away from boundary zeros
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ BOUNDARY_SALT);
    let boundary = domain.boundary_samples(params.boundary_samples, &mut rng);
    let mut max_val = 0.0f64;
    let mut margin = f64::INFINITY;
    let mut worst = 0usize;
    for (idx, z) in boundary.iter().enumerate() {
        let modulus = value_norm(&map(z));
        max_val = max_val.max(modulus);
        if modulus < margin {
            margin = modulus;
            worst = idx;
        }
    }
    if margin <= params.zero_tol_scale * max_val {
        return Err(Error::ZeroOnBoundary { modulus: margin, index: worst });
    }

    let coarse = find_zeros(&map, domain, grid_density, seed, params)?;
    let fine = find_zeros(&map, domain, 2 * grid_density, seed, params)?;
    if !zero_sets_match(&coarse, &fine, params.dedup_radius_scale * domain.diameter()) {
        return Err(Error::SuspectMissedZeros { coarse: grid_density, fine: 2 * grid_density });
    }

    let degree = fine.iter().map(|z| z.jacobian_sign as i64).sum();
    Ok(DegreeCertificate {
        degree,
        evidence: DegreeEvidence::ZeroCount { zeros: fine },
        boundary_margin: margin,
    })
}

fn value_norm(values: &[Complex64]) -> f64 {
    values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn find_zeros<F>(
    map: &F,
    domain: &Domain,
    density: usize,
    seed: u64,
    params: &Params,
) -> Result<Vec<ZeroRecord>>
where
    F: Fn(&ComplexPoint) -> Vec<Complex64>,
{
    let diam = domain.diameter();
    let real_map = |x: &[f64]| -> Vec<f64> {
        let z = ComplexPoint::from_real(x).expect("search stays in R^{2N}");
        let values = map(&z);
        let mut out = Vec::with_capacity(2 * values.len());
        for v in values {
            out.push(v.re);
            out.push(v.im);
        }
        out
    };

    let mut starts = domain.interior_grid(density);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ STARTS_SALT);
    let random_count = starts.len();
    for _ in 0..random_count {
        starts.push(domain.interior_sample(&mut rng));
    }

    let center = domain.center().to_real();
    let escape = 2.0 * domain.radius_scale();
    let mut found: Vec<(Vec<f64>, f64)> = Vec::new();
    for start in &starts {
        let Some((x, residual)) = newton_polish(&real_map, &start.to_real(), diam, &center, escape)
        else {
            continue;
        };
        let z = ComplexPoint::from_real(&x)?;
        let defining = domain.defining_value(&z);
        if defining.abs() < 1e-9 * domain.radius_scale() {
            return Err(Error::ZeroOnBoundary { modulus: residual, index: 0 });
        }
        if defining > 0.0 {
            continue; // Newton escaped the domain
        }
        found.push((x, residual));
    }

    // dedup within the spec radius, keeping the best residual
    let dedup_radius = params.dedup_radius_scale * diam;
    let mut unique: Vec<(Vec<f64>, f64)> = Vec::new();
    for (x, residual) in found {
        match unique.iter_mut().find(|(u, _)| dist(u, &x) < dedup_radius) {
            Some(entry) => {
                if residual < entry.1 {
                    *entry = (x, residual);
                }
            }
            None => unique.push((x, residual)),
        }
    }
    unique.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite coordinates"));

    let h = FD_STEP_SCALE * diam;
    let mut zeros = Vec::with_capacity(unique.len());
    for (x, residual) in unique {
        let jac = fd_jacobian(&real_map, &x, h);
        let det = jac.determinant();
        if det.abs() <= REGULARITY_TOL {
            return Err(Error::IrregularZero { location: x, det: det.abs() });
        }
        zeros.push(ZeroRecord {
            location: x,
            jacobian_sign: if det > 0.0 { 1 } else { -1 },
            residual_norm: residual,
        });
    }
    Ok(zeros)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn zero_sets_match(a: &[ZeroRecord], b: &[ZeroRecord], radius: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    for za in a {
        let hit = b.iter().enumerate().find(|(idx, zb)| {
            !used[*idx]
                && dist(&za.location, &zb.location) < 2.0 * radius
                && za.jacobian_sign == zb.jacobian_sign
        });
        match hit {
            Some((idx, _)) => used[idx] = true,
            None => return false,
        }
    }
    true
}

/// Damped Newton with central finite-difference Jacobians and Armijo-style
/// step halving. Returns the polished point and its residual, or `None` when
/// the start diverges, stalls, or leaves the search region.
fn newton_polish<F>(
    f: &F,
    x0: &[f64],
    diam: f64,
    center: &[f64],
    escape: f64,
) -> Option<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let h = FD_STEP_SCALE * diam;
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut res = norm(&fx);
    for _ in 0..MAX_NEWTON_ITERS {
        if res < POLISH_TOL {
            return Some((x, res));
        }
        if dist(&x, center) > escape {
            return None;
        }
        let jac = fd_jacobian(f, &x, h);
        let rhs = DVector::from_vec(fx.iter().map(|v| -v).collect::<Vec<f64>>());
        let lu = jac.lu();
        let dx = lu.solve(&rhs)?;
        let mut t = 1.0f64;
        let mut accepted = false;
        while t > 1e-6 {
            let trial: Vec<f64> = x.iter().zip(dx.iter()).map(|(xi, di)| xi + t * di).collect();
            let ftrial = f(&trial);
            let rtrial = norm(&ftrial);
            if rtrial <= (1.0 - 1e-4 * t) * res {
                x = trial;
                fx = ftrial;
                res = rtrial;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    (res < POLISH_TOL).then_some((x, res))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn fd_jacobian<F>(f: &F, x: &[f64], h: f64) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let dim = x.len();
    let mut jac = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        let mut plus = x.to_vec();
        let mut minus = x.to_vec();
        plus[j] += h;
        minus[j] -= h;
        let fp = f(&plus);
        let fm = f(&minus);
        for i in 0..dim {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    jac
}
