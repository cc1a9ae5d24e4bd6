//! Polynomials in `z_1..z_N` and their conjugates: the universal container
//! for boundary data and for the holomorphic witnesses built from it.
//!
//! The central algebraic fact used throughout: on a circle `|zeta - a| = r`
//! the conjugate variable collapses, `conj(zeta - a) = r^2 / (zeta - a)`, so
//! every mixed univariate polynomial splits into a holomorphic part `q` and a
//! conjugated holomorphic part `s` with `u = q(zeta-a) + conj(s(zeta-a))` on
//! the circle. Nonconstancy of `s` is exactly what obstructs holomorphic
//! extension through the disc.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::domains::{ComplexLine, ComplexPoint};
use crate::error::{Error, Result};

/// Coefficients below `COEFF_CLEANUP * max|coeff|` are dropped after a split,
/// so "s is nonconstant" is a statement about data, not floating-point dust.
pub const COEFF_CLEANUP: f64 = 1e-12;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

// ---------------------------------------------------------------------------
// Multivariate mixed polynomials
// ---------------------------------------------------------------------------

/// One monomial `coeff * z^z_pow * conj(z)^zbar_pow`.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedTerm {
    pub coeff: Complex64,
    pub z_pow: Vec<u32>,
    pub zbar_pow: Vec<u32>,
}

/// A polynomial in `z_1..z_n, conj(z_1)..conj(z_n)`, kept in canonical form:
/// terms sorted by exponents, duplicates merged, zero coefficients dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedPolynomial {
    vars: usize,
    terms: Vec<MixedTerm>,
}

impl MixedPolynomial {
    pub fn zero(vars: usize) -> Self {
        Self { vars, terms: Vec::new() }
    }

    pub fn constant(vars: usize, value: Complex64) -> Self {
        Self::from_terms(
            vars,
            vec![MixedTerm { coeff: value, z_pow: vec![0; vars], zbar_pow: vec![0; vars] }],
        )
        .expect("constant term has matching exponent length")
    }

    /// The coordinate monomial `z_j`.
    pub fn coordinate(vars: usize, j: usize) -> Self {
        let mut z_pow = vec![0; vars];
        z_pow[j] = 1;
        Self::from_terms(
            vars,
            vec![MixedTerm { coeff: c(1.0, 0.0), z_pow, zbar_pow: vec![0; vars] }],
        )
        .expect("coordinate monomial is valid")
    }

    /// The conjugated coordinate monomial `conj(z_j)`.
    pub fn conj_coordinate(vars: usize, j: usize) -> Self {
        let mut zbar_pow = vec![0; vars];
        zbar_pow[j] = 1;
        Self::from_terms(
            vars,
            vec![MixedTerm { coeff: c(1.0, 0.0), z_pow: vec![0; vars], zbar_pow }],
        )
        .expect("conjugate coordinate monomial is valid")
    }

    pub fn from_terms(vars: usize, terms: Vec<MixedTerm>) -> Result<Self> {
        if vars == 0 {
            return Err(Error::InvalidInput("polynomial needs at least one variable".into()));
        }
        for t in &terms {
            if t.z_pow.len() != vars || t.zbar_pow.len() != vars {
                return Err(Error::DimensionMismatch { expected: vars, found: t.z_pow.len() });
            }
            if !t.coeff.re.is_finite() || !t.coeff.im.is_finite() {
                return Err(Error::InvalidInput("coefficients must be finite".into()));
            }
        }
        let mut merged: BTreeMap<(Vec<u32>, Vec<u32>), Complex64> = BTreeMap::new();
        for t in terms {
            *merged.entry((t.z_pow, t.zbar_pow)).or_insert(c(0.0, 0.0)) += t.coeff;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, coeff)| coeff.norm() > 0.0)
            .map(|((z_pow, zbar_pow), coeff)| MixedTerm { coeff, z_pow, zbar_pow })
            .collect();
        Ok(Self { vars, terms })
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn terms(&self) -> &[MixedTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// No conjugated variable appears.
    pub fn is_holomorphic(&self) -> bool {
        self.terms.iter().all(|t| t.zbar_pow.iter().all(|&e| e == 0))
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|t| t.z_pow.iter().sum::<u32>() + t.zbar_pow.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.vars != other.vars {
            return Err(Error::DimensionMismatch { expected: self.vars, found: other.vars });
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::from_terms(self.vars, terms)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self::from_terms(
            self.vars,
            self.terms
                .iter()
                .map(|t| MixedTerm { coeff: t.coeff * factor, ..t.clone() })
                .collect(),
        )
        .expect("scaling preserves validity")
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.vars != other.vars {
            return Err(Error::DimensionMismatch { expected: self.vars, found: other.vars });
        }
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(MixedTerm {
                    coeff: a.coeff * b.coeff,
                    z_pow: a.z_pow.iter().zip(&b.z_pow).map(|(x, y)| x + y).collect(),
                    zbar_pow: a.zbar_pow.iter().zip(&b.zbar_pow).map(|(x, y)| x + y).collect(),
                });
            }
        }
        Self::from_terms(self.vars, terms)
    }

    /// `sum coeff * z^alpha * conj(z)^beta` at the given point.
    pub fn evaluate(&self, z: &ComplexPoint) -> Result<Complex64> {
        if z.dim() != self.vars {
            return Err(Error::DimensionMismatch { expected: self.vars, found: z.dim() });
        }
        let coords = z.coords();
        let mut acc = c(0.0, 0.0);
        for t in &self.terms {
            let mut term = t.coeff;
            for (j, &zj) in coords.iter().enumerate() {
                term *= pow_u32(zj, t.z_pow[j]);
                term *= pow_u32(zj.conj(), t.zbar_pow[j]);
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Expands `p(Z + zeta W)` into powers of `zeta` and `conj(zeta)`.
    pub fn restrict_to_line(&self, line: &ComplexLine) -> Result<UnivariateMixed> {
        if line.dim() != self.vars {
            return Err(Error::DimensionMismatch { expected: self.vars, found: line.dim() });
        }
        let base = line.base().coords();
        let dir = line.direction().coords();
        let mut out: BTreeMap<(u32, u32), Complex64> = BTreeMap::new();
        for t in &self.terms {
            // product over variables of (Z_j + zeta W_j)^alpha_j as a poly in zeta
            let mut holo = vec![t.coeff];
            for (j, &alpha) in t.z_pow.iter().enumerate() {
                holo = binomial_convolve(&holo, base[j], dir[j], alpha);
            }
            // same for the conjugated factors, in conj(zeta)
            let mut anti = vec![c(1.0, 0.0)];
            for (j, &beta) in t.zbar_pow.iter().enumerate() {
                anti = binomial_convolve(&anti, base[j].conj(), dir[j].conj(), beta);
            }
            for (i, hc) in holo.iter().enumerate() {
                if hc.norm() == 0.0 {
                    continue;
                }
                for (k, ac) in anti.iter().enumerate() {
                    if ac.norm() == 0.0 {
                        continue;
                    }
                    *out.entry((i as u32, k as u32)).or_insert(c(0.0, 0.0)) += hc * ac;
                }
            }
        }
        Ok(UnivariateMixed::from_map(out))
    }
}

/// Coefficients of `poly * (base + step * x)^power` given those of `poly`.
fn binomial_convolve(poly: &[Complex64], base: Complex64, step: Complex64, power: u32) -> Vec<Complex64> {
    let mut factor = vec![c(1.0, 0.0)];
    for _ in 0..power {
        let mut next = vec![c(0.0, 0.0); factor.len() + 1];
        for (k, &f) in factor.iter().enumerate() {
            next[k] += f * base;
            next[k + 1] += f * step;
        }
        factor = next;
    }
    let mut out = vec![c(0.0, 0.0); poly.len() + factor.len() - 1];
    for (i, &p) in poly.iter().enumerate() {
        for (k, &f) in factor.iter().enumerate() {
            out[i + k] += p * f;
        }
    }
    out
}

fn pow_u32(z: Complex64, e: u32) -> Complex64 {
    let mut acc = c(1.0, 0.0);
    let mut base = z;
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    acc
}

#[derive(Serialize, Deserialize)]
struct TermRaw {
    re: f64,
    im: f64,
    z: Vec<u32>,
    zbar: Vec<u32>,
}

impl Serialize for MixedPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Raw {
            n: usize,
            terms: Vec<TermRaw>,
        }
        Raw {
            n: self.vars,
            terms: self
                .terms
                .iter()
                .map(|t| TermRaw {
                    re: t.coeff.re,
                    im: t.coeff.im,
                    z: t.z_pow.clone(),
                    zbar: t.zbar_pow.clone(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MixedPolynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            n: usize,
            terms: Vec<TermRaw>,
        }
        let raw = Raw::deserialize(d)?;
        MixedPolynomial::from_terms(
            raw.n,
            raw.terms
                .into_iter()
                .map(|t| MixedTerm { coeff: c(t.re, t.im), z_pow: t.z, zbar_pow: t.zbar })
                .collect(),
        )
        .map_err(D::Error::custom)
    }
}

/// A C^N-valued mixed polynomial map: one component per target coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedMap {
    components: Vec<MixedPolynomial>,
}

impl MixedMap {
    pub fn new(components: Vec<MixedPolynomial>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::InvalidInput("map needs at least one component".into()));
        };
        let vars = first.vars();
        if components.iter().any(|p| p.vars() != vars) {
            return Err(Error::InvalidInput("all components must share the variable count".into()));
        }
        Ok(Self { components })
    }

    pub fn vars(&self) -> usize {
        self.components[0].vars()
    }

    pub fn components(&self) -> &[MixedPolynomial] {
        &self.components
    }

    pub fn is_holomorphic(&self) -> bool {
        self.components.iter().all(MixedPolynomial::is_holomorphic)
    }

    pub fn total_degree(&self) -> u32 {
        self.components.iter().map(MixedPolynomial::total_degree).max().unwrap_or(0)
    }

    pub fn evaluate(&self, z: &ComplexPoint) -> Result<Vec<Complex64>> {
        self.components.iter().map(|p| p.evaluate(z)).collect()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.components.len() != other.components.len() {
            return Err(Error::DimensionMismatch {
                expected: self.components.len(),
                found: other.components.len(),
            });
        }
        Self::new(
            self.components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.add(b))
                .collect::<Result<_>>()?,
        )
    }

    /// Componentwise positive scaling `(t_1 f_1, ..., t_N f_N)`.
    pub fn scale_components(&self, factors: &[f64]) -> Result<Self> {
        if factors.len() != self.components.len() {
            return Err(Error::DimensionMismatch {
                expected: self.components.len(),
                found: factors.len(),
            });
        }
        Self::new(
            self.components
                .iter()
                .zip(factors)
                .map(|(p, &t)| p.scale(c(t, 0.0)))
                .collect(),
        )
    }

    /// Swaps two target components.
    pub fn swap_components(&self, i: usize, j: usize) -> Self {
        let mut components = self.components.clone();
        components.swap(i, j);
        Self { components }
    }
}

impl Serialize for MixedMap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.components.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MixedMap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let components: Vec<MixedPolynomial> = Deserialize::deserialize(d)?;
        MixedMap::new(components).map_err(D::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Univariate mixed polynomials (restrictions to lines)
// ---------------------------------------------------------------------------

/// A polynomial in one complex variable and its conjugate.
#[derive(Clone, Debug, PartialEq)]
pub struct UnivariateMixed {
    /// Sorted by (zeta power, conj power); zero coefficients dropped.
    terms: Vec<(Complex64, u32, u32)>,
}

impl UnivariateMixed {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn from_terms(terms: Vec<(Complex64, u32, u32)>) -> Self {
        let mut map: BTreeMap<(u32, u32), Complex64> = BTreeMap::new();
        for (coeff, i, j) in terms {
            *map.entry((i, j)).or_insert(c(0.0, 0.0)) += coeff;
        }
        Self::from_map(map)
    }

    fn from_map(map: BTreeMap<(u32, u32), Complex64>) -> Self {
        Self {
            terms: map
                .into_iter()
                .filter(|(_, coeff)| coeff.norm() > 0.0)
                .map(|((i, j), coeff)| (coeff, i, j))
                .collect(),
        }
    }

    pub fn terms(&self) -> &[(Complex64, u32, u32)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|&(_, i, j)| i + j).max().unwrap_or(0)
    }

    pub fn evaluate(&self, zeta: Complex64) -> Complex64 {
        let conj = zeta.conj();
        self.terms
            .iter()
            .map(|&(coeff, i, j)| coeff * pow_u32(zeta, i) * pow_u32(conj, j))
            .sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().copied());
        Self::from_terms(terms)
    }

    /// Re-expands around `a`: returns coefficients on `w^i conj(w)^j`, `w = zeta - a`.
    fn recenter(&self, a: Complex64) -> BTreeMap<(u32, u32), Complex64> {
        let mut out: BTreeMap<(u32, u32), Complex64> = BTreeMap::new();
        for &(coeff, i, j) in &self.terms {
            let holo = binomial_convolve(&[coeff], a, c(1.0, 0.0), i);
            let anti = binomial_convolve(&[c(1.0, 0.0)], a.conj(), c(1.0, 0.0), j);
            for (p, hc) in holo.iter().enumerate() {
                for (q, ac) in anti.iter().enumerate() {
                    let v = hc * ac;
                    if v.norm() > 0.0 {
                        *out.entry((p as u32, q as u32)).or_insert(c(0.0, 0.0)) += v;
                    }
                }
            }
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct UniTermRaw {
    re: f64,
    im: f64,
    z: u32,
    zbar: u32,
}

impl Serialize for UnivariateMixed {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Raw {
            terms: Vec<UniTermRaw>,
        }
        Raw {
            terms: self
                .terms
                .iter()
                .map(|&(coeff, i, j)| UniTermRaw { re: coeff.re, im: coeff.im, z: i, zbar: j })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for UnivariateMixed {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            terms: Vec<UniTermRaw>,
        }
        let raw = Raw::deserialize(d)?;
        Ok(UnivariateMixed::from_terms(
            raw.terms.into_iter().map(|t| (c(t.re, t.im), t.z, t.zbar)).collect(),
        ))
    }
}

// ---------------------------------------------------------------------------
// Holomorphic polynomials in (zeta - a)
// ---------------------------------------------------------------------------

/// A holomorphic polynomial stored in powers of `(zeta - basepoint)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HoloPoly {
    basepoint: Complex64,
    /// coeffs[k] multiplies (zeta - basepoint)^k; trailing zeros trimmed.
    coeffs: Vec<Complex64>,
}

impl HoloPoly {
    pub fn new(basepoint: Complex64, mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|z| z.norm() == 0.0) {
            coeffs.pop();
        }
        Self { basepoint, coeffs }
    }

    pub fn zero(basepoint: Complex64) -> Self {
        Self { basepoint, coeffs: Vec::new() }
    }

    pub fn basepoint(&self) -> Complex64 {
        self.basepoint
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> u32 {
        self.coeffs.len().saturating_sub(1) as u32
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Evaluates at an absolute coordinate (`zeta`, not the offset).
    pub fn evaluate(&self, zeta: Complex64) -> Complex64 {
        self.evaluate_offset(zeta - self.basepoint)
    }

    /// Horner evaluation in the offset variable `w = zeta - basepoint`.
    pub fn evaluate_offset(&self, w: Complex64) -> Complex64 {
        let mut acc = c(0.0, 0.0);
        for &coeff in self.coeffs.iter().rev() {
            acc = acc * w + coeff;
        }
        acc
    }

    pub fn derivative(&self) -> HoloPoly {
        if self.coeffs.len() <= 1 {
            return HoloPoly::zero(self.basepoint);
        }
        HoloPoly::new(
            self.basepoint,
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &coeff)| coeff * k as f64)
                .collect(),
        )
    }
}

impl Serialize for HoloPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Raw {
            basepoint: [f64; 2],
            coeffs: Vec<[f64; 2]>,
        }
        Raw {
            basepoint: [self.basepoint.re, self.basepoint.im],
            coeffs: self.coeffs.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for HoloPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            basepoint: [f64; 2],
            coeffs: Vec<[f64; 2]>,
        }
        let raw = Raw::deserialize(d)?;
        Ok(HoloPoly::new(
            c(raw.basepoint[0], raw.basepoint[1]),
            raw.coeffs.into_iter().map(|p| c(p[0], p[1])).collect(),
        ))
    }
}

// ---------------------------------------------------------------------------
// Circle splitting
// ---------------------------------------------------------------------------

/// Rewrites `u` on the circle `|zeta - a| = r` as `q(zeta-a) + conj(s(zeta-a))`.
///
/// Monomials `w^i conj(w)^j` collapse to `r^{2j} w^{i-j}`; nonnegative net
/// powers go to `q`, a negative net power `-k` contributes
/// `conj(conj(coeff) r^{2(j-k)} w^k)` to `s`. Constants always land in `q`,
/// so `s` has zero constant term and "s nonconstant" means `s != 0`.
pub fn split_on_circle(u: &UnivariateMixed, a: Complex64, r: f64) -> Result<(HoloPoly, HoloPoly)> {
    if !(r > 0.0) {
        return Err(Error::DegenerateSlice);
    }
    let recentred = u.recenter(a);
    let mut q: BTreeMap<u32, Complex64> = BTreeMap::new();
    let mut s: BTreeMap<u32, Complex64> = BTreeMap::new();
    for ((i, j), coeff) in recentred {
        let weight = r.powi(2 * j as i32);
        if i >= j {
            *q.entry(i - j).or_insert(c(0.0, 0.0)) += coeff * weight;
        } else {
            let k = j - i;
            let scale = r.powi(2 * (j - k) as i32);
            *s.entry(k).or_insert(c(0.0, 0.0)) += coeff.conj() * scale;
        }
    }
    let to_poly = |map: BTreeMap<u32, Complex64>| {
        let deg = map.keys().next_back().copied().unwrap_or(0) as usize;
        let mut coeffs = vec![c(0.0, 0.0); deg + 1];
        for (k, v) in map {
            coeffs[k as usize] = v;
        }
        HoloPoly::new(a, coeffs)
    };
    let (mut q, mut s) = (to_poly(q), to_poly(s));
    let max_coeff = q.max_coeff().max(s.max_coeff());
    let floor = COEFF_CLEANUP * max_coeff;
    let clean = |p: &HoloPoly| {
        HoloPoly::new(
            a,
            p.coeffs()
                .iter()
                .map(|&z| if z.norm() < floor { c(0.0, 0.0) } else { z })
                .collect(),
        )
    };
    q = clean(&q);
    s = clean(&s);
    Ok((q, s))
}

// ---------------------------------------------------------------------------
// Sampled loops
// ---------------------------------------------------------------------------

/// Values of a closed loop at strictly increasing angles covering `[0, 2*pi)`.
#[derive(Clone, Debug)]
pub struct SampledLoop {
    angles: Vec<f64>,
    values: Vec<Complex64>,
}

impl SampledLoop {
    pub fn new(angles: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if angles.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: angles.len(), found: values.len() });
        }
        if angles.len() < 4 {
            return Err(Error::InvalidInput("a loop needs at least 4 samples".into()));
        }
        let two_pi = 2.0 * std::f64::consts::PI;
        for pair in angles.windows(2) {
            if !(pair[1] > pair[0]) {
                return Err(Error::InvalidInput("loop angles must be strictly increasing".into()));
            }
        }
        if angles[0] < 0.0 || angles[angles.len() - 1] >= two_pi {
            return Err(Error::InvalidInput("loop angles must lie in [0, 2*pi)".into()));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidInput("loop values must be finite".into()));
        }
        Ok(Self { angles, values })
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

impl Serialize for SampledLoop {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Sample {
            theta: f64,
            re: f64,
            im: f64,
        }
        #[derive(Serialize)]
        struct Raw {
            samples: Vec<Sample>,
        }
        Raw {
            samples: self
                .angles
                .iter()
                .zip(&self.values)
                .map(|(&theta, v)| Sample { theta, re: v.re, im: v.im })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SampledLoop {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Sample {
            theta: f64,
            re: f64,
            im: f64,
        }
        #[derive(Deserialize)]
        struct Raw {
            samples: Vec<Sample>,
        }
        let raw = Raw::deserialize(d)?;
        let (angles, values) = raw
            .samples
            .into_iter()
            .map(|s| (s.theta, c(s.re, s.im)))
            .unzip();
        SampledLoop::new(angles, values).map_err(D::Error::custom)
    }
}

/// Samples `u` on the circle `|zeta - a| = r` at `n` uniform angles.
pub fn sample_component(u: &UnivariateMixed, a: Complex64, r: f64, n: usize) -> Result<SampledLoop> {
    if !(r > 0.0) {
        return Err(Error::DegenerateSlice);
    }
    if n < 4 {
        return Err(Error::InvalidInput("need at least 4 loop samples".into()));
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let angles: Vec<f64> = (0..n).map(|k| two_pi * k as f64 / n as f64).collect();
    let values = angles
        .iter()
        .map(|&theta| u.evaluate(a + r * c(theta.cos(), theta.sin())))
        .collect();
    SampledLoop::new(angles, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::ComplexPoint;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn point(coords: &[(f64, f64)]) -> ComplexPoint {
        ComplexPoint::new(coords.iter().map(|&(re, im)| c(re, im)).collect()).unwrap()
    }

    fn line(base: &[(f64, f64)], dir: &[(f64, f64)]) -> ComplexLine {
        ComplexLine::new(point(base), point(dir)).unwrap()
    }

    #[test]
    fn evaluates_conjugate_monomial() {
        let p = MixedPolynomial::conj_coordinate(2, 0);
        let v = p.evaluate(&point(&[(0.0, 1.0), (0.0, 0.0)])).unwrap();
        assert!((v - c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn evaluates_mixed_product() {
        // z_1 * conj(z_2) at (2, 1+i) -> 2 * (1 - i) = 2 - 2i
        let p = MixedPolynomial::coordinate(2, 0)
            .mul(&MixedPolynomial::conj_coordinate(2, 1))
            .unwrap();
        let v = p.evaluate(&point(&[(2.0, 0.0), (1.0, 1.0)])).unwrap();
        assert!((v - c(2.0, -2.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_polynomial_evaluates_to_zero() {
        let p = MixedPolynomial::zero(3);
        let v = p.evaluate(&point(&[(1.0, 2.0), (3.0, 4.0), (5.0, 6.0)])).unwrap();
        assert_eq!(v, c(0.0, 0.0));
    }

    #[test]
    fn evaluate_rejects_dimension_mismatch() {
        let p = MixedPolynomial::coordinate(2, 0);
        assert!(p.evaluate(&point(&[(1.0, 0.0)])).is_err());
    }

    #[test]
    fn restriction_of_diagonal_mixed_term() {
        // conj(z_1) z_2 along zeta * (1,1)/sqrt(2) -> |zeta|^2 / 2
        let p = MixedPolynomial::conj_coordinate(2, 0)
            .mul(&MixedPolynomial::coordinate(2, 1))
            .unwrap();
        let s = 1.0 / 2.0f64.sqrt();
        let l = line(&[(0.0, 0.0), (0.0, 0.0)], &[(s, 0.0), (s, 0.0)]);
        let u = p.restrict_to_line(&l).unwrap();
        assert_eq!(u.terms().len(), 1);
        let (coeff, i, j) = u.terms()[0];
        assert_eq!((i, j), (1, 1));
        assert!((coeff - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn restriction_of_square_along_shifted_axis() {
        // z_1^2 along Z=(1,0), W=(1,0): 1 + 2 zeta + zeta^2
        let p = MixedPolynomial::coordinate(2, 0)
            .mul(&MixedPolynomial::coordinate(2, 0))
            .unwrap();
        let l = line(&[(1.0, 0.0), (0.0, 0.0)], &[(1.0, 0.0), (0.0, 0.0)]);
        let u = p.restrict_to_line(&l).unwrap();
        let want = UnivariateMixed::from_terms(vec![
            (c(1.0, 0.0), 0, 0),
            (c(2.0, 0.0), 1, 0),
            (c(1.0, 0.0), 2, 0),
        ]);
        assert_eq!(u, want);
    }

    #[test]
    fn restriction_of_constant_is_constant() {
        let p = MixedPolynomial::constant(2, c(2.5, -1.0));
        let l = line(&[(0.3, 0.0), (0.0, 0.4)], &[(0.0, 1.0), (1.0, 0.0)]);
        let u = p.restrict_to_line(&l).unwrap();
        assert_eq!(u.terms().len(), 1);
        assert!((u.terms()[0].0 - c(2.5, -1.0)).norm() < 1e-15);
    }

    fn random_mixed(rng: &mut ChaCha8Rng, vars: usize, max_deg: u32) -> MixedPolynomial {
        let mut terms = Vec::new();
        for _ in 0..rng.gen_range(1..=6) {
            let mut z_pow = vec![0u32; vars];
            let mut zbar_pow = vec![0u32; vars];
            let mut budget = max_deg;
            for j in 0..vars {
                let e = rng.gen_range(0..=budget);
                z_pow[j] = e;
                budget -= e;
            }
            for j in 0..vars {
                let e = rng.gen_range(0..=budget);
                zbar_pow[j] = e;
                budget -= e;
            }
            terms.push(MixedTerm {
                coeff: c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
                z_pow,
                zbar_pow,
            });
        }
        MixedPolynomial::from_terms(vars, terms).unwrap()
    }

    #[test]
    fn restriction_agrees_with_direct_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..20 {
            let p = random_mixed(&mut rng, 2, 3);
            let l = line(
                &[(rng.gen::<f64>() - 0.5, 0.1), (0.0, rng.gen::<f64>() - 0.5)],
                &[(rng.gen::<f64>() + 0.1, 0.2), (0.3, rng.gen::<f64>())],
            );
            let u = p.restrict_to_line(&l).unwrap();
            for _ in 0..50 {
                let zeta = c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) * 2.0;
                let direct = p.evaluate(&l.point(zeta)).unwrap();
                let via = u.evaluate(zeta);
                let scale = 1.0 + direct.norm();
                assert!(
                    (direct - via).norm() < 1e-10 * scale,
                    "restriction mismatch: {direct} vs {via}"
                );
            }
        }
    }

    #[test]
    fn restriction_does_not_raise_degree() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for _ in 0..30 {
            let p = random_mixed(&mut rng, 2, 4);
            let l = line(
                &[(rng.gen::<f64>(), 0.0), (rng.gen::<f64>(), 0.0)],
                &[(rng.gen::<f64>() + 0.2, 0.1), (0.4, rng.gen::<f64>())],
            );
            let u = p.restrict_to_line(&l).unwrap();
            assert!(u.degree() <= p.total_degree());
        }
    }

    #[test]
    fn split_pure_conjugate_goes_to_s() {
        let u = UnivariateMixed::from_terms(vec![(c(1.0, 0.0), 0, 1)]);
        let (q, s) = split_on_circle(&u, c(0.0, 0.0), 1.0).unwrap();
        assert!(q.is_zero());
        assert_eq!(s.coeffs().len(), 2);
        assert!(s.coeffs()[0].norm() < 1e-15);
        assert!((s.coeffs()[1] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn split_modulus_squared_is_constant() {
        let u = UnivariateMixed::from_terms(vec![(c(1.0, 0.0), 1, 1)]);
        let r = 1.7;
        let (q, s) = split_on_circle(&u, c(0.0, 0.0), r).unwrap();
        assert!(s.is_zero());
        assert_eq!(q.coeffs().len(), 1);
        assert!((q.coeffs()[0] - c(r * r, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn split_net_positive_power_goes_to_q() {
        let u = UnivariateMixed::from_terms(vec![(c(1.0, 0.0), 2, 1)]);
        let (q, s) = split_on_circle(&u, c(0.0, 0.0), 1.0).unwrap();
        assert!(s.is_zero());
        assert_eq!(q.coeffs().len(), 2);
        assert!(q.coeffs()[0].norm() < 1e-15);
        assert!((q.coeffs()[1] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn split_rejects_degenerate_disc() {
        let u = UnivariateMixed::from_terms(vec![(c(1.0, 0.0), 0, 1)]);
        assert!(matches!(split_on_circle(&u, c(0.0, 0.0), 0.0), Err(Error::DegenerateSlice)));
    }

    fn random_univariate(rng: &mut ChaCha8Rng, max_deg: u32) -> UnivariateMixed {
        let mut terms = Vec::new();
        for _ in 0..rng.gen_range(1..=7) {
            let i = rng.gen_range(0..=max_deg);
            let j = rng.gen_range(0..=(max_deg - i));
            terms.push((c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5), i, j));
        }
        UnivariateMixed::from_terms(terms)
    }

    #[test]
    fn split_reconstructs_on_circle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let u = random_univariate(&mut rng, 6);
            let a = c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            let r = 0.2 + 2.0 * rng.gen::<f64>();
            let (q, s) = split_on_circle(&u, a, r).unwrap();
            assert!(q.degree() <= u.degree());
            assert!(s.degree() <= u.degree());
            let mut max_u = 0.0f64;
            let mut max_err = 0.0f64;
            for k in 0..256 {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / 256.0;
                let zeta = a + r * c(theta.cos(), theta.sin());
                let w = zeta - a;
                let direct = u.evaluate(zeta);
                let split = q.evaluate_offset(w) + s.evaluate_offset(w).conj();
                max_u = max_u.max(direct.norm());
                max_err = max_err.max((direct - split).norm());
            }
            assert!(max_err < 1e-9 * (1.0 + max_u), "err {max_err} vs scale {max_u}");
        }
    }

    #[test]
    fn sampled_quarters_of_identity() {
        let u = UnivariateMixed::from_terms(vec![(c(1.0, 0.0), 1, 0)]);
        let lp = sample_component(&u, c(0.0, 0.0), 1.0, 4).unwrap();
        let expected = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        for (v, want) in lp.values().iter().zip(expected) {
            assert!((v - want).norm() < 1e-12);
        }
    }

    #[test]
    fn sampled_split_parts_sum_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let u = random_univariate(&mut rng, 5);
            let a = c(0.2, -0.3);
            let r = 1.1;
            let (q, s) = split_on_circle(&u, a, r).unwrap();
            let lp = sample_component(&u, a, r, 64).unwrap();
            for (&theta, &v) in lp.angles().iter().zip(lp.values()) {
                let w = r * c(theta.cos(), theta.sin());
                let back = q.evaluate_offset(w) + s.evaluate_offset(w).conj();
                assert!((back - v).norm() < 1e-10 * (1.0 + v.norm()));
            }
        }
    }

    #[test]
    fn zero_component_samples_to_zero_loop() {
        let lp = sample_component(&UnivariateMixed::zero(), c(0.0, 0.0), 1.0, 8).unwrap();
        assert!(lp.values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn holo_poly_trims_and_differentiates() {
        let p = HoloPoly::new(c(0.5, 0.0), vec![c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(p.degree(), 1);
        let d = p.derivative();
        assert_eq!(d.coeffs().len(), 1);
        assert!((d.coeffs()[0] - c(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn mixed_polynomial_json_matches_schema() {
        let p = MixedPolynomial::conj_coordinate(2, 0);
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(text, r#"{"n":2,"terms":[{"re":1.0,"im":0.0,"z":[0,0],"zbar":[1,0]}]}"#);
        let back: MixedPolynomial = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
    }

    proptest! {
        #[test]
        fn split_identity_holds_for_arbitrary_small_polys(
            seed in 0u64..5000,
            r in 0.3f64..2.0,
            a_re in -0.5f64..0.5,
            a_im in -0.5f64..0.5,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = random_univariate(&mut rng, 4);
            let a = c(a_re, a_im);
            let (q, s) = split_on_circle(&u, a, r).unwrap();
            let mut max_u = 0.0f64;
            let mut max_err = 0.0f64;
            for k in 0..64 {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / 64.0;
                let w = r * c(theta.cos(), theta.sin());
                let direct = u.evaluate(a + w);
                let split = q.evaluate_offset(w) + s.evaluate_offset(w).conj();
                max_u = max_u.max(direct.norm());
                max_err = max_err.max((direct - split).norm());
            }
            prop_assert!(max_err < 1e-9 * (1.0 + max_u));
        }
    }
}
