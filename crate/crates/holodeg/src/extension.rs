//! Holomorphic-extendibility tests for boundary data, and degree computation
//! for structured maps through one-dimensional slice windings.
//!
//! A function on a circle extends holomorphically through the disc exactly
//! when its negative Fourier modes vanish; that classical criterion, applied
//! to restrictions along sampled complex lines, screens boundary data on the
//! full domain. For maps of the form `(phi, z_2, ..., z_N)` the degree over
//! the whole boundary collapses to the winding of `phi` along one slice
//! circle, which the zero-count oracle cross-checks.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::degree::{zero_count_degree, DegreeCertificate, DegreeEvidence};
use crate::domains::{ComplexLine, DiscSlice, Domain};
use crate::error::{Error, Result};
use crate::mixed::{sample_component, MixedMap, MixedPolynomial, SampledLoop, UnivariateMixed};
use crate::params::Params;
use crate::winding::{fourier_of_loop, winding_on_circle};

const LINE_SALT: u64 = 0x6c696e6573;
/// Circle samples used by the slice-winding route before refinement.
const WINDING_INITIAL_SAMPLES: usize = 256;

/// Outcome of an extendibility test: the largest offending negative Fourier
/// magnitude, the tolerance it was compared against, and (for line-family
/// tests) the first line that witnessed failure.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExtensionVerdict {
    pub extends: bool,
    pub defect: f64,
    pub tolerance: f64,
    pub witness_line: Option<ComplexLine>,
    /// Magnitudes |c_k| of the negative Fourier modes, keyed by k < 0.
    pub coefficient_table: BTreeMap<i64, f64>,
}

/// Extendibility of a mixed polynomial through the disc `|zeta - a| < r`:
/// extends iff every Fourier coefficient `c_k`, `k < 0`, of the boundary
/// restriction vanishes within `fourier_tol_scale * (1 + max|u|)`.
pub fn disc_extension_test(
    u: &UnivariateMixed,
    center: Complex64,
    radius: f64,
    params: &Params,
) -> Result<ExtensionVerdict> {
    let bandwidth = u.degree().max(1);
    let lp = sample_component(u, center, radius, 8 * (bandwidth as usize + 1))?;
    verdict_from_loop(&lp, -(bandwidth as i64), params)
}

/// Extendibility of sampled boundary data through its disc; negative modes
/// are probed down to the resolution the sample count supports.
pub fn disc_extension_test_loop(lp: &SampledLoop, params: &Params) -> Result<ExtensionVerdict> {
    let k_lo = -((lp.len() as i64 / 2 - 1).max(1));
    verdict_from_loop(lp, k_lo, params)
}

fn verdict_from_loop(lp: &SampledLoop, k_lo: i64, params: &Params) -> Result<ExtensionVerdict> {
    let coeffs = fourier_of_loop(lp, k_lo, -1)?;
    let max_modulus = lp.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let tolerance = params.fourier_tol_scale * (1.0 + max_modulus);
    let mut table = BTreeMap::new();
    let mut defect = 0.0f64;
    for (&k, v) in &coeffs {
        let magnitude = v.norm();
        table.insert(k, magnitude);
        defect = defect.max(magnitude);
    }
    Ok(ExtensionVerdict {
        extends: defect <= tolerance,
        defect,
        tolerance,
        witness_line: None,
        coefficient_table: table,
    })
}

/// A slice on which some component of the boundary data fails to extend.
#[derive(Clone, Debug)]
pub struct NonExtendingSlice {
    pub line_index: usize,
    pub line: ComplexLine,
    pub slice: DiscSlice,
    pub component: usize,
    pub verdict: ExtensionVerdict,
}

/// Draws `count` random lines: basepoints uniform in the concentric
/// half-scale copy of the domain, directions uniform on the unit sphere.
/// Interior basepoints guarantee transversal slices.
pub fn sample_lines(domain: &Domain, count: usize, seed: u64) -> Vec<ComplexLine> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ LINE_SALT);
    let center = domain.center().clone();
    (0..count)
        .map(|_| {
            let interior = domain.interior_sample(&mut rng);
            let base = center.add_scaled(
                Complex64::new(0.5, 0.0),
                &interior.sub(&center),
            );
            let direction = loop {
                let z = domain.interior_sample(&mut rng).sub(&center);
                if z.norm() > 1e-6 {
                    break z;
                }
            };
            ComplexLine::new(base, direction).expect("nonzero direction")
        })
        .collect()
}

/// Searches the sampled line family for a component whose restriction fails
/// the disc test. Returns the failure with the smallest line index (then the
/// lowest component index), or `None` when every restriction extends.
pub fn find_nonextending_slice(
    map: &MixedMap,
    domain: &Domain,
    line_count: usize,
    seed: u64,
    params: &Params,
) -> Result<Option<NonExtendingSlice>> {
    for (line_index, line) in sample_lines(domain, line_count, seed).into_iter().enumerate() {
        let Some(slice) = domain.slice(&line)? else { continue };
        for (component, poly) in map.components().iter().enumerate() {
            let u = poly.restrict_to_line(&line)?;
            let verdict = disc_extension_test(&u, slice.center(), slice.radius(), params)?;
            if !verdict.extends {
                return Ok(Some(NonExtendingSlice {
                    line_index,
                    line,
                    slice,
                    component,
                    verdict,
                }));
            }
        }
    }
    Ok(None)
}

/// Tests every component of the boundary data along a sampled family of
/// lines. A failure is exact (the restriction genuinely does not extend); a
/// pass is a sampled verdict, exact for mixed-polynomial data once enough
/// lines are taken, since non-extendability is an open condition on lines.
pub fn line_family_extension_test(
    map: &MixedMap,
    domain: &Domain,
    line_count: usize,
    seed: u64,
    params: &Params,
) -> Result<ExtensionVerdict> {
    if map.vars() != domain.dim() {
        return Err(Error::DimensionMismatch { expected: domain.dim(), found: map.vars() });
    }
    match find_nonextending_slice(map, domain, line_count, seed, params)? {
        Some(hit) => Ok(ExtensionVerdict {
            extends: false,
            witness_line: Some(hit.line),
            ..hit.verdict
        }),
        None => {
            // report the worst-margin pass among the sampled lines
            let mut worst: Option<ExtensionVerdict> = None;
            for line in sample_lines(domain, line_count, seed) {
                let Some(slice) = domain.slice(&line)? else { continue };
                for poly in map.components() {
                    let u = poly.restrict_to_line(&line)?;
                    let v = disc_extension_test(&u, slice.center(), slice.radius(), params)?;
                    let ratio = v.defect / v.tolerance;
                    if worst.as_ref().is_none_or(|w| ratio > w.defect / w.tolerance) {
                        worst = Some(v);
                    }
                }
            }
            Ok(worst.unwrap_or(ExtensionVerdict {
                extends: true,
                defect: 0.0,
                tolerance: params.fourier_tol_scale,
                witness_line: None,
                coefficient_table: BTreeMap::new(),
            }))
        }
    }
}

/// Degree of the structured map `z -> (phi(z), z_2, ..., z_N)` (in the frame
/// of the given line), computed as the winding of the restriction of `phi`
/// along the slice boundary circle. The trailing coordinates vanish only on
/// the line, so the winding determines the full degree.
pub fn structured_degree(
    phi: &MixedPolynomial,
    domain: &Domain,
    line: &ComplexLine,
    params: &Params,
) -> Result<DegreeCertificate> {
    let slice = domain.slice(line)?.ok_or(Error::NonTransverseLine)?;
    let u = phi.restrict_to_line(line)?;
    let winding = winding_on_circle(
        |zeta| u.evaluate(zeta),
        slice.center(),
        slice.radius(),
        WINDING_INITIAL_SAMPLES,
        params.zero_tol_scale,
    )
    .map_err(|e| match e {
        Error::ZeroOnBoundary { modulus, .. } => Error::ZeroOnSliceBoundary { modulus },
        other => other,
    })?;
    Ok(DegreeCertificate {
        degree: winding.winding,
        boundary_margin: winding.min_modulus,
        evidence: DegreeEvidence::SliceWinding { slice, winding },
    })
}

/// True when the trailing components are positive real multiples of the
/// coordinates `z_2, ..., z_N`. Such components vanish exactly on the first
/// axis, so the slice-winding route applies there (positive scaling does not
/// move the degree).
pub fn is_structured(map: &MixedMap) -> bool {
    let n = map.vars();
    if map.components().len() != n || n < 2 {
        return false;
    }
    map.components().iter().enumerate().skip(1).all(|(j, p)| {
        p.terms().len() == 1 && {
            let t = &p.terms()[0];
            t.coeff.im.abs() < 1e-12
                && t.coeff.re > 0.0
                && t.zbar_pow.iter().all(|&e| e == 0)
                && t.z_pow.iter().enumerate().all(|(k, &e)| e == u32::from(k == j))
        }
    })
}

/// Degree of a mixed-polynomial boundary map: the slice-winding route when
/// the map is structured and the first axis cuts the domain, otherwise the
/// zero-count oracle.
pub fn map_degree(
    map: &MixedMap,
    domain: &Domain,
    seed: u64,
    params: &Params,
) -> Result<DegreeCertificate> {
    if map.vars() != domain.dim() {
        return Err(Error::DimensionMismatch { expected: domain.dim(), found: map.vars() });
    }
    if is_structured(map) {
        let axis = ComplexLine::coordinate_axis(domain.dim(), 0)?;
        if domain.slice(&axis)?.is_some() {
            return structured_degree(&map.components()[0], domain, &axis, params);
        }
    }
    let oracle_map = map.clone();
    zero_count_degree(
        move |z| oracle_map.evaluate(z).expect("dimensions checked"),
        domain,
        params.grid_density,
        seed,
        params,
    )
}

/// Computes the degree before and after a componentwise positive scaling and
/// checks they agree. Each side takes the slice-winding route when its form
/// allows and the zero-count oracle otherwise.
pub fn scaled_degree_check(
    map: &MixedMap,
    domain: &Domain,
    factors: &[f64],
    seed: u64,
    params: &Params,
) -> Result<(DegreeCertificate, DegreeCertificate)> {
    if factors.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
        return Err(Error::InvalidInput("scaling factors must be positive".into()));
    }
    let before = map_degree(map, domain, seed, params)?;
    let scaled = map.scale_components(factors)?;
    let after = map_degree(&scaled, domain, seed, params)?;
    if before.degree != after.degree {
        return Err(Error::DegreeMismatch { lhs: before.degree, rhs: after.degree });
    }
    Ok((before, after))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::Ball;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit_ball2() -> Domain {
        Domain::Ball(Ball::unit(2))
    }

    fn params() -> Params {
        Params::default()
    }

    #[test]
    fn holomorphic_data_extends() {
        // zeta^2 + 3
        let u = UnivariateMixed::from_terms(vec![(c(1.0, 0.0), 2, 0), (c(3.0, 0.0), 0, 0)]);
        let v = disc_extension_test(&u, c(0.0, 0.0), 1.0, &params()).unwrap();
        assert!(v.extends);
        assert!(v.defect < 1e-12);
    }

    #[test]
    fn conjugate_data_fails_with_unit_defect() {
        let u = UnivariateMixed::from_terms(vec![(c(1.0, 0.0), 0, 1)]);
        let v = disc_extension_test(&u, c(0.0, 0.0), 1.0, &params()).unwrap();
        assert!(!v.extends);
        assert!((v.defect - 1.0).abs() < 1e-12);
        assert!((v.coefficient_table[&-1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_antiholomorphic_term_sets_defect() {
        // zeta + 0.1 conj(zeta)^2
        let u = UnivariateMixed::from_terms(vec![(c(1.0, 0.0), 1, 0), (c(0.1, 0.0), 0, 2)]);
        let v = disc_extension_test(&u, c(0.0, 0.0), 1.0, &params()).unwrap();
        assert!(!v.extends);
        assert!((v.defect - 0.1).abs() < 1e-12);
        assert!((v.coefficient_table[&-2] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn purely_holomorphic_split_data_always_extends() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for _ in 0..20 {
            let terms: Vec<(Complex64, u32, u32)> = (0..=4)
                .map(|k| (c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5), k, 0))
                .collect();
            let u = UnivariateMixed::from_terms(terms);
            let a = c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            let r = 0.3 + rng.gen::<f64>();
            let v = disc_extension_test(&u, a, r, &params()).unwrap();
            assert!(v.extends, "defect {} vs tol {}", v.defect, v.tolerance);
        }
    }

    #[test]
    fn clear_antiholomorphic_content_always_fails() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        for _ in 0..20 {
            let mut terms: Vec<(Complex64, u32, u32)> = (0..=3)
                .map(|k| (c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5), k, 0))
                .collect();
            terms.push((c(0.5 + rng.gen::<f64>(), 0.3), 0, rng.gen_range(1..=2)));
            let u = UnivariateMixed::from_terms(terms);
            let v = disc_extension_test(&u, c(0.1, -0.2), 0.8, &params()).unwrap();
            assert!(!v.extends);
            assert!(v.defect > 10.0 * v.tolerance);
        }
    }

    #[test]
    fn holomorphic_map_passes_line_family() {
        // (z_1 z_2, z_2)
        let map = MixedMap::new(vec![
            MixedPolynomial::coordinate(2, 0).mul(&MixedPolynomial::coordinate(2, 1)).unwrap(),
            MixedPolynomial::coordinate(2, 1),
        ])
        .unwrap();
        let v = line_family_extension_test(&map, &unit_ball2(), 200, 7, &params()).unwrap();
        assert!(v.extends);
        assert!(v.witness_line.is_none());
    }

    #[test]
    fn conjugate_component_fails_line_family_fast() {
        let map = MixedMap::new(vec![
            MixedPolynomial::conj_coordinate(2, 0),
            MixedPolynomial::coordinate(2, 1),
        ])
        .unwrap();
        let hit = find_nonextending_slice(&map, &unit_ball2(), 200, 7, &params())
            .unwrap()
            .expect("antiholomorphic data must fail");
        assert_eq!(hit.component, 0);
        assert!(hit.line_index < 5, "witness found at line {}", hit.line_index);
        let v = line_family_extension_test(&map, &unit_ball2(), 200, 7, &params()).unwrap();
        assert!(!v.extends);
        assert!(v.witness_line.is_some());
    }

    #[test]
    fn constant_map_extends() {
        let map = MixedMap::new(vec![
            MixedPolynomial::constant(2, c(2.0, 1.0)),
            MixedPolynomial::constant(2, c(0.0, -1.0)),
        ])
        .unwrap();
        let v = line_family_extension_test(&map, &unit_ball2(), 50, 7, &params()).unwrap();
        assert!(v.extends);
    }

    #[test]
    fn structured_degree_of_conjugate_matches_oracle() {
        let domain = unit_ball2();
        let axis = ComplexLine::coordinate_axis(2, 0).unwrap();
        let phi = MixedPolynomial::conj_coordinate(2, 0);
        let cert = structured_degree(&phi, &domain, &axis, &params()).unwrap();
        assert_eq!(cert.degree, -1);

        let oracle = zero_count_degree(
            |z| vec![z.coords()[0].conj(), z.coords()[1]],
            &domain,
            3,
            7,
            &params(),
        )
        .unwrap();
        assert_eq!(oracle.degree, cert.degree);
    }

    #[test]
    fn structured_degree_of_square() {
        let domain = unit_ball2();
        let axis = ComplexLine::coordinate_axis(2, 0).unwrap();
        let phi = MixedPolynomial::coordinate(2, 0)
            .mul(&MixedPolynomial::coordinate(2, 0))
            .unwrap();
        let cert = structured_degree(&phi, &domain, &axis, &params()).unwrap();
        assert_eq!(cert.degree, 2);
    }

    #[test]
    fn nonvanishing_constant_has_degree_zero() {
        let domain = unit_ball2();
        let axis = ComplexLine::coordinate_axis(2, 0).unwrap();
        let phi = MixedPolynomial::constant(2, c(1.0, 0.0));
        let cert = structured_degree(&phi, &domain, &axis, &params()).unwrap();
        assert_eq!(cert.degree, 0);
    }

    #[test]
    fn vanishing_slice_restriction_is_reported() {
        let domain = unit_ball2();
        let axis = ComplexLine::coordinate_axis(2, 0).unwrap();
        // z_1 - 1 vanishes at zeta = 1 on the slice circle
        let phi = MixedPolynomial::coordinate(2, 0)
            .add(&MixedPolynomial::constant(2, c(-1.0, 0.0)))
            .unwrap();
        assert!(matches!(
            structured_degree(&phi, &domain, &axis, &params()),
            Err(Error::ZeroOnSliceBoundary { .. })
        ));
    }

    #[test]
    fn structured_form_detection() {
        let structured = MixedMap::new(vec![
            MixedPolynomial::conj_coordinate(2, 0),
            MixedPolynomial::coordinate(2, 1),
        ])
        .unwrap();
        assert!(is_structured(&structured));
        // positive scaling keeps the form; a rotated or perturbed tail breaks it
        assert!(is_structured(&structured.scale_components(&[1.0, 2.0]).unwrap()));
        let rotated = MixedMap::new(vec![
            MixedPolynomial::conj_coordinate(2, 0),
            MixedPolynomial::coordinate(2, 1).scale(c(0.0, 1.0)),
        ])
        .unwrap();
        assert!(!is_structured(&rotated));
        let shifted = MixedMap::new(vec![
            MixedPolynomial::conj_coordinate(2, 0),
            MixedPolynomial::coordinate(2, 1)
                .add(&MixedPolynomial::constant(2, c(0.1, 0.0)))
                .unwrap(),
        ])
        .unwrap();
        assert!(!is_structured(&shifted));
    }

    #[test]
    fn scaling_preserves_degree_of_conjugate_map() {
        let map = MixedMap::new(vec![
            MixedPolynomial::conj_coordinate(2, 0),
            MixedPolynomial::coordinate(2, 1),
        ])
        .unwrap();
        let (before, after) =
            scaled_degree_check(&map, &unit_ball2(), &[3.0, 7.0], 7, &params()).unwrap();
        assert_eq!(before.degree, -1);
        assert_eq!(after.degree, -1);
    }

    #[test]
    fn scaling_preserves_degree_of_square_map() {
        let map = MixedMap::new(vec![
            MixedPolynomial::coordinate(2, 0).mul(&MixedPolynomial::coordinate(2, 0)).unwrap(),
            MixedPolynomial::coordinate(2, 1),
        ])
        .unwrap();
        let (before, after) =
            scaled_degree_check(&map, &unit_ball2(), &[0.5, 2.0], 11, &params()).unwrap();
        assert_eq!(before.degree, 2);
        assert_eq!(after.degree, 2);
    }

    #[test]
    fn unit_scaling_is_trivially_stable() {
        let map = MixedMap::new(vec![
            MixedPolynomial::conj_coordinate(2, 0),
            MixedPolynomial::coordinate(2, 1),
        ])
        .unwrap();
        let (before, after) =
            scaled_degree_check(&map, &unit_ball2(), &[1.0, 1.0], 7, &params()).unwrap();
        assert_eq!(before.degree, after.degree);
    }

    #[test]
    fn rejects_nonpositive_scaling() {
        let map = MixedMap::new(vec![
            MixedPolynomial::coordinate(2, 0),
            MixedPolynomial::coordinate(2, 1),
        ])
        .unwrap();
        assert!(scaled_degree_check(&map, &unit_ball2(), &[1.0, -2.0], 7, &params()).is_err());
    }
}
