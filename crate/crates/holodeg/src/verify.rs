//! Seeded verification experiments: each one reproduces a structural fact the
//! toolkit is built on (winding arithmetic, slice reduction, scaling
//! invariance, nonnegativity for holomorphic data, witness construction,
//! orientation of linear completions, the circle split identity, and oracle
//! grid stability) and reports expected vs observed behaviour.
//!
//! All randomness flows from a single base seed through per-experiment
//! subseeds (`ChaCha8`, golden-ratio mixing), so reports are reproducible
//! byte for byte.

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::degree::{is_complex_linear, zero_count_degree, DegreeEvidence, RealLinearMap};
use crate::domains::{Ball, ComplexLine, Domain};
use crate::error::Error;
use crate::extension::{scaled_degree_check, structured_degree};
use crate::mixed::{split_on_circle, MixedMap, MixedPolynomial, MixedTerm, UnivariateMixed};
use crate::params::Params;
use crate::winding::winding_on_circle;
use crate::witness::{assemble_witness, linear_witness};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Per-experiment outcome.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentRecord {
    pub name: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
    pub runtime_ms: u64,
}

/// Full verification run.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerifyReport {
    pub seed: u64,
    pub experiments: Vec<ExperimentRecord>,
    pub pass: bool,
}

pub fn subseed(seed: u64, index: u64) -> u64 {
    seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn unit_ball2() -> Domain {
    Domain::Ball(Ball::unit(2))
}

fn record(
    name: &str,
    expected: String,
    budget_ms: u64,
    run: impl FnOnce() -> (String, bool),
) -> ExperimentRecord {
    let start = Instant::now();
    let (observed, ok) = run();
    let runtime_ms = start.elapsed().as_millis() as u64;
    let within_budget = runtime_ms < budget_ms;
    ExperimentRecord {
        name: name.into(),
        expected,
        observed: if within_budget {
            observed
        } else {
            format!("{observed}; budget {budget_ms} ms exceeded")
        },
        pass: ok && within_budget,
        runtime_ms,
    }
}

/// Runs the whole suite in order.
pub fn run_all(seed: u64, params: &Params) -> VerifyReport {
    let experiments = vec![
        winding_correctness(subseed(seed, 1)),
        slice_reduction_equivalence(subseed(seed, 2), params),
        positive_scaling_invariance(subseed(seed, 3), params),
        holomorphic_nonnegativity(subseed(seed, 4), params),
        perturbed_nonnegativity(subseed(seed, 5), params),
        witness_construction(subseed(seed, 6), params),
        linear_witness_orientation(subseed(seed, 7), params),
        circle_split_identity(subseed(seed, 8)),
        oracle_grid_stability(subseed(seed, 9), params),
    ];
    let pass = experiments.iter().all(|e| e.pass);
    VerifyReport { seed, experiments, pass }
}

// ---------------------------------------------------------------------------
// Random data generators (shared with the test suites)
// ---------------------------------------------------------------------------

/// Random mixed polynomial: a handful of monomials of total degree at most
/// `max_deg` with O(1) complex coefficients.
pub fn random_mixed_poly(rng: &mut ChaCha8Rng, vars: usize, max_deg: u32) -> MixedPolynomial {
    let mut terms = Vec::new();
    let count = rng.gen_range(2..=5);
    for _ in 0..count {
        let mut z_pow = vec![0u32; vars];
        let mut zbar_pow = vec![0u32; vars];
        let mut budget = rng.gen_range(0..=max_deg);
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
            coeff: c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) * 2.0,
            z_pow,
            zbar_pow,
        });
    }
    MixedPolynomial::from_terms(vars, terms).expect("generated terms are valid")
}

/// Random holomorphic polynomial (no conjugated variables).
pub fn random_holomorphic_poly(rng: &mut ChaCha8Rng, vars: usize, max_deg: u32) -> MixedPolynomial {
    let mut terms = Vec::new();
    let count = rng.gen_range(2..=5);
    for _ in 0..count {
        let mut z_pow = vec![0u32; vars];
        let mut budget = rng.gen_range(0..=max_deg);
        for j in 0..vars {
            let e = rng.gen_range(0..=budget);
            z_pow[j] = e;
            budget -= e;
        }
        terms.push(MixedTerm {
            coeff: c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) * 2.0,
            z_pow,
            zbar_pow: vec![0; vars],
        });
    }
    MixedPolynomial::from_terms(vars, terms).expect("generated terms are valid")
}

/// Minimum modulus of `phi` restricted to the first-axis slice circle of the
/// unit ball (256 samples).
pub fn slice_circle_margin(phi: &MixedPolynomial) -> f64 {
    let axis = ComplexLine::coordinate_axis(phi.vars(), 0).expect("axis exists");
    let u = phi.restrict_to_line(&axis).expect("dimensions agree");
    (0..256)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / 256.0;
            u.evaluate(c(theta.cos(), theta.sin())).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Random mixed `phi` on C^2 (degree <= `max_deg`) whose first-axis slice
/// restriction keeps modulus above `margin` on the circle. Forced constant
/// and linear terms keep the restriction's zeros simple, so the zero-count
/// oracle applies to `(phi, z_2)` without hitting degenerate zeros.
pub fn random_slice_margined_phi(
    rng: &mut ChaCha8Rng,
    max_deg: u32,
    margin: f64,
) -> MixedPolynomial {
    loop {
        let low_order = MixedPolynomial::from_terms(
            2,
            vec![
                MixedTerm {
                    coeff: Complex64::from_polar(0.2 + 0.5 * rng.gen::<f64>(), rng.gen_range(0.0..std::f64::consts::TAU)),
                    z_pow: vec![0, 0],
                    zbar_pow: vec![0, 0],
                },
                MixedTerm {
                    coeff: Complex64::from_polar(0.2 + 0.5 * rng.gen::<f64>(), rng.gen_range(0.0..std::f64::consts::TAU)),
                    z_pow: vec![1, 0],
                    zbar_pow: vec![0, 0],
                },
            ],
        )
        .expect("low-order terms are valid");
        let phi = random_mixed_poly(rng, 2, max_deg)
            .add(&low_order)
            .expect("same dimension");
        if slice_circle_margin(&phi) > margin {
            return phi;
        }
    }
}

/// Relative minimum of `|G|` over sampled boundary points.
pub fn boundary_margin(map: &MixedMap, domain: &Domain, rng: &mut ChaCha8Rng) -> f64 {
    let samples = domain.boundary_samples(512, rng);
    let mut min_val = f64::INFINITY;
    let mut max_val = 0.0f64;
    for z in &samples {
        let v = map.evaluate(z).expect("dimensions agree");
        let modulus = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        min_val = min_val.min(modulus);
        max_val = max_val.max(modulus);
    }
    if max_val == 0.0 {
        0.0
    } else {
        min_val / max_val
    }
}

/// Random holomorphic map on C^2 nonvanishing on the unit sphere with a
/// workable relative margin.
pub fn random_holomorphic_map_nonvanishing(
    rng: &mut ChaCha8Rng,
    max_deg: u32,
    domain: &Domain,
) -> MixedMap {
    loop {
        let map = MixedMap::new(vec![
            random_holomorphic_poly(rng, 2, max_deg),
            random_holomorphic_poly(rng, 2, max_deg),
        ])
        .expect("two components on C^2");
        if boundary_margin(&map, domain, rng) > 1e-2 {
            return map;
        }
    }
}

/// Random mixed map on C^2 that provably fails to extend: one component
/// carries a conjugated monomial with an O(1) coefficient.
pub fn random_nonextendable_map(rng: &mut ChaCha8Rng, max_deg: u32) -> MixedMap {
    let forced_component = rng.gen_range(0..2usize);
    let components: Vec<MixedPolynomial> = (0..2)
        .map(|idx| {
            let mut poly = random_mixed_poly(rng, 2, max_deg);
            if idx == forced_component {
                let magnitude = 0.5 + rng.gen::<f64>();
                let phase = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
                let var = rng.gen_range(0..2usize);
                let power = rng.gen_range(1..=2u32);
                let mut zbar_pow = vec![0u32; 2];
                zbar_pow[var] = power;
                let term = MixedPolynomial::from_terms(
                    2,
                    vec![MixedTerm {
                        coeff: Complex64::from_polar(magnitude, phase),
                        z_pow: vec![0; 2],
                        zbar_pow,
                    }],
                )
                .expect("single term");
                poly = poly.add(&term).expect("same dimension");
            }
            poly
        })
        .collect();
    MixedMap::new(components).expect("two components on C^2")
}

/// Random invertible-looking real-linear map on C^N that is not
/// complex-linear.
pub fn random_non_complex_linear(rng: &mut ChaCha8Rng, n: usize) -> RealLinearMap {
    loop {
        let m = DMatrix::from_fn(2 * n, 2 * n, |_, _| 2.0 * (rng.gen::<f64>() - 0.5));
        let map = RealLinearMap::new(m).expect("finite entries");
        if !is_complex_linear(&map) && map.matrix().determinant().abs() > 1e-3 {
            return map;
        }
    }
}

/// Realification of a random complex matrix (always complex-linear).
pub fn random_realified_complex(rng: &mut ChaCha8Rng, n: usize) -> RealLinearMap {
    let m = DMatrix::from_fn(n, n, |_, _| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) * 2.0);
    RealLinearMap::from_complex_matrix(&m)
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

/// Roots-off-circle loop for product-rule checks: factors `(root, conj?)`.
fn random_loop_factors(rng: &mut ChaCha8Rng) -> (Vec<(Complex64, bool)>, i64) {
    let mut factors = Vec::new();
    let mut expected = 0i64;
    for _ in 0..rng.gen_range(1..=4) {
        let inside = rng.gen_bool(0.5);
        let conjugated = rng.gen_bool(0.4);
        let radius = if inside { rng.gen_range(0.0..0.8) } else { rng.gen_range(1.2..3.0) };
        let angle = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
        factors.push((Complex64::from_polar(radius, angle), conjugated));
        if inside {
            expected += if conjugated { -1 } else { 1 };
        }
    }
    (factors, expected)
}

fn eval_factors(factors: &[(Complex64, bool)], z: Complex64) -> Complex64 {
    factors
        .iter()
        .map(|&(root, conjugated)| if conjugated { z.conj() - root } else { z - root })
        .product()
}

pub fn winding_correctness(seed: u64) -> ExperimentRecord {
    record(
        "winding_correctness",
        "windings of z^k and conj(z)^k exact for |k| <= 8; product rule on 50 random loops"
            .into(),
        5_000,
        || {
            let wind = |f: &dyn Fn(Complex64) -> Complex64| {
                winding_on_circle(f, c(0.0, 0.0), 1.0, 64, 1e-9).map(|w| w.winding).ok()
            };
            let mut monomials_ok = 0;
            for k in -8i32..=8 {
                let got = wind(&|z: Complex64| {
                    if k >= 0 {
                        z.powi(k)
                    } else {
                        z.conj().powi(-k)
                    }
                });
                if got == Some(k as i64) {
                    monomials_ok += 1;
                }
            }
            let mut products_ok = 0;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..50 {
                let (fa, wa) = random_loop_factors(&mut rng);
                let (fb, wb) = random_loop_factors(&mut rng);
                let a = wind(&|z| eval_factors(&fa, z));
                let b = wind(&|z| eval_factors(&fb, z));
                let ab = wind(&|z| eval_factors(&fa, z) * eval_factors(&fb, z));
                if a == Some(wa) && b == Some(wb) && ab == Some(wa + wb) {
                    products_ok += 1;
                }
            }
            (
                format!("{monomials_ok}/17 monomials exact, {products_ok}/50 product identities"),
                monomials_ok == 17 && products_ok == 50,
            )
        },
    )
}

pub fn slice_reduction_equivalence(seed: u64, params: &Params) -> ExperimentRecord {
    let params = params.clone();
    record(
        "slice_reduction_equivalence",
        "25 structured maps: slice winding equals signed zero count, exactly".into(),
        120_000,
        move || {
            let domain = unit_ball2();
            let axis = ComplexLine::coordinate_axis(2, 0).expect("axis exists");
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut agreed = 0;
            let mut failures = Vec::new();
            for case in 0..25u64 {
                let phi = random_slice_margined_phi(&mut rng, 3, 1e-3);
                let via_winding = structured_degree(&phi, &domain, &axis, &params);
                let phi_for_oracle = phi.clone();
                let via_zeros = zero_count_degree(
                    move |z| {
                        vec![
                            phi_for_oracle.evaluate(z).expect("dimension fixed"),
                            z.coords()[1],
                        ]
                    },
                    &domain,
                    params.grid_density,
                    subseed(seed, 100 + case),
                    &params,
                );
                match (via_winding, via_zeros) {
                    (Ok(w), Ok(z)) if w.degree == z.degree => agreed += 1,
                    (Ok(w), Ok(z)) => failures.push(format!("case {case}: {} vs {}", w.degree, z.degree)),
                    (w, z) => failures.push(format!("case {case}: {w:?} / {z:?}")),
                }
            }
            let ok = agreed == 25;
            let detail = if failures.is_empty() {
                String::new()
            } else {
                format!("; first failure: {}", failures[0])
            };
            (format!("{agreed}/25 exact agreements{detail}"), ok)
        },
    )
}

pub fn positive_scaling_invariance(seed: u64, params: &Params) -> ExperimentRecord {
    let params = params.clone();
    record(
        "positive_scaling_invariance",
        "25 random componentwise positive scalings leave the degree unchanged (winding and oracle routes)".into(),
        120_000,
        move || {
            let domain = unit_ball2();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut passed = 0;
            let mut first_failure = String::new();
            for case in 0..25u64 {
                let phi = random_slice_margined_phi(&mut rng, 3, 1e-3);
                let map = MixedMap::new(vec![phi, MixedPolynomial::coordinate(2, 1)])
                    .expect("structured map");
                let factors = [rng.gen_range(0.1..10.0), rng.gen_range(0.1..10.0)];
                let checked =
                    scaled_degree_check(&map, &domain, &factors, subseed(seed, 200 + case), &params);
                // independent cross-check: signed zero count of the scaled map
                let scaled = map.scale_components(&factors).expect("positive factors");
                let oracle = zero_count_degree(
                    move |z| scaled.evaluate(z).expect("dimension fixed"),
                    &domain,
                    params.grid_density,
                    subseed(seed, 230 + case),
                    &params,
                );
                match (checked, oracle) {
                    (Ok((before, after)), Ok(cert))
                        if before.degree == after.degree && after.degree == cert.degree =>
                    {
                        passed += 1
                    }
                    (lhs, rhs) => {
                        if first_failure.is_empty() {
                            first_failure = format!("; case {case}: {lhs:?} / {rhs:?}");
                        }
                    }
                }
            }
            (format!("{passed}/25 scalings stable{first_failure}"), passed == 25)
        },
    )
}

pub fn holomorphic_nonnegativity(seed: u64, params: &Params) -> ExperimentRecord {
    let params = params.clone();
    record(
        "holomorphic_nonnegativity",
        "25 random holomorphic maps: degree >= 0, equal to the zero count, all signs +1".into(),
        120_000,
        move || {
            let domain = unit_ball2();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut passed = 0;
            let mut first_failure = String::new();
            for case in 0..25u64 {
                let map = random_holomorphic_map_nonvanishing(&mut rng, 2, &domain);
                let oracle_map = map.clone();
                match zero_count_degree(
                    move |z| oracle_map.evaluate(z).expect("dimension fixed"),
                    &domain,
                    params.grid_density,
                    subseed(seed, 300 + case),
                    &params,
                ) {
                    Ok(cert) => {
                        let DegreeEvidence::ZeroCount { zeros } = &cert.evidence else {
                            unreachable!("oracle path emits zero counts")
                        };
                        let all_positive = zeros.iter().all(|z| z.jacobian_sign == 1);
                        if cert.degree >= 0 && cert.degree == zeros.len() as i64 && all_positive {
                            passed += 1;
                        } else if first_failure.is_empty() {
                            first_failure = format!(
                                "; case {case}: degree {} with {} zeros",
                                cert.degree,
                                zeros.len()
                            );
                        }
                    }
                    Err(e) => {
                        if first_failure.is_empty() {
                            first_failure = format!("; case {case}: {e}");
                        }
                    }
                }
            }
            (format!("{passed}/25 nonnegative and sign-consistent{first_failure}"), passed == 25)
        },
    )
}

pub fn perturbed_nonnegativity(seed: u64, params: &Params) -> ExperimentRecord {
    let params = params.clone();
    record(
        "perturbed_nonnegativity",
        "10 extendable maps x 20 holomorphic perturbations: every degree >= 0".into(),
        180_000,
        move || {
            let domain = unit_ball2();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut passed = 0;
            let total = 10 * 20;
            let mut first_failure = String::new();
            for base_case in 0..10u64 {
                let base = random_holomorphic_map_nonvanishing(&mut rng, 2, &domain);
                let mut accepted = 0u64;
                while accepted < 20 {
                    let perturbation = MixedMap::new(vec![
                        random_holomorphic_poly(&mut rng, 2, 2),
                        random_holomorphic_poly(&mut rng, 2, 2),
                    ])
                    .expect("two components");
                    let sum = base.add(&perturbation).expect("same shape");
                    if boundary_margin(&sum, &domain, &mut rng) <= 1e-2 {
                        continue;
                    }
                    accepted += 1;
                    let oracle_map = sum.clone();
                    match zero_count_degree(
                        move |z| oracle_map.evaluate(z).expect("dimension fixed"),
                        &domain,
                        params.grid_density,
                        subseed(seed, 400 + base_case * 32 + accepted),
                        &params,
                    ) {
                        Ok(cert) if cert.degree >= 0 => passed += 1,
                        Ok(cert) => {
                            if first_failure.is_empty() {
                                first_failure = format!(
                                    "; base {base_case} perturbation {accepted}: degree {}",
                                    cert.degree
                                );
                            }
                        }
                        Err(e) => {
                            if first_failure.is_empty() {
                                first_failure =
                                    format!("; base {base_case} perturbation {accepted}: {e}");
                            }
                        }
                    }
                }
            }
            (format!("{passed}/{total} perturbed degrees nonnegative{first_failure}"), passed == total)
        },
    )
}

pub fn witness_construction(seed: u64, params: &Params) -> ExperimentRecord {
    let params = params.clone();
    record(
        "witness_construction",
        "canonical conjugate map reaches degree -1; 20 random non-extendable maps get witnesses certified by winding and zero count".into(),
        300_000,
        move || {
            let domain = unit_ball2();
            let canonical = MixedMap::new(vec![
                MixedPolynomial::conj_coordinate(2, 0),
                MixedPolynomial::coordinate(2, 1),
            ])
            .expect("canonical map");
            let canonical_ok = match assemble_witness(&canonical, &domain, subseed(seed, 500), &params)
            {
                Ok(report) => report.slice_winding == -1 && report.ambient_degree.degree == -1,
                Err(_) => false,
            };

            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut passed = 0;
            let mut first_failure = String::new();
            let max_deg = 3u32;
            for case in 0..20u64 {
                let map = random_nonextendable_map(&mut rng, max_deg);
                match assemble_witness(&map, &domain, subseed(seed, 600 + case), &params) {
                    Ok(report) => {
                        let degree_bound = u32::max(max_deg, 1);
                        let sound = report.slice_winding < 0
                            && report.ambient_degree.degree == report.slice_winding
                            && report.p.is_holomorphic()
                            && report.p.total_degree() <= degree_bound
                            && report.boundary_margin > 0.0
                            && report.homotopy_margins.iter().all(|&m| m > 0.0);
                        if sound {
                            passed += 1;
                        } else if first_failure.is_empty() {
                            first_failure = format!(
                                "; case {case}: winding {} oracle {} deg {}",
                                report.slice_winding,
                                report.ambient_degree.degree,
                                report.p.total_degree()
                            );
                        }
                    }
                    Err(e) => {
                        if first_failure.is_empty() {
                            first_failure = format!("; case {case}: {e}");
                        }
                    }
                }
            }
            (
                format!(
                    "canonical {}; {passed}/20 random witnesses certified{first_failure}",
                    if canonical_ok { "-1 twice" } else { "FAILED" }
                ),
                canonical_ok && passed == 20,
            )
        },
    )
}

pub fn linear_witness_orientation(seed: u64, params: &Params) -> ExperimentRecord {
    let params = params.clone();
    record(
        "linear_witness_orientation",
        "conjugation plus 10 random non-complex-linear maps get orientation-reversing completions; 10 realified complex maps are rejected".into(),
        10_000,
        move || {
            let mut canonical_ok = false;
            let mut m = DMatrix::<f64>::identity(4, 4);
            m[(1, 1)] = -1.0;
            if let Ok(a) = RealLinearMap::new(m) {
                if let Ok(report) = linear_witness(&a, &params) {
                    canonical_ok = report.sign == -1
                        && is_complex_linear(&report.h)
                        && report.beta.norm() > 0.5;
                }
            }

            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut witnessed = 0;
            for _ in 0..10 {
                let a = random_non_complex_linear(&mut rng, 2);
                if let Ok(report) = linear_witness(&a, &params) {
                    let completed = a.add(&report.h).expect("same size");
                    if report.sign == -1
                        && is_complex_linear(&report.h)
                        && crate::degree::orientation_sign(&completed).ok() == Some(-1)
                    {
                        witnessed += 1;
                    }
                }
            }
            let mut rejected = 0;
            for _ in 0..10 {
                let a = random_realified_complex(&mut rng, 2);
                if matches!(linear_witness(&a, &params), Err(Error::IsComplexLinear)) {
                    rejected += 1;
                }
            }
            (
                format!(
                    "canonical {}; {witnessed}/10 completions reverse orientation, {rejected}/10 complex-linear maps rejected",
                    if canonical_ok { "ok" } else { "FAILED" }
                ),
                canonical_ok && witnessed == 10 && rejected == 10,
            )
        },
    )
}

pub fn circle_split_identity(seed: u64) -> ExperimentRecord {
    record(
        "circle_split_identity",
        "200 random mixed polynomials of degree <= 6 reconstruct within 1e-9 relative on 256 circle samples".into(),
        10_000,
        move || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut passed = 0;
            let mut worst = 0.0f64;
            for _ in 0..200 {
                let mut terms = Vec::new();
                for _ in 0..rng.gen_range(1..=7) {
                    let i = rng.gen_range(0..=6u32);
                    let j = rng.gen_range(0..=(6 - i));
                    terms.push((c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) * 2.0, i, j));
                }
                let u = UnivariateMixed::from_terms(terms);
                let a = c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
                let r = 0.2 + 2.0 * rng.gen::<f64>();
                let Ok((q, s)) = split_on_circle(&u, a, r) else { continue };
                let mut max_u = 0.0f64;
                let mut max_err = 0.0f64;
                for k in 0..256 {
                    let theta = 2.0 * std::f64::consts::PI * k as f64 / 256.0;
                    let w = r * c(theta.cos(), theta.sin());
                    let direct = u.evaluate(a + w);
                    let rebuilt = q.evaluate_offset(w) + s.evaluate_offset(w).conj();
                    max_u = max_u.max(direct.norm());
                    max_err = max_err.max((direct - rebuilt).norm());
                }
                let rel = max_err / (1.0 + max_u);
                worst = worst.max(rel);
                if rel < 1e-9 {
                    passed += 1;
                }
            }
            (format!("{passed}/200 reconstructions exact (worst relative error {worst:.2e})"), passed == 200)
        },
    )
}

pub fn oracle_grid_stability(seed: u64, params: &Params) -> ExperimentRecord {
    let params = params.clone();
    record(
        "oracle_grid_stability",
        "zero counts repeat exactly when the start grid density doubles".into(),
        300_000,
        move || {
            let domain = unit_ball2();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut instances: Vec<MixedMap> = vec![
                MixedMap::new(vec![
                    MixedPolynomial::coordinate(2, 0),
                    MixedPolynomial::coordinate(2, 1),
                ])
                .expect("identity map"),
                MixedMap::new(vec![
                    MixedPolynomial::conj_coordinate(2, 0),
                    MixedPolynomial::coordinate(2, 1),
                ])
                .expect("conjugate map"),
            ];
            for _ in 0..5 {
                instances.push(random_holomorphic_map_nonvanishing(&mut rng, 2, &domain));
            }
            for _ in 0..3 {
                let phi = random_slice_margined_phi(&mut rng, 3, 1e-3);
                instances
                    .push(MixedMap::new(vec![phi, MixedPolynomial::coordinate(2, 1)]).expect("structured"));
            }
            let mut stable = 0;
            let total = instances.len();
            let mut first_failure = String::new();
            for (idx, map) in instances.into_iter().enumerate() {
                let run = |density: usize, salt: u64| {
                    let oracle_map = map.clone();
                    zero_count_degree(
                        move |z| oracle_map.evaluate(z).expect("dimension fixed"),
                        &domain,
                        density,
                        subseed(seed, 700 + salt),
                        &params,
                    )
                };
                match (run(params.grid_density, idx as u64), run(2 * params.grid_density, idx as u64)) {
                    (Ok(a), Ok(b)) if a.degree == b.degree => stable += 1,
                    (a, b) => {
                        if first_failure.is_empty() {
                            let fmt = |r: &Result<crate::degree::DegreeCertificate, Error>| match r {
                                Ok(cert) => cert.degree.to_string(),
                                Err(e) => e.to_string(),
                            };
                            first_failure = format!("; instance {idx}: {} vs {}", fmt(&a), fmt(&b));
                        }
                    }
                }
            }
            (format!("{stable}/{total} instances stable under doubling{first_failure}"), stable == total)
        },
    )
}
