//! Winding numbers of nonvanishing circle loops, with certified refinement,
//! and Fourier coefficients of loop data.
//!
//! The winding number is the summed principal-branch argument increment
//! between consecutive samples, divided by 2*pi. The sample count doubles
//! until every increment has magnitude below pi/2; for a continuous loop
//! sampled that finely the discrete sum equals the true change of argument,
//! so the bound is a certificate, not a heuristic.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixed::SampledLoop;
use crate::params::caps;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
const STEP_BOUND: f64 = std::f64::consts::FRAC_PI_2;
/// Residual of total/2*pi from the nearest integer must stay below this.
const ROUNDING_RESIDUAL: f64 = 0.01;

/// A certified winding number: every angular step stayed below pi/2 and the
/// loop kept a positive modulus margin at all samples used.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WindingResult {
    pub winding: i64,
    pub min_modulus: f64,
    pub max_angular_step: f64,
    pub samples_used: usize,
}

/// Winding number of `theta -> f(theta)` over `[0, 2*pi)`, refining the
/// uniform sample count by doubling until certification succeeds.
pub fn winding_number<F>(f: F, initial_samples: usize, zero_tol_scale: f64) -> Result<WindingResult>
where
    F: Fn(f64) -> Complex64,
{
    let mut n = initial_samples.max(8);
    loop {
        let values: Vec<Complex64> = (0..n).map(|k| f(TWO_PI * k as f64 / n as f64)).collect();
        match certify(&values, zero_tol_scale)? {
            Some(result) => return Ok(result),
            None => {
                if n >= caps::WINDING_SAMPLES {
                    return Err(Error::NoConvergence { samples: n });
                }
                n *= 2;
            }
        }
    }
}

/// Winding of `zeta -> f(zeta)` along the circle `|zeta - center| = radius`.
pub fn winding_on_circle<F>(
    f: F,
    center: Complex64,
    radius: f64,
    initial_samples: usize,
    zero_tol_scale: f64,
) -> Result<WindingResult>
where
    F: Fn(Complex64) -> Complex64,
{
    if !(radius > 0.0) {
        return Err(Error::DegenerateSlice);
    }
    winding_number(
        |theta| f(center + radius * Complex64::new(theta.cos(), theta.sin())),
        initial_samples,
        zero_tol_scale,
    )
}

/// Winding of a fixed sampled loop. No refinement is possible, so the
/// certification bound must already hold at the given resolution.
pub fn winding_of_loop(lp: &SampledLoop, zero_tol_scale: f64) -> Result<WindingResult> {
    match certify(lp.values(), zero_tol_scale)? {
        Some(result) => Ok(result),
        None => Err(Error::NoConvergence { samples: lp.len() }),
    }
}

/// Returns `Ok(None)` when an angular step reaches pi/2 (refine further).
fn certify(values: &[Complex64], zero_tol_scale: f64) -> Result<Option<WindingResult>> {
    let max_modulus = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let zero_tol = zero_tol_scale * max_modulus;
    let mut min_modulus = f64::INFINITY;
    for (index, v) in values.iter().enumerate() {
        let modulus = v.norm();
        if modulus <= zero_tol {
            return Err(Error::ZeroOnBoundary { modulus, index });
        }
        min_modulus = min_modulus.min(modulus);
    }
    let mut total = 0.0f64;
    let mut max_step = 0.0f64;
    for k in 0..values.len() {
        let next = values[(k + 1) % values.len()];
        let step = (next / values[k]).arg();
        max_step = max_step.max(step.abs());
        total += step;
    }
    if max_step >= STEP_BOUND {
        return Ok(None);
    }
    let turns = total / TWO_PI;
    let winding = turns.round();
    if (turns - winding).abs() >= ROUNDING_RESIDUAL {
        return Err(Error::NoConvergence { samples: values.len() });
    }
    Ok(Some(WindingResult {
        winding: winding as i64,
        min_modulus,
        max_angular_step: max_step,
        samples_used: values.len(),
    }))
}

/// Fourier coefficients `c_k` of `theta -> f(center + radius e^{i theta})`
/// for `k_lo <= k <= k_hi`, so that `f = sum c_k e^{i k theta}` for loops of
/// bandwidth at most `bandwidth`. Uses `8 * (max(|k|, bandwidth) + 1)`
/// uniform samples, which makes the rectangle rule exact on that class.
pub fn fourier_coefficients<F>(
    f: F,
    center: Complex64,
    radius: f64,
    k_lo: i64,
    k_hi: i64,
    bandwidth: u32,
) -> Result<BTreeMap<i64, Complex64>>
where
    F: Fn(Complex64) -> Complex64,
{
    if !(radius > 0.0) {
        return Err(Error::DegenerateSlice);
    }
    if k_lo > k_hi {
        return Err(Error::InvalidInput("empty Fourier index range".into()));
    }
    let reach = k_lo.unsigned_abs().max(k_hi.unsigned_abs()).max(bandwidth as u64) as usize;
    let n = 8 * (reach + 1);
    let values: Vec<Complex64> = (0..n)
        .map(|j| {
            let theta = TWO_PI * j as f64 / n as f64;
            f(center + radius * Complex64::new(theta.cos(), theta.sin()))
        })
        .collect();
    Ok(dft_range(&values, k_lo, k_hi))
}

/// Fourier coefficients of a fixed sampled loop (uniform rectangle rule over
/// the given angles; exact when the angles are uniform and the bandwidth is
/// below half the sample count).
pub fn fourier_of_loop(lp: &SampledLoop, k_lo: i64, k_hi: i64) -> Result<BTreeMap<i64, Complex64>> {
    if k_lo > k_hi {
        return Err(Error::InvalidInput("empty Fourier index range".into()));
    }
    let n = lp.len();
    let angles = lp.angles();
    let values = lp.values();
    let mut out = BTreeMap::new();
    for k in k_lo..=k_hi {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let next = if j + 1 < n { angles[j + 1] } else { angles[0] + TWO_PI };
            let weight = (next - angles[j]) / TWO_PI;
            let phase = Complex64::from_polar(1.0, -(k as f64) * angles[j]);
            acc += values[j] * phase * weight;
        }
        out.insert(k, acc);
    }
    Ok(out)
}

fn dft_range(values: &[Complex64], k_lo: i64, k_hi: i64) -> BTreeMap<i64, Complex64> {
    let n = values.len();
    let mut out = BTreeMap::new();
    for k in k_lo..=k_hi {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, v) in values.iter().enumerate() {
            let theta = TWO_PI * j as f64 / n as f64;
            acc += v * Complex64::from_polar(1.0, -(k as f64) * theta);
        }
        out.insert(k, acc / n as f64);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixed::{sample_component, split_on_circle, UnivariateMixed};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn circle_winding<F: Fn(Complex64) -> Complex64>(f: F) -> WindingResult {
        winding_on_circle(f, c(0.0, 0.0), 1.0, 64, 1e-9).unwrap()
    }

    /// Brute-force reference: fixed fine sampling, raw increment sum, no
    /// certification or refinement logic.
    fn brute_force_winding<F: Fn(Complex64) -> Complex64>(f: F) -> i64 {
        let n = 100_000;
        let mut total = 0.0;
        let mut prev = f(c(1.0, 0.0));
        for k in 1..=n {
            let theta = TWO_PI * k as f64 / n as f64;
            let v = f(c(theta.cos(), theta.sin()));
            total += (v / prev).arg();
            prev = v;
        }
        (total / TWO_PI).round() as i64
    }

    #[test]
    fn monomial_windings_are_exact() {
        for k in -8i32..=8 {
            let got = circle_winding(|z| {
                if k >= 0 {
                    z.powi(k)
                } else {
                    z.conj().powi(-k)
                }
            });
            assert_eq!(got.winding, k as i64, "monomial exponent {k}");
            assert!(got.max_angular_step < STEP_BOUND);
            assert!(got.min_modulus > 0.0);
        }
    }

    #[test]
    fn cubic_winds_three_times() {
        let got = circle_winding(|z| z * z * z);
        assert_eq!(got.winding, 3);
    }

    #[test]
    fn conjugate_winds_backwards() {
        let got = circle_winding(|z| z.conj());
        assert_eq!(got.winding, -1);
    }

    #[test]
    fn mixed_product_cancels() {
        let f = |z: Complex64| (z - c(0.5, 0.0)) * (z.conj() - c(0.25, 0.0));
        assert_eq!(circle_winding(f).winding, 0);
        assert_eq!(brute_force_winding(f), 0);
    }

    #[test]
    fn vanishing_sample_is_rejected() {
        let got = winding_on_circle(|z| z - c(1.0, 0.0), c(0.0, 0.0), 1.0, 64, 1e-9);
        assert!(matches!(got, Err(Error::ZeroOnBoundary { .. })));
    }

    /// Factors `(root, conjugated)`: the loop is the product of `z - root`
    /// and `conj(z) - root` pieces, all roots off the unit circle. The
    /// expected winding counts interior roots with sign.
    fn random_nonvanishing_loop(rng: &mut ChaCha8Rng) -> (Vec<(Complex64, bool)>, i64) {
        let mut factors = Vec::new();
        let mut expected = 0i64;
        for _ in 0..rng.gen_range(1..=4) {
            let inside = rng.gen_bool(0.5);
            let conjugated = rng.gen_bool(0.4);
            let radius = if inside { rng.gen_range(0.0..0.8) } else { rng.gen_range(1.2..3.0) };
            let angle = rng.gen_range(0.0..TWO_PI);
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

    #[test]
    fn product_rule_on_random_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let (fa, wa) = random_nonvanishing_loop(&mut rng);
            let (fb, wb) = random_nonvanishing_loop(&mut rng);
            let got_a = circle_winding(|z| eval_factors(&fa, z)).winding;
            let got_b = circle_winding(|z| eval_factors(&fb, z)).winding;
            let got_ab = circle_winding(|z| eval_factors(&fa, z) * eval_factors(&fb, z)).winding;
            assert_eq!(got_a, wa);
            assert_eq!(got_b, wb);
            assert_eq!(got_ab, got_a + got_b);
        }
    }

    #[test]
    fn positive_scaling_preserves_winding() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let (f, w) = random_nonvanishing_loop(&mut rng);
            let t = rng.gen_range(0.1..10.0);
            let scaled = circle_winding(|z| eval_factors(&f, z) * t).winding;
            assert_eq!(scaled, w);
        }
    }

    #[test]
    fn small_perturbations_preserve_winding() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..20 {
            let (f, w) = random_nonvanishing_loop(&mut rng);
            let base = circle_winding(|z| eval_factors(&f, z));
            assert_eq!(base.winding, w);
            // random trigonometric perturbation, sup bounded by minModulus/2
            let m = rng.gen_range(-5i32..=5);
            let phase = rng.gen_range(0.0..TWO_PI);
            let amp = 0.49 * base.min_modulus;
            let perturbed = circle_winding(|z| {
                let theta = z.arg();
                eval_factors(&f, z) + Complex64::from_polar(amp, m as f64 * theta + phase)
            });
            assert_eq!(perturbed.winding, w);
        }
    }

    #[test]
    fn loop_winding_requires_certifiable_resolution() {
        // 8 samples cannot certify winding 3 (step = 3*2pi/8 > pi/2)
        let angles: Vec<f64> = (0..8).map(|k| TWO_PI * k as f64 / 8.0).collect();
        let values: Vec<Complex64> = angles
            .iter()
            .map(|&t| Complex64::from_polar(1.0, 3.0 * t))
            .collect();
        let lp = SampledLoop::new(angles, values).unwrap();
        assert!(matches!(winding_of_loop(&lp, 1e-9), Err(Error::NoConvergence { .. })));

        let angles: Vec<f64> = (0..64).map(|k| TWO_PI * k as f64 / 64.0).collect();
        let values: Vec<Complex64> = angles
            .iter()
            .map(|&t| Complex64::from_polar(1.0, 3.0 * t))
            .collect();
        let lp = SampledLoop::new(angles, values).unwrap();
        assert_eq!(winding_of_loop(&lp, 1e-9).unwrap().winding, 3);
    }

    #[test]
    fn fourier_picks_out_conjugate_mode() {
        let coeffs =
            fourier_coefficients(|z: Complex64| z.conj(), c(0.0, 0.0), 1.0, -3, 3, 1).unwrap();
        for (&k, &v) in &coeffs {
            let want = if k == -1 { c(1.0, 0.0) } else { c(0.0, 0.0) };
            assert!((v - want).norm() < 1e-12, "mode {k}: {v}");
        }
    }

    #[test]
    fn fourier_separates_power_and_constant() {
        let coeffs =
            fourier_coefficients(|z: Complex64| z * z + c(3.0, 0.0), c(0.0, 0.0), 1.0, -2, 2, 2)
                .unwrap();
        assert!((coeffs[&2] - c(1.0, 0.0)).norm() < 1e-12);
        assert!((coeffs[&0] - c(3.0, 0.0)).norm() < 1e-12);
        assert!(coeffs[&-1].norm() < 1e-12);
    }

    #[test]
    fn fourier_matches_circle_split() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for _ in 0..20 {
            let mut terms = Vec::new();
            for _ in 0..rng.gen_range(1..=6) {
                let i = rng.gen_range(0..=3u32);
                let j = rng.gen_range(0..=(3 - i));
                terms.push((c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5), i, j));
            }
            let u = UnivariateMixed::from_terms(terms);
            let a = c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            let r = 0.4 + rng.gen::<f64>();
            let d = u.degree() as i64;
            let coeffs =
                fourier_coefficients(|z| u.evaluate(z), a, r, -d, d, u.degree()).unwrap();
            let (q, s) = split_on_circle(&u, a, r).unwrap();
            // on the parametrized circle, c_k = q_k r^k for k >= 0 and
            // c_{-k} = conj(s_k) r^k for k >= 1
            for k in 0..=d {
                let qk = q.coeffs().get(k as usize).copied().unwrap_or(c(0.0, 0.0));
                let want = qk * r.powi(k as i32);
                assert!((coeffs[&k] - want).norm() < 1e-10, "q mode {k}");
            }
            for k in 1..=d {
                let sk = s.coeffs().get(k as usize).copied().unwrap_or(c(0.0, 0.0));
                let want = sk.conj() * r.powi(k as i32);
                assert!((coeffs[&-k] - want).norm() < 1e-10, "s mode {k}");
            }
        }
    }

    #[test]
    fn loop_fourier_agrees_with_oracle_fourier() {
        let u = UnivariateMixed::from_terms(vec![(c(0.7, 0.1), 2, 0), (c(0.0, -0.4), 0, 1)]);
        let lp = sample_component(&u, c(0.0, 0.0), 1.0, 64).unwrap();
        let from_loop = fourier_of_loop(&lp, -2, 2).unwrap();
        let from_oracle =
            fourier_coefficients(|z| u.evaluate(z), c(0.0, 0.0), 1.0, -2, 2, 2).unwrap();
        for k in -2..=2 {
            assert!((from_loop[&k] - from_oracle[&k]).norm() < 1e-12);
        }
    }
}
