//! Complete exponential sums over reduced residues, their algebraic laws,
//! and solution counts by orthogonality.
//!
//! The point evaluation `w_sum` reduces the integer phase exactly mod q
//! before any trigonometry, so large-angle error never enters. The
//! whole-plane evaluation `w_grid` produces all q^2 values at once via a
//! two-dimensional FFT of the term-value histogram; the two routes are
//! checked against each other in the tests.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::forms::DiagonalSystem;
use crate::residue::{gcd, Modulus};

pub mod hiprec;

/// A single sum value together with the parameters that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpSumValue {
    pub q: u64,
    pub a: i64,
    pub b: i64,
    pub u: i64,
    pub v: i64,
    pub value: Complex64,
}

/// Exact integer phase (a u r^2 + b v r^3) mod q, as an index into [0, q).
fn phase(q: u64, a: i64, b: i64, u: i64, v: i64, r: u64) -> u64 {
    let m = q as u128;
    let a = a.rem_euclid(q as i64) as u128;
    let b = b.rem_euclid(q as i64) as u128;
    let u = u.rem_euclid(q as i64) as u128;
    let v = v.rem_euclid(q as i64) as u128;
    let r = r as u128 % m;
    let r2 = r * r % m;
    let r3 = r2 * r % m;
    ((a * u % m * r2 + b * v % m * r3) % m) as u64
}

/// Sum of e((a u r^2 + b v r^3)/q) over reduced residues r, in increasing r.
pub fn w_sum(q: u64, a: i64, b: i64, u: i64, v: i64) -> ExpSumValue {
    assert!(q >= 1);
    let mut value = Complex64::new(0.0, 0.0);
    if q == 1 {
        value = Complex64::new(1.0, 0.0);
    } else {
        for r in 1..=q {
            if gcd(r % q, q) != 1 {
                continue;
            }
            let ph = phase(q, a, b, u, v, r);
            let angle = 2.0 * std::f64::consts::PI * ph as f64 / q as f64;
            value += Complex64::new(angle.cos(), angle.sin());
        }
    }
    ExpSumValue { q, a, b, u, v, value }
}

/// All q^2 values W(q, a, b) for fixed (u, v), indexed by a*q + b.
///
/// Builds the histogram of (u r^2, v r^3) over units and applies an
/// unnormalized 2D inverse DFT, so each output equals the defining sum.
pub fn w_grid(q: u64, u: i64, v: i64) -> Vec<Complex64> {
    assert!(q >= 1);
    let n = q as usize;
    let mut data = vec![Complex64::new(0.0, 0.0); n * n];
    if q == 1 {
        data[0] = Complex64::new(1.0, 0.0);
        return data;
    }
    let m = q as u128;
    let ur = u.rem_euclid(q as i64) as u128;
    let vr = v.rem_euclid(q as i64) as u128;
    for r in 1..q {
        if gcd(r, q) != 1 {
            continue;
        }
        let r = r as u128;
        let s2 = (ur * r % m * r % m) as usize;
        let s3 = (vr * r % m * r % m * r % m) as usize;
        data[s2 * n + s3] += Complex64::new(1.0, 0.0);
    }
    fft2_inverse_in_place(&mut data, n);
    data
}

fn fft2_inverse_in_place(data: &mut [Complex64], n: usize) {
    let mut planner = FftPlanner::new();
    let fft: Arc<dyn rustfft::Fft<f64>> = planner.plan_fft_inverse(n);
    // rows
    for row in data.chunks_exact_mut(n) {
        fft.process(row);
    }
    // columns via transpose
    let mut tr = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            tr[j * n + i] = data[i * n + j];
        }
    }
    for row in tr.chunks_exact_mut(n) {
        fft.process(row);
    }
    for i in 0..n {
        for j in 0..n {
            data[i * n + j] = tr[j * n + i];
        }
    }
}

/// Result of an exhaustive square-root cancellation check at one prime.
#[derive(Debug, Clone)]
pub struct WeilReport {
    pub p: u64,
    pub sums_checked: u64,
    /// max |W| / (2 sqrt(p) + 1) observed
    pub max_ratio: f64,
}

const WEIL_SLACK: f64 = 1e-6;

/// Check |W(p, a, b)| <= 2 sqrt(p) + 1 for all (a, b) != (0, 0) and each
/// sampled coefficient pair. A violation is an implementation bug.
pub fn weil_check(p: u64, uv_samples: &[(u64, u64)]) -> Result<WeilReport> {
    assert!(p > 3, "square-root bound stated for p > 3");
    let bound = 2.0 * (p as f64).sqrt() + 1.0;
    let mut checked = 0;
    let mut max_ratio: f64 = 0.0;
    for &(u, v) in uv_samples {
        for a in 0..p {
            for b in 0..p {
                if a == 0 && b == 0 {
                    continue;
                }
                let w = w_sum(p, a as i64, b as i64, u as i64, v as i64);
                let mag = w.value.norm();
                if mag > bound + WEIL_SLACK {
                    return Err(Error::BoundViolation {
                        p,
                        a,
                        b,
                        u,
                        v,
                        magnitude: mag,
                        bound,
                    });
                }
                checked += 1;
                max_ratio = max_ratio.max(mag / bound);
            }
        }
    }
    Ok(WeilReport {
        p,
        sums_checked: checked,
        max_ratio,
    })
}

/// Check W(q1 q2, a, b) = W(q2, a q1, b q1^2) W(q1, a q2, b q2^2) for
/// coprime q1, q2, to absolute tolerance 1e-8 * phi(q1 q2).
pub fn w_multiplicativity_check(q1: u64, q2: u64, a: i64, b: i64, u: i64, v: i64) -> bool {
    assert_eq!(gcd(q1, q2), 1, "moduli must be coprime");
    let left = w_sum(q1 * q2, a, b, u, v).value;
    let right = w_sum(q2, a * q1 as i64, b * (q1 * q1) as i64, u, v).value
        * w_sum(q1, a * q2 as i64, b * (q2 * q2) as i64, u, v).value;
    let tol = 1e-8 * Modulus::new(q1 * q2).totient() as f64;
    (left - right).norm() <= tol
}

/// A solution count modulo q.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountValue {
    pub q: u64,
    pub arity: usize,
    pub count: u64,
}

const COUNT_Q_GUARD: u64 = 2500;
const DIRECT_COUNT_GUARD: u128 = 100_000_000;
const IMAG_GUARD: f64 = 1e-4;
const ROUND_GUARD: f64 = 1e-4;

/// Number of reduced-residue solutions of the system mod q, via the double
/// orthogonality sum over all phase pairs.
pub fn m_count_via_sums(sys: &DiagonalSystem, q: u64) -> Result<CountValue> {
    if q > COUNT_Q_GUARD {
        return Err(Error::TooLarge {
            size: q as u128,
            guard: COUNT_Q_GUARD as u128,
        });
    }
    let n = q as usize;
    // grids per distinct coefficient pair, with multiplicities
    let mut grids: Vec<(Vec<Complex64>, u32)> = Vec::new();
    let mut seen: Vec<((u64, u64), usize)> = Vec::new();
    for i in 0..sys.arity() {
        let key = (
            sys.u[i].rem_euclid(q as i64) as u64,
            sys.v[i].rem_euclid(q as i64) as u64,
        );
        if let Some(&(_, idx)) = seen.iter().find(|&&(k, _)| k == key) {
            grids[idx].1 += 1;
        } else {
            seen.push((key, grids.len()));
            grids.push((w_grid(q, key.0 as i64, key.1 as i64), 1));
        }
    }
    let tu = sys.target_u.rem_euclid(q as i64) as u64;
    let tv = sys.target_v.rem_euclid(q as i64) as u64;
    let mut total = Complex64::new(0.0, 0.0);
    for a in 0..n {
        for b in 0..n {
            let mut prod = Complex64::new(1.0, 0.0);
            for (grid, mult) in &grids {
                prod *= grid[a * n + b].powu(*mult);
            }
            // shift for inhomogeneous targets
            let ph = (a as u128 * tu as u128 + b as u128 * tv as u128) % q as u128;
            let angle = -2.0 * std::f64::consts::PI * ph as f64 / q as f64;
            total += prod * Complex64::new(angle.cos(), angle.sin());
        }
    }
    total /= (q * q) as f64;
    match guarded_round(total.re, total.im) {
        Ok(count) => Ok(CountValue {
            q,
            arity: sys.arity(),
            count,
        }),
        Err(_) => {
            // escalate to the high-precision path before giving up
            let (re, im) = hiprec::m_count_sum(sys, q);
            let count = guarded_round(re, im)?;
            Ok(CountValue {
                q,
                arity: sys.arity(),
                count,
            })
        }
    }
}

fn guarded_round(re: f64, im: f64) -> Result<u64> {
    let nearest = re.round();
    if im.abs() >= IMAG_GUARD
        || (re - nearest).abs() >= ROUND_GUARD * nearest.abs().max(1.0)
        || nearest < 0.0
    {
        return Err(Error::PrecisionLoss {
            value: re,
            nearest,
            imag: im,
        });
    }
    Ok(nearest as u64)
}

/// Exhaustive count over reduced-residue tuples; the oracle for
/// `m_count_via_sums`.
pub fn m_count_direct(sys: &DiagonalSystem, q: u64) -> Result<CountValue> {
    let t = sys.arity();
    if t == 0 {
        return Err(Error::EmptyForm);
    }
    let units: Vec<u64> = (1..=q).filter(|&r| gcd(r % q, q) == 1).map(|r| r % q).collect();
    let size = (units.len() as u128).pow(t as u32);
    if size > DIRECT_COUNT_GUARD {
        return Err(Error::TooLarge {
            size,
            guard: DIRECT_COUNT_GUARD,
        });
    }
    let m = q as u128;
    let u: Vec<u128> = sys.u.iter().map(|&x| x.rem_euclid(q as i64) as u128).collect();
    let v: Vec<u128> = sys.v.iter().map(|&x| x.rem_euclid(q as i64) as u128).collect();
    let tu = sys.target_u.rem_euclid(q as i64) as u128;
    let tv = sys.target_v.rem_euclid(q as i64) as u128;
    let mut count = 0u64;
    let mut idx = vec![0usize; t];
    loop {
        let mut a = 0u128;
        let mut b = 0u128;
        for i in 0..t {
            let x = units[idx[i]] as u128;
            a = (a + u[i] * x % m * x) % m;
            b = (b + v[i] * x % m * x % m * x) % m;
        }
        if a == tu && b == tv {
            count += 1;
        }
        let mut i = t;
        loop {
            if i == 0 {
                return Ok(CountValue { q, arity: t, count });
            }
            i -= 1;
            if idx[i] + 1 < units.len() {
                idx[i] += 1;
                for y in idx[i + 1..].iter_mut() {
                    *y = 0;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_phases_give_totient() {
        for p in [5u64, 7, 37] {
            let w = w_sum(p, 0, 0, 1, 1);
            assert!((w.value.re - (p as f64 - 1.0)).abs() < 1e-9);
            assert!(w.value.im.abs() < 1e-9);
        }
    }

    #[test]
    fn trivial_modulus() {
        let w = w_sum(1, 3, 4, 5, 6);
        assert!((w.value - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn q5_value_matches_high_precision_oracle() {
        let w = w_sum(5, 1, 1, 1, 1).value;
        let (re, im) = hiprec::w_sum_parts(5, 1, 1, 1, 1);
        assert!((w.re - re).abs() < 1e-12 && (w.im - im).abs() < 1e-12);
        // frozen from the 256-bit oracle
        assert!((w.re - -0.3090169943749474).abs() < 1e-12);
        assert!((w.im - 2.126_627_020_880_1).abs() < 1e-12);
    }

    #[test]
    fn conjugate_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let q = rng.gen_range(2u64..60);
            let a = rng.gen_range(0..q as i64);
            let b = rng.gen_range(0..q as i64);
            let u = rng.gen_range(1..q as i64);
            let v = rng.gen_range(1..q as i64);
            let w = w_sum(q, a, b, u, v).value;
            let wc = w_sum(q, -a, -b, u, v).value;
            assert!((w.conj() - wc).norm() < 1e-9, "q={q} a={a} b={b}");
        }
    }

    #[test]
    fn magnitude_bounded_by_totient() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let q = rng.gen_range(2u64..80);
            let a = rng.gen_range(0..q as i64);
            let b = rng.gen_range(0..q as i64);
            let w = w_sum(q, a, b, 1, 1).value;
            assert!(w.norm() <= Modulus::new(q).totient() as f64 + 1e-6);
        }
    }

    #[test]
    fn grid_matches_point_sums() {
        for q in [5u64, 12, 49] {
            let grid = w_grid(q, 1, 2);
            for a in 0..q {
                for b in 0..q {
                    let direct = w_sum(q, a as i64, b as i64, 1, 2).value;
                    let g = grid[(a * q + b) as usize];
                    assert!((direct - g).norm() < 1e-8, "q={q} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn weil_bound_p5_exhaustive_units() {
        for u in 1..5 {
            for v in 1..5 {
                weil_check(5, &[(u, v)]).unwrap();
            }
        }
    }

    #[test]
    fn weil_bound_p37_sampled() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let samples: Vec<(u64, u64)> = (0..10)
            .map(|_| (rng.gen_range(1..37), rng.gen_range(1..37)))
            .collect();
        let report = weil_check(37, &samples).unwrap();
        assert_eq!(report.sums_checked, 10 * (37 * 37 - 1));
    }

    #[test]
    fn multiplicativity_examples() {
        assert!(w_multiplicativity_check(4, 9, 1, 1, 1, 1));
        assert!(w_multiplicativity_check(1, 11, 3, 5, 2, 7));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let a = rng.gen_range(0..35);
            let b = rng.gen_range(0..35);
            let u = rng.gen_range(1..35);
            let v = rng.gen_range(1..35);
            assert!(w_multiplicativity_check(5, 7, a, b, u, v), "a={a} b={b}");
        }
    }

    #[test]
    fn count_t1_is_zero() {
        let sys = DiagonalSystem::all_ones(1);
        assert_eq!(m_count_via_sums(&sys, 5).unwrap().count, 0);
        assert_eq!(m_count_direct(&sys, 5).unwrap().count, 0);
    }

    #[test]
    fn count_matches_direct_all_ones() {
        let sys = DiagonalSystem::all_ones(7);
        for q in [5u64, 9] {
            assert_eq!(
                m_count_via_sums(&sys, q).unwrap(),
                m_count_direct(&sys, q).unwrap(),
                "q={q}"
            );
        }
    }

    #[test]
    fn count_matches_direct_mixed_coeffs() {
        let sys = DiagonalSystem::homogeneous(vec![1, 1, 1], vec![1, 2, 3]).unwrap();
        assert_eq!(
            m_count_via_sums(&sys, 7).unwrap(),
            m_count_direct(&sys, 7).unwrap()
        );
    }

    #[test]
    fn sixteen_case_table() {
        // q=5, t=2, u=(1,4), v=(1,4): the four diagonal-style tuples
        // (1,1), (2,2), (3,3), (4,4) are the only solutions
        let sys = DiagonalSystem::homogeneous(vec![1, 4], vec![1, 4]).unwrap();
        assert_eq!(m_count_direct(&sys, 5).unwrap().count, 4);
        assert_eq!(m_count_via_sums(&sys, 5).unwrap().count, 4);
    }

    #[test]
    fn direct_count_guard() {
        let sys = DiagonalSystem::all_ones(8);
        assert!(matches!(
            m_count_direct(&sys, 101),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn inhomogeneous_targets_counted() {
        let sys = DiagonalSystem::new(vec![1, 1], vec![1, 1], 2, 2).unwrap();
        assert_eq!(
            m_count_via_sums(&sys, 5).unwrap(),
            m_count_direct(&sys, 5).unwrap()
        );
    }
}
