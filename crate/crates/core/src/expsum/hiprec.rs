//! High-precision (256-bit mantissa) re-evaluation of the exponential sums.
//!
//! Used as the escalation path when a double-precision rounding guard
//! fails, and as an independent oracle in the tests.

use astro_float::{BigFloat, Consts, RoundingMode};

use crate::forms::DiagonalSystem;
use crate::residue::gcd;

const PREC: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

struct Ctx {
    cc: Consts,
    two_pi: BigFloat,
}

impl Ctx {
    fn new() -> Self {
        let mut cc = Consts::new().expect("constants cache");
        let pi = cc.pi(PREC, RM);
        let two_pi = pi.mul(&BigFloat::from_f64(2.0, PREC), PREC, RM);
        Ctx { cc, two_pi }
    }

    /// (cos, sin) of 2*pi*num/den.
    fn unit_phase(&mut self, num: u64, den: u64) -> (BigFloat, BigFloat) {
        let angle = self
            .two_pi
            .mul(&BigFloat::from_u64(num, PREC), PREC, RM)
            .div(&BigFloat::from_u64(den, PREC), PREC, RM);
        (
            angle.cos(PREC, RM, &mut self.cc),
            angle.sin(PREC, RM, &mut self.cc),
        )
    }
}

fn to_f64(x: &BigFloat) -> f64 {
    format!("{x}").parse().unwrap_or(f64::NAN)
}

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

fn w_sum_big(ctx: &mut Ctx, q: u64, a: i64, b: i64, u: i64, v: i64) -> (BigFloat, BigFloat) {
    let mut re = BigFloat::from_f64(0.0, PREC);
    let mut im = BigFloat::from_f64(0.0, PREC);
    if q == 1 {
        return (BigFloat::from_f64(1.0, PREC), im);
    }
    for r in 1..=q {
        if gcd(r % q, q) != 1 {
            continue;
        }
        let (c, s) = ctx.unit_phase(phase(q, a, b, u, v, r), q);
        re = re.add(&c, PREC, RM);
        im = im.add(&s, PREC, RM);
    }
    (re, im)
}

/// Real and imaginary part of the defining sum, summed at 256-bit precision.
pub fn w_sum_parts(q: u64, a: i64, b: i64, u: i64, v: i64) -> (f64, f64) {
    let mut ctx = Ctx::new();
    let (re, im) = w_sum_big(&mut ctx, q, a, b, u, v);
    (to_f64(&re), to_f64(&im))
}

/// (1/q^2) * sum over all phase pairs of the target-shifted product of the
/// per-term sums, at 256-bit precision. Returns (re, im).
pub fn m_count_sum(sys: &DiagonalSystem, q: u64) -> (f64, f64) {
    let mut ctx = Ctx::new();
    let tu = sys.target_u.rem_euclid(q as i64) as u128;
    let tv = sys.target_v.rem_euclid(q as i64) as u128;
    let mut total_re = BigFloat::from_f64(0.0, PREC);
    let mut total_im = BigFloat::from_f64(0.0, PREC);
    for a in 0..q {
        for b in 0..q {
            let (mut pr, mut pi) = (BigFloat::from_f64(1.0, PREC), BigFloat::from_f64(0.0, PREC));
            for i in 0..sys.arity() {
                let (wr, wi) = w_sum_big(&mut ctx, q, a as i64, b as i64, sys.u[i], sys.v[i]);
                let nr = pr.mul(&wr, PREC, RM).sub(&pi.mul(&wi, PREC, RM), PREC, RM);
                let ni = pr.mul(&wi, PREC, RM).add(&pi.mul(&wr, PREC, RM), PREC, RM);
                pr = nr;
                pi = ni;
            }
            let shift = ((q as u128 * q as u128) - (a as u128 * tu + b as u128 * tv) % (q as u128))
                % q as u128;
            let (c, s) = ctx.unit_phase(shift as u64, q);
            total_re = total_re.add(
                &pr.mul(&c, PREC, RM).sub(&pi.mul(&s, PREC, RM), PREC, RM),
                PREC,
                RM,
            );
            total_im = total_im.add(
                &pr.mul(&s, PREC, RM).add(&pi.mul(&c, PREC, RM), PREC, RM),
                PREC,
                RM,
            );
        }
    }
    let qq = BigFloat::from_u64(q * q, PREC);
    (
        to_f64(&total_re.div(&qq, PREC, RM)),
        to_f64(&total_im.div(&qq, PREC, RM)),
    )
}

/// Singular-series coefficient at q, gcd-filtered, at 256-bit precision.
/// Returns (re, im) before any rounding.
pub fn a_sum(u: &[i64], v: &[i64], q: u64) -> (f64, f64) {
    let mut ctx = Ctx::new();
    let s = u.len();
    let mut total_re = BigFloat::from_f64(0.0, PREC);
    let mut total_im = BigFloat::from_f64(0.0, PREC);
    for a in 1..=q {
        for b in 1..=q {
            if gcd(gcd(a % q, b % q), q) != 1 {
                continue;
            }
            let (mut pr, mut pi) = (BigFloat::from_f64(1.0, PREC), BigFloat::from_f64(0.0, PREC));
            for i in 0..s {
                let (wr, wi) = w_sum_big(&mut ctx, q, a as i64, b as i64, u[i], v[i]);
                let nr = pr.mul(&wr, PREC, RM).sub(&pi.mul(&wi, PREC, RM), PREC, RM);
                let ni = pr.mul(&wi, PREC, RM).add(&pi.mul(&wr, PREC, RM), PREC, RM);
                pr = nr;
                pi = ni;
            }
            total_re = total_re.add(&pr, PREC, RM);
            total_im = total_im.add(&pi, PREC, RM);
        }
    }
    let phi = crate::residue::Modulus::new(q).totient();
    let mut denom = BigFloat::from_f64(1.0, PREC);
    for _ in 0..s {
        denom = denom.mul(&BigFloat::from_u64(phi, PREC), PREC, RM);
    }
    (
        to_f64(&total_re.div(&denom, PREC, RM)),
        to_f64(&total_im.div(&denom, PREC, RM)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_agrees_with_double_on_easy_case() {
        let (re, im) = w_sum_parts(7, 2, 3, 1, 1);
        let w = crate::expsum::w_sum(7, 2, 3, 1, 1).value;
        assert!((re - w.re).abs() < 1e-12 && (im - w.im).abs() < 1e-12);
    }
}
