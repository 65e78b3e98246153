//! Data model for diagonal quadratic+cubic systems and the
//! normalization/enumeration of coefficient forms up to symmetry.
//!
//! The symmetries used are: substituting `c_i x_i` for `x_i` (which scales
//! `u_i` by `c_i^2` and `v_i` by `c_i^3`), scaling an entire equation by a
//! unit, permuting indices, and negating variables. A normalized form has
//! `u_i` in `{1, c}` for a fixed nonresidue `c`, at least half the `u_i`
//! equal to 1, `v_1 = 1`, and `v` nondecreasing within each block of equal
//! `u` with values in `[1, (p-1)/2]`.

use crate::error::{Error, Result};
use crate::residue::{least_nonresidue, mod_inverse, quadratic_residues, sqrt_mod};

/// A pair of diagonal equations `sum u_i x_i^2 = U`, `sum v_i x_i^3 = V`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagonalSystem {
    pub u: Vec<i64>,
    pub v: Vec<i64>,
    pub target_u: i64,
    pub target_v: i64,
}

impl DiagonalSystem {
    pub fn new(u: Vec<i64>, v: Vec<i64>, target_u: i64, target_v: i64) -> Result<Self> {
        if u.is_empty() || u.len() != v.len() {
            return Err(Error::EmptyForm);
        }
        Ok(DiagonalSystem {
            u,
            v,
            target_u,
            target_v,
        })
    }

    /// Homogeneous system with targets 0.
    pub fn homogeneous(u: Vec<i64>, v: Vec<i64>) -> Result<Self> {
        Self::new(u, v, 0, 0)
    }

    pub fn all_ones(s: usize) -> Self {
        DiagonalSystem {
            u: vec![1; s],
            v: vec![1; s],
            target_u: 0,
            target_v: 0,
        }
    }

    pub fn arity(&self) -> usize {
        self.u.len()
    }

    /// Coefficients reduced into `[0, p)`, failing on any zero.
    pub fn reduced_coeffs(&self, p: u64) -> Result<(Vec<u64>, Vec<u64>)> {
        let reduce = |c: &[i64]| -> Result<Vec<u64>> {
            c.iter()
                .enumerate()
                .map(|(index, &x)| {
                    let r = x.rem_euclid(p as i64) as u64;
                    if r == 0 {
                        Err(Error::ZeroCoefficient { index, p })
                    } else {
                        Ok(r)
                    }
                })
                .collect()
        };
        Ok((reduce(&self.u)?, reduce(&self.v)?))
    }
}

/// A normalized coefficient form modulo an odd prime.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CanonicalForm {
    pub p: u64,
    /// Number of leading quadratic coefficients equal to 1.
    pub ones_count: usize,
    pub u: Vec<u64>,
    pub v: Vec<u64>,
    pub nonresidue: u64,
}

impl CanonicalForm {
    pub fn arity(&self) -> usize {
        self.u.len()
    }

    /// Check all structural invariants; used by tests and debug assertions.
    pub fn is_valid(&self) -> bool {
        let t = self.u.len();
        let r = self.ones_count;
        let half = (self.p - 1) / 2;
        t == self.v.len()
            && t >= 1
            && r >= t.div_ceil(2)
            && self.u[..r].iter().all(|&x| x == 1)
            && self.u[r..].iter().all(|&x| x == self.nonresidue)
            && self.v[0] == 1
            && self.v.iter().all(|&x| 1 <= x && x <= half)
            && self.v[..r].windows(2).all(|w| w[0] <= w[1])
            && self.v[r..].windows(2).all(|w| w[0] <= w[1])
    }

    /// View as a plain system with targets 0.
    pub fn as_system(&self) -> DiagonalSystem {
        DiagonalSystem {
            u: self.u.iter().map(|&x| x as i64).collect(),
            v: self.v.iter().map(|&x| x as i64).collect(),
            target_u: 0,
            target_v: 0,
        }
    }

    /// The arity-(t-1) prefix obtained by dropping the last coefficient pair.
    pub fn prefix(&self) -> Option<CanonicalForm> {
        let t = self.arity();
        if t <= 1 {
            return None;
        }
        Some(CanonicalForm {
            p: self.p,
            ones_count: self.ones_count.min(t - 1),
            u: self.u[..t - 1].to_vec(),
            v: self.v[..t - 1].to_vec(),
            nonresidue: self.nonresidue,
        })
    }
}

/// Unit multipliers carrying a normalization back to the original targets:
/// `(U, V)` is representable by the source system iff
/// `(quad_scale * U, cubic_scale * V)` is representable by the normal form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairTransform {
    pub quad_scale: u64,
    pub cubic_scale: u64,
}

impl PairTransform {
    pub fn identity() -> Self {
        PairTransform {
            quad_scale: 1,
            cubic_scale: 1,
        }
    }

    pub fn apply(&self, pair: (u64, u64), p: u64) -> (u64, u64) {
        (
            self.quad_scale * pair.0 % p,
            self.cubic_scale * pair.1 % p,
        )
    }
}

/// Scale `(u_i, v_i)` by a variable substitution so `u_i` lands in `{1, c}`.
///
/// Picks the smallest substitution multiplier, which is 1 when `u_i` is
/// already normalized.
fn normalize_quadratic(u: &mut [u64], v: &mut [u64], p: u64, c: u64, is_qr: &[bool]) {
    for i in 0..u.len() {
        let target_inv = if is_qr[u[i] as usize] {
            mod_inverse(u[i] as i64, p).expect("nonzero residue mod prime")
        } else {
            // u_i * c^{-1} is a residue, so c * u_i^{-1} is a square
            c * mod_inverse(u[i] as i64, p).expect("nonzero residue mod prime") % p
        };
        let m = sqrt_mod(target_inv, p).expect("square of a unit has a root");
        u[i] = u[i] * m % p * m % p;
        v[i] = v[i] * m % p * m % p * m % p;
    }
}

/// Normalize a system modulo `p` and return the form plus the target map.
pub fn canonicalize(sys: &DiagonalSystem, p: u64) -> Result<(CanonicalForm, PairTransform)> {
    assert!(p >= 5, "normalization is defined for p >= 5");
    let (mut u, mut v) = sys.reduced_coeffs(p)?;
    let t = u.len();
    let c = least_nonresidue(p);
    let qr = quadratic_residues(p);
    let mut is_qr = vec![false; p as usize];
    for &r in &qr {
        is_qr[r as usize] = true;
    }

    // (i) force u_i into {1, c}
    normalize_quadratic(&mut u, &mut v, p, c, &is_qr);

    // (ii) flip the quadratic equation by c^{-1} when 1s are in the minority
    let mut quad_scale = 1;
    let ones = u.iter().filter(|&&x| x == 1).count();
    if ones < t.div_ceil(2) {
        let c_inv = mod_inverse(c as i64, p)?;
        quad_scale = c_inv;
        for x in u.iter_mut() {
            *x = *x * c_inv % p;
        }
        normalize_quadratic(&mut u, &mut v, p, c, &is_qr);
    }

    // (iii) stable partition: ones block first
    let mut pairs: Vec<(u64, u64)> = u.iter().copied().zip(v.iter().copied()).collect();
    pairs.sort_by_key(|&(ui, _)| if ui == 1 { 0 } else { 1 });
    let ones_count = pairs.iter().filter(|&&(ui, _)| ui == 1).count();

    // (iv) negate variables to land v_i in [1, (p-1)/2]
    let half = (p - 1) / 2;
    for (_, vi) in pairs.iter_mut() {
        if *vi > half {
            *vi = p - *vi;
        }
    }

    // (v) scale the cubic equation so the leading v becomes 1
    let cubic_scale = mod_inverse(pairs[0].1 as i64, p)?;
    for (_, vi) in pairs.iter_mut() {
        *vi = *vi * cubic_scale % p;
        if *vi > half {
            *vi = p - *vi;
        }
    }

    // (vi) sort v within each u-block
    pairs[..ones_count].sort_by_key(|&(_, vi)| vi);
    pairs[ones_count..].sort_by_key(|&(_, vi)| vi);

    let form = CanonicalForm {
        p,
        ones_count,
        u: pairs.iter().map(|&(ui, _)| ui).collect(),
        v: pairs.iter().map(|&(_, vi)| vi).collect(),
        nonresidue: c,
    };
    debug_assert!(form.is_valid(), "normalization produced {form:?}");
    Ok((
        form,
        PairTransform {
            quad_scale,
            cubic_scale,
        },
    ))
}

/// All normalized forms of arity `t` modulo `p`, each exactly once.
///
/// Order: ones count descending, then `v` lexicographic. The index set
/// matches the classical search loop: `v_1 = 1`, the remaining `v_i` range
/// over `[1, (p-1)/2]`, and a form is kept only when `v` is nondecreasing
/// within each block of equal `u`.
pub fn enumerate_canonical_forms(p: u64, t: usize) -> impl Iterator<Item = CanonicalForm> {
    assert!(p >= 5 && (1..=8).contains(&t));
    let c = least_nonresidue(p);
    let half = (p - 1) / 2;
    (0..=t / 2).flat_map(move |num_c| {
        let ones = t - num_c;
        VCounter::new(t, half).filter_map(move |v| {
            let block_sorted = v[..ones].windows(2).all(|w| w[0] <= w[1])
                && v[ones..].windows(2).all(|w| w[0] <= w[1]);
            if !block_sorted {
                return None;
            }
            let mut u = vec![1u64; t];
            for x in u[ones..].iter_mut() {
                *x = c;
            }
            Some(CanonicalForm {
                p,
                ones_count: ones,
                u,
                v,
                nonresidue: c,
            })
        })
    })
}

/// Odometer over v-vectors with v_1 = 1 and v_2..v_t in [1, half],
/// in lexicographic order.
struct VCounter {
    v: Vec<u64>,
    half: u64,
    done: bool,
}

impl VCounter {
    fn new(t: usize, half: u64) -> Self {
        VCounter {
            v: vec![1; t],
            half,
            done: false,
        }
    }
}

impl Iterator for VCounter {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        if self.done {
            return None;
        }
        let out = self.v.clone();
        // increment positions 1..t, last position fastest
        let mut i = self.v.len();
        loop {
            if i <= 1 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.v[i] < self.half {
                self.v[i] += 1;
                for x in self.v[i + 1..].iter_mut() {
                    *x = 1;
                }
                break;
            }
        }
        Some(out)
    }
}
