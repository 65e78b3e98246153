//! Representable residue-pair sets modulo p and the exhaustive check that
//! every admissible form in 7 variables hits all target pairs for
//! 5 <= p <= 37, below the analytic threshold where positivity of the
//! solution count is automatic.

use std::collections::{HashMap, HashSet};
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forms::{enumerate_canonical_forms, CanonicalForm, DiagonalSystem};

/// Set of representable residue pairs (U, V) mod p, stored as p rows of
/// p bits each. Requires p < 64.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairSet {
    p: u64,
    rows: Vec<u64>,
}

impl PairSet {
    pub fn empty(p: u64) -> Self {
        assert!(p < 64, "bit rows hold one residue class per bit");
        PairSet {
            p,
            rows: vec![0; p as usize],
        }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn insert(&mut self, u: u64, v: u64) {
        self.rows[(u % self.p) as usize] |= 1 << (v % self.p);
    }

    pub fn contains(&self, u: u64, v: u64) -> bool {
        self.rows[(u % self.p) as usize] >> (v % self.p) & 1 == 1
    }

    pub fn count(&self) -> u64 {
        self.rows.iter().map(|r| r.count_ones() as u64).sum()
    }

    pub fn is_full(&self) -> bool {
        self.count() == self.p * self.p
    }

    /// Lexicographically least missing pair (U, V), if any.
    pub fn least_missing(&self) -> Option<(u64, u64)> {
        let mask = if self.p == 63 { !0u64 } else { (1u64 << self.p) - 1 };
        for u in 0..self.p {
            let row = self.rows[u as usize] & mask;
            if row != mask {
                let v = (!row & mask).trailing_zeros() as u64;
                return Some((u, v));
            }
        }
        None
    }

    /// Componentwise sumset with the value set of one more term.
    pub fn add_term(&self, term: &TermValueSet) -> PairSet {
        let p = self.p;
        let mask = if p == 63 { !0u64 } else { (1u64 << p) - 1 };
        let mut rows = vec![0u64; p as usize];
        for &(d2, d3) in &term.values {
            for u in 0..p as usize {
                let shifted = if d3 == 0 {
                    self.rows[u]
                } else {
                    (self.rows[u] << d3 | self.rows[u] >> (p - d3)) & mask
                };
                rows[(u + d2 as usize) % p as usize] |= shifted;
            }
        }
        PairSet { p, rows }
    }
}

/// Distinct pairs (u x^2 mod p, v x^3 mod p) over nonzero x.
#[derive(Debug, Clone)]
pub struct TermValueSet {
    pub p: u64,
    pub values: Vec<(u64, u64)>,
}

/// Value set of a single term. `x -> (x^2, x^3)` is injective on units,
/// so the p-1 pairs are distinct.
pub fn term_values(u: u64, v: u64, p: u64) -> Result<TermValueSet> {
    if u.is_multiple_of(p) || v.is_multiple_of(p) {
        return Err(Error::ZeroCoefficient { index: 0, p });
    }
    let values: Vec<(u64, u64)> = (1..p)
        .map(|x| (u * x % p * x % p, v * x % p * x % p * x % p))
        .collect();
    debug_assert!(p < 5 || values.len() >= 2);
    Ok(TermValueSet { p, values })
}

fn term_values_signed(u: i64, v: i64, index: usize, p: u64) -> Result<TermValueSet> {
    let ur = u.rem_euclid(p as i64) as u64;
    let vr = v.rem_euclid(p as i64) as u64;
    if ur == 0 || vr == 0 {
        return Err(Error::ZeroCoefficient { index, p });
    }
    term_values(ur, vr, p)
}

/// Exact pair set by iterated sumsets over the term value sets.
pub fn representable_pairs(sys: &DiagonalSystem, p: u64) -> Result<PairSet> {
    if sys.arity() == 0 {
        return Err(Error::EmptyForm);
    }
    let mut set = PairSet::empty(p);
    let first = term_values_signed(sys.u[0], sys.v[0], 0, p)?;
    for &(a, b) in &first.values {
        set.insert(a, b);
    }
    for i in 1..sys.arity() {
        if set.is_full() {
            // adding terms cannot lose pairs
            let term = term_values_signed(sys.u[i], sys.v[i], i, p)?;
            let _ = term;
            continue;
        }
        let term = term_values_signed(sys.u[i], sys.v[i], i, p)?;
        set = set.add_term(&term);
    }
    Ok(set)
}

const BRUTE_FORCE_GUARD: u128 = 100_000_000;

/// Oracle: exhaustive enumeration of all (p-1)^t variable tuples.
pub fn brute_force_pairs(sys: &DiagonalSystem, p: u64) -> Result<PairSet> {
    let t = sys.arity();
    if t == 0 {
        return Err(Error::EmptyForm);
    }
    let size = (p as u128 - 1).pow(t as u32);
    if size > BRUTE_FORCE_GUARD {
        return Err(Error::TooLarge {
            size,
            guard: BRUTE_FORCE_GUARD,
        });
    }
    let (u, v) = sys.reduced_coeffs(p)?;
    let mut set = PairSet::empty(p);
    let mut x = vec![1u64; t];
    loop {
        let mut a = 0;
        let mut b = 0;
        for i in 0..t {
            a = (a + u[i] * x[i] % p * x[i]) % p;
            b = (b + v[i] * x[i] % p * x[i] % p * x[i]) % p;
        }
        set.insert(a, b);
        let mut i = t;
        loop {
            if i == 0 {
                return Ok(set);
            }
            i -= 1;
            if x[i] < p - 1 {
                x[i] += 1;
                for y in x[i + 1..].iter_mut() {
                    *y = 1;
                }
                break;
            }
        }
    }
}

/// A form one pair short of complete stays complete under any one-variable
/// extension, because a single term always contributes at least two
/// distinct value pairs.
pub fn one_short_rule(count: u64, p: u64) -> bool {
    count >= p * p - 1
}

/// Per-arity search statistics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArityStats {
    pub arity: usize,
    /// Forms enumerated at this arity.
    pub enumerated: u64,
    /// Complete by inheritance from a passing prefix, no search needed.
    pub inherited: u64,
    /// Forms whose pair set was actually computed.
    pub searched: u64,
    /// Searched forms hitting all p^2 pairs.
    pub complete: u64,
    /// Searched forms at exactly p^2 - 1 pairs.
    pub one_short: u64,
    pub failed: u64,
}

/// A form that missed at least one pair at the final arity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FailureRecord {
    pub u: Vec<u64>,
    pub v: Vec<u64>,
    pub pair_count: u64,
    pub least_missing: (u64, u64),
}

/// Outcome of the per-prime search.
#[derive(Debug, Clone)]
pub struct VerificationCertificate {
    pub p: u64,
    pub t_max: usize,
    pub pass: bool,
    pub arities: Vec<ArityStats>,
    /// Failing forms at arity t_max.
    pub failures: Vec<FailureRecord>,
    pub wall_ms: u128,
}

impl VerificationCertificate {
    /// Deterministic text rendering; the timing line is emitted last so it
    /// can be excluded from byte comparisons.
    pub fn to_text(&self, include_timing: bool) -> String {
        let mut out = String::new();
        out.push_str(&format!("prime: {}\n", self.p));
        out.push_str(&format!("t_max: {}\n", self.t_max));
        out.push_str(&format!(
            "outcome: {}\n",
            if self.pass { "pass" } else { "fail" }
        ));
        for a in &self.arities {
            out.push_str(&format!(
                "arity {}: enumerated={} inherited={} searched={} complete={} one_short={} failed={}\n",
                a.arity, a.enumerated, a.inherited, a.searched, a.complete, a.one_short, a.failed
            ));
        }
        out.push_str(&format!("failures: {}\n", self.failures.len()));
        for f in &self.failures {
            out.push_str(&format!(
                "  u={:?} v={:?} pairs={} missing=({}, {})\n",
                f.u, f.v, f.pair_count, f.least_missing.0, f.least_missing.1
            ));
        }
        if include_timing {
            out.push_str(&format!("wall_ms: {}\n", self.wall_ms));
        }
        out
    }
}

type FormKey = (usize, Vec<u64>);

fn form_key(f: &CanonicalForm) -> FormKey {
    (f.ones_count, f.v.clone())
}

fn prefix_key(f: &CanonicalForm) -> FormKey {
    let t = f.arity();
    (f.ones_count.min(t - 1), f.v[..t - 1].to_vec())
}

enum FormOutcome {
    Inherited,
    Complete(FormKey),
    OneShort(FormKey, PairSet),
    Failed(FormKey, PairSet),
}

const VERIFIED_P_MAX: u64 = 37;

/// Search every admissible form mod p up to arity `t_max`, reusing results
/// from smaller arities.
pub fn verify_prime(p: u64, t_max: usize) -> Result<VerificationCertificate> {
    verify_prime_with_override(p, t_max, false)
}

/// As `verify_prime`, but allowing primes above the analytically covered
/// range when `allow_above_range` is set.
pub fn verify_prime_with_override(
    p: u64,
    t_max: usize,
    allow_above_range: bool,
) -> Result<VerificationCertificate> {
    assert!((3..=8).contains(&t_max), "t_max out of range");
    assert!(p >= 5 && p % 2 == 1, "odd prime >= 5 expected");
    if p > VERIFIED_P_MAX && !allow_above_range {
        return Err(Error::OutOfVerifiedRange(p));
    }
    let start = Instant::now();
    let full = p * p;

    // keys of forms that passed (complete, or one short below t_max)
    let mut passed: HashSet<FormKey> = HashSet::new();
    // pair sets of incomplete forms at the previous arity
    let mut failed_sets: HashMap<FormKey, PairSet> = HashMap::new();

    let mut arities = Vec::new();
    let mut failures = Vec::new();

    for t in 3..=t_max {
        let mut stats = ArityStats {
            arity: t,
            enumerated: 0,
            inherited: 0,
            searched: 0,
            complete: 0,
            one_short: 0,
            failed: 0,
        };
        let mut passed_next: HashSet<FormKey> = HashSet::new();
        let mut failed_next: HashMap<FormKey, PairSet> = HashMap::new();

        let mut stream = enumerate_canonical_forms(p, t);
        loop {
            // bounded chunks keep memory flat at the large arities
            let chunk: Vec<CanonicalForm> = stream.by_ref().take(1 << 16).collect();
            if chunk.is_empty() {
                break;
            }
            let outcomes: Vec<FormOutcome> = chunk
                .par_iter()
                .map(|form| {
                    if t > 3 && passed.contains(&prefix_key(form)) {
                        return Ok(FormOutcome::Inherited);
                    }
                    let set = if t == 3 {
                        representable_pairs(&form.as_system(), p)?
                    } else {
                        let base = failed_sets
                            .get(&prefix_key(form))
                            .expect("prefix of every form was classified at the previous arity");
                        let last = form.arity() - 1;
                        base.add_term(&term_values(form.u[last], form.v[last], p)?)
                    };
                    let key = form_key(form);
                    let count = set.count();
                    Ok(if count == full {
                        FormOutcome::Complete(key)
                    } else if count == full - 1 {
                        FormOutcome::OneShort(key, set)
                    } else {
                        FormOutcome::Failed(key, set)
                    })
                })
                .collect::<Result<Vec<_>>>()?;

            for (form, outcome) in chunk.iter().zip(outcomes) {
                stats.enumerated += 1;
                match outcome {
                    FormOutcome::Inherited => {
                        stats.inherited += 1;
                        passed_next.insert(form_key(form));
                    }
                    FormOutcome::Complete(key) => {
                        stats.searched += 1;
                        stats.complete += 1;
                        passed_next.insert(key);
                    }
                    FormOutcome::OneShort(key, set) => {
                        stats.searched += 1;
                        stats.one_short += 1;
                        if t < t_max {
                            passed_next.insert(key);
                        } else {
                            stats.failed += 1;
                            failures.push(FailureRecord {
                                u: form.u.clone(),
                                v: form.v.clone(),
                                pair_count: set.count(),
                                least_missing: set.least_missing().expect("set is not full"),
                            });
                        }
                    }
                    FormOutcome::Failed(key, set) => {
                        stats.searched += 1;
                        stats.failed += 1;
                        if t == t_max {
                            failures.push(FailureRecord {
                                u: form.u.clone(),
                                v: form.v.clone(),
                                pair_count: set.count(),
                                least_missing: set.least_missing().expect("set is not full"),
                            });
                        } else {
                            failed_next.insert(key, set);
                        }
                    }
                }
            }
        }
        arities.push(stats);
        passed = passed_next;
        failed_sets = failed_next;
    }

    Ok(VerificationCertificate {
        p,
        t_max,
        pass: failures.is_empty(),
        arities,
        failures,
        wall_ms: start.elapsed().as_millis(),
    })
}

/// The primes below the analytic threshold for t = 7.
pub const VERIFICATION_PRIMES: [u64; 10] = [5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Certificates for every prime in the verified range, in ascending order.
pub fn verify_all(t_max: usize) -> Result<Vec<VerificationCertificate>> {
    VERIFICATION_PRIMES
        .par_iter()
        .map(|&p| verify_prime(p, t_max))
        .collect()
}

/// Largest real root of (p-1)^t = (p^2-1)(2 sqrt(p) + 1)^t, located by
/// bisection to absolute tolerance 1e-3. Above this root the exponential-sum
/// lower bound forces a solution, so only primes below it need searching.
pub fn mpbound_threshold(t: u32) -> Result<f64> {
    let bound = |p: f64| (p - 1.0).powi(t as i32) - (p * p - 1.0) * (2.0 * p.sqrt() + 1.0).powi(t as i32);
    let (lo_end, hi_end) = (3.0f64, 1.0e6f64);
    // geometric scan for the last non-positive point
    let mut last_nonpos = None;
    let mut x = lo_end;
    while x < hi_end {
        if bound(x) <= 0.0 {
            last_nonpos = Some(x);
        }
        x *= 1.01;
    }
    let Some(mut lo) = last_nonpos else {
        return Err(Error::NoRoot {
            lo: lo_end,
            hi: hi_end,
        });
    };
    let mut hi = (lo * 1.01).min(hi_end);
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if bound(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Explicit value of the lower-bound expression (p-1)^t - (p^2-1)(2 sqrt p + 1)^t.
pub fn mpbound_value(p: f64, t: u32) -> f64 {
    (p - 1.0).powi(t as i32) - (p * p - 1.0) * (2.0 * p.sqrt() + 1.0).powi(t as i32)
}

/// Mod 2: the only unit is 1, so solvability is a parity identity.
pub fn solvable_mod_2(sys: &DiagonalSystem) -> bool {
    let su: i64 = sys.u.iter().sum();
    let sv: i64 = sys.v.iter().sum();
    (su - sys.target_u).rem_euclid(2) == 0 && (sv - sys.target_v).rem_euclid(2) == 0
}

/// Mod 3: squares of units are 1, so the quadratic side needs the
/// coefficient sum to match; cubes of units are free signs, so the cubic
/// side is a reachability question over sign choices.
pub fn solvable_mod_3(sys: &DiagonalSystem) -> bool {
    let su: i64 = sys.u.iter().sum();
    if (su - sys.target_u).rem_euclid(3) != 0 {
        return false;
    }
    let mut reach = [false; 3];
    reach[0] = true;
    let mut started = false;
    for &vi in &sys.v {
        let vi = vi.rem_euclid(3) as usize;
        let mut next = [false; 3];
        for r in 0..3 {
            if reach[r] {
                next[(r + vi) % 3] = true;
                next[(r + 3 - vi) % 3] = true;
            }
        }
        reach = next;
        started = true;
    }
    started && reach[sys.target_v.rem_euclid(3) as usize]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::canonicalize;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn term_values_examples() {
        let t = term_values(1, 1, 5).unwrap();
        let set: std::collections::HashSet<_> = t.values.iter().copied().collect();
        assert_eq!(
            set,
            [(1, 1), (4, 3), (4, 2), (1, 4)].into_iter().collect()
        );
        let t2 = term_values(2, 1, 5).unwrap();
        let set2: std::collections::HashSet<_> = t2.values.iter().copied().collect();
        assert_eq!(
            set2,
            [(2, 1), (3, 3), (3, 2), (2, 4)].into_iter().collect()
        );
        assert_eq!(term_values(1, 1, 7).unwrap().values.len(), 6);
        assert!(term_values(5, 1, 5).is_err());
    }

    #[test]
    fn single_term_pair_set() {
        let sys = DiagonalSystem::homogeneous(vec![1], vec![1]).unwrap();
        let set = representable_pairs(&sys, 5).unwrap();
        assert_eq!(set.count(), 4);
        for (a, b) in [(1, 1), (4, 3), (4, 2), (1, 4)] {
            assert!(set.contains(a, b));
        }
    }

    #[test]
    fn two_term_sumset_matches_brute_force() {
        let sys = DiagonalSystem::homogeneous(vec![1, 1], vec![1, 1]).unwrap();
        let dp = representable_pairs(&sys, 5).unwrap();
        let bf = brute_force_pairs(&sys, 5).unwrap();
        assert_eq!(dp, bf);
    }

    #[test]
    fn p2_single_pair() {
        let sys = DiagonalSystem::homogeneous(vec![1, 1, 1], vec![1, 1, 1]).unwrap();
        let set = representable_pairs(&sys, 2).unwrap();
        assert_eq!(set.count(), 1);
        assert!(set.contains(1, 1));
    }

    #[test]
    fn all_ones_p13_t3_matches_oracle() {
        let sys = DiagonalSystem::homogeneous(vec![1; 3], vec![1; 3]).unwrap();
        assert_eq!(
            representable_pairs(&sys, 13).unwrap(),
            brute_force_pairs(&sys, 13).unwrap()
        );
    }

    #[test]
    fn oracle_equivalence_random_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for p in [5u64, 7, 11, 13] {
            for _ in 0..100 {
                let t = rng.gen_range(1..=4);
                let u = (0..t).map(|_| rng.gen_range(1..p) as i64).collect();
                let v = (0..t).map(|_| rng.gen_range(1..p) as i64).collect();
                let sys = DiagonalSystem::homogeneous(u, v).unwrap();
                assert_eq!(
                    representable_pairs(&sys, p).unwrap(),
                    brute_force_pairs(&sys, p).unwrap(),
                    "p={p} sys={sys:?}"
                );
            }
        }
    }

    #[test]
    fn brute_force_guard() {
        let sys = DiagonalSystem::all_ones(8);
        assert!(matches!(
            brute_force_pairs(&sys, 37),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn monotone_under_extension() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let p = *[5u64, 7, 11].get(rng.gen_range(0..3)).unwrap();
            let t = rng.gen_range(1..=3);
            let u: Vec<i64> = (0..t).map(|_| rng.gen_range(1..p) as i64).collect();
            let v: Vec<i64> = (0..t).map(|_| rng.gen_range(1..p) as i64).collect();
            let sys = DiagonalSystem::homogeneous(u.clone(), v.clone()).unwrap();
            let base = representable_pairs(&sys, p).unwrap().count();
            let mut u2 = u;
            let mut v2 = v;
            u2.push(rng.gen_range(1..p) as i64);
            v2.push(rng.gen_range(1..p) as i64);
            let ext = DiagonalSystem::homogeneous(u2, v2).unwrap();
            assert!(representable_pairs(&ext, p).unwrap().count() >= base);
        }
    }

    #[test]
    fn symmetry_under_permutation_and_negation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..40 {
            let p = 11u64;
            let t = rng.gen_range(2..=4);
            let u: Vec<i64> = (0..t).map(|_| rng.gen_range(1..p) as i64).collect();
            let v: Vec<i64> = (0..t).map(|_| rng.gen_range(1..p) as i64).collect();
            let sys = DiagonalSystem::homogeneous(u.clone(), v.clone()).unwrap();
            let base = representable_pairs(&sys, p).unwrap();

            let mut perm_u = u.clone();
            let mut perm_v = v.clone();
            perm_u.rotate_left(1);
            perm_v.rotate_left(1);
            let permuted = DiagonalSystem::homogeneous(perm_u, perm_v).unwrap();
            assert_eq!(base, representable_pairs(&permuted, p).unwrap());

            let neg_v: Vec<i64> = v.iter().map(|&x| -x).collect();
            let negated = DiagonalSystem::homogeneous(u.clone(), neg_v).unwrap();
            assert_eq!(base, representable_pairs(&negated, p).unwrap());
        }
    }

    #[test]
    fn one_short_rule_thresholds() {
        assert!(one_short_rule(24, 5));
        assert!(one_short_rule(25, 5));
        assert!(!one_short_rule(23, 5));
    }

    #[test]
    fn one_short_extension_soundness() {
        // every t=3 form at >= p^2 - 1 pairs becomes complete under every
        // possible single-term extension
        for p in [5u64, 7, 11] {
            let mut checked = 0;
            for form in enumerate_canonical_forms(p, 3) {
                let set = representable_pairs(&form.as_system(), p).unwrap();
                if !one_short_rule(set.count(), p) {
                    continue;
                }
                for eu in 1..p {
                    for ev in 1..p {
                        let ext = set.add_term(&term_values(eu, ev, p).unwrap());
                        assert!(
                            ext.is_full(),
                            "p={p} form={form:?} extension=({eu},{ev})"
                        );
                    }
                }
                checked += 1;
            }
            assert!(checked > 0, "no one-short forms found at p={p}");
        }
    }

    #[test]
    fn verify_p5_passes() {
        let cert = verify_prime(5, 7).unwrap();
        assert!(cert.pass);
        assert!(cert.failures.is_empty());
        assert_eq!(cert.arities.len(), 5);
    }

    #[test]
    fn verify_p7_needs_seven_variables() {
        assert!(verify_prime(7, 7).unwrap().pass);
        let at5 = verify_prime(7, 5).unwrap();
        assert!(!at5.pass, "some form must still miss pairs at t = 5");
    }

    #[test]
    fn verify_rejects_out_of_range() {
        assert!(matches!(
            verify_prime(41, 7),
            Err(Error::OutOfVerifiedRange(41))
        ));
        assert!(verify_prime_with_override(41, 3, true).is_ok());
    }

    #[test]
    fn verify_matches_naive_search_small() {
        // cross-check the incremental search against a flat scan at p = 5
        for t_max in [3usize, 4] {
            let cert = verify_prime(5, t_max).unwrap();
            let mut failing = Vec::new();
            for form in enumerate_canonical_forms(5, t_max) {
                let set = brute_force_pairs(&form.as_system(), 5).unwrap();
                if !set.is_full() {
                    failing.push(form_key(&form));
                }
            }
            assert_eq!(cert.pass, failing.is_empty(), "t_max={t_max}");
            assert_eq!(cert.failures.len(), failing.len(), "t_max={t_max}");
        }
    }

    #[test]
    fn certificate_text_is_stable() {
        let a = verify_prime(5, 4).unwrap();
        let b = verify_prime(5, 4).unwrap();
        assert_eq!(a.to_text(false), b.to_text(false));
        assert!(a.to_text(true).contains("wall_ms"));
    }

    #[test]
    fn threshold_examples() {
        let root = mpbound_threshold(7).unwrap();
        assert!((40.57..40.59).contains(&root), "root = {root}");
        assert!(mpbound_value(41.0, 7) > 0.0);
        assert!(mpbound_value(37.0, 7) < 0.0);
        let root5 = mpbound_threshold(5).unwrap();
        assert!((1192.0..1193.0).contains(&root5), "root5 = {root5}");
    }

    #[test]
    fn small_prime_checks() {
        // thirteen ones sum to 1 mod 2 and mod 3, so the homogeneous
        // all-ones system is insolvable at both small primes
        let sys13 = DiagonalSystem::all_ones(13);
        assert!(!solvable_mod_2(&sys13));
        assert!(!solvable_mod_3(&sys13));
        let sys12 = DiagonalSystem::all_ones(12);
        assert!(solvable_mod_2(&sys12));
        assert!(solvable_mod_3(&sys12));
        let bad = DiagonalSystem::new(vec![1, 1], vec![1, 1], 1, 0).unwrap();
        assert!(!solvable_mod_2(&bad));
        // mod 3 sign reachability matches exhaustive enumeration
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let t = rng.gen_range(1..=5);
            let u: Vec<i64> = (0..t).map(|_| rng.gen_range(1..3)).collect();
            let v: Vec<i64> = (0..t).map(|_| rng.gen_range(1..3)).collect();
            let target_u = rng.gen_range(0..3);
            let target_v = rng.gen_range(0..3);
            let sys = DiagonalSystem::new(u, v, target_u, target_v).unwrap();
            let expected = brute_force_pairs(&sys, 3)
                .unwrap()
                .contains(target_u.rem_euclid(3) as u64, target_v.rem_euclid(3) as u64);
            assert_eq!(solvable_mod_3(&sys), expected, "sys={sys:?}");
        }
    }

    #[test]
    fn canonicalized_forms_verify_like_originals() {
        // spot check: the certificate pipeline sees the same completeness
        // as direct computation on a non-canonical equivalent
        let sys = DiagonalSystem::homogeneous(vec![3, 4, 2], vec![6, 2, 5]).unwrap();
        let (form, _) = canonicalize(&sys, 7).unwrap();
        assert_eq!(
            representable_pairs(&sys, 7).unwrap().count(),
            representable_pairs(&form.as_system(), 7).unwrap().count()
        );
    }
}
