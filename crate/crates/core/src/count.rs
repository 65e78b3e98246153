//! Desk-scale counting of integer and prime solutions by meet-in-the-middle
//! on power-sum keys, plus empirical growth-exponent estimation.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forms::DiagonalSystem;

/// Joint key (sum of squares, sum of cubes) for the two diagonal equations.
pub type PowerSumKey = (i128, i128);

/// Which count a `CountResult` carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountKind {
    TR,
    RWeighted,
    RUnweighted,
}

impl CountKind {
    fn label(self) -> &'static str {
        match self {
            CountKind::TR => "T_r",
            CountKind::RWeighted => "R_weighted",
            CountKind::RUnweighted => "R_unweighted",
        }
    }
}

/// An exact integer count or a weighted real one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CountValue {
    Integer(u64),
    Real(f64),
}

impl CountValue {
    pub fn as_f64(self) -> f64 {
        match self {
            CountValue::Integer(n) => n as f64,
            CountValue::Real(x) => x,
        }
    }
}

/// One count at one height, with the wall time it took.
#[derive(Debug, Clone, PartialEq)]
pub struct CountResult {
    pub kind: CountKind,
    pub height: u64,
    pub value: CountValue,
    pub runtime_secs: f64,
}

impl CountResult {
    /// Delimited text row `kind P value [runtime]`, plot-ready. Timing is
    /// optional so that reports can be compared byte for byte.
    pub fn to_row(&self, include_timing: bool) -> String {
        let value = match self.value {
            CountValue::Integer(n) => format!("{n}"),
            CountValue::Real(x) => format!("{x:.14e}"),
        };
        if include_timing {
            format!(
                "{}\t{}\t{}\t{:.3}",
                self.kind.label(),
                self.height,
                value,
                self.runtime_secs
            )
        } else {
            format!("{}\t{}\t{}", self.kind.label(), self.height, value)
        }
    }
}

const TUPLE_GUARD: u128 = 200_000_000;

fn check_tuple_budget(base: u64, exponent: u32) -> Result<()> {
    let size = (base as u128).pow(exponent);
    if size > TUPLE_GUARD {
        return Err(Error::TooLarge {
            size,
            guard: TUPLE_GUARD,
        });
    }
    Ok(())
}

/// All r-tuple power-sum keys over a value set, grouped by first coordinate
/// so the building phase parallelizes and the merge order is fixed.
///
/// `weight` maps a value to its multiplicand in the accumulated weight;
/// tuples are visited in lexicographic order within each first-coordinate
/// group, and groups merge in ascending order, so the floating-point sums
/// are independent of the thread count.
fn keyed_weights(
    values: &[i64],
    weights: &[f64],
    coeff_u: &[i64],
    coeff_v: &[i64],
) -> BTreeMap<PowerSumKey, f64> {
    let r = coeff_u.len();
    debug_assert_eq!(r, coeff_v.len());
    let groups: Vec<BTreeMap<PowerSumKey, f64>> = (0..values.len())
        .into_par_iter()
        .map(|first| {
            let mut map = BTreeMap::new();
            let mut idx = vec![0usize; r];
            idx[0] = first;
            loop {
                let mut s2: i128 = 0;
                let mut s3: i128 = 0;
                let mut w = 1.0f64;
                for i in 0..r {
                    let x = values[idx[i]] as i128;
                    s2 += coeff_u[i] as i128 * x * x;
                    s3 += coeff_v[i] as i128 * x * x * x;
                    w *= weights[idx[i]];
                }
                *map.entry((s2, s3)).or_insert(0.0) += w;
                // odometer over positions 1..r only; position 0 is the group
                let mut i = r;
                loop {
                    if i == 1 {
                        return map;
                    }
                    i -= 1;
                    if idx[i] + 1 < values.len() {
                        idx[i] += 1;
                        for y in idx[i + 1..].iter_mut() {
                            *y = 0;
                        }
                        break;
                    }
                }
            }
        })
        .collect();
    let mut merged = BTreeMap::new();
    for map in groups {
        for (k, w) in map {
            *merged.entry(k).or_insert(0.0) += w;
        }
    }
    merged
}

/// Integer multiplicity table for r-tuples with unit coefficients.
fn keyed_multiplicities(values: &[i64], r: usize) -> BTreeMap<PowerSumKey, u64> {
    let ones = vec![1i64; r];
    let unit_weights = vec![1.0f64; values.len()];
    keyed_weights(values, &unit_weights, &ones, &ones)
        .into_iter()
        .map(|(k, w)| (k, w.round() as u64))
        .collect()
}

/// Number of 2r-tuples of positive integers below P whose two halves have
/// equal sums of squares and equal sums of cubes. Computed by hashing all
/// r-tuples by power-sum key and summing squared multiplicities.
pub fn t_r_count(r: usize, height: u64) -> Result<CountResult> {
    assert!(r >= 1 && height >= 2);
    let start = Instant::now();
    check_tuple_budget(height - 1, r as u32)?;
    let values: Vec<i64> = (1..height as i64).collect();
    let table = keyed_multiplicities(&values, r);
    let total: u64 = table.values().map(|&m| m * m).sum();
    Ok(CountResult {
        kind: CountKind::TR,
        height,
        value: CountValue::Integer(total),
        runtime_secs: start.elapsed().as_secs_f64(),
    })
}

/// Primes below the height, by sieve.
pub fn primes_below(height: u64) -> Vec<i64> {
    if height < 3 {
        return Vec::new();
    }
    let n = height as usize;
    let mut sieve = vec![true; n];
    sieve[0] = false;
    sieve[1] = false;
    let mut p = 2;
    while p * p < n {
        if sieve[p] {
            let mut m = p * p;
            while m < n {
                sieve[m] = false;
                m += p;
            }
        }
        p += 1;
    }
    (2..n).filter(|&i| sieve[i]).map(|i| i as i64).collect()
}

fn r_count(sys: &DiagonalSystem, height: u64, weighted: bool) -> Result<CountResult> {
    let start = Instant::now();
    let s = sys.arity();
    let primes = primes_below(height);
    let half = s.div_ceil(2);
    check_tuple_budget(primes.len().max(1) as u64, half as u32)?;
    let weights: Vec<f64> = primes
        .iter()
        .map(|&p| if weighted { (p as f64).ln() } else { 1.0 })
        .collect();
    if primes.is_empty() {
        let value = if weighted {
            CountValue::Real(0.0)
        } else {
            CountValue::Integer(0)
        };
        return Ok(CountResult {
            kind: if weighted {
                CountKind::RWeighted
            } else {
                CountKind::RUnweighted
            },
            height,
            value,
            runtime_secs: start.elapsed().as_secs_f64(),
        });
    }
    // left half carries its own coefficients; the right half is keyed by the
    // residual target so a solution is exactly a key match
    let left = keyed_weights(&primes, &weights, &sys.u[..half], &sys.v[..half]);
    let right = if half == s {
        let mut single = BTreeMap::new();
        single.insert((0i128, 0i128), 1.0f64);
        single
    } else {
        keyed_weights(&primes, &weights, &sys.u[half..], &sys.v[half..])
    };
    // Kahan-compensated join in sorted key order
    let mut total = 0.0f64;
    let mut comp = 0.0f64;
    for (&(s2, s3), &lw) in &left {
        let key = (sys.target_u as i128 - s2, sys.target_v as i128 - s3);
        if let Some(&rw) = right.get(&key) {
            let term = lw * rw - comp;
            let next = total + term;
            comp = (next - total) - term;
            total = next;
        }
    }
    let value = if weighted {
        CountValue::Real(total)
    } else {
        CountValue::Integer(total.round() as u64)
    };
    Ok(CountResult {
        kind: if weighted {
            CountKind::RWeighted
        } else {
            CountKind::RUnweighted
        },
        height,
        value,
        runtime_secs: start.elapsed().as_secs_f64(),
    })
}

/// Sum over s-tuples of primes below P solving the system exactly over the
/// integers, weighted by the product of log p_i. Meet-in-the-middle on the
/// power-sum key.
pub fn r_weighted_count(sys: &DiagonalSystem, height: u64) -> Result<CountResult> {
    r_count(sys, height, true)
}

/// Same solution set as `r_weighted_count`, each tuple counted once.
pub fn r_unweighted_count(sys: &DiagonalSystem, height: u64) -> Result<CountResult> {
    r_count(sys, height, false)
}

/// Which counting pipeline an exponent fit runs.
#[derive(Debug, Clone)]
pub enum CountTask {
    TR { r: usize },
    RWeighted(DiagonalSystem),
    RUnweighted(DiagonalSystem),
}

impl CountTask {
    pub fn count_at(&self, height: u64) -> Result<CountResult> {
        match self {
            CountTask::TR { r } => t_r_count(*r, height),
            CountTask::RWeighted(sys) => r_weighted_count(sys, height),
            CountTask::RUnweighted(sys) => r_unweighted_count(sys, height),
        }
    }

    /// The asymptotic exponent the fitted slope is compared against:
    /// 2r - 5 for the even-moment counts, s - 5 for the prime counts.
    pub fn reference_exponent(&self) -> f64 {
        match self {
            CountTask::TR { r } => 2.0 * *r as f64 - 5.0,
            CountTask::RWeighted(sys) | CountTask::RUnweighted(sys) => sys.arity() as f64 - 5.0,
        }
    }
}

/// Least-squares slope of log(count) against log(P).
#[derive(Debug, Clone)]
pub struct ExponentFit {
    pub heights: Vec<u64>,
    pub counts: Vec<CountResult>,
    pub slope: f64,
    /// root-mean-square residual of the log-log fit
    pub residual: f64,
    /// asymptotic reference slope; reported alongside, never asserted
    pub reference: f64,
}

impl ExponentFit {
    /// Delimited rows for the counts plus a trailing fit line.
    pub fn to_text(&self, include_timing: bool) -> String {
        let mut out = String::new();
        for c in &self.counts {
            out.push_str(&c.to_row(include_timing));
            out.push('\n');
        }
        out.push_str(&format!(
            "fit\tslope={:.14e}\tresidual={:.14e}\treference={:.14e}\n",
            self.slope, self.residual, self.reference
        ));
        out
    }
}

/// Fit log(count) = slope * log(P) + c over at least three strictly
/// increasing heights. All counts must be positive for the logs to exist.
pub fn exponent_fit(task: &CountTask, heights: &[u64]) -> Result<ExponentFit> {
    assert!(heights.len() >= 3, "need at least three heights");
    assert!(
        heights.windows(2).all(|w| w[0] < w[1]),
        "heights must be strictly increasing"
    );
    let counts = heights
        .iter()
        .map(|&h| task.count_at(h))
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<(f64, f64)> = counts
        .iter()
        .map(|c| {
            let y = c.value.as_f64();
            assert!(y > 0.0, "zero count at P={} cannot be log-fitted", c.height);
            ((c.height as f64).ln(), y.ln())
        })
        .collect();
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (points
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(ExponentFit {
        heights: heights.to_vec(),
        counts,
        slope,
        residual,
        reference: task.reference_exponent(),
    })
}
