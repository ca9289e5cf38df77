//! Wick evaluation of Pauli-string expectation values in the Gaussian
//! ground state.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::MajoranaCovariance;
use crate::pauli::{axis_from_index, jordan_wigner_monomial, site_contribution, Axis, PauliString};
use crate::pfaffian::{eliminate_leading, pfaffian_in_place};

/// Largest tolerated overshoot of `|⟨P⟩|` beyond 1 before it is treated as
/// a numerical fault rather than roundoff.
pub const OVERSHOOT_TOL: f64 = 1e-9;

/// Largest tolerated imaginary part of a Hermitian expectation value.
pub const IMAGINARY_TOL: f64 = 1e-10;

fn clamp_unit(v: f64, what: impl FnOnce() -> String) -> Result<f64> {
    if v.abs() <= 1.0 {
        Ok(v)
    } else if v.abs() - 1.0 <= OVERSHOOT_TOL {
        Ok(v.signum())
    } else {
        Err(Error::numerical(format!("|⟨{}⟩| = {v} exceeds 1", what())))
    }
}

/// `⟨P⟩` in the ground state described by `cov`.
pub fn pauli_expectation(p: &PauliString, cov: &MajoranaCovariance) -> Result<f64> {
    let mut scratch = Vec::new();
    expectation_with(p, cov, &mut scratch)
}

fn expectation_with(p: &PauliString, cov: &MajoranaCovariance, scratch: &mut Vec<f64>) -> Result<f64> {
    let mono = jordan_wigner_monomial(p, cov.n_sites())?;
    if mono.indices.len() % 2 == 1 {
        return Ok(0.0);
    }
    cov.fill_submatrix(&mono.indices, scratch);
    let pf = pfaffian_in_place(scratch, mono.indices.len());
    let (re, im) = mono.phase.parts();
    if im != 0.0 {
        if pf.abs() > IMAGINARY_TOL {
            return Err(Error::numerical(format!("⟨{p}⟩ has imaginary part {pf}")));
        }
        return Ok(0.0);
    }
    clamp_unit(re * pf, || p.to_string())
}

/// Evaluates many strings against one shared covariance. The result order
/// matches the input and does not depend on the worker count.
pub fn pauli_expectations(strings: &[PauliString], cov: &MajoranaCovariance) -> Result<Vec<f64>> {
    strings
        .par_iter()
        .map_init(Vec::new, |scratch, p| expectation_with(p, cov, scratch))
        .collect()
}

/// Expectation values of all `4^k` Pauli strings supported on a sorted set of
/// `k ≤ 4` sites (identity letters included).
///
/// Entry `Σ_i letter_i · 4^i` holds the string with `letter_i ∈ {I, X, Y, Z}`
/// (encoded 0..4) on `sites[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetTable {
    pub sites: Vec<usize>,
    pub values: Vec<f64>,
}

impl SubsetTable {
    pub fn get(&self, letters: &[usize]) -> f64 {
        self.values[encode(letters)]
    }

    /// `Tr ρ² = 2^{-k} Σ_P ⟨P⟩²`.
    pub fn purity(&self) -> f64 {
        let k = self.sites.len() as i32;
        self.values.iter().map(|v| v * v).sum::<f64>() * 0.5f64.powi(k)
    }

    pub fn string(&self, code: usize) -> PauliString {
        let factors = decode(code, self.sites.len())
            .into_iter()
            .zip(&self.sites)
            .filter_map(|(l, &s)| axis_from_index(l).map(|a| (s, a)))
            .collect();
        PauliString::new(factors).expect("distinct sites")
    }
}

pub(crate) fn encode(letters: &[usize]) -> usize {
    letters.iter().rev().fold(0, |acc, &l| acc * 4 + l)
}

pub(crate) fn decode(mut code: usize, k: usize) -> Vec<usize> {
    (0..k)
        .map(|_| {
            let l = code % 4;
            code /= 4;
            l
        })
        .collect()
}

/// Reusable buffers for [`subset_table`].
#[derive(Default)]
pub struct SubsetScratch {
    mat: Vec<f64>,
    small: Vec<f64>,
    idx: Vec<usize>,
}

/// Builds the full table of Pauli expectations on `sites` (sorted, distinct).
///
/// Strings sharing the same Jordan–Wigner string pattern share one partial
/// elimination of the string block; each string then costs a Pfaffian of at
/// most eight local Majoranas.
pub fn subset_table(sites: &[usize], cov: &MajoranaCovariance, scratch: &mut SubsetScratch) -> Result<SubsetTable> {
    let k = sites.len();
    assert!((1..=4).contains(&k), "subset size must be 1..=4");
    assert!(sites.windows(2).all(|w| w[0] < w[1]));
    assert!(sites[k - 1] < cov.n_sites());

    let mut values = vec![0.0; 1 << (2 * k)];
    values[0] = 1.0;

    // Local Majorana slots in ascending order.
    let local: Vec<usize> = sites.iter().flat_map(|&s| [2 * s, 2 * s + 1]).collect();

    for pattern in 0..(1usize << (k - 1)) {
        // Interval i (between sites[i] and sites[i+1]) carries the string
        // when bit i of the pattern is set.
        let mut u: Vec<usize> = Vec::new();
        for i in 0..k - 1 {
            if pattern >> i & 1 == 1 {
                for l in sites[i] + 1..sites[i + 1] {
                    u.push(2 * l);
                    u.push(2 * l + 1);
                }
            }
        }
        let n_u = u.len();
        let mut order = u;
        order.extend_from_slice(&local);
        let d = order.len();
        cov.fill_submatrix(&order, &mut scratch.mat);
        let elim = eliminate_leading(&mut scratch.mat, d, n_u);
        let leftover = &elim.active[..elim.leftover];

        // `code` is the packed Pauli word, not just a position.
        #[allow(clippy::needless_range_loop)]
        for code in 1..values.len() {
            let letters = decode(code, k);
            let n_x = letters.iter().filter(|&&l| l == 1).count();
            let n_y = letters.iter().filter(|&&l| l == 2).count();
            // Odd X+Y count: odd monomial. Odd Y count with even X+Y: purely
            // imaginary Pfaffian weight of a Hermitian operator, hence zero.
            if n_x % 2 == 1 || n_y % 2 == 1 {
                continue;
            }
            if string_pattern(&letters) != pattern {
                continue;
            }
            scratch.idx.clear();
            scratch.idx.extend_from_slice(leftover);
            let mut i_pow = 0u8;
            for (i, &l) in letters.iter().enumerate() {
                let passes = i + 1 < k && pattern >> i & 1 == 1;
                let (a, b, ip) = site_contribution(axis_from_index(l), passes);
                if a {
                    scratch.idx.push(n_u + 2 * i);
                }
                if b {
                    scratch.idx.push(n_u + 2 * i + 1);
                }
                i_pow += ip;
            }
            let m = scratch.idx.len();
            if m % 2 == 1 {
                continue;
            }
            scratch.small.clear();
            scratch.small.resize(m * m, 0.0);
            for (r, &pr) in scratch.idx.iter().enumerate() {
                for (c, &pc) in scratch.idx.iter().enumerate().skip(r + 1) {
                    let v = scratch.mat[pr * d + pc];
                    scratch.small[r * m + c] = v;
                    scratch.small[c * m + r] = -v;
                }
            }
            let pf = pfaffian_in_place(&mut scratch.small, m);
            // i_pow is even here (n_y even).
            let sign = if (i_pow / 2) % 2 == 0 { 1.0 } else { -1.0 };
            let v = sign * elim.factor * pf;
            values[code] = clamp_unit(v, || {
                let t = SubsetTable {
                    sites: sites.to_vec(),
                    values: Vec::new(),
                };
                t.string(code).to_string()
            })?;
        }
    }
    Ok(SubsetTable {
        sites: sites.to_vec(),
        values,
    })
}

/// Interval-string pattern of a letter assignment: bit `i` is set when an
/// odd number of X/Y letters sit at positions `> i`.
fn string_pattern(letters: &[usize]) -> usize {
    let k = letters.len();
    let mut pattern = 0;
    let mut odd = false;
    for i in (0..k).rev() {
        if i + 1 < k && odd {
            pattern |= 1 << i;
        }
        if letters[i] == 1 || letters[i] == 2 {
            odd = !odd;
        }
    }
    pattern
}

/// Convenience wrapper used by tests and the oracle comparisons.
pub fn subset_table_fresh(sites: &[usize], cov: &MajoranaCovariance) -> Result<SubsetTable> {
    subset_table(sites, cov, &mut SubsetScratch::default())
}

/// `⟨σˣ_i σˣ_j⟩`.
pub fn xx_correlator(i: usize, j: usize, cov: &MajoranaCovariance) -> Result<f64> {
    pauli_expectation(&PauliString::pair((i, Axis::X), (j, Axis::X))?, cov)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{majorana_covariance, ModelParams};

    fn cov(n: usize, g: f64, l: f64) -> MajoranaCovariance {
        majorana_covariance(&ModelParams::new(n, g, l).unwrap()).unwrap()
    }

    #[test]
    fn odd_strings_vanish() {
        let c = cov(8, 1.0, 0.5);
        for s in 0..8 {
            assert_eq!(pauli_expectation(&PauliString::single(s, Axis::X), &c).unwrap(), 0.0);
            assert_eq!(pauli_expectation(&PauliString::single(s, Axis::Y), &c).unwrap(), 0.0);
        }
    }

    #[test]
    fn polarized_sigma_z() {
        let c = cov(8, 1.0, 10.0);
        let z = pauli_expectation(&PauliString::single(0, Axis::Z), &c).unwrap();
        assert!(z > 0.99 && z < 1.0, "{z}");
    }

    #[test]
    fn translation_covariance() {
        let c = cov(9, 0.5, 0.9);
        let strings = [
            PauliString::pair((0, Axis::X), (3, Axis::X)).unwrap(),
            PauliString::pair((1, Axis::Y), (2, Axis::Y)).unwrap(),
            PauliString::new(vec![(0, Axis::Z), (2, Axis::X), (5, Axis::X), (6, Axis::Z)]).unwrap(),
            PauliString::new(vec![(1, Axis::X), (3, Axis::Y), (4, Axis::Y), (7, Axis::X)]).unwrap(),
        ];
        for p in &strings {
            let v0 = pauli_expectation(p, &c).unwrap();
            for shift in 1..9 {
                let v = pauli_expectation(&p.shifted(shift, 9), &c).unwrap();
                assert!((v - v0).abs() < 1e-10, "{p} shift {shift}: {v} vs {v0}");
            }
        }
    }

    #[test]
    fn subset_table_matches_direct_evaluation() {
        for (n, g, l) in [(12, 1.0, 0.5), (16, 0.5, 1.0), (20, 1.0, 0.3), (11, 0.5, 2.0)] {
            let c = cov(n, g, l);
            for sites in [vec![0, 3, 4, 9], vec![1, 2, 6], vec![2, 7], vec![5], vec![0, 1, 2, 3]] {
                let table = subset_table_fresh(&sites, &c).unwrap();
                for code in 0..table.values.len() {
                    let p = table.string(code);
                    let direct = pauli_expectation(&p, &c).unwrap();
                    assert!(
                        (table.values[code] - direct).abs() < 1e-11,
                        "N={n} λ={l} {p}: {} vs {direct}",
                        table.values[code]
                    );
                }
            }
        }
    }

    #[test]
    fn subset_table_stable_deep_in_ordered_phase() {
        // Long string blocks have tiny Pfaffians here; the pivot threshold
        // must keep the shared elimination accurate.
        let c = cov(64, 1.0, 0.3);
        let sites = [0, 21, 40, 47];
        let table = subset_table_fresh(&sites, &c).unwrap();
        for code in 0..table.values.len() {
            let p = table.string(code);
            let direct = pauli_expectation(&p, &c).unwrap();
            assert!((table.values[code] - direct).abs() < 1e-10, "{p}");
        }
    }

    #[test]
    fn batch_matches_single() {
        let c = cov(10, 0.5, 0.7);
        let strings: Vec<_> = (1..10)
            .map(|r| PauliString::pair((0, Axis::X), (r, Axis::X)).unwrap())
            .collect();
        let batch = pauli_expectations(&strings, &c).unwrap();
        for (p, v) in strings.iter().zip(batch) {
            assert_eq!(v, pauli_expectation(p, &c).unwrap());
        }
    }

    #[test]
    fn encode_decode() {
        for code in 0..256 {
            assert_eq!(encode(&decode(code, 4)), code);
        }
        assert_eq!(encode(&[1, 0, 0, 0]), 1);
        assert_eq!(encode(&[0, 1]), 4);
    }
}
