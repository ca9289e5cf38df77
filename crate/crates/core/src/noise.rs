//! Hard-core-boson correlators, the quasimomentum distribution and noise
//! correlations.
//!
//! Bosons sit on the spins through `a†_j = σ⁺_j`, `a_j = σ⁻_j` and
//! `n_j = (1 + σᶻ_j)/2`; `n̂_q = (1/N) Σ_{n,m} e^{iθ(n-m)} a†_n a_m` with
//! `θ = 2πq/N`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::engine::{pauli_expectation, IMAGINARY_TOL};
use crate::entanglement::{enumerate_subset_classes, evaluate_classes};
use crate::error::{Error, Result};
use crate::model::{majorana_covariance, MajoranaCovariance, ModelParams};
use crate::pauli::{expand_product, Axis, PauliString, SiteOp};

/// Largest tolerated imaginary residue of a four-point function.
pub const FOUR_POINT_IMAGINARY_TOL: f64 = 1e-9;

fn ladder(raising: bool) -> SiteOp {
    if raising {
        SiteOp::raising()
    } else {
        SiteOp::lowering()
    }
}

/// Evaluates Pauli strings with a per-call memo, since the expansions of
/// neighbouring four-point functions share most of their strings.
struct StringCache<'a> {
    cov: &'a MajoranaCovariance,
    memo: HashMap<PauliString, f64>,
}

impl<'a> StringCache<'a> {
    fn new(cov: &'a MajoranaCovariance) -> Self {
        Self {
            cov,
            memo: HashMap::new(),
        }
    }

    fn get(&mut self, p: &PauliString) -> Result<f64> {
        if let Some(&v) = self.memo.get(p) {
            return Ok(v);
        }
        let v = pauli_expectation(p, self.cov)?;
        self.memo.insert(p.clone(), v);
        Ok(v)
    }

    /// `⟨Π ops⟩` for ladder operators in the given order.
    fn ladder_product(&mut self, ops: &[(usize, bool)]) -> Result<C64> {
        let ops: Vec<(usize, SiteOp)> = ops.iter().map(|&(s, r)| (s, ladder(r))).collect();
        let mut acc = C64::new(0.0, 0.0);
        for (p, c) in expand_product(&ops) {
            let v = self.get(&p)?;
            acc += c * v;
        }
        Ok(acc)
    }
}

fn check_sites(cov: &MajoranaCovariance, sites: &[usize]) -> Result<()> {
    if let Some(&s) = sites.iter().find(|&&s| s >= cov.n_sites()) {
        return Err(Error::InvalidParams(format!(
            "site {s} outside a chain of {} sites",
            cov.n_sites()
        )));
    }
    Ok(())
}

/// `⟨a†_n a_m⟩`.
pub fn hcb_two_point(n: usize, m: usize, cov: &MajoranaCovariance) -> Result<f64> {
    check_sites(cov, &[n, m])?;
    let v = StringCache::new(cov).ladder_product(&[(n, true), (m, false)])?;
    if v.im.abs() > IMAGINARY_TOL {
        return Err(Error::numerical(format!("⟨a†_{n} a_{m}⟩ has imaginary part {}", v.im)));
    }
    Ok(v.re)
}

/// `⟨a†_n a_m a†_k a_l⟩`, expanded into at most 16 Pauli strings.
pub fn hcb_four_point(n: usize, m: usize, k: usize, l: usize, cov: &MajoranaCovariance) -> Result<C64> {
    check_sites(cov, &[n, m, k, l])?;
    StringCache::new(cov).ladder_product(&[(n, true), (m, false), (k, true), (l, false)])
}

/// `C(r) = ⟨a†_0 a_r⟩` for `r = 0..N`.
pub fn hopping_profile(cov: &MajoranaCovariance) -> Result<Vec<f64>> {
    let n = cov.n_sites();
    let mut c = vec![0.0; n];
    c[0] = (1.0 + pauli_expectation(&PauliString::single(0, Axis::Z), cov)?) / 2.0;
    for r in 1..=n / 2 {
        let xx = pauli_expectation(&PauliString::pair((0, Axis::X), (r, Axis::X))?, cov)?;
        let yy = pauli_expectation(&PauliString::pair((0, Axis::Y), (r, Axis::Y))?, cov)?;
        c[r] = (xx + yy) / 4.0;
        c[n - r] = c[r];
    }
    Ok(c)
}

/// `n(q)` for `q = 0..N` from the translation-invariant hopping profile.
pub fn quasimomentum_from(cov: &MajoranaCovariance) -> Result<Vec<f64>> {
    let n = cov.n_sites();
    let c = hopping_profile(cov)?;
    Ok((0..n)
        .map(|q| {
            let theta = 2.0 * PI * q as f64 / n as f64;
            c.iter().enumerate().map(|(r, &cr)| (theta * r as f64).cos() * cr).sum()
        })
        .collect())
}

pub fn quasimomentum_distribution(params: &ModelParams) -> Result<Vec<f64>> {
    quasimomentum_from(&majorana_covariance(params)?)
}

/// `Δ(q1,q2) = Re⟨n̂_{q1} n̂_{q2}⟩ - ⟨n̂_{q1}⟩⟨n̂_{q2}⟩` by direct summation over
/// `O(N³)` four-point functions with the first site pinned to 0.
pub fn noise_correlation_direct(q1: usize, q2: usize, cov: &MajoranaCovariance) -> Result<f64> {
    let n = cov.n_sites();
    let nq = quasimomentum_from(cov)?;
    let t1 = 2.0 * PI * q1 as f64 / n as f64;
    let t2 = 2.0 * PI * q2 as f64 / n as f64;
    let mut cache = StringCache::new(cov);
    let mut acc = C64::new(0.0, 0.0);
    for m in 0..n {
        for k in 0..n {
            for l in 0..n {
                let f = cache.ladder_product(&[(0, true), (m, false), (k, true), (l, false)])?;
                let phase = C64::from_polar(1.0, -t1 * m as f64 + t2 * (k as f64 - l as f64));
                acc += phase * f;
            }
        }
    }
    let both = acc / n as f64;
    if both.im.abs() > FOUR_POINT_IMAGINARY_TOL * (n * n) as f64 {
        return Err(Error::numerical(format!("⟨n_q1 n_q2⟩ has imaginary part {}", both.im)));
    }
    Ok(both.re - nq[q1 % n] * nq[q2 % n])
}

/// Pauli coefficients of the ladder word summed over every assignment of
/// its letters to `s` positions that uses all of them. The sum is a
/// Hermitian operator symmetric under permutations of the positions, so the
/// coefficients are real.
fn word_weights(word: &[bool], s: usize) -> Vec<f64> {
    let w = word.len();
    let mut acc = vec![C64::new(0.0, 0.0); 1 << (2 * s)];
    let total = s.pow(w as u32);
    for assign in 0..total {
        let mut a = assign;
        let pos: Vec<usize> = (0..w)
            .map(|_| {
                let p = a % s;
                a /= s;
                p
            })
            .collect();
        if (0..s).any(|p| !pos.contains(&p)) {
            continue;
        }
        let ops: Vec<(usize, SiteOp)> = pos.iter().zip(word).map(|(&p, &r)| (p, ladder(r))).collect();
        for (string, c) in expand_product(&ops) {
            let code: usize = string
                .factors()
                .iter()
                .map(|&(site, axis)| {
                    let letter = match axis {
                        Axis::X => 1,
                        Axis::Y => 2,
                        Axis::Z => 3,
                    };
                    letter << (2 * site)
                })
                .sum();
            acc[code] += c;
        }
    }
    acc.iter()
        .map(|z| {
            debug_assert!(z.im.abs() < 1e-12);
            z.re
        })
        .collect()
}

/// Weights for `a†a` (index `s-1`, `s ≤ 2`) and `a†a a†a` (`s ≤ 4`).
struct LadderWeights {
    two: Vec<Vec<f64>>,
    four: Vec<Vec<f64>>,
}

fn ladder_weights() -> &'static LadderWeights {
    static W: OnceLock<LadderWeights> = OnceLock::new();
    W.get_or_init(|| LadderWeights {
        two: (1..=2).map(|s| word_weights(&[true, false], s)).collect(),
        four: (1..=4).map(|s| word_weights(&[true, false, true, false], s)).collect(),
    })
}

/// `n(0)` and `Δ(0,0)` of one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroModeNoise {
    pub n0: f64,
    pub delta00: f64,
}

/// `n(0)` and `Δ(0,0)` through the subset-class tables.
///
/// With `O = Σ_{n,m} a†_n a_m = N n̂_0`, every term of `⟨O⟩` and `⟨O²⟩` lives
/// on a set of at most four sites. Grouping terms by that set turns the
/// `O(N⁴)` sum into one pass over the translation/reflection classes, each
/// weighted by its orbit size.
pub fn zero_mode_noise_with(cov: &MajoranaCovariance) -> Result<ZeroModeNoise> {
    let n = cov.n_sites();
    let w = ladder_weights();
    let classes = enumerate_subset_classes(n, 4);
    let records = evaluate_classes(&classes, cov, None, |class, table| {
        let s = class.size;
        let dot = |weights: &[f64]| -> f64 { weights.iter().zip(&table.values).map(|(a, b)| a * b).sum() };
        let two = if s <= 2 { dot(&w.two[s - 1]) } else { 0.0 };
        (two, dot(&w.four[s - 1]))
    })?;
    let mut o1 = 0.0;
    let mut o2 = 0.0;
    for r in &records {
        let weight = r.class.orbit_weight as f64;
        o1 += weight * r.extra.0;
        o2 += weight * r.extra.1;
    }
    let nf = n as f64;
    let n0 = o1 / nf;
    Ok(ZeroModeNoise {
        n0,
        delta00: o2 / (nf * nf) - n0 * n0,
    })
}

pub fn zero_mode_noise(params: &ModelParams) -> Result<ZeroModeNoise> {
    zero_mode_noise_with(&majorana_covariance(params)?)
}

/// `Δ(q1,q2)`; `(0,0)` takes the class route, other pairs the direct sum.
pub fn noise_correlation(q1: usize, q2: usize, params: &ModelParams) -> Result<f64> {
    let cov = majorana_covariance(params)?;
    let n = params.n();
    if q1 % n == 0 && q2 % n == 0 {
        Ok(zero_mode_noise_with(&cov)?.delta00)
    } else {
        noise_correlation_direct(q1, q2, &cov)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseSpectrum {
    pub params: ModelParams,
    pub n_of_q: Vec<f64>,
    /// Always starts with `(0, 0)`.
    pub delta: Vec<((usize, usize), f64)>,
}

pub fn noise_spectrum(params: &ModelParams, extra_pairs: &[(usize, usize)]) -> Result<NoiseSpectrum> {
    let cov = majorana_covariance(params)?;
    let n_of_q = quasimomentum_from(&cov)?;
    let mut delta = vec![((0, 0), zero_mode_noise_with(&cov)?.delta00)];
    for &(q1, q2) in extra_pairs {
        if (q1, q2) != (0, 0) {
            delta.push(((q1, q2), noise_correlation_direct(q1, q2, &cov)?));
        }
    }
    Ok(NoiseSpectrum {
        params: *params,
        n_of_q,
        delta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessReport {
    pub delta00: f64,
    pub threshold: f64,
    pub entangled: bool,
}

/// Largest `Δ(0,0)` of any product state on `n` sites.
pub fn separability_threshold(n: usize) -> f64 {
    (1 + n) as f64 / 8.0
}

pub fn separability_witness(delta00: f64, n: usize) -> WitnessReport {
    let threshold = separability_threshold(n);
    WitnessReport {
        delta00,
        threshold,
        entangled: delta00 > threshold,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cov(n: usize, g: f64, l: f64) -> MajoranaCovariance {
        majorana_covariance(&ModelParams::new(n, g, l).unwrap()).unwrap()
    }

    #[test]
    fn thresholds() {
        assert_eq!(separability_threshold(95), 12.0);
        assert_eq!(separability_threshold(7), 1.0);
        assert!(separability_witness(12.5, 95).entangled);
        assert!(!separability_witness(12.0, 95).entangled);
    }

    #[test]
    fn polarized_limit() {
        let c = cov(8, 1.0, 1e7);
        assert!((hcb_two_point(3, 3, &c).unwrap() - 1.0).abs() < 1e-9);
        assert!(hcb_two_point(3, 5, &c).unwrap().abs() < 1e-9);
        let f = hcb_four_point(1, 1, 4, 4, &c).unwrap();
        assert!((f.re - 1.0).abs() < 1e-9);
        assert!(hcb_four_point(1, 2, 4, 4, &c).unwrap().norm() < 1e-9);
        for v in quasimomentum_from(&c).unwrap() {
            assert!((v - 1.0).abs() < 1e-9);
        }
        let z = zero_mode_noise_with(&c).unwrap();
        assert!((z.n0 - 1.0).abs() < 1e-9);
        assert!(z.delta00.abs() < 1e-9);
    }

    #[test]
    fn occupation_bounds() {
        let c = cov(10, 0.5, 0.9);
        for j in 0..10 {
            let v = hcb_two_point(j, j, &c).unwrap();
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn sum_rule() {
        let c = cov(14, 1.0, 0.8);
        let nq = quasimomentum_from(&c).unwrap();
        let z = pauli_expectation(&PauliString::single(0, Axis::Z), &c).unwrap();
        let total: f64 = nq.iter().sum();
        assert!((total - 14.0 * (1.0 + z) / 2.0).abs() < 1e-8);
        assert!(nq.iter().all(|&v| v > -1e-10));
    }

    #[test]
    fn class_route_matches_direct_sum() {
        for (n, g, l) in [(6, 1.0, 0.7), (7, 0.5, 1.1), (8, 1.0, 1.0)] {
            let c = cov(n, g, l);
            let fast = zero_mode_noise_with(&c).unwrap();
            let slow = noise_correlation_direct(0, 0, &c).unwrap();
            assert!((fast.delta00 - slow).abs() < 1e-10, "{fast:?} vs {slow}");
            assert!((fast.n0 - quasimomentum_from(&c).unwrap()[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn weights_are_permutation_symmetric() {
        let w = ladder_weights();
        // Only I and Z survive on a single site: a†a a†a = a†a = (1 + Z)/2.
        assert_eq!(w.four[0], vec![0.5, 0.0, 0.0, 0.5]);
        assert_eq!(w.two[0], vec![0.5, 0.0, 0.0, 0.5]);
        // Two sites: a†_0 a_1 + a†_1 a_0 = (XX + YY)/2.
        let two = &w.two[1];
        assert!((two[1 + 4] - 0.5).abs() < 1e-15 && (two[2 + 8] - 0.5).abs() < 1e-15);
        assert!(two[1 + 8].abs() < 1e-15);
    }

    #[test]
    fn variance_is_nonnegative() {
        let c = cov(12, 0.5, 1.3);
        assert!(noise_correlation_direct(2, 2, &c).unwrap() > -1e-9);
        let a = noise_correlation_direct(1, 3, &c).unwrap();
        let b = noise_correlation_direct(3, 1, &c).unwrap();
        assert!((a - b).abs() < 1e-9);
    }
}
