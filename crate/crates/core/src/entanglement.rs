//! Subset purities, generalized tangles and the spaced four-spin entropy.

use std::collections::BTreeSet;
use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ed::{entropy_bits, spectrum, DensityMatrix};
use crate::engine::{subset_table, SubsetScratch, SubsetTable};
use crate::error::{Error, Result};
use crate::model::{majorana_covariance, MajoranaCovariance, ModelParams};
use crate::scaling::Curve;

/// Largest subset size handled anywhere in the crate.
pub const MAX_ORDER: usize = 4;

/// Eigenvalues of an assembled density matrix more negative than this are
/// reported as a numerical fault; smaller negative values are clipped.
pub const PSD_TOL: f64 = 1e-8;

/// Tolerated deviation of an assembled density matrix's trace from 1.
pub const TRACE_TOL: f64 = 1e-10;

/// A translation/reflection class of site subsets on the ring.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubsetClass {
    /// Distances between cyclically consecutive sites; lexicographically
    /// minimal over rotations and reversal. Sums to `N`.
    pub gaps: Vec<usize>,
    pub size: usize,
    /// Number of distinct subsets in the class.
    pub orbit_weight: u64,
    /// `orbit_weight · size!`, the number of ordered tuples.
    pub tuple_weight: u64,
}

impl SubsetClass {
    /// Class of an arbitrary subset of `0..n`.
    pub fn of_sites(sites: &[usize], n: usize) -> Self {
        let mut s = sites.to_vec();
        s.sort_unstable();
        let gaps: Vec<usize> = (0..s.len())
            .map(|i| {
                if i + 1 < s.len() {
                    s[i + 1] - s[i]
                } else {
                    s[0] + n - s[i]
                }
            })
            .collect();
        Self::from_gaps(&gaps)
    }

    fn from_gaps(gaps: &[usize]) -> Self {
        let orbit = dihedral_orbit(gaps);
        let n: usize = gaps.iter().sum();
        let size = gaps.len();
        let canonical = orbit.iter().next().expect("orbit is never empty").clone();
        let orbit_weight = (n * orbit.len() / size) as u64;
        let tuple_weight = orbit_weight * factorial(size);
        Self {
            gaps: canonical,
            size,
            orbit_weight,
            tuple_weight,
        }
    }

    /// Representative sites starting at 0, with the largest gap used as the
    /// wrap-around so the sites span as few bonds as possible.
    pub fn representative(&self) -> Vec<usize> {
        let k = self.size;
        let wrap = (0..k)
            .max_by_key(|&i| (self.gaps[i], std::cmp::Reverse(i)))
            .expect("size ≥ 1");
        let mut sites = Vec::with_capacity(k);
        let mut pos = 0;
        for j in 1..=k {
            sites.push(pos);
            pos += self.gaps[(wrap + j) % k];
        }
        sites
    }

    /// Span `max - min` of the representative.
    pub fn extent(&self) -> usize {
        self.gaps.iter().sum::<usize>() - self.gaps.iter().max().copied().unwrap_or(0)
    }
}

fn factorial(k: usize) -> u64 {
    (1..=k as u64).product()
}

/// All distinct gap sequences reachable by rotation and reversal.
fn dihedral_orbit(gaps: &[usize]) -> BTreeSet<Vec<usize>> {
    let k = gaps.len();
    let mut out = BTreeSet::new();
    let rev: Vec<usize> = gaps.iter().rev().copied().collect();
    for seq in [gaps, &rev[..]] {
        for r in 0..k {
            out.insert((0..k).map(|i| seq[(i + r) % k]).collect::<Vec<_>>());
        }
    }
    out
}

/// Canonical gap sequence (lexicographic minimum over the dihedral orbit).
pub fn canonical_gaps(gaps: &[usize]) -> Vec<usize> {
    dihedral_orbit(gaps).into_iter().next().unwrap_or_default()
}

/// Every class of size `1..=k_max` on a ring of `n` sites, ordered by size,
/// then extent, then gaps.
pub fn enumerate_subset_classes(n: usize, k_max: usize) -> Vec<SubsetClass> {
    assert!(n >= 3, "ring needs at least 3 sites");
    assert!((1..=MAX_ORDER).contains(&k_max));
    let mut out = Vec::new();
    for size in 1..=k_max.min(n) {
        let mut seen = BTreeSet::new();
        let mut gaps = vec![0; size];
        compositions(n, size, 0, &mut gaps, &mut |g| {
            let c = canonical_gaps(g);
            if c.as_slice() == g {
                seen.insert(c);
            }
        });
        let mut classes: Vec<SubsetClass> = seen.iter().map(|g| SubsetClass::from_gaps(g)).collect();
        classes.sort_by_key(|c| (c.extent(), c.gaps.clone()));
        out.extend(classes);
    }
    out
}

fn compositions(rest: usize, parts: usize, at: usize, buf: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if at + 1 == parts {
        buf[at] = rest;
        f(buf);
        return;
    }
    for g in 1..=rest - (parts - at - 1) {
        buf[at] = g;
        compositions(rest - g, parts, at + 1, buf, f);
    }
}

/// `D_k = Σ_{i<k} N(N-1)⋯(N-i)`, the number of ordered tuples of 1..k
/// distinct sites.
pub fn tuple_count(n: usize, k: usize) -> u64 {
    let mut total = 0u64;
    let mut falling = 1u64;
    for i in 0..k {
        falling *= (n - i) as u64;
        total += falling;
    }
    total
}

/// Per-class results of one pass over the Pauli tables of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassRecord<T> {
    pub class: SubsetClass,
    pub purity: f64,
    pub extra: T,
}

/// Builds the Pauli table of every class representative (in parallel, with
/// the output in class order) and reduces each table with `reduce`.
/// Classes whose extent exceeds `max_extent` are skipped.
pub fn evaluate_classes<T: Send>(
    classes: &[SubsetClass],
    cov: &MajoranaCovariance,
    max_extent: Option<usize>,
    reduce: impl Fn(&SubsetClass, &SubsetTable) -> T + Sync,
) -> Result<Vec<ClassRecord<T>>> {
    let kept: Vec<&SubsetClass> = classes
        .iter()
        .filter(|c| max_extent.is_none_or(|m| c.extent() <= m))
        .collect();
    kept.par_iter()
        .map_init(SubsetScratch::default, |scratch, class| {
            let table = subset_table(&class.representative(), cov, scratch)?;
            let purity = table.purity();
            if !(purity >= 0.5f64.powi(class.size as i32) - 1e-9 && purity <= 1.0 + 1e-9) {
                return Err(Error::numerical(format!(
                    "purity {purity} of class {:?} outside [2^-k, 1]",
                    class.gaps
                )));
            }
            Ok(ClassRecord {
                class: (*class).clone(),
                purity,
                extra: reduce(class, &table),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TangleReport {
    pub k: usize,
    pub value: f64,
    pub d_k: u64,
    pub params: ModelParams,
    /// Set when classes were dropped by an extent cap; such values are
    /// exploratory only.
    pub max_extent: Option<usize>,
}

/// Class purities of one state, computed once and shared by every order.
#[derive(Debug, Clone)]
pub struct PurityTable {
    pub params: ModelParams,
    pub max_extent: Option<usize>,
    pub records: Vec<ClassRecord<()>>,
}

impl PurityTable {
    pub fn compute(params: &ModelParams, k_max: usize, max_extent: Option<usize>) -> Result<Self> {
        let cov = majorana_covariance(params)?;
        Self::from_covariance(params, &cov, k_max, max_extent)
    }

    pub fn from_covariance(
        params: &ModelParams,
        cov: &MajoranaCovariance,
        k_max: usize,
        max_extent: Option<usize>,
    ) -> Result<Self> {
        let classes = enumerate_subset_classes(params.n(), k_max);
        let records = evaluate_classes(&classes, cov, max_extent, |_, _| ())?;
        Ok(Self {
            params: *params,
            max_extent,
            records,
        })
    }

    pub fn purity(&self, class: &SubsetClass) -> Option<f64> {
        self.records
            .iter()
            .find(|r| r.class.gaps == class.gaps)
            .map(|r| r.purity)
    }

    /// `T_k = 2 - (2/D_k) Σ tuple_weight · purity` over classes of size ≤ k.
    pub fn tangle(&self, k: usize) -> TangleReport {
        let d_k = tuple_count(self.params.n(), k);
        let weighted: f64 = self
            .records
            .iter()
            .filter(|r| r.class.size <= k)
            .map(|r| r.class.tuple_weight as f64 * r.purity)
            .sum();
        TangleReport {
            k,
            value: 2.0 - 2.0 * weighted / d_k as f64,
            d_k,
            params: self.params,
            max_extent: self.max_extent,
        }
    }
}

pub fn tangle(k: usize, params: &ModelParams) -> Result<TangleReport> {
    if !(1..=MAX_ORDER).contains(&k) {
        return Err(Error::InvalidParams(format!("tangle order {k} not in 1..=4")));
    }
    Ok(PurityTable::compute(params, k, None)?.tangle(k))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyReport {
    pub spacing: usize,
    pub value: f64,
    pub params: ModelParams,
}

/// Density matrix of a Pauli table, checked for unit trace and positivity.
pub fn density_matrix(table: &SubsetTable) -> Result<(DensityMatrix, Vec<f64>)> {
    let rho = DensityMatrix::from_pauli_expectations(table.sites.len(), &table.values);
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return Err(Error::numerical(format!("reduced density matrix has trace {tr}")));
    }
    let evals = spectrum(&rho)?;
    if let Some(&worst) = evals.iter().find(|&&e| e < -PSD_TOL) {
        return Err(Error::numerical(format!(
            "reduced density matrix has eigenvalue {worst}"
        )));
    }
    Ok((rho, evals))
}

/// Von Neumann entropy (bits) of the spins `{0, L, 2L, 3L}`.
pub fn entropy_spaced(spacing: usize, params: &ModelParams) -> Result<EntropyReport> {
    let cov = majorana_covariance(params)?;
    entropy_spaced_with(spacing, params, &cov)
}

pub fn entropy_spaced_with(spacing: usize, params: &ModelParams, cov: &MajoranaCovariance) -> Result<EntropyReport> {
    if spacing == 0 || 4 * spacing > params.n() {
        return Err(Error::InvalidParams(format!(
            "spacing {spacing} needs 1 ≤ 4L ≤ N = {}",
            params.n()
        )));
    }
    let sites = [0, spacing, 2 * spacing, 3 * spacing];
    let table = subset_table(&sites, cov, &mut SubsetScratch::default())?;
    let (_, evals) = density_matrix(&table)?;
    Ok(EntropyReport {
        spacing,
        value: entropy_bits(&evals),
        params: *params,
    })
}

/// The four-spin plateau value `π/2` subtracted in the `Γ` transform.
pub const T4_PLATEAU: f64 = FRAC_PI_2;

/// `Γ(λ) = 1/(T_4(λ) - π/2)`. Points within 1e-12 of the pole are dropped
/// and their λ values returned.
pub fn gamma_transform(t4: &Curve) -> Result<(Curve, Vec<f64>)> {
    let mut dropped = Vec::new();
    let mut pts = Vec::with_capacity(t4.len());
    for &(l, v) in t4.points() {
        let d = v - T4_PLATEAU;
        if d.abs() < 1e-12 {
            dropped.push(l);
        } else {
            pts.push((l, 1.0 / d));
        }
    }
    Ok((Curve::new(t4.n, t4.gamma, "gamma", pts)?, dropped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ed::subsets;

    #[test]
    fn single_site_and_pair_weights() {
        let c = enumerate_subset_classes(6, 1);
        assert_eq!(c.len(), 1);
        assert_eq!((c[0].orbit_weight, c[0].tuple_weight), (6, 6));
        let total: u64 = enumerate_subset_classes(6, 2).iter().map(|c| c.tuple_weight).sum();
        assert_eq!(total, 36);
        assert_eq!(tuple_count(6, 2), 36);
    }

    #[test]
    fn class_counts_match_brute_force() {
        for n in [5, 8, 9, 12] {
            let classes = enumerate_subset_classes(n, 4);
            for size in 1..=4 {
                let mut brute: BTreeSet<Vec<usize>> = BTreeSet::new();
                let mut orbit_total = 0;
                for s in subsets(n, size) {
                    let c = SubsetClass::of_sites(&s, n);
                    brute.insert(c.gaps);
                    orbit_total += 1;
                }
                let ours: Vec<&SubsetClass> = classes.iter().filter(|c| c.size == size).collect();
                assert_eq!(ours.len(), brute.len(), "n={n} size={size}");
                let w: u64 = ours.iter().map(|c| c.orbit_weight).sum();
                assert_eq!(w, orbit_total);
            }
            let tw: u64 = classes.iter().map(|c| c.tuple_weight).sum();
            assert_eq!(tw, tuple_count(n, 4));
        }
    }

    #[test]
    fn representative_is_in_class_with_minimal_extent() {
        for c in enumerate_subset_classes(11, 4) {
            let rep = c.representative();
            assert_eq!(rep[0], 0);
            assert_eq!(SubsetClass::of_sites(&rep, 11).gaps, c.gaps);
            assert_eq!(rep[rep.len() - 1], c.extent());
        }
    }

    #[test]
    fn canonical_form_is_idempotent() {
        let g = canonical_gaps(&[3, 1, 4, 2]);
        assert_eq!(canonical_gaps(&g), g);
        assert_eq!(g, vec![1, 3, 2, 4]);
    }

    #[test]
    fn ghz_tangles_are_one() {
        let p = ModelParams::new(10, 1.0, 0.0).unwrap();
        let table = PurityTable::compute(&p, 4, None).unwrap();
        for r in &table.records {
            assert!((r.purity - 0.5).abs() < 1e-12);
        }
        for k in 1..=4 {
            assert!((table.tangle(k).value - 1.0).abs() < 1e-12);
        }
        let s = entropy_spaced(2, &p).unwrap();
        assert!((s.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn polarized_tangles_vanish() {
        let p = ModelParams::new(9, 1.0, 1e6).unwrap();
        for k in 1..=4 {
            assert!(tangle(k, &p).unwrap().value.abs() < 1e-9);
        }
    }

    #[test]
    fn extent_cap_drops_classes() {
        let p = ModelParams::new(12, 1.0, 0.7).unwrap();
        let full = PurityTable::compute(&p, 3, None).unwrap();
        let capped = PurityTable::compute(&p, 3, Some(3)).unwrap();
        assert!(capped.records.len() < full.records.len());
        assert!(capped.records.iter().all(|r| r.class.extent() <= 3));
    }

    #[test]
    fn gamma_transform_arithmetic() {
        let c = Curve::new(
            8,
            1.0,
            "t4",
            vec![(0.1, FRAC_PI_2 - 1.0), (0.2, FRAC_PI_2 - 0.5), (0.3, FRAC_PI_2)],
        )
        .unwrap();
        let (g, dropped) = gamma_transform(&c).unwrap();
        assert_eq!(dropped, vec![0.3]);
        let v: Vec<f64> = g.values().collect();
        assert!((v[0] + 1.0).abs() < 1e-15 && (v[1] + 2.0).abs() < 1e-15);
    }

    #[test]
    fn entropy_spacing_guard() {
        let p = ModelParams::new(8, 1.0, 0.5).unwrap();
        assert!(entropy_spaced(3, &p).is_err());
        assert!(entropy_spaced(0, &p).is_err());
        assert!(entropy_spaced(2, &p).is_ok());
    }
}
