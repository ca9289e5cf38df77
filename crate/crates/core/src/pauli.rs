//! Pauli strings, single-site operator algebra and the Jordan–Wigner map
//! onto Majorana monomials.

use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

/// A product of single-site Pauli matrices with strictly increasing sites.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PauliString {
    factors: Vec<(usize, Axis)>,
}

impl PauliString {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Sorts the factors by site; two factors on one site are rejected.
    pub fn new(mut factors: Vec<(usize, Axis)>) -> Result<Self> {
        factors.sort_by_key(|&(s, _)| s);
        if factors.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidParams("Pauli string has two factors on one site".into()));
        }
        Ok(Self { factors })
    }

    pub fn single(site: usize, axis: Axis) -> Self {
        Self {
            factors: vec![(site, axis)],
        }
    }

    pub fn pair(a: (usize, Axis), b: (usize, Axis)) -> Result<Self> {
        Self::new(vec![a, b])
    }

    pub fn factors(&self) -> &[(usize, Axis)] {
        &self.factors
    }

    pub fn weight(&self) -> usize {
        self.factors.len()
    }

    pub fn max_site(&self) -> Option<usize> {
        self.factors.last().map(|f| f.0)
    }

    /// Translation by `shift` sites on a ring of `n`.
    pub fn shifted(&self, shift: usize, n: usize) -> Self {
        let factors = self.factors.iter().map(|&(s, a)| ((s + shift) % n, a)).collect();
        Self::new(factors).expect("translation keeps sites distinct")
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "I");
        }
        for (i, (s, a)) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{a:?}{s}")?;
        }
        Ok(())
    }
}

/// Phase of a Majorana monomial, `i^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);

    pub fn i_pow(k: u8) -> Self {
        Phase(k % 4)
    }

    pub fn to_complex(self) -> C64 {
        match self.0 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    }

    pub fn is_real(self) -> bool {
        self.0 % 2 == 0
    }

    /// `(re, im)` parts, each in {-1, 0, 1}.
    pub fn parts(self) -> (f64, f64) {
        match self.0 {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;

    fn mul(self, other: Phase) -> Phase {
        Phase((self.0 + other.0) % 4)
    }
}

/// `phase × O_{i1} O_{i2} ⋯` with strictly ascending Majorana slots
/// (`A_j` at `2j`, `B_j` at `2j + 1`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MajoranaMonomial {
    pub phase: Phase,
    pub indices: Vec<usize>,
}

/// Contribution of one site to a monomial: which of `A`, `B` appear and the
/// accompanying power of `i`.
#[inline]
pub(crate) fn site_contribution(letter: Option<Axis>, string_passes: bool) -> (bool, bool, u8) {
    // Local operator times (A B)^c: σˣ = A, σʸ = iB, σᶻ = AB.
    match (letter, string_passes) {
        (None, false) => (false, false, 0),
        (None, true) => (true, true, 0),
        (Some(Axis::X), false) => (true, false, 0),
        (Some(Axis::X), true) => (false, true, 0),
        (Some(Axis::Y), false) => (false, true, 1),
        (Some(Axis::Y), true) => (true, false, 1),
        (Some(Axis::Z), false) => (true, true, 0),
        (Some(Axis::Z), true) => (false, false, 0),
    }
}

/// Jordan–Wigner image of a Pauli string on a chain of `n` sites.
///
/// A site carries the string `A_l B_l` whenever an odd number of `σˣ`/`σʸ`
/// factors sit to its right; adjacent strings cancel because `(A B)² = 1`.
pub fn jordan_wigner_monomial(p: &PauliString, n: usize) -> Result<MajoranaMonomial> {
    if let Some(max) = p.max_site() {
        if max >= n {
            return Err(Error::InvalidParams(format!("site {max} outside chain of {n}")));
        }
    }
    let mut indices = Vec::new();
    let mut i_pow = 0u8;
    // Number of σˣ/σʸ factors strictly to the right of the cursor.
    let mut odd_right = p.factors.iter().filter(|(_, a)| *a != Axis::Z).count();
    let mut cursor = 0;
    for &(site, axis) in &p.factors {
        if axis != Axis::Z {
            odd_right -= 1;
        }
        // Before `site` the count still included this factor.
        let passes_before = (odd_right + usize::from(axis != Axis::Z)) % 2 == 1;
        if passes_before {
            for l in cursor..site {
                indices.push(2 * l);
                indices.push(2 * l + 1);
            }
        }
        let (a, b, ip) = site_contribution(Some(axis), odd_right % 2 == 1);
        if a {
            indices.push(2 * site);
        }
        if b {
            indices.push(2 * site + 1);
        }
        i_pow += ip;
        cursor = site + 1;
    }
    Ok(MajoranaMonomial {
        phase: Phase::i_pow(i_pow),
        indices,
    })
}

/// A single-site operator in the Pauli basis `(I, X, Y, Z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteOp(pub [C64; 4]);

impl SiteOp {
    pub fn identity() -> Self {
        let mut c = [C64::new(0.0, 0.0); 4];
        c[0] = C64::new(1.0, 0.0);
        SiteOp(c)
    }

    /// `σ⁺ = (X + iY) / 2`.
    pub fn raising() -> Self {
        SiteOp([
            C64::new(0.0, 0.0),
            C64::new(0.5, 0.0),
            C64::new(0.0, 0.5),
            C64::new(0.0, 0.0),
        ])
    }

    /// `σ⁻ = (X - iY) / 2`.
    pub fn lowering() -> Self {
        SiteOp([
            C64::new(0.0, 0.0),
            C64::new(0.5, 0.0),
            C64::new(0.0, -0.5),
            C64::new(0.0, 0.0),
        ])
    }

    /// Operator product `self · rhs` on one site.
    pub fn mul(&self, rhs: &SiteOp) -> SiteOp {
        let mut out = [C64::new(0.0, 0.0); 4];
        for (a, &ca) in self.0.iter().enumerate() {
            if ca == C64::new(0.0, 0.0) {
                continue;
            }
            for (b, &cb) in rhs.0.iter().enumerate() {
                if cb == C64::new(0.0, 0.0) {
                    continue;
                }
                let (c, phase) = pauli_product(a, b);
                out[c] += ca * cb * phase;
            }
        }
        SiteOp(out)
    }
}

/// `σ_a σ_b = phase · σ_c` with indices 0..4 for `(I, X, Y, Z)`.
pub(crate) fn pauli_product(a: usize, b: usize) -> (usize, C64) {
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match (a, b) {
        (0, x) | (x, 0) => (x, one),
        (x, y) if x == y => (0, one),
        (1, 2) => (3, i),
        (2, 1) => (3, -i),
        (2, 3) => (1, i),
        (3, 2) => (1, -i),
        (3, 1) => (2, i),
        (1, 3) => (2, -i),
        _ => unreachable!(),
    }
}

pub(crate) fn axis_from_index(i: usize) -> Option<Axis> {
    match i {
        1 => Some(Axis::X),
        2 => Some(Axis::Y),
        3 => Some(Axis::Z),
        _ => None,
    }
}

/// Expands a product of site operators (given in operator order) into a sum
/// of Pauli strings with complex coefficients.
pub fn expand_product(ops: &[(usize, SiteOp)]) -> Vec<(PauliString, C64)> {
    let mut sites: Vec<usize> = ops.iter().map(|&(s, _)| s).collect();
    sites.sort_unstable();
    sites.dedup();
    // Operators on different sites commute, so each site keeps its own order.
    let per_site: Vec<SiteOp> = sites
        .iter()
        .map(|&s| {
            ops.iter()
                .filter(|(t, _)| *t == s)
                .fold(SiteOp::identity(), |acc, (_, op)| acc.mul(op))
        })
        .collect();

    let mut terms = vec![(Vec::new(), C64::new(1.0, 0.0))];
    for (&s, op) in sites.iter().zip(&per_site) {
        let mut next = Vec::with_capacity(terms.len() * 4);
        for (factors, coeff) in &terms {
            for (idx, &c) in op.0.iter().enumerate() {
                if c == C64::new(0.0, 0.0) {
                    continue;
                }
                let mut f: Vec<(usize, Axis)> = factors.clone();
                if let Some(axis) = axis_from_index(idx) {
                    f.push((s, axis));
                }
                next.push((f, coeff * c));
            }
        }
        terms = next;
    }
    terms
        .into_iter()
        .map(|(f, c)| (PauliString { factors: f }, c))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicate_sites() {
        assert!(PauliString::new(vec![(1, Axis::X), (1, Axis::Z)]).is_err());
        let p = PauliString::new(vec![(3, Axis::X), (1, Axis::Z)]).unwrap();
        assert_eq!(p.factors(), &[(1, Axis::Z), (3, Axis::X)]);
        assert_eq!(PauliString::identity().weight(), 0);
    }

    #[test]
    fn sigma_z_is_onsite_pair() {
        let m = jordan_wigner_monomial(&PauliString::single(3, Axis::Z), 6).unwrap();
        assert_eq!(m.indices, vec![6, 7]);
        assert_eq!(m.phase, Phase::ONE);
    }

    #[test]
    fn adjacent_xx_strings_cancel() {
        let p = PauliString::pair((2, Axis::X), (3, Axis::X)).unwrap();
        let m = jordan_wigner_monomial(&p, 6).unwrap();
        assert_eq!(m.indices, vec![5, 6]); // B_2 A_3
    }

    #[test]
    fn distant_xx_has_full_string() {
        let p = PauliString::pair((0, Axis::X), (3, Axis::X)).unwrap();
        let m = jordan_wigner_monomial(&p, 6).unwrap();
        assert_eq!(m.indices, vec![1, 2, 3, 4, 5, 6]); // B_0 A_1 B_1 A_2 B_2 A_3
    }

    #[test]
    fn single_x_is_odd() {
        for site in 0..5 {
            let m = jordan_wigner_monomial(&PauliString::single(site, Axis::X), 5).unwrap();
            assert_eq!(m.indices.len() % 2, 1);
        }
    }

    #[test]
    fn out_of_range_site_rejected() {
        assert!(jordan_wigner_monomial(&PauliString::single(5, Axis::X), 5).is_err());
    }

    #[test]
    fn site_algebra() {
        let x = SiteOp([0.0, 1.0, 0.0, 0.0].map(|v| C64::new(v, 0.0)));
        let y = SiteOp([0.0, 0.0, 1.0, 0.0].map(|v| C64::new(v, 0.0)));
        let xy = x.mul(&y);
        assert_eq!(xy.0[3], C64::new(0.0, 1.0));
        // σ⁺σ⁻ = (1 + σᶻ)/2
        let n = SiteOp::raising().mul(&SiteOp::lowering());
        assert!((n.0[0] - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((n.0[3] - C64::new(0.5, 0.0)).norm() < 1e-15);
        // σ⁺σ⁺ = 0
        let z = SiteOp::raising().mul(&SiteOp::raising());
        assert!(z.0.iter().all(|c| c.norm() < 1e-15));
    }

    #[test]
    fn expansion_of_hopping() {
        let terms = expand_product(&[(0, SiteOp::raising()), (2, SiteOp::lowering())]);
        assert_eq!(terms.len(), 4);
        let xx = terms
            .iter()
            .find(|(p, _)| p.factors() == [(0, Axis::X), (2, Axis::X)])
            .unwrap();
        assert!((xx.1 - C64::new(0.25, 0.0)).norm() < 1e-15);
    }
}
