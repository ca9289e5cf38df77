//! Dense exact diagonalization of small rings (N ≤ 12).
//!
//! Everything here works in the computational basis with bit `j` of a basis
//! index describing site `j` (0 = spin up, 1 = spin down). Nothing in this
//! module touches the fermionic machinery, so it serves as an independent
//! oracle for the free-fermion pipeline.

use faer::{Mat, Side};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{ModelParams, SECTOR_TIE_PER_SITE};
use crate::pauli::{Axis, PauliString};

/// Largest chain handled by the dense oracle.
pub const MAX_ED_SITES: usize = 12;

/// Dense real-symmetric Hamiltonian.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    pub n_sites: usize,
    pub matrix: Mat<f64>,
}

impl Hamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Builds the `2^N × 2^N` Hamiltonian of the ring, including the bond
/// `N-1 → 0`.
pub fn build_hamiltonian(params: &ModelParams) -> Result<Hamiltonian> {
    let n = params.n();
    if n > MAX_ED_SITES {
        return Err(Error::SizeGuard(n));
    }
    let dim = 1usize << n;
    let cxx = (1.0 + params.gamma()) / 2.0;
    let cyy = (1.0 - params.gamma()) / 2.0;
    let lambda = params.lambda();
    let mut h = Mat::<f64>::zeros(dim, dim);
    for b in 0..dim {
        let up = n - (b.count_ones() as usize);
        h[(b, b)] = -lambda * (2.0 * up as f64 - n as f64);
        for j in 0..n {
            let k = (j + 1) % n;
            let flipped = b ^ (1 << j) ^ (1 << k);
            // σʸσʸ gives -1 on equal bits and +1 on opposite bits.
            let same = ((b >> j) & 1) == ((b >> k) & 1);
            let yy = if same { -1.0 } else { 1.0 };
            h[(flipped, b)] += -(cxx + cyy * yy);
        }
    }
    Ok(Hamiltonian { n_sites: n, matrix: h })
}

/// Largest entry of `[H, Πσᶻ]`.
pub fn parity_commutator_norm(h: &Hamiltonian) -> f64 {
    let dim = h.dim();
    let parity = |b: usize| if b.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
    let mut worst: f64 = 0.0;
    for r in 0..dim {
        for c in 0..dim {
            let v = h.matrix[(r, c)] * (parity(c) - parity(r));
            worst = worst.max(v.abs());
        }
    }
    worst
}

/// A normalized pure state on `n_sites ≤ 12` spins.
#[derive(Debug, Clone)]
pub struct DenseState {
    pub n_sites: usize,
    pub amplitudes: Vec<C64>,
}

impl DenseState {
    pub fn new(n_sites: usize, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != 1 << n_sites {
            return Err(Error::InvalidParams("amplitude vector has wrong length".into()));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!("state norm {norm} ≠ 1")));
        }
        Ok(Self { n_sites, amplitudes })
    }

    /// Tensor product of single-site states `(⟨↑|φ⟩, ⟨↓|φ⟩)`, each normalized.
    pub fn product(spinors: &[[C64; 2]]) -> Result<Self> {
        let n = spinors.len();
        if n > MAX_ED_SITES {
            return Err(Error::SizeGuard(n));
        }
        let amps = (0..1usize << n)
            .map(|b| {
                spinors
                    .iter()
                    .enumerate()
                    .fold(C64::new(1.0, 0.0), |acc, (j, s)| acc * s[(b >> j) & 1])
            })
            .collect();
        Self::new(n, amps)
    }

    fn inner(&self, other: &[C64]) -> C64 {
        self.amplitudes.iter().zip(other).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Ground state with its energy and spin parity.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub state: DenseState,
    pub energy: f64,
    pub even_parity: bool,
}

/// Lowest eigenvector. The Hamiltonian is block-diagonal in `Πσᶻ`, so each
/// parity block is diagonalized separately; when the two block minima agree
/// within the sector tie tolerance the even block wins.
pub fn ground_state(h: &Hamiltonian) -> Result<GroundState> {
    let n = h.n_sites;
    let dim = h.dim();
    let mut best: Vec<(f64, Vec<C64>, bool)> = Vec::with_capacity(2);
    for even in [true, false] {
        let basis: Vec<usize> = (0..dim).filter(|b| (b.count_ones() % 2 == 0) == even).collect();
        let block = Mat::<f64>::from_fn(basis.len(), basis.len(), |r, c| h.matrix[(basis[r], basis[c])]);
        let eig = block
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::numerical(format!("dense eigensolver failed: {e:?}")))?;
        let energy = eig.S()[0];
        let u = eig.U();
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        for (r, &b) in basis.iter().enumerate() {
            amps[b] = C64::new(u[(r, 0)], 0.0);
        }
        best.push((energy, amps, even));
    }
    let tol = SECTOR_TIE_PER_SITE * n as f64;
    let pick = if best[1].0 < best[0].0 - tol { 1 } else { 0 };
    let (energy, mut amps, even_parity) = best.swap_remove(pick);
    // Fix the global sign so the largest amplitude is positive.
    let lead = amps
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(C64::new(1.0, 0.0));
    let phase = lead.conj() / lead.norm();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a = *a * phase / norm;
    }
    Ok(GroundState {
        state: DenseState::new(n, amps)?,
        energy,
        even_parity,
    })
}

/// Convenience: Hamiltonian and ground state in one call.
pub fn solve(params: &ModelParams) -> Result<GroundState> {
    ground_state(&build_hamiltonian(params)?)
}

/// Applies a Pauli string to a basis index: returns `(new index, phase)`.
fn apply_pauli(p: &PauliString, b: usize) -> (usize, C64) {
    let mut out = b;
    let mut phase = C64::new(1.0, 0.0);
    for &(s, axis) in p.factors() {
        let bit = (b >> s) & 1;
        match axis {
            Axis::X => out ^= 1 << s,
            Axis::Y => {
                out ^= 1 << s;
                phase *= if bit == 0 {
                    C64::new(0.0, 1.0)
                } else {
                    C64::new(0.0, -1.0)
                };
            }
            Axis::Z => {
                if bit == 1 {
                    phase = -phase;
                }
            }
        }
    }
    (out, phase)
}

/// `⟨Ψ|P|Ψ⟩`.
pub fn expectation_ed(state: &DenseState, p: &PauliString) -> Result<f64> {
    if p.max_site().is_some_and(|s| s >= state.n_sites) {
        return Err(Error::InvalidParams(format!("{p} outside the chain")));
    }
    let psi = &state.amplitudes;
    let mut acc = C64::new(0.0, 0.0);
    for (b, &amp) in psi.iter().enumerate() {
        if amp == C64::new(0.0, 0.0) {
            continue;
        }
        let (b2, ph) = apply_pauli(p, b);
        acc += psi[b2].conj() * ph * amp;
    }
    if acc.im.abs() > 1e-10 {
        return Err(Error::numerical(format!("⟨{p}⟩ has imaginary part {}", acc.im)));
    }
    Ok(acc.re)
}

/// Reduced density matrix; row/column bit `i` refers to `sites[i]`.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub dim: usize,
    pub entries: Vec<C64>,
}

impl DensityMatrix {
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.entries[r * self.dim + c]
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Builds `ρ = 2^{-k} Σ_P ⟨P⟩ P` from the Pauli expectations of all `4^k`
    /// strings on `k` sites; `values[Σ letter_i 4^i]` as in
    /// [`crate::engine::SubsetTable`].
    pub fn from_pauli_expectations(k: usize, values: &[f64]) -> Self {
        let dim = 1 << k;
        let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
        let scale = 1.0 / dim as f64;
        for (code, &v) in values.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let letters = crate::engine::decode(code, k);
            for col in 0..dim {
                // P|col⟩ = phase |row⟩
                let mut row = col;
                let mut phase = C64::new(1.0, 0.0);
                for (i, &l) in letters.iter().enumerate() {
                    let bit = (col >> i) & 1;
                    match l {
                        1 => row ^= 1 << i,
                        2 => {
                            row ^= 1 << i;
                            phase *= if bit == 0 {
                                C64::new(0.0, 1.0)
                            } else {
                                C64::new(0.0, -1.0)
                            };
                        }
                        3 if bit == 1 => phase = -phase,
                        _ => {}
                    }
                }
                entries[row * dim + col] += phase * v * scale;
            }
        }
        Self { dim, entries }
    }
}

pub fn reduced_density_matrix(state: &DenseState, sites: &[usize]) -> Result<DensityMatrix> {
    let n = state.n_sites;
    if sites.iter().any(|&s| s >= n) {
        return Err(Error::InvalidParams("site outside the chain".into()));
    }
    let k = sites.len();
    let dim = 1usize << k;
    let mask: usize = sites.iter().map(|&s| 1 << s).sum();
    let embed = |a: usize| -> usize { sites.iter().enumerate().map(|(i, &s)| ((a >> i) & 1) << s).sum() };
    let offsets: Vec<usize> = (0..dim).map(embed).collect();
    let psi = &state.amplitudes;
    let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
    for rest in 0..(1usize << n) {
        if rest & mask != 0 {
            continue;
        }
        for a in 0..dim {
            let pa = psi[rest | offsets[a]];
            if pa == C64::new(0.0, 0.0) {
                continue;
            }
            for b in 0..dim {
                entries[a * dim + b] += pa * psi[rest | offsets[b]].conj();
            }
        }
    }
    Ok(DensityMatrix { dim, entries })
}

/// Eigenvalues of a density matrix.
pub fn spectrum(rho: &DensityMatrix) -> Result<Vec<f64>> {
    let m = Mat::<C64>::from_fn(rho.dim, rho.dim, |r, c| rho.get(r, c));
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::numerical(format!("eigensolver failed: {e:?}")))
}

/// Von Neumann entropy in bits and purity `Tr ρ²`. Negative eigenvalues are
/// clipped to zero before taking logarithms.
pub fn entropy_and_purity(rho: &DensityMatrix) -> Result<(f64, f64)> {
    let evals = spectrum(rho)?;
    let entropy = entropy_bits(&evals);
    let purity = rho.entries.iter().map(|z| z.norm_sqr()).sum();
    Ok((entropy, purity))
}

pub(crate) fn entropy_bits(evals: &[f64]) -> f64 {
    evals
        .iter()
        .map(|&p| if p > 0.0 { -p * p.log2() } else { 0.0 })
        .sum::<f64>()
        .max(0.0)
}

/// `σ⁺_n σ⁻_m |ψ⟩` summed with phases `e^{iθ(n-m)}`, `θ = 2πq/N`, and
/// divided by `N`: the state `n̂_q |ψ⟩`.
fn apply_nq(state: &DenseState, q: usize) -> Vec<C64> {
    let n = state.n_sites;
    let theta = 2.0 * std::f64::consts::PI * q as f64 / n as f64;
    let phases: Vec<C64> = (0..n).map(|j| C64::from_polar(1.0, theta * j as f64)).collect();
    let mut out = vec![C64::new(0.0, 0.0); state.amplitudes.len()];
    for (b, &amp) in state.amplitudes.iter().enumerate() {
        if amp == C64::new(0.0, 0.0) {
            continue;
        }
        // σ⁻_m: up (0) → down (1); σ⁺_n: down (1) → up (0).
        for m in 0..n {
            if (b >> m) & 1 == 1 {
                continue;
            }
            let b1 = b | (1 << m);
            for nn in 0..n {
                if (b1 >> nn) & 1 == 0 {
                    continue;
                }
                let b2 = b1 & !(1 << nn);
                out[b2] += phases[nn] * phases[m].conj() * amp;
            }
        }
    }
    let inv = 1.0 / n as f64;
    for v in &mut out {
        *v *= inv;
    }
    out
}

/// Quasimomentum distribution `n(q)` for all `q`.
pub fn quasimomentum_ed(state: &DenseState) -> Vec<f64> {
    (0..state.n_sites)
        .map(|q| state.inner(&apply_nq(state, q)).re)
        .collect()
}

/// `⟨n̂_{q1} n̂_{q2}⟩ - ⟨n̂_{q1}⟩⟨n̂_{q2}⟩` by brute force.
pub fn noise_correlation_ed(state: &DenseState, q1: usize, q2: usize) -> f64 {
    let phi1 = apply_nq(state, q1);
    let phi2 = apply_nq(state, q2);
    let n1 = state.inner(&phi1).re;
    let n2 = state.inner(&phi2).re;
    let both: C64 = phi1.iter().zip(&phi2).map(|(a, b)| a.conj() * b).sum();
    both.re - n1 * n2
}

/// `⟨a†_n a_m⟩` by brute force.
pub fn hcb_two_point_ed(state: &DenseState, n: usize, m: usize) -> f64 {
    let ops = [(n, true), (m, false)];
    hcb_string_ed(state, &ops).re
}

/// `⟨a†_n a_m a†_k a_l⟩` by brute force.
pub fn hcb_four_point_ed(state: &DenseState, n: usize, m: usize, k: usize, l: usize) -> C64 {
    hcb_string_ed(state, &[(n, true), (m, false), (k, true), (l, false)])
}

/// `⟨ψ| O_1 O_2 ⋯ |ψ⟩` for ladder operators (`true` = raising).
fn hcb_string_ed(state: &DenseState, ops: &[(usize, bool)]) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    'basis: for (b, &amp) in state.amplitudes.iter().enumerate() {
        if amp == C64::new(0.0, 0.0) {
            continue;
        }
        let mut cur = b;
        for &(site, raising) in ops.iter().rev() {
            let bit = (cur >> site) & 1;
            if raising {
                if bit == 0 {
                    continue 'basis;
                }
                cur &= !(1 << site);
            } else {
                if bit == 1 {
                    continue 'basis;
                }
                cur |= 1 << site;
            }
        }
        acc += state.amplitudes[cur].conj() * amp;
    }
    acc
}

/// Generalized tangle `T_k` of a dense state by direct enumeration of every
/// site subset of size `1..=k` (no symmetry reduction).
pub fn tangle_ed(state: &DenseState, k: usize) -> Result<f64> {
    let n = state.n_sites;
    let mut weighted = 0.0;
    let mut d_k = 0.0;
    let mut fact = 1.0;
    for size in 1..=k {
        fact *= size as f64;
        for subset in subsets(n, size) {
            let rho = reduced_density_matrix(state, &subset)?;
            let purity: f64 = rho.entries.iter().map(|z| z.norm_sqr()).sum();
            weighted += fact * purity;
            d_k += fact;
        }
    }
    Ok(2.0 - 2.0 * weighted / d_k)
}

/// All `size`-element subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(size);
    fn rec(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for s in start..n {
            cur.push(s);
            rec(s + 1, n, size, cur, out);
            cur.pop();
        }
    }
    rec(0, n, size, &mut cur, &mut out);
    out
}

/// Entropy (bits) of the spins `{0, L, 2L, 3L}`.
pub fn entropy_spaced_ed(state: &DenseState, spacing: usize) -> Result<f64> {
    let sites = [0, spacing, 2 * spacing, 3 * spacing];
    let rho = reduced_density_matrix(state, &sites)?;
    Ok(entropy_and_purity(&rho)?.0)
}

/// `n(0)` and `Δ(0,0)` of a product state on any number of sites.
///
/// For a product state, `⟨S⁺S⁻S⁺S⁻⟩` factorizes over sites once the four
/// ladder operators are assigned to sites; the sum over assignments runs as
/// a dynamic program over which operator positions are already placed.
pub fn product_state_noise00(spinors: &[[C64; 2]]) -> (f64, f64) {
    let n = spinors.len() as f64;
    let two = ladder_moment(spinors, &[true, false]);
    let four = ladder_moment(spinors, &[true, false, true, false]);
    let n0 = two.re / n;
    let delta = four.re / (n * n) - n0 * n0;
    (n0, delta)
}

/// `⟨Π_positions S^{±}⟩` for a product state.
fn ladder_moment(spinors: &[[C64; 2]], word: &[bool]) -> C64 {
    let w = word.len();
    let full = (1usize << w) - 1;
    let mut dp = vec![C64::new(0.0, 0.0); 1 << w];
    dp[0] = C64::new(1.0, 0.0);
    for phi in spinors {
        // Site weight of each non-empty subset of positions.
        let weights: Vec<C64> = (0..=full).map(|sub| site_word_expectation(phi, word, sub)).collect();
        let mut next = dp.clone();
        for done in 0..=full {
            if dp[done] == C64::new(0.0, 0.0) {
                continue;
            }
            let free = full & !done;
            let mut sub = free;
            while sub > 0 {
                next[done | sub] += dp[done] * weights[sub];
                sub = (sub - 1) & free;
            }
        }
        dp = next;
    }
    dp[full]
}

/// `⟨φ| O_{p1} O_{p2} ⋯ |φ⟩` for the positions selected in `sub`, in order.
fn site_word_expectation(phi: &[C64; 2], word: &[bool], sub: usize) -> C64 {
    // Matrices in the (up, down) basis: σ⁺ = |↑⟩⟨↓|, σ⁻ = |↓⟩⟨↑|.
    let mut m = [
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
    ];
    for (pos, &raising) in word.iter().enumerate() {
        if sub >> pos & 1 == 0 {
            continue;
        }
        let op = if raising {
            [
                [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
                [C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
            ]
        } else {
            [
                [C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
                [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            ]
        };
        let mut r = [[C64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                r[i][j] = m[i][0] * op[0][j] + m[i][1] * op[1][j];
            }
        }
        m = r;
    }
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            acc += phi[i].conj() * m[i][j] * phi[j];
        }
    }
    acc
}

/// Spinor of a Bloch-sphere direction.
pub fn bloch_spinor(theta: f64, phi: f64) -> [C64; 2] {
    [
        C64::new((theta / 2.0).cos(), 0.0),
        C64::from_polar((theta / 2.0).sin(), phi),
    ]
}
