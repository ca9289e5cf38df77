//! Pfaffians of real antisymmetric matrices.

use crate::error::{Error, Result};

/// A dense real antisymmetric matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SkewMatrix {
    /// Builds the matrix from its strict upper triangle; the lower triangle
    /// is the exact negation.
    pub fn from_upper(dim: usize, mut upper: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in i + 1..dim {
                let v = upper(i, j);
                data[i * dim + j] = v;
                data[j * dim + i] = -v;
            }
        }
        Self { dim, data }
    }

    /// Wraps a row-major buffer, checking exact antisymmetry.
    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::InvalidParams(format!(
                "buffer of length {} is not {dim}×{dim}",
                data.len()
            )));
        }
        for i in 0..dim {
            for j in i..dim {
                if data[i * dim + j] != -data[j * dim + i] {
                    return Err(Error::InvalidParams(format!(
                        "entries ({i},{j}) and ({j},{i}) are not exact negations"
                    )));
                }
            }
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Exchanges rows and columns `a` and `b`.
    pub fn swap(&mut self, a: usize, b: usize) {
        swap_rows_cols(&mut self.data, self.dim, a, b);
    }
}

fn swap_rows_cols(m: &mut [f64], d: usize, a: usize, b: usize) {
    if a == b {
        return;
    }
    for c in 0..d {
        m.swap(a * d + c, b * d + c);
    }
    for r in 0..d {
        m.swap(r * d + a, r * d + b);
    }
}

/// Pfaffian by skew-symmetric Gaussian elimination with partial pivoting
/// (Parlett–Reid). Odd dimensions give 0, the empty matrix gives 1.
pub fn pfaffian(m: &SkewMatrix) -> f64 {
    let mut buf = m.data.clone();
    pfaffian_in_place(&mut buf, m.dim)
}

/// Same as [`pfaffian`] on a row-major scratch buffer that is overwritten.
pub fn pfaffian_in_place(a: &mut [f64], d: usize) -> f64 {
    debug_assert_eq!(a.len(), d * d);
    if d % 2 == 1 {
        return 0.0;
    }
    let mut pf = 1.0;
    let mut k = 0;
    while k + 1 < d {
        let mut kp = k + 1;
        let mut best = a[(k + 1) * d + k].abs();
        for r in k + 2..d {
            let v = a[r * d + k].abs();
            if v > best {
                best = v;
                kp = r;
            }
        }
        if kp != k + 1 {
            swap_rows_cols(a, d, k + 1, kp);
            pf = -pf;
        }
        let pivot = a[k * d + k + 1];
        if pivot == 0.0 {
            return 0.0;
        }
        pf *= pivot;
        if k + 2 < d {
            // A[r][c] += tau[r] A[c][k+1] - A[r][k+1] tau[c], tau = A[k][·] / pivot
            let inv = 1.0 / pivot;
            for r in k + 2..d {
                let tau_r = a[k * d + r] * inv;
                let col_r = a[r * d + k + 1];
                for c in r + 1..d {
                    let tau_c = a[k * d + c] * inv;
                    let col_c = a[c * d + k + 1];
                    let v = a[r * d + c] + tau_r * col_c - col_r * tau_c;
                    a[r * d + c] = v;
                    a[c * d + r] = -v;
                }
            }
        }
        k += 2;
    }
    pf
}

/// Result of eliminating a leading block of indices from a skew matrix.
#[derive(Debug, Clone)]
pub(crate) struct PartialElimination {
    /// Product of the signed pivots consumed so far.
    pub factor: f64,
    /// Surviving positions (in original order): leftover eliminable indices
    /// first, then all passengers.
    pub active: Vec<usize>,
    /// How many of `active` are leftover eliminable indices.
    pub leftover: usize,
}

/// Pivots are rejected if smaller than this fraction of the largest
/// passenger entry in the pivot column.
const PASSENGER_THRESHOLD: f64 = 0.1;

/// Eliminates indices `0..n_elim` of the row-major skew matrix `a` in pairs,
/// treating `n_elim..d` as passengers that are never pivoted on.
///
/// Afterwards, for any subset `V'` of passengers,
/// `Pf(a[U ∪ V']) = factor · Pf(schur[leftover ∪ V'])`, where the Schur
/// complement is read from `a` at the `active` positions. Pairs whose pivot
/// would amplify passenger rows too strongly are left in place.
pub(crate) fn eliminate_leading(a: &mut [f64], d: usize, n_elim: usize) -> PartialElimination {
    let mut active: Vec<usize> = (0..d).collect();
    let mut n_u = n_elim;
    let mut factor = 1.0;

    while n_u >= 2 {
        let pivot_pair = (0..n_u).find_map(|ia| {
            let ra = active[ia];
            let mut ib = usize::MAX;
            let mut best = 0.0;
            for (pos, &rb) in active[..n_u].iter().enumerate() {
                let v = a[ra * d + rb].abs();
                if pos != ia && v > best {
                    best = v;
                    ib = pos;
                }
            }
            if ib == usize::MAX || best == 0.0 {
                return None;
            }
            let passenger_max = active[n_u..].iter().map(|&rv| a[ra * d + rv].abs()).fold(0.0, f64::max);
            (best >= PASSENGER_THRESHOLD * passenger_max).then_some((ia, ib))
        });
        let Some((ia, ib)) = pivot_pair else {
            break;
        };

        let (p0, p1) = if ia < ib { (ia, ib) } else { (ib, ia) };
        let (r0, r1) = (active[p0], active[p1]);
        let pivot = a[r0 * d + r1];
        if (p0 + p1 - 1) % 2 == 1 {
            factor = -factor;
        }
        factor *= pivot;
        active.remove(p1);
        active.remove(p0);
        n_u -= 2;

        // S_ij = K_ij + (K_i0 K_1j - K_i1 K_0j) / K_01
        let inv = 1.0 / pivot;
        for (x, &ri) in active.iter().enumerate() {
            let ki0 = a[ri * d + r0] * inv;
            let ki1 = a[ri * d + r1] * inv;
            for &rj in &active[x + 1..] {
                let v = a[ri * d + rj] + ki0 * a[r1 * d + rj] - ki1 * a[r0 * d + rj];
                a[ri * d + rj] = v;
                a[rj * d + ri] = -v;
            }
        }
    }

    PartialElimination {
        factor,
        active,
        leftover: n_u,
    }
}
