//! Dense complex matrices, site-local operator application on qubit-like
//! tensor spaces, and a pivoted LU determinant.
//!
//! Tensor spaces are products of two-dimensional factors `0..n`. Space 0 is
//! the slowest-varying index; within each factor, spin up is index 0.

use std::ops::{Add, Index, IndexMut, Mul};

use crate::error::Result;
use crate::numeric::{ScaledComplex, C64};

/// 4×4 block acting on a pair of two-dimensional spaces; index `2*a + b`
/// where `a` is the first space and `b` the second.
pub type Mat4 = [[C64; 4]; 4];

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Dense square complex matrix, row-major. Row is the outgoing index,
/// column the incoming one.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        CMatrix {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                m.data[r * dim + c] = f(r, c);
            }
        }
        m
    }

    pub fn diag(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    pub fn from_mat4(b: &Mat4) -> Self {
        Self::from_fn(4, |r, c| b[r][c])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        CMatrix {
            dim: self.dim,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, other.dim);
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, other.dim);
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let (p, q) = (self.dim, other.dim);
        CMatrix::from_fn(p * q, |r, c| self[(r / q, c / q)] * other[(r % q, c % q)])
    }

    /// The `size`×`size` sub-block starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, size: usize) -> CMatrix {
        CMatrix::from_fn(size, |r, c| self[(r0 + r, c0 + c)])
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.dim + c]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(&rhs.data[k * n..(k + 1) * n]) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

/// Scaled residual `max|L - R| / max(1, max|L|, max|R|)`.
pub fn scaled_residual(lhs: &CMatrix, rhs: &CMatrix) -> f64 {
    let scale = 1f64.max(lhs.max_abs()).max(rhs.max_abs());
    lhs.max_abs_diff(rhs) / scale
}

/// 4×4 swap `P` on two two-dimensional spaces.
pub fn swap4() -> CMatrix {
    CMatrix::from_fn(4, |r, c| {
        let (a, b) = (c >> 1, c & 1);
        if r == 2 * b + a {
            ONE
        } else {
            ZERO
        }
    })
}

/// Bit of `space` in a basis index over `n` spaces (0 = up, 1 = down).
#[inline]
pub fn bit(index: usize, space: usize, n: usize) -> usize {
    (index >> (n - 1 - space)) & 1
}

/// σᶻ eigenvalue of `space` in a basis index: +1 for up, −1 for down.
#[inline]
pub fn spin(index: usize, space: usize, n: usize) -> i32 {
    1 - 2 * bit(index, space, n) as i32
}

/// Total σᶻ of a basis index over all `n` spaces.
pub fn total_spin(index: usize, n: usize) -> i32 {
    (0..n).map(|s| spin(index, s, n)).sum()
}

fn pair_columns(base: usize, i: usize, j: usize, n: usize) -> [usize; 4] {
    let mi = 1 << (n - 1 - i);
    let mj = 1 << (n - 1 - j);
    [base, base | mj, base | mi, base | mi | mj]
}

fn pair_bases(i: usize, j: usize, n: usize) -> impl Iterator<Item = usize> {
    let mask = (1usize << (n - 1 - i)) | (1usize << (n - 1 - j));
    (0..1usize << n).filter(move |x| x & mask == 0)
}

/// `m ← m · F`, where `F` acts on the ordered pair of spaces `(i, j)` with
/// the block returned by `block(base)`; `base` is the basis index with the
/// bits of `i` and `j` cleared, so spectator spins can be read from it.
pub fn mul_local_right(
    m: &mut CMatrix,
    n: usize,
    i: usize,
    j: usize,
    mut block: impl FnMut(usize) -> Result<Mat4>,
) -> Result<()> {
    assert_eq!(m.dim, 1 << n);
    assert!(i != j && i < n && j < n);
    let dim = m.dim;
    for base in pair_bases(i, j, n) {
        let f = block(base)?;
        let cols = pair_columns(base, i, j, n);
        for r in 0..dim {
            let row = &mut m.data[r * dim..(r + 1) * dim];
            let old = cols.map(|cc| row[cc]);
            for (kp, &cc) in cols.iter().enumerate() {
                row[cc] = (0..4).map(|k| old[k] * f[k][kp]).sum();
            }
        }
    }
    Ok(())
}

/// `m ← F · m` with the same conventions as [`mul_local_right`].
pub fn mul_local_left(
    m: &mut CMatrix,
    n: usize,
    i: usize,
    j: usize,
    mut block: impl FnMut(usize) -> Result<Mat4>,
) -> Result<()> {
    assert_eq!(m.dim, 1 << n);
    assert!(i != j && i < n && j < n);
    let dim = m.dim;
    for base in pair_bases(i, j, n) {
        let f = block(base)?;
        let rows = pair_columns(base, i, j, n);
        for c in 0..dim {
            let old = rows.map(|rr| m.data[rr * dim + c]);
            for (k, &rr) in rows.iter().enumerate() {
                m.data[rr * dim + c] = (0..4).map(|kp| f[k][kp] * old[kp]).sum();
            }
        }
    }
    Ok(())
}

/// `m ← m · (diag(up, down) on space)`.
pub fn mul_diag_right(m: &mut CMatrix, n: usize, space: usize, entries: [C64; 2]) {
    assert_eq!(m.dim, 1 << n);
    let dim = m.dim;
    for r in 0..dim {
        for c in 0..dim {
            m.data[r * dim + c] *= entries[bit(c, space, n)];
        }
    }
}

/// `v ← F v` with the same conventions as [`mul_local_right`].
pub fn apply_local<T: Copy + Add<Output = T> + Mul<Output = T>>(
    v: &mut [T],
    n: usize,
    i: usize,
    j: usize,
    mut block: impl FnMut(usize) -> Result<[[T; 4]; 4]>,
) -> Result<()> {
    assert_eq!(v.len(), 1 << n);
    assert!(i != j && i < n && j < n);
    for base in pair_bases(i, j, n) {
        let f = block(base)?;
        let idx = pair_columns(base, i, j, n);
        let old = idx.map(|r| v[r]);
        for (k, &r) in idx.iter().enumerate() {
            let row = &f[k];
            v[r] = row[0] * old[0] + row[1] * old[1] + row[2] * old[2] + row[3] * old[3];
        }
    }
    Ok(())
}

/// `v ← (diag(up, down) on space) v`.
pub fn apply_diag<T: Copy + Mul<Output = T>>(v: &mut [T], n: usize, space: usize, entries: [T; 2]) {
    assert_eq!(v.len(), 1 << n);
    for (r, x) in v.iter_mut().enumerate() {
        *x = entries[bit(r, space, n)] * *x;
    }
}

/// Dense form of a two-space operator with spectator-dependent block.
pub fn local_operator(
    n: usize,
    i: usize,
    j: usize,
    block: impl FnMut(usize) -> Result<Mat4>,
) -> Result<CMatrix> {
    let mut m = CMatrix::identity(1 << n);
    mul_local_right(&mut m, n, i, j, block)?;
    Ok(m)
}

/// Outcome of Gaussian elimination with partial pivoting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Determinant {
    /// Determinant as a scaled product of pivots.
    pub scaled: ScaledComplex,
    /// Smallest pivot modulus met during elimination.
    pub min_pivot: f64,
}

impl Determinant {
    pub fn value(&self) -> C64 {
        self.scaled.to_c64()
    }
}

/// Determinant by Gaussian elimination with partial pivoting on the
/// complex modulus.
pub fn determinant(m: &CMatrix) -> Determinant {
    let n = m.dim;
    let mut a = m.data.clone();
    let mut det = ScaledComplex::one();
    let mut min_pivot = f64::INFINITY;
    for k in 0..n {
        let (p, pmod) = (k..n)
            .map(|r| (r, a[r * n + k].norm()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        min_pivot = min_pivot.min(pmod);
        if pmod == 0.0 {
            return Determinant {
                scaled: ScaledComplex::from_c64(ZERO),
                min_pivot: 0.0,
            };
        }
        if p != k {
            for c in 0..n {
                a.swap(k * n + c, p * n + c);
            }
            det.mul(-ONE);
        }
        let pivot = a[k * n + k];
        det.mul(pivot);
        for r in k + 1..n {
            let factor = a[r * n + k] / pivot;
            if factor == ZERO {
                continue;
            }
            for c in k + 1..n {
                let t = a[k * n + c];
                a[r * n + c] -= factor * t;
            }
        }
    }
    Determinant {
        scaled: det,
        min_pivot,
    }
}
