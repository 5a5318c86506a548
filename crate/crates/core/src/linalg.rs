//! Dense symmetric factorizations for the eddy-current system.
//!
//! The inductance matrix is symmetric positive definite (it is an energy
//! form) and strongly diagonally dominant, so an unpivoted Cholesky
//! factorization is both safe and fast. Matrices are stored as packed
//! lower triangles with contiguous rows; the factorization works on
//! panels with the rank-k trailing update parallelized across rows,
//! which keeps results bit-identical regardless of thread count.
//!
//! The resistive impedance mode adds an imaginary diagonal shift, making
//! the system complex symmetric (not Hermitian); an unpivoted LDL^T
//! handles that case.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Panel width for the blocked factorization.
const BLOCK: usize = 96;

#[inline]
fn row_start(i: usize) -> usize {
    i * (i + 1) / 2
}

/// Symmetric matrix, packed lower triangle, row-contiguous.
#[derive(Debug, Clone)]
pub(crate) struct PackedSym {
    pub n: usize,
    pub data: Vec<f64>,
}

impl PackedSym {
    pub fn zeroed(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * (n + 1) / 2],
        }
    }

    #[inline]
    pub fn idx(i: usize, j: usize) -> usize {
        debug_assert!(j <= i);
        row_start(i) + j
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j <= i {
            self.data[Self::idx(i, j)]
        } else {
            self.data[Self::idx(j, i)]
        }
    }

    #[cfg(test)]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if j <= i { (i, j) } else { (j, i) };
        self.data[Self::idx(r, c)] = v;
    }

    /// y = A x for the full symmetric matrix.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        y.fill(0.0);
        for i in 0..self.n {
            let row = &self.data[row_start(i)..row_start(i) + i + 1];
            let mut acc = 0.0;
            for (j, &a) in row.iter().enumerate() {
                acc += a * x[j];
                if j < i {
                    y[j] += a * x[i];
                }
            }
            y[i] += acc;
        }
    }

    /// Quadratic form x^T A x.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        x.iter().zip(&y).map(|(a, b)| a * b).sum()
    }

    /// Cholesky factorization A = L L^T. Fails with the offending pivot
    /// index if the matrix is not positive definite.
    pub fn cholesky(&self) -> Result<CholeskyFactor> {
        let n = self.n;
        let mut a = self.data.clone();

        let mut k0 = 0;
        while k0 < n {
            let k1 = (k0 + BLOCK).min(n);
            factor_diagonal_block(&mut a, k0, k1)?;

            if k1 < n {
                // Split at the row boundary: rows [0, k1) hold the panel
                // pivots (read only), rows [k1, n) are updated.
                let split = row_start(k1);
                let (head, tail) = a.split_at_mut(split);
                let mut rows: Vec<&mut [f64]> = Vec::with_capacity(n - k1);
                let mut rest = tail;
                for i in k1..n {
                    let (row, r) = rest.split_at_mut(i + 1);
                    rows.push(row);
                    rest = r;
                }

                let nb = k1 - k0;
                // Phase 1: triangular solve of the panel columns against
                // the diagonal block, gathering the finished panel into a
                // dense scratch for the trailing update.
                let mut panel = vec![0.0; (n - k1) * nb];
                rows.par_iter_mut()
                    .zip(panel.par_chunks_mut(nb))
                    .for_each(|(row, pan)| {
                        for j in k0..k1 {
                            let pivot_row = &head[row_start(j)..row_start(j) + j + 1];
                            let mut s = row[j];
                            for p in k0..j {
                                s -= row[p] * pivot_row[p];
                            }
                            row[j] = s / pivot_row[j];
                        }
                        pan.copy_from_slice(&row[k0..k1]);
                    });

                // Phase 2: trailing update A22 -= P P^T, row-parallel.
                let panel_ref = &panel;
                rows.par_iter_mut().enumerate().for_each(|(di, row)| {
                    let pi = &panel_ref[di * nb..(di + 1) * nb];
                    for j in k1..k1 + di + 1 {
                        let pj = &panel_ref[(j - k1) * nb..(j - k1 + 1) * nb];
                        let mut s = 0.0;
                        for p in 0..nb {
                            s += pi[p] * pj[p];
                        }
                        row[j] -= s;
                    }
                });
            }
            k0 = k1;
        }

        Ok(CholeskyFactor { n, data: a })
    }
}

/// Unblocked factorization of the diagonal block [k0, k1).
fn factor_diagonal_block(a: &mut [f64], k0: usize, k1: usize) -> Result<()> {
    for j in k0..k1 {
        let js = row_start(j);
        let mut d = a[js + j];
        for p in k0..j {
            d -= a[js + p] * a[js + p];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::SingularSystem { pivot: j, value: d });
        }
        let dj = d.sqrt();
        a[js + j] = dj;
        for i in j + 1..k1 {
            let is = row_start(i);
            let mut s = a[is + j];
            for p in k0..j {
                s -= a[is + p] * a[js + p];
            }
            a[is + j] = s / dj;
        }
    }
    Ok(())
}

/// Lower-triangular Cholesky factor, packed rows.
#[derive(Debug, Clone)]
pub(crate) struct CholeskyFactor {
    n: usize,
    data: Vec<f64>,
}

impl CholeskyFactor {
    /// Solve A x = b in place (forward then transposed back substitution).
    #[allow(clippy::needless_range_loop)] // prefix reads of b while writing b[i]
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let a = &self.data;
        for i in 0..self.n {
            let is = row_start(i);
            let mut s = b[i];
            for j in 0..i {
                s -= a[is + j] * b[j];
            }
            b[i] = s / a[is + i];
        }
        for j in (0..self.n).rev() {
            let js = row_start(j);
            let xj = b[j] / a[js + j];
            b[j] = xj;
            for p in 0..j {
                b[p] -= a[js + p] * xj;
            }
        }
    }
}

/// Unpivoted LDL^T factorization of a complex symmetric matrix given as
/// a real symmetric part plus a uniform imaginary diagonal shift.
#[derive(Debug, Clone)]
pub(crate) struct ComplexLdlt {
    n: usize,
    /// Unit lower triangle (diagonal implicitly one), packed rows.
    lower: Vec<Complex64>,
    diag: Vec<Complex64>,
}

impl ComplexLdlt {
    pub fn factor(real: &PackedSym, imag_shift: f64) -> Result<Self> {
        let n = real.n;
        let mut lower = vec![Complex64::new(0.0, 0.0); n * n.saturating_sub(1) / 2];
        let mut diag = vec![Complex64::new(0.0, 0.0); n];

        for j in 0..n {
            let mut d = Complex64::new(real.get(j, j), imag_shift);
            for p in 0..j {
                let ljp = lower[Self::lidx(j, p)];
                d -= ljp * ljp * diag[p];
            }
            if d.norm() < 1e-300 {
                return Err(Error::SingularSystem {
                    pivot: j,
                    value: d.norm(),
                });
            }
            diag[j] = d;
            for i in j + 1..n {
                let mut s = Complex64::new(real.get(i, j), 0.0);
                for p in 0..j {
                    s -= lower[Self::lidx(i, p)] * lower[Self::lidx(j, p)] * diag[p];
                }
                lower[Self::lidx(i, j)] = s / d;
            }
        }
        Ok(Self { n, lower, diag })
    }

    /// Index into the strictly lower triangle (j < i).
    #[inline]
    fn lidx(i: usize, j: usize) -> usize {
        debug_assert!(j < i);
        row_start(i - 1) + j
    }

    /// Solve (S + i shift I) x = b in place; transposed (not conjugated)
    /// back substitution matches the complex symmetric structure.
    #[allow(clippy::needless_range_loop)] // prefix reads of b while writing b[i]
    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        assert_eq!(b.len(), self.n);
        for i in 0..self.n {
            let mut s = b[i];
            for j in 0..i {
                s -= self.lower[Self::lidx(i, j)] * b[j];
            }
            b[i] = s;
        }
        for i in 0..self.n {
            b[i] /= self.diag[i];
        }
        for j in (0..self.n).rev() {
            let xj = b[j];
            for p in 0..j {
                b[p] -= self.lower[Self::lidx(j, p)] * xj;
            }
        }
    }
}
