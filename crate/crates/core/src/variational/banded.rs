//! Symmetric block-tridiagonal matrices with 2×2 blocks, optionally closed
//! into a cycle by a corner block.

use alloc::vec;
use alloc::vec::Vec;

pub type Block = [[f64; 2]; 2];

pub(crate) const ZERO: Block = [[0.0; 2]; 2];

fn mul(a: &Block, b: &Block) -> Block {
    let mut c = ZERO;
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn sub(a: &Block, b: &Block) -> Block {
    [[a[0][0] - b[0][0], a[0][1] - b[0][1]], [a[1][0] - b[1][0], a[1][1] - b[1][1]]]
}

pub(crate) fn transpose(a: &Block) -> Block {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

fn matvec(a: &Block, x: &[f64; 2]) -> [f64; 2] {
    [a[0][0] * x[0] + a[0][1] * x[1], a[1][0] * x[0] + a[1][1] * x[1]]
}

/// Inverse of a block that should be symmetric positive definite; `None`
/// when it is not.
fn spd_inverse(a: &Block) -> Option<Block> {
    let off = 0.5 * (a[0][1] + a[1][0]);
    let det = a[0][0] * a[1][1] - off * off;
    let scale = a[0][0].abs().max(a[1][1].abs());
    if !(a[0][0] > 0.0 && a[1][1] > 0.0 && det > 1e-14 * scale * scale) {
        return None;
    }
    Some([[a[1][1] / det, -off / det], [-off / det, a[0][0] / det]])
}

fn add_assign(a: &mut Block, b: &Block, w: f64) {
    for i in 0..2 {
        for j in 0..2 {
            a[i][j] += w * b[i][j];
        }
    }
}

/// `diag[i]` is the `(i, i)` block, `upper[i]` the `(i, i+1)` block and
/// `corner` the `(0, n−1)` block of a cyclic matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTridiag {
    pub diag: Vec<Block>,
    pub upper: Vec<Block>,
    pub corner: Option<Block>,
}

impl BlockTridiag {
    pub fn zeros(n: usize, cyclic: bool) -> Self {
        BlockTridiag {
            diag: vec![ZERO; n],
            upper: vec![ZERO; n.saturating_sub(1)],
            corner: if cyclic { Some(ZERO) } else { None },
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `self += w · other` (same shape).
    pub fn add_scaled(&mut self, other: &BlockTridiag, w: f64) {
        for (a, b) in self.diag.iter_mut().zip(&other.diag) {
            add_assign(a, b, w);
        }
        for (a, b) in self.upper.iter_mut().zip(&other.upper) {
            add_assign(a, b, w);
        }
        if let (Some(a), Some(b)) = (self.corner.as_mut(), other.corner.as_ref()) {
            add_assign(a, b, w);
        }
    }

    pub fn matvec(&self, x: &[[f64; 2]]) -> Vec<[f64; 2]> {
        let n = self.len();
        let mut y: Vec<[f64; 2]> = (0..n).map(|i| matvec(&self.diag[i], &x[i])).collect();
        for i in 0..n.saturating_sub(1) {
            let a = matvec(&self.upper[i], &x[i + 1]);
            let b = matvec(&transpose(&self.upper[i]), &x[i]);
            y[i][0] += a[0];
            y[i][1] += a[1];
            y[i + 1][0] += b[0];
            y[i + 1][1] += b[1];
        }
        if let Some(c) = &self.corner {
            let a = matvec(c, &x[n - 1]);
            let b = matvec(&transpose(c), &x[0]);
            y[0][0] += a[0];
            y[0][1] += a[1];
            y[n - 1][0] += b[0];
            y[n - 1][1] += b[1];
        }
        y
    }

    /// Mean absolute diagonal entry, the scale used for damping.
    pub fn diagonal_scale(&self) -> f64 {
        let n = self.len().max(1) as f64;
        self.diag.iter().map(|d| d[0][0].abs() + d[1][1].abs()).sum::<f64>() / (2.0 * n)
    }

    /// Copy with the variables where `free` is false replaced by identity
    /// rows/columns and `shift` added to the remaining diagonal.
    pub fn masked(&self, free: &[[bool; 2]], shift: f64) -> BlockTridiag {
        let n = self.len();
        let mut m = self.clone();
        for i in 0..n {
            for c in 0..2 {
                if free[i][c] {
                    m.diag[i][c][c] += shift;
                    continue;
                }
                m.diag[i][c] = [0.0; 2];
                m.diag[i][0][c] = 0.0;
                m.diag[i][1][c] = 0.0;
                m.diag[i][c][c] = 1.0;
                if i + 1 < n {
                    m.upper[i][c] = [0.0; 2];
                }
                if i > 0 {
                    m.upper[i - 1][0][c] = 0.0;
                    m.upper[i - 1][1][c] = 0.0;
                }
                if let Some(k) = m.corner.as_mut() {
                    if i == 0 {
                        k[c] = [0.0; 2];
                    }
                    if i == n - 1 {
                        k[0][c] = 0.0;
                        k[1][c] = 0.0;
                    }
                }
            }
        }
        m
    }

    /// Solves `A x = b` for positive definite `A`; `None` if a pivot block
    /// fails to be positive definite.
    pub fn solve_spd(&self, b: &[[f64; 2]]) -> Option<Vec<[f64; 2]>> {
        match self.corner {
            Some(c) if self.len() >= 3 => self.solve_cyclic(&c, b),
            _ => {
                let f = Factor::new(&self.diag, &self.upper)?;
                Some(f.solve(b))
            }
        }
    }

    fn solve_cyclic(&self, corner: &Block, b: &[[f64; 2]]) -> Option<Vec<[f64; 2]>> {
        let n = self.len();
        let f = Factor::new(&self.diag[1..], &self.upper[1..])?;
        let e1 = self.upper[0];
        // Columns of T⁻¹Eᵀ, with E = A[0][1..].
        let mut cols: [Vec<[f64; 2]>; 2] = [vec![[0.0; 2]; n - 1], vec![[0.0; 2]; n - 1]];
        for (k, col) in cols.iter_mut().enumerate() {
            let mut rhs = vec![[0.0; 2]; n - 1];
            rhs[0] = [e1[k][0], e1[k][1]];
            rhs[n - 2][0] += corner[k][0];
            rhs[n - 2][1] += corner[k][1];
            *col = f.solve(&rhs);
        }
        let e_dot = |v: &[[f64; 2]]| -> [f64; 2] {
            let a = matvec(&e1, &v[0]);
            let c = matvec(corner, &v[n - 2]);
            [a[0] + c[0], a[1] + c[1]]
        };
        let ez0 = e_dot(&cols[0]);
        let ez1 = e_dot(&cols[1]);
        let ez = [[ez0[0], ez1[0]], [ez0[1], ez1[1]]];
        let s_inv = spd_inverse(&sub(&self.diag[0], &ez))?;
        let y = f.solve(&b[1..]);
        let ey = e_dot(&y);
        let x0 = matvec(&s_inv, &[b[0][0] - ey[0], b[0][1] - ey[1]]);
        let mut x = Vec::with_capacity(n);
        x.push(x0);
        for i in 0..n - 1 {
            x.push([
                y[i][0] - cols[0][i][0] * x0[0] - cols[1][i][0] * x0[1],
                y[i][1] - cols[0][i][1] * x0[0] - cols[1][i][1] * x0[1],
            ]);
        }
        Some(x)
    }
}

/// Block `LDLᵀ` factorization of a non-cyclic block-tridiagonal matrix.
struct Factor<'a> {
    upper: &'a [Block],
    pivots_inv: Vec<Block>,
}

impl<'a> Factor<'a> {
    fn new(diag: &[Block], upper: &'a [Block]) -> Option<Self> {
        let mut pivots_inv = Vec::with_capacity(diag.len());
        let mut s = diag[0];
        for i in 0..diag.len() {
            if i > 0 {
                let b = &upper[i - 1];
                let corr = mul(&mul(&transpose(b), &pivots_inv[i - 1]), b);
                s = sub(&diag[i], &corr);
            }
            pivots_inv.push(spd_inverse(&s)?);
        }
        Some(Factor { upper, pivots_inv })
    }

    fn solve(&self, b: &[[f64; 2]]) -> Vec<[f64; 2]> {
        let n = self.pivots_inv.len();
        // Forward: y_i = b_i − B_{i−1}ᵀ S_{i−1}⁻¹ y_{i−1}.
        let mut y = b.to_vec();
        for i in 1..n {
            let w = matvec(&self.pivots_inv[i - 1], &y[i - 1]);
            let t = matvec(&transpose(&self.upper[i - 1]), &w);
            y[i][0] -= t[0];
            y[i][1] -= t[1];
        }
        // Backward: x_i = S_i⁻¹ (y_i − B_i x_{i+1}).
        let mut x = vec![[0.0; 2]; n];
        for i in (0..n).rev() {
            let mut r = y[i];
            if i + 1 < n {
                let t = matvec(&self.upper[i], &x[i + 1]);
                r[0] -= t[0];
                r[1] -= t[1];
            }
            x[i] = matvec(&self.pivots_inv[i], &r);
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_spd(n: usize, cyclic: bool, seed: u64) -> BlockTridiag {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let mut m = BlockTridiag::zeros(n, cyclic);
        for b in m.upper.iter_mut().chain(m.corner.iter_mut()) {
            for row in b.iter_mut() {
                for v in row.iter_mut() {
                    *v = rng.random_range(-1.0..1.0);
                }
            }
        }
        for d in m.diag.iter_mut() {
            let off = rng.random_range(-0.5..0.5);
            *d = [[5.0 + rng.random::<f64>(), off], [off, 5.0 + rng.random::<f64>()]];
        }
        m
    }

    fn residual(m: &BlockTridiag, x: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
        m.matvec(x).iter().zip(b).map(|(a, b)| (a[0] - b[0]).abs().max((a[1] - b[1]).abs())).fold(0.0, f64::max)
    }

    #[test]
    fn solves_open_and_cyclic_systems() {
        for (n, cyclic) in [(1, false), (2, false), (7, false), (3, true), (9, true)] {
            let m = random_spd(n, cyclic, n as u64);
            let b: Vec<[f64; 2]> = (0..n).map(|i| [i as f64 - 1.5, 0.25 * i as f64]).collect();
            let x = m.solve_spd(&b).unwrap();
            assert!(residual(&m, &x, &b) < 1e-12, "n={n} cyclic={cyclic}");
        }
    }

    #[test]
    fn masked_variables_get_zero_update() {
        let m = random_spd(6, true, 11);
        let mut free = vec![[true; 2]; 6];
        free[0] = [false, true];
        free[5] = [true, false];
        let b: Vec<[f64; 2]> = (0..6).map(|i| if i == 0 { [0.0, 1.0] } else if i == 5 { [2.0, 0.0] } else { [1.0, -1.0] }).collect();
        let mm = m.masked(&free, 0.0);
        let x = mm.solve_spd(&b).unwrap();
        assert_eq!(x[0][0], 0.0);
        assert_eq!(x[5][1], 0.0);
        // Free rows satisfy the original equations restricted to free columns.
        let y = m.matvec(&x);
        for i in 0..6 {
            for c in 0..2 {
                if free[i][c] {
                    assert!((y[i][c] - b[i][c]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn indefinite_is_rejected() {
        let mut m = random_spd(4, false, 3);
        m.diag[2][1][1] = -10.0;
        assert!(m.solve_spd(&[[1.0; 2]; 4]).is_none());
    }
}
