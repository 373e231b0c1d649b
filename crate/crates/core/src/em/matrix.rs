//! Dense complex matrices and LU factorization with partial pivoting.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use super::EmError;

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols, "dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `selfᵀ · other`.
    pub fn transpose_mul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.rows, other.rows, "dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            let a = self.row(k);
            let b = other.row(k);
            for (i, ai) in a.iter().enumerate() {
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, bj) in dst.iter_mut().zip(b) {
                    *d += ai * bj;
                }
            }
        }
        out
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Packed `L\U` factors with the row permutation.
#[derive(Clone, Debug)]
pub struct LuFactors {
    lu: ComplexMatrix,
    perm: Vec<usize>,
    /// max |u_ii| / min |u_ii|, a cheap lower bound on the condition number.
    pub condition_estimate: f64,
}

/// Pivots smaller than this fraction of the largest pivot count as zero.
const SINGULAR_RATIO: f64 = 1e-14;

impl LuFactors {
    pub fn factor(mut a: ComplexMatrix) -> Result<Self, EmError> {
        assert_eq!(a.rows, a.cols, "LU needs a square matrix");
        let n = a.rows;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut max_pivot: f64 = 0.0;
        let mut min_pivot = f64::INFINITY;
        for col in 0..n {
            let (pivot_row, pivot_mag) = (col..n)
                .map(|r| (r, a[(r, col)].norm()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pivot_mag > 0.0) || !pivot_mag.is_finite() {
                return Err(EmError::Singular { condition_estimate: f64::INFINITY });
            }
            max_pivot = max_pivot.max(pivot_mag);
            min_pivot = min_pivot.min(pivot_mag);
            if pivot_row != col {
                perm.swap(pivot_row, col);
                for j in 0..n {
                    a.data.swap(pivot_row * n + j, col * n + j);
                }
            }
            let inv = a[(col, col)].inv();
            let (upper, lower) = a.data.split_at_mut((col + 1) * n);
            let pivot_row_data = &upper[col * n..(col + 1) * n];
            for r in lower.chunks_exact_mut(n) {
                let factor = r[col] * inv;
                r[col] = factor;
                if factor.re == 0.0 && factor.im == 0.0 {
                    continue;
                }
                for (dst, src) in r[col + 1..].iter_mut().zip(&pivot_row_data[col + 1..]) {
                    *dst -= factor * src;
                }
            }
        }
        let condition_estimate = max_pivot / min_pivot;
        if min_pivot < SINGULAR_RATIO * max_pivot {
            return Err(EmError::Singular { condition_estimate });
        }
        Ok(Self { lu: a, perm, condition_estimate })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        assert_eq!(b.len(), n, "dimension mismatch");
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let s: Complex64 = row[..i].iter().zip(&x[..i]).map(|(l, v)| l * v).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let s: Complex64 = row[i + 1..].iter().zip(&x[i + 1..]).map(|(u, v)| u * v).sum();
            x[i] = (x[i] - s) / row[i];
        }
        x
    }
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Relative residual ‖Z·I − V‖ / ‖V‖ (absolute when `V` is zero).
pub fn relative_residual(z: &ComplexMatrix, currents: &[Complex64], excitation: &[Complex64]) -> f64 {
    let r: Vec<Complex64> = z.mul_vec(currents).iter().zip(excitation).map(|(a, b)| a - b).collect();
    let scale = norm2(excitation);
    if scale > 0.0 {
        norm2(&r) / scale
    } else {
        norm2(&r)
    }
}

/// Largest accepted relative residual of a solve.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

/// Solves `Z·I = V` by LU with partial pivoting and checks the residual.
pub fn solve_currents(z: &ComplexMatrix, excitation: &[Complex64]) -> Result<Vec<Complex64>, EmError> {
    if z.rows() != z.cols() || excitation.len() != z.rows() {
        return Err(EmError::Dimension { rows: z.rows(), cols: z.cols(), rhs: excitation.len() });
    }
    let lu = LuFactors::factor(z.clone())?;
    let currents = lu.solve(excitation);
    let residual = relative_residual(z, &currents, excitation);
    if !(residual <= RESIDUAL_TOLERANCE) {
        return Err(EmError::Residual { residual, condition_estimate: lu.condition_estimate });
    }
    Ok(currents)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_system(n: usize, seed: u64) -> (ComplexMatrix, Vec<Complex64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut z = ComplexMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        for i in 0..n {
            z[(i, i)] += c(n as f64, 0.0);
        }
        let v = (0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        (z, v)
    }

    #[test]
    fn scaled_identity() {
        let mut z = ComplexMatrix::identity(4);
        for i in 0..4 {
            z[(i, i)] = c(2.0, 1.0);
        }
        let v = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let i = solve_currents(&z, &v).unwrap();
        assert!((i[0] - c(1.0, 0.0) / c(2.0, 1.0)).norm() < 1e-15);
        assert!(i[1..].iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn residual_on_random_well_conditioned_system() {
        let (z, v) = random_system(50, 3);
        let i = solve_currents(&z, &v).unwrap();
        assert!(relative_residual(&z, &i, &v) < 1e-12);
    }

    #[test]
    fn consistent_permutation_permutes_solution() {
        let n = 12;
        let (z, v) = random_system(n, 9);
        let perm: Vec<usize> = (0..n).map(|i| (i * 5 + 3) % n).collect();
        let zp = ComplexMatrix::from_fn(n, n, |i, j| z[(perm[i], perm[j])]);
        let vp: Vec<Complex64> = perm.iter().map(|&p| v[p]).collect();
        let x = solve_currents(&z, &v).unwrap();
        let xp = solve_currents(&zp, &vp).unwrap();
        for (i, &p) in perm.iter().enumerate() {
            assert!((xp[i] - x[p]).norm() < 1e-12);
        }
    }

    #[test]
    fn singular_matrix_reported() {
        let mut z = ComplexMatrix::zeros(3, 3);
        z[(0, 0)] = c(1.0, 0.0);
        z[(1, 1)] = c(1.0, 0.0);
        let err = solve_currents(&z, &[c(1.0, 0.0); 3]).unwrap_err();
        assert!(matches!(err, EmError::Singular { .. }));
    }

    #[test]
    fn dimension_mismatch_reported() {
        let z = ComplexMatrix::identity(3);
        assert!(matches!(solve_currents(&z, &[c(1.0, 0.0); 2]), Err(EmError::Dimension { .. })));
    }

    #[test]
    fn transpose_mul_matches_definition() {
        let (a, _) = random_system(5, 1);
        let (b, _) = random_system(5, 2);
        let p = a.transpose_mul(&b);
        for i in 0..5 {
            for j in 0..5 {
                let want: Complex64 = (0..5).map(|k| a[(k, i)] * b[(k, j)]).sum();
                assert!((p[(i, j)] - want).norm() < 1e-12);
            }
        }
    }
}
