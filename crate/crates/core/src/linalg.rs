//! Exact linear algebra over the rationals: row reduction, rank, kernels,
//! determinants, and an incremental row-span structure used as the
//! independence oracle by the greedy weight computations.

use num_traits::{One, Signed, Zero};

use crate::arith::rational::Rational;
use crate::error::{CoreError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(CoreError::Invalid("ragged matrix rows".into()));
        }
        Ok(QMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows_vec(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> QMatrix {
        let mut t = QMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &QMatrix) -> Result<QMatrix> {
        if self.cols != other.rows {
            return Err(CoreError::Invalid("matrix dimension mismatch".into()));
        }
        let mut out = QMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let cur = out.get(i, j) + &(a * b);
                        out.set(i, j, cur);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        if v.len() != self.cols {
            return Err(CoreError::Invalid("vector length mismatch".into()));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    /// Reduced row echelon form together with the pivot column of each
    /// nonzero row, in order.
    pub fn rref(&self) -> (QMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            // largest-magnitude pivot keeps intermediate entries tame
            let Some(pr) = (r..m.rows)
                .filter(|&i| !m.get(i, c).is_zero())
                .max_by(|&i, &j| m.get(i, c).abs().cmp(&m.get(j, c).abs()))
            else {
                continue;
            };
            m.swap_rows(r, pr);
            let inv = m.get(r, c).recip();
            for j in c..m.cols {
                let v = m.get(r, j) * &inv;
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i != r && !m.get(i, c).is_zero() {
                    let f = m.get(i, c).clone();
                    for j in c..m.cols {
                        let v = m.get(i, j) - &(&f * m.get(r, j));
                        m.set(i, j, v);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel, one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        let (m, pivots) = self.rref();
        let mut basis = Vec::new();
        let mut piv_iter = pivots.iter().peekable();
        let mut pivot_of_col = vec![None; self.cols];
        for (row, &col) in pivots.iter().enumerate() {
            pivot_of_col[col] = Some(row);
        }
        for free in 0..self.cols {
            if piv_iter.peek() == Some(&&free) {
                piv_iter.next();
                continue;
            }
            let mut v = vec![Rational::zero(); self.cols];
            v[free] = Rational::one();
            for (col, piv_row) in pivot_of_col.iter().enumerate() {
                if let Some(row) = piv_row {
                    v[col] = -m.get(*row, free).clone();
                }
            }
            basis.push(v);
        }
        basis
    }

    pub fn det(&self) -> Result<Rational> {
        if self.rows != self.cols {
            return Err(CoreError::Invalid("determinant of a non-square matrix".into()));
        }
        let mut m = self.clone();
        let n = m.rows;
        let mut det = Rational::one();
        for c in 0..n {
            let Some(pr) = (c..n).find(|&i| !m.get(i, c).is_zero()) else {
                return Ok(Rational::zero());
            };
            if pr != c {
                m.swap_rows(c, pr);
                det = -det;
            }
            let pivot = m.get(c, c).clone();
            det *= &pivot;
            let inv = pivot.recip();
            for i in c + 1..n {
                if m.get(i, c).is_zero() {
                    continue;
                }
                let f = m.get(i, c) * &inv;
                for j in c..n {
                    let v = m.get(i, j) - &(&f * m.get(c, j));
                    m.set(i, j, v);
                }
            }
        }
        Ok(det)
    }

    pub fn inverse(&self) -> Result<QMatrix> {
        if self.rows != self.cols {
            return Err(CoreError::Invalid("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(QMatrix::zeros(0, 0));
        }
        let mut aug = QMatrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, Rational::one());
        }
        let (m, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(CoreError::Invalid("inverse of a singular matrix".into()));
        }
        let mut inv = QMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, m.get(i, n + j).clone());
            }
        }
        Ok(inv)
    }

    /// One solution of self * x = rhs, or None when inconsistent.
    pub fn solve(&self, rhs: &[Rational]) -> Result<Option<Vec<Rational>>> {
        if rhs.len() != self.rows {
            return Err(CoreError::Invalid("right-hand side length mismatch".into()));
        }
        let mut aug = QMatrix::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, self.cols, rhs[i].clone());
        }
        let (m, pivots) = aug.rref();
        if pivots.contains(&self.cols) {
            return Ok(None);
        }
        let mut x = vec![Rational::zero(); self.cols];
        for (row, &col) in pivots.iter().enumerate() {
            x[col] = m.get(row, self.cols).clone();
        }
        Ok(Some(x))
    }
}

/// Row space held in reduced echelon form, grown one vector at a time.
/// `insert` answers the matroid independence query and keeps the basis
/// reduced, so repeated queries stay cheap.
#[derive(Debug, Clone)]
pub struct RowSpan {
    cols: usize,
    basis: Vec<Vec<Rational>>,
    pivots: Vec<usize>,
}

impl RowSpan {
    pub fn new(cols: usize) -> Self {
        RowSpan {
            cols,
            basis: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// The reduced-echelon basis rows currently spanning the space.
    pub fn basis(&self) -> &[Vec<Rational>] {
        &self.basis
    }

    /// v minus its projection onto the span; zero iff v is in the span.
    pub fn reduce(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        let mut w = v.to_vec();
        for (row, &p) in self.basis.iter().zip(&self.pivots) {
            if w[p].is_zero() {
                continue;
            }
            let f = w[p].clone();
            for (wi, ri) in w.iter_mut().zip(row) {
                if !ri.is_zero() {
                    *wi -= &f * ri;
                }
            }
        }
        w
    }

    /// Inserts v if independent of the current span; returns whether it was.
    pub fn insert(&mut self, v: &[Rational]) -> bool {
        let mut w = self.reduce(v);
        let Some(p) = w.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = w[p].recip();
        for x in w.iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        // back-substitute into the existing basis to stay fully reduced
        for row in self.basis.iter_mut() {
            if row[p].is_zero() {
                continue;
            }
            let f = row[p].clone();
            for (ri, wi) in row.iter_mut().zip(&w) {
                if !wi.is_zero() {
                    *ri -= &f * wi;
                }
            }
        }
        let at = self.pivots.partition_point(|&q| q < p);
        self.pivots.insert(at, p);
        self.basis.insert(at, w);
        true
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        self.reduce(v).iter().all(Rational::is_zero)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::{rat_frac, rat_i64};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> QMatrix {
        let mut m = QMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, rat_frac(rng.random_range(-6..=6), rng.random_range(1..=4)));
            }
        }
        m
    }

    #[test]
    fn det_and_solve_known_values() {
        let m = QMatrix::from_rows(vec![
            vec![rat_i64(2), rat_i64(1), rat_i64(0)],
            vec![rat_i64(1), rat_i64(3), rat_i64(1)],
            vec![rat_i64(0), rat_i64(1), rat_i64(4)],
        ])
        .unwrap();
        assert_eq!(m.det().unwrap(), rat_i64(18));
        let x = m.solve(&[rat_i64(3), rat_i64(5), rat_i64(5)]).unwrap().unwrap();
        assert_eq!(m.mul_vec(&x).unwrap(), vec![rat_i64(3), rat_i64(5), rat_i64(5)]);
    }

    #[test]
    fn singular_matrix_reports_zero_det_and_inconsistency() {
        let m = QMatrix::from_rows(vec![
            vec![rat_i64(1), rat_i64(2)],
            vec![rat_i64(2), rat_i64(4)],
        ])
        .unwrap();
        assert_eq!(m.det().unwrap(), rat_i64(0));
        assert!(m.solve(&[rat_i64(1), rat_i64(0)]).unwrap().is_none());
        assert!(m.solve(&[rat_i64(1), rat_i64(2)]).unwrap().is_some());
    }

    #[test]
    fn nullspace_vectors_annihilate() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let rows = rng.random_range(1..=5);
            let cols = rng.random_range(1..=6);
            let m = random_matrix(&mut rng, rows, cols);
            let ns = m.nullspace();
            assert_eq!(m.rank() + ns.len(), cols);
            for v in &ns {
                let img = m.mul_vec(v).unwrap();
                assert!(img.iter().all(Rational::is_zero));
            }
        }
    }

    #[test]
    fn rref_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let rows = rng.random_range(1..=5);
            let cols = rng.random_range(1..=5);
            let m = random_matrix(&mut rng, rows, cols);
            let (r1, p1) = m.rref();
            let (r2, p2) = r1.rref();
            assert_eq!(r1, r2);
            assert_eq!(p1, p2);
        }
    }

    #[test]
    fn row_span_agrees_with_rref_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..40 {
            let rows = rng.random_range(1..=8);
            let cols = rng.random_range(1..=6);
            let m = random_matrix(&mut rng, rows, cols);
            let mut span = RowSpan::new(cols);
            for i in 0..rows {
                span.insert(m.row(i));
            }
            assert_eq!(span.rank(), m.rank());
            for i in 0..rows {
                assert!(span.contains(m.row(i)));
            }
        }
    }

    #[test]
    fn insert_rejects_dependent_vectors() {
        let mut span = RowSpan::new(3);
        assert!(span.insert(&[rat_i64(1), rat_i64(2), rat_i64(3)]));
        assert!(span.insert(&[rat_i64(0), rat_i64(1), rat_i64(1)]));
        assert!(!span.insert(&[rat_i64(2), rat_i64(5), rat_i64(7)]));
        assert!(span.insert(&[rat_i64(0), rat_i64(0), rat_i64(1)]));
        assert_eq!(span.rank(), 3);
    }

    #[test]
    fn inverse_round_trips_and_rejects_singular() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let mut seen = 0;
        while seen < 20 {
            let n = rng.random_range(1..=4);
            let m = random_matrix(&mut rng, n, n);
            if m.det().unwrap().is_zero() {
                continue;
            }
            seen += 1;
            let inv = m.inverse().unwrap();
            assert_eq!(m.mul(&inv).unwrap(), QMatrix::identity(n));
            assert_eq!(inv.mul(&m).unwrap(), QMatrix::identity(n));
        }
        let singular = QMatrix::from_rows(vec![
            vec![rat_i64(1), rat_i64(2)],
            vec![rat_i64(2), rat_i64(4)],
        ])
        .unwrap();
        assert!(singular.inverse().is_err());
    }

    #[test]
    fn det_multiplicative_on_seeded_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..25 {
            let n = rng.random_range(1..=4);
            let a = random_matrix(&mut rng, n, n);
            let b = random_matrix(&mut rng, n, n);
            let lhs = a.mul(&b).unwrap().det().unwrap();
            let rhs = a.det().unwrap() * b.det().unwrap();
            assert_eq!(lhs, rhs);
        }
    }
}
