//! Dense matrices over F_q: row reduction and null spaces.

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldModulus};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<FieldElement>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<FieldElement>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                got: entries.len(),
            });
        }
        Ok(Matrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            entries: vec![FieldElement::default(); rows * cols],
        }
    }

    pub fn from_rows(cols: usize, rows: &[Vec<FieldElement>]) -> Result<Self> {
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::LengthMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            entries.extend_from_slice(r);
        }
        Matrix::new(rows.len(), cols, entries)
    }

    /// Convenience for tests and literals: entries reduced mod q.
    pub fn from_i64(q: FieldModulus, rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let entries = rows
            .iter()
            .flat_map(|r| {
                assert_eq!(r.len(), cols);
                r.iter().map(|&v| q.elem(v))
            })
            .collect();
        Matrix {
            rows: rows.len(),
            cols,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[FieldElement] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> FieldElement {
        self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: FieldElement) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[FieldElement] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn mul_vec(&self, q: FieldModulus, v: &[FieldElement]) -> Vec<FieldElement> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|r| q.dot(self.row(r), v)).collect()
    }

    pub fn rank(&self, q: FieldModulus) -> usize {
        rref(self, q).1.len()
    }
}

/// Reduced row echelon form and the pivot columns.
pub fn rref(m: &Matrix, q: FieldModulus) -> (Matrix, Vec<usize>) {
    let mut a = m.clone();
    let (rows, cols) = (a.rows, a.cols);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a.get(i, c).is_zero()) else {
            continue;
        };
        if p != r {
            for k in 0..cols {
                a.entries.swap(p * cols + k, r * cols + k);
            }
        }
        let inv = q.inv(a.get(r, c)).expect("pivot is nonzero");
        for k in c..cols {
            let v = q.mul(a.get(r, k), inv);
            a.set(r, k, v);
        }
        for i in 0..rows {
            if i == r {
                continue;
            }
            let f = a.get(i, c);
            if f.is_zero() {
                continue;
            }
            for k in c..cols {
                let v = q.sub(a.get(i, k), q.mul(f, a.get(r, k)));
                a.set(i, k, v);
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

/// Basis of the right null space, one vector per free column in ascending
/// order, each scaled so that its first nonzero entry is 1.
pub fn kernel_basis(m: &Matrix, q: FieldModulus) -> Vec<Vec<FieldElement>> {
    let (r, pivots) = rref(m, q);
    let mut is_pivot = vec![false; m.cols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let mut basis = Vec::new();
    for f in (0..m.cols).filter(|&c| !is_pivot[c]) {
        let mut v = vec![q.zero(); m.cols];
        v[f] = q.one();
        for (i, &p) in pivots.iter().enumerate() {
            v[p] = q.neg(r.get(i, f));
        }
        normalize_leading(q, &mut v);
        basis.push(v);
    }
    basis
}

/// Scales `v` so its first nonzero entry is 1. Leaves the zero vector alone.
pub fn normalize_leading(q: FieldModulus, v: &mut [FieldElement]) {
    if let Some(lead) = v.iter().copied().find(|x| !x.is_zero()) {
        let inv = q.inv(lead).expect("nonzero");
        for x in v.iter_mut() {
            *x = q.mul(*x, inv);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f(q: u64) -> FieldModulus {
        FieldModulus::new(q).unwrap()
    }

    fn random_matrix(q: FieldModulus, rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
        let entries = (0..rows * cols)
            .map(|_| q.elem(rng.random_range(0..q.q() as i64)))
            .collect();
        Matrix::new(rows, cols, entries).unwrap()
    }

    fn det(q: FieldModulus, m: &[Vec<FieldElement>]) -> FieldElement {
        // Laplace expansion along the first row.
        let n = m.len();
        if n == 1 {
            return m[0][0];
        }
        let mut acc = q.zero();
        for j in 0..n {
            let minor: Vec<Vec<FieldElement>> = m[1..]
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|&(k, _)| k != j)
                        .map(|(_, &x)| x)
                        .collect()
                })
                .collect();
            let t = q.mul(m[0][j], det(q, &minor));
            acc = if j % 2 == 0 { q.add(acc, t) } else { q.sub(acc, t) };
        }
        acc
    }

    fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        if n < k {
            return vec![];
        }
        let mut out = subsets(n - 1, k);
        for mut s in subsets(n - 1, k - 1) {
            s.push(n - 1);
            out.push(s);
        }
        out
    }

    fn minor_rank(q: FieldModulus, m: &Matrix) -> usize {
        let mut best = 0;
        for k in 1..=m.rows().min(m.cols()) {
            let found = subsets(m.rows(), k).iter().any(|rs| {
                subsets(m.cols(), k).iter().any(|cs| {
                    let sub: Vec<Vec<FieldElement>> = rs
                        .iter()
                        .map(|&r| cs.iter().map(|&c| m.get(r, c)).collect())
                        .collect();
                    !det(q, &sub).is_zero()
                })
            });
            if found {
                best = k;
            }
        }
        best
    }

    #[test]
    fn identity_and_proportional_rows() {
        let q5 = f(5);
        let id = Matrix::from_i64(q5, &[&[1, 0], &[0, 1]]);
        assert_eq!(rref(&id, q5), (id.clone(), vec![0, 1]));
        assert!(kernel_basis(&id, q5).is_empty());

        let m = Matrix::from_i64(q5, &[&[2, 4], &[1, 2]]);
        let (r, p) = rref(&m, q5);
        assert_eq!(r, Matrix::from_i64(q5, &[&[1, 2], &[0, 0]]));
        assert_eq!(p, vec![0]);
    }

    #[test]
    fn one_by_two_kernel() {
        let q5 = f(5);
        let m = Matrix::from_i64(q5, &[&[1, 1]]);
        let k = kernel_basis(&m, q5);
        assert_eq!(k, vec![vec![q5.elem(1), q5.elem(4)]]);
        assert_eq!(m.mul_vec(q5, &k[0]), vec![q5.zero()]);
    }

    #[test]
    fn rank_matches_minor_oracle() {
        let q7 = f(7);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..40 {
            let mut m = random_matrix(q7, 4, 6, &mut rng);
            if trial % 3 == 0 {
                // force a dependent row
                for c in 0..6 {
                    let v = q7.add(m.get(0, c), q7.mul(q7.elem(3), m.get(1, c)));
                    m.set(3, c, v);
                }
            }
            assert_eq!(m.rank(q7), minor_rank(q7, &m));
        }
    }

    #[test]
    fn kernel_annihilated_and_sized() {
        let q11 = f(11);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let m = random_matrix(q11, 3, 8, &mut rng);
            let k = kernel_basis(&m, q11);
            assert_eq!(k.len(), 8 - m.rank(q11));
            for v in &k {
                assert!(m.mul_vec(q11, v).iter().all(|x| x.is_zero()));
                assert_eq!(v.iter().find(|x| !x.is_zero()).copied(), Some(q11.one()));
            }
            // independence: stacking the basis has full rank
            if !k.is_empty() {
                let stacked = Matrix::from_rows(8, &k).unwrap();
                assert_eq!(stacked.rank(q11), k.len());
            }
        }
    }

    #[test]
    fn rref_idempotent() {
        let q13 = f(13);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let m = random_matrix(q13, 5, 4, &mut rng);
            let (r, p) = rref(&m, q13);
            assert_eq!(rref(&r, q13), (r.clone(), p));
        }
    }
}
