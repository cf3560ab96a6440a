use crate::scalar::{max_abs, Real};

/// Square sparse matrix in compressed-row form together with the diagonal
/// weight that defines its inner product `⟨u, v⟩_w = Σ w_i u_i v_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator<T> {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
    pub weight: Vec<T>,
}

impl<T: Real> SparseOperator<T> {
    /// Build from per-row `(col, value)` lists; duplicate columns are summed.
    pub fn from_rows(rows: Vec<Vec<(usize, T)>>, weight: Vec<T>) -> Self {
        let n = rows.len();
        assert_eq!(weight.len(), n, "weight length must match dimension");
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let start = cols.len();
            for (c, v) in row {
                assert!(c < n, "column {c} out of range for dimension {n}");
                if cols.len() > start && *cols.last().unwrap() == c {
                    let last = vals.last_mut().unwrap();
                    *last = *last + v;
                } else {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { n, row_ptr, cols, vals, weight }
    }

    pub fn from_triplets(n: usize, triplets: &[(usize, usize, T)], weight: Vec<T>) -> Self {
        let mut rows = vec![Vec::new(); n];
        for &(r, c, v) in triplets {
            rows[r].push((c, v));
        }
        Self::from_rows(rows, weight)
    }

    pub fn from_dense(a: &[Vec<T>], weight: Vec<T>) -> Self {
        let rows = a
            .iter()
            .map(|r| r.iter().enumerate().filter(|(_, &v)| v != T::zero()).map(|(c, &v)| (c, v)).collect())
            .collect();
        Self::from_rows(rows, weight)
    }

    pub fn diagonal(d: Vec<T>, weight: Vec<T>) -> Self {
        Self::from_rows(d.into_iter().enumerate().map(|(i, v)| vec![(i, v)]).collect(), weight)
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(vec![T::one(); n], vec![T::one(); n])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Entries of row `i` as `(col, value)` pairs in column order.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => T::zero(),
        }
    }

    pub fn values(&self) -> &[T] {
        &self.vals
    }

    /// `y = A x`, accumulating each row in column order.
    pub fn matvec_into(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = T::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc = acc + self.vals[k] * x[self.cols[k]];
            }
            *yi = acc;
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        self.matvec_into(x, &mut y);
        y
    }

    /// Plain transpose; the weight is carried over unchanged.
    pub fn transpose(&self) -> Self {
        let mut rows = vec![Vec::new(); self.n];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                rows[j].push((i, v));
            }
        }
        Self::from_rows(rows, self.weight.clone())
    }

    /// `diag(left) · A · diag(right)`.
    pub fn scaled(&self, left: &[T], right: &[T]) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out.vals[k] = left[i] * self.vals[k] * right[self.cols[k]];
            }
        }
        out
    }

    pub fn with_weight(mut self, weight: Vec<T>) -> Self {
        assert_eq!(weight.len(), self.n);
        self.weight = weight;
        self
    }

    /// Entrywise map keeping the sparsity pattern.
    pub fn map_values(&self, f: impl Fn(usize, usize, T) -> T) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out.vals[k] = f(i, self.cols[k], self.vals[k]);
            }
        }
        out
    }

    /// Sparse product `self · other`; the result takes `self`'s weight.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let rows = (0..self.n)
            .map(|i| {
                let mut acc: Vec<(usize, T)> = Vec::new();
                for (k, a) in self.row(i) {
                    for (j, b) in other.row(k) {
                        acc.push((j, a * b));
                    }
                }
                acc
            })
            .collect();
        Self::from_rows(rows, self.weight.clone())
    }

    pub fn add(&self, other: &Self, alpha: T) -> Self {
        assert_eq!(self.n, other.n);
        let rows = (0..self.n)
            .map(|i| self.row(i).chain(other.row(i).map(|(j, v)| (j, alpha * v))).collect())
            .collect();
        Self::from_rows(rows, self.weight.clone())
    }

    pub fn max_abs(&self) -> T {
        max_abs(&self.vals)
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut d = vec![vec![T::zero(); self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        d
    }

    /// Whether the sparsity pattern is symmetric.
    pub fn pattern_symmetric(&self) -> bool {
        (0..self.n).all(|i| self.row(i).all(|(j, _)| {
            let r = self.row_ptr[j]..self.row_ptr[j + 1];
            self.cols[r].binary_search(&i).is_ok()
        }))
    }

    /// `max |(W A)_ij - (W A)_ji| / max |W A|` for the weight `w`; zero means
    /// `A` is self-adjoint in `⟨,⟩_w`.
    pub fn weighted_symmetry_defect(&self, w: &[T]) -> T {
        self.weighted_defect(w, T::one())
    }

    /// `max |(W A)_ij + (W A)_ji| / max |W A|`; zero means `A` is
    /// skew-adjoint in `⟨,⟩_w`.
    pub fn weighted_antisymmetry_defect(&self, w: &[T]) -> T {
        self.weighted_defect(w, -T::one())
    }

    fn weighted_defect(&self, w: &[T], sign: T) -> T {
        let mut worst = T::zero();
        let mut scale = T::zero();
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                let wa = w[i] * v;
                let wt = w[j] * self.get(j, i);
                worst = worst.max((wa - sign * wt).abs());
                scale = scale.max(wa.abs());
            }
        }
        if scale == T::zero() {
            T::zero()
        } else {
            worst / scale
        }
    }
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// `⟨u, v⟩_w = Σ w_i u_i v_i`.
pub fn weighted_dot<T: Real>(w: &[T], u: &[T], v: &[T]) -> T {
    w.iter().zip(u).zip(v).fold(T::zero(), |acc, ((&wi, &x), &y)| acc + wi * x * y)
}

pub fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed_and_lookup_works() {
        let a = SparseOperator::from_triplets(3, &[(0, 1, 1.0), (0, 1, 2.0), (2, 0, -1.0), (1, 1, 4.0)], vec![1.0; 3]);
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.get(0, 1), 3.0);
        assert_eq!(a.get(1, 0), 0.0);
        assert_eq!(a.matvec(&[1.0, 1.0, 1.0]), vec![3.0, 4.0, -1.0]);
        assert_eq!(a.transpose().get(1, 0), 3.0);
        assert!(!a.pattern_symmetric());
    }

    #[test]
    fn product_and_sum() {
        let a = SparseOperator::from_dense(&[vec![1.0, 2.0], vec![0.0, 3.0]], vec![1.0; 2]);
        let b = SparseOperator::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]], vec![1.0; 2]);
        assert_eq!(a.mul(&b).to_dense(), vec![vec![2.0, 1.0], vec![3.0, 0.0]]);
        assert_eq!(a.add(&b, -1.0).to_dense(), vec![vec![1.0, 1.0], vec![-1.0, 3.0]]);
    }

    #[test]
    fn weighted_defects() {
        // W A symmetric for w = (1, 2): A = [[0, 2], [1, 0]]
        let a = SparseOperator::from_dense(&[vec![0.0, 2.0], vec![1.0, 0.0]], vec![1.0, 2.0]);
        assert_eq!(a.weighted_symmetry_defect(&[1.0, 2.0]), 0.0);
        assert!(a.weighted_symmetry_defect(&[1.0, 1.0]) > 0.0);
        let d = SparseOperator::from_dense(&[vec![0.0, 1.0], vec![-1.0, 0.0]], vec![1.0, 1.0]);
        assert_eq!(d.weighted_antisymmetry_defect(&[1.0, 1.0]), 0.0);
        assert_eq!(d.weighted_antisymmetry_defect(&[1.0, 3.0]), 2.0 / 3.0);
    }
}
