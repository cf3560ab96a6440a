use crate::geometry::Boundary;
use crate::scalar::Real;

/// One parameter direction of a grid.
///
/// Periodic: `n` points `i h` spanning `[0, L)`, `h = L / n`.
/// Dirichlet: `n` interior points `(i + 1) h`, `h = L / (n + 1)`; the two
/// boundary nodes `0` and `L` carry geometry but no unknowns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis<T> {
    pub n: usize,
    pub length: T,
    pub boundary: Boundary,
    pub h: T,
}

impl<T: Real> Axis<T> {
    pub fn new(n: usize, length: T, boundary: Boundary) -> Self {
        let cells = match boundary {
            Boundary::Periodic => n,
            Boundary::Dirichlet => n + 1,
        };
        Self { n, length, boundary, h: length / T::from_count(cells) }
    }

    /// Number of geometry nodes, boundary nodes included.
    pub fn ext_len(&self) -> usize {
        match self.boundary {
            Boundary::Periodic => self.n,
            Boundary::Dirichlet => self.n + 2,
        }
    }

    /// Extended-node index of unknown `i`.
    pub fn ext(&self, i: usize) -> usize {
        match self.boundary {
            Boundary::Periodic => i,
            Boundary::Dirichlet => i + 1,
        }
    }

    /// Parameter value at extended node `e`.
    pub fn ext_coord(&self, e: usize) -> T {
        T::from_count(e) * self.h
    }

    /// Parameter value at unknown `i`.
    pub fn coord(&self, i: usize) -> T {
        self.ext_coord(self.ext(i))
    }

    /// Neighbor of unknown `i` in direction `step = ±1`: extended node index
    /// and, when it is an unknown, its index.
    pub fn neighbor(&self, i: usize, step: isize) -> (usize, Option<usize>) {
        match self.boundary {
            Boundary::Periodic => {
                let j = (i as isize + step).rem_euclid(self.n as isize) as usize;
                (j, Some(j))
            }
            Boundary::Dirichlet => {
                let e = (i as isize + 1 + step) as usize;
                let j = i as isize + step;
                (e, (0..self.n as isize).contains(&j).then_some(j as usize))
            }
        }
    }
}

/// Tensor grid over the parameter rectangle. Rows are j-major: `row = j·n1 + i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2<T> {
    pub axes: [Axis<T>; 2],
}

impl<T: Real> Grid2<T> {
    pub fn new(n: [usize; 2], lengths: [T; 2], boundary: [Boundary; 2]) -> Self {
        Self { axes: [Axis::new(n[0], lengths[0], boundary[0]), Axis::new(n[1], lengths[1], boundary[1])] }
    }

    pub fn n1(&self) -> usize {
        self.axes[0].n
    }

    pub fn n2(&self) -> usize {
        self.axes[1].n
    }

    pub fn len(&self) -> usize {
        self.n1() * self.n2()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn row(&self, i: usize, j: usize) -> usize {
        j * self.n1() + i
    }

    pub fn index(&self, row: usize) -> (usize, usize) {
        (row % self.n1(), row / self.n1())
    }

    pub fn coords(&self, i: usize, j: usize) -> [T; 2] {
        [self.axes[0].coord(i), self.axes[1].coord(j)]
    }

    /// Extended-node storage index, `e2 · ext1 + e1`.
    pub fn ext_row(&self, e1: usize, e2: usize) -> usize {
        e2 * self.axes[0].ext_len() + e1
    }

    pub fn ext_len(&self) -> usize {
        self.axes[0].ext_len() * self.axes[1].ext_len()
    }

    /// Sample a function at the unknowns, in row order.
    pub fn sample(&self, f: impl Fn(T, T) -> T) -> Vec<T> {
        (0..self.len())
            .map(|r| {
                let (i, j) = self.index(r);
                let [s1, s2] = self.coords(i, j);
                f(s1, s2)
            })
            .collect()
    }
}

/// Tube grid: a surface grid times `nq` interior layers in `q ∈ (-ε, ε)`,
/// Dirichlet at `q = ±ε`. Rows are q-major: `row = k·n1·n2 + j·n1 + i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid3<T> {
    pub base: Grid2<T>,
    pub nq: usize,
    pub epsilon: T,
    pub hq: T,
}

impl<T: Real> Grid3<T> {
    pub fn new(base: Grid2<T>, nq: usize, epsilon: T) -> Self {
        Self { base, nq, epsilon, hq: T::two() * epsilon / T::from_count(nq + 1) }
    }

    pub fn len(&self) -> usize {
        self.base.len() * self.nq
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn row(&self, i: usize, j: usize, k: usize) -> usize {
        k * self.base.len() + self.base.row(i, j)
    }

    /// `(surface row, layer)` of a 3D row.
    pub fn split(&self, row: usize) -> (usize, usize) {
        (row % self.base.len(), row / self.base.len())
    }

    /// Normal coordinate of layer `k`.
    pub fn q(&self, k: usize) -> T {
        (T::from_count(k + 1) - T::from_count(self.nq + 1) * T::half()) * self.hq
    }

    /// Normal coordinate halfway between layers `k` and `k + 1` (`k = -1` is the lower wall side).
    pub fn q_half_above(&self, k: isize) -> T {
        (T::lit(k as f64) + T::lit(1.5) - T::from_count(self.nq + 1) * T::half()) * self.hq
    }

    /// Layer sitting exactly at `q = 0`, when `nq` is odd.
    pub fn center_layer(&self) -> Option<usize> {
        (self.nq % 2 == 1).then_some((self.nq - 1) / 2)
    }

    /// Replicate a surface vector on every layer.
    pub fn extend_constant(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.base.len());
        (0..self.nq).flat_map(|_| v.iter().copied()).collect()
    }

    /// The surface slice of layer `k`.
    pub fn layer<'a>(&self, v: &'a [T], k: usize) -> &'a [T] {
        let m = self.base.len();
        &v[k * m..(k + 1) * m]
    }
}
