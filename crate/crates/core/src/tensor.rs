//! Dense complex linear algebra over labeled tensor-product spaces.
//!
//! Matrices are stored row-major. Composite spaces are described by a
//! [`SpaceLayout`], an ordered list of `(label, dimension)` factors; composite
//! indices use mixed-radix encoding in declared order, so the first factor is
//! the most significant digit. This matches the index convention of
//! [`tensor_product`]: `(a ⊗ b)[(i1, i2), (j1, j2)] = a[i1][j1] * b[i2][j2]`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Strict internal tolerance for structural checks.
pub const STRICT_TOL: f64 = 1e-12;
/// Default tolerance for comparing computed quantities.
pub const DEFAULT_TOL: f64 = 1e-9;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Shorthand for a real-valued complex number.
#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Dense complex matrix in row-major order.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!(
                "matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix must be at least 1x1");
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
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

    /// Builds a matrix from nested rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn diag(values: &[Complex64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn real_diag(values: &[f64]) -> Self {
        let v: Vec<Complex64> = values.iter().map(|&x| c(x, 0.0)).collect();
        Self::diag(&v)
    }

    /// Outer product `|u⟩⟨v|`.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} for {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect())
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max |M[i][j] - conj(M[j][i])|`; infinite for non-square matrices.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_deviation() <= STRICT_TOL
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        Ok(&self.try_mul(other)? - &other.try_mul(self)?)
    }

    /// Eigenvalues (ascending) of a Hermitian matrix.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.hermitian_eigen()?.0)
    }

    /// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and the
    /// matching orthonormal eigenvectors.
    pub fn hermitian_eigen(&self) -> Result<(Vec<f64>, Vec<Vec<Complex64>>)> {
        let dev = self.hermitian_deviation();
        if dev > 1e-10 {
            return Err(Error::NotHermitian(dev));
        }
        let n = self.rows;
        // Symmetrize before handing over so round-off does not leak in.
        let m = nalgebra::DMatrix::<Complex64>::from_fn(n, n, |i, j| {
            0.5 * (self[(i, j)] + self[(j, i)].conj())
        });
        let eig = nalgebra::SymmetricEigen::new(m);
        let mut pairs: Vec<(f64, Vec<Complex64>)> = (0..n)
            .map(|k| {
                let v = eig.eigenvectors.column(k).iter().copied().collect();
                (eig.eigenvalues[k], v)
            })
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(pairs.into_iter().unzip())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_mul(rhs).expect("matrix product dimensions")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// `⟨u|v⟩`, antilinear in the first argument.
pub fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    assert_eq!(u.len(), v.len(), "inner product of unequal lengths");
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(u: &[Complex64]) -> f64 {
    u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Kronecker product of two vectors.
pub fn kron_vec(u: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
    u.iter().flat_map(|a| v.iter().map(move |b| a * b)).collect()
}

/// Returns the standard basis vector `e_i` of length `dim`.
pub fn basis_vector(dim: usize, i: usize) -> Vec<Complex64> {
    let mut v = vec![ZERO; dim];
    v[i] = ONE;
    v
}

/// Standard basis of a `dim`-dimensional space.
pub fn standard_basis(dim: usize) -> Vec<Vec<Complex64>> {
    (0..dim).map(|i| basis_vector(dim, i)).collect()
}

/// `max |⟨u_i|u_j⟩ - δ_ij|` over the list.
pub fn orthonormality_deviation(vectors: &[Vec<Complex64>]) -> f64 {
    let mut dev: f64 = 0.0;
    for (i, u) in vectors.iter().enumerate() {
        for (j, v) in vectors.iter().enumerate().skip(i) {
            let target = if i == j { ONE } else { ZERO };
            dev = dev.max((inner(u, v) - target).norm());
        }
    }
    dev
}

/// Product basis `{|u⟩ ⊗ |v⟩}` with the first list as the most significant
/// factor.
pub fn product_basis(first: &[Vec<Complex64>], second: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    first
        .iter()
        .flat_map(|u| second.iter().map(move |v| kron_vec(u, v)))
        .collect()
}

/// Kronecker product of two matrices.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (br, bc) = (b.rows, b.cols);
    ComplexMatrix::from_fn(a.rows * br, a.cols * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// `Tr(rho · op)` for square matrices of equal dimension.
pub fn trace_product(rho: &ComplexMatrix, op: &ComplexMatrix) -> Result<Complex64> {
    if !rho.is_square() || !op.is_square() || rho.rows != op.rows {
        return Err(Error::DimensionMismatch(format!(
            "trace_product of {}x{} and {}x{}",
            rho.rows, rho.cols, op.rows, op.cols
        )));
    }
    let n = rho.rows;
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += rho.data[i * n + j] * op.data[j * n + i];
        }
    }
    Ok(acc)
}

/// Ordered list of labeled tensor factors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpaceLayout {
    factors: Vec<(String, usize)>,
}

impl SpaceLayout {
    pub fn new<S: Into<String>>(factors: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let factors: Vec<(String, usize)> =
            factors.into_iter().map(|(l, d)| (l.into(), d)).collect();
        if factors.is_empty() {
            return Err(Error::Layout("layout needs at least one factor".into()));
        }
        for (i, (label, dim)) in factors.iter().enumerate() {
            if *dim == 0 {
                return Err(Error::Layout(format!("factor {label} has dimension 0")));
            }
            if factors[..i].iter().any(|(l, _)| l == label) {
                return Err(Error::Layout(format!("duplicate factor label {label}")));
            }
        }
        Ok(Self { factors })
    }

    pub fn single(label: impl Into<String>, dim: usize) -> Result<Self> {
        Self::new([(label.into(), dim)])
    }

    pub fn factors(&self) -> &[(String, usize)] {
        &self.factors
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.factors.iter().map(|(l, _)| l.as_str())
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.position(label).is_some()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.factors.iter().position(|(l, _)| l == label)
    }

    pub fn dim_of(&self, label: &str) -> Option<usize> {
        self.position(label).map(|p| self.factors[p].1)
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|(_, d)| d).product()
    }

    /// Mixed-radix digits of a composite index.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.factors.len()];
        for (slot, (_, d)) in out.iter_mut().zip(&self.factors).rev() {
            *slot = index % d;
            index /= d;
        }
        out
    }

    /// Composite index from per-factor digits.
    pub fn compose(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.factors)
            .fold(0, |acc, (&dig, (_, d))| acc * d + dig)
    }

    /// Sub-layout with the given labels, kept in this layout's order.
    pub fn restrict(&self, keep: &[&str]) -> Result<Self> {
        for k in keep {
            if !self.contains(k) {
                return Err(Error::Layout(format!("unknown factor label {k}")));
            }
        }
        Self::new(
            self.factors
                .iter()
                .filter(|(l, _)| keep.contains(&l.as_str()))
                .cloned(),
        )
    }

    /// Labels of this layout that are not in `labels`.
    pub fn complement(&self, labels: &[&str]) -> Vec<&str> {
        self.labels().filter(|l| !labels.contains(l)).collect()
    }

    /// For every composite index of `self`, the index inside `sub` (using
    /// `sub`'s own factor order) and the index over the remaining factors.
    fn split_indices(&self, sub: &SpaceLayout) -> Result<Vec<(usize, usize)>> {
        let mut positions = Vec::with_capacity(sub.len());
        for (label, dim) in &sub.factors {
            match self.position(label) {
                Some(p) if self.factors[p].1 == *dim => positions.push(p),
                Some(p) => {
                    return Err(Error::Layout(format!(
                        "factor {label} has dimension {} here but {dim} in operator",
                        self.factors[p].1
                    )))
                }
                None => return Err(Error::Layout(format!("unknown factor label {label}"))),
            }
        }
        let rest: Vec<usize> = (0..self.len()).filter(|p| !positions.contains(p)).collect();
        Ok((0..self.total_dim())
            .map(|idx| {
                let dig = self.digits(idx);
                let s = positions
                    .iter()
                    .zip(&sub.factors)
                    .fold(0, |acc, (&p, (_, d))| acc * d + dig[p]);
                let r = rest
                    .iter()
                    .fold(0, |acc, &p| acc * self.factors[p].1 + dig[p]);
                (s, r)
            })
            .collect())
    }
}

impl fmt::Display for SpaceLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|(l, d)| format!("{l}:{d}")).collect();
        write!(f, "[{}]", parts.join(" ⊗ "))
    }
}

fn check_square_on(m: &ComplexMatrix, layout: &SpaceLayout) -> Result<()> {
    if !m.is_square() || m.rows != layout.total_dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix on layout {layout} of dimension {}",
            m.rows,
            m.cols,
            layout.total_dim()
        )));
    }
    Ok(())
}

/// Traces out every factor not listed in `keep`. The result acts on the kept
/// factors in layout order.
pub fn partial_trace(m: &ComplexMatrix, layout: &SpaceLayout, keep: &[&str]) -> Result<ComplexMatrix> {
    check_square_on(m, layout)?;
    if keep.is_empty() {
        return Err(Error::Layout("nothing to keep in partial trace".into()));
    }
    let kept = layout.restrict(keep)?;
    if kept.len() == layout.len() {
        return Err(Error::Layout(
            "partial trace must trace out at least one factor".into(),
        ));
    }
    reduce_unchecked(m, layout, &kept)
}

/// Like [`partial_trace`], but keeping every factor is allowed and returns a
/// copy. Used internally when a state may already live on the target space.
pub fn reduce(m: &ComplexMatrix, layout: &SpaceLayout, keep: &[&str]) -> Result<ComplexMatrix> {
    check_square_on(m, layout)?;
    let kept = layout.restrict(keep)?;
    if kept.len() == layout.len() {
        return Ok(m.clone());
    }
    reduce_unchecked(m, layout, &kept)
}

fn reduce_unchecked(m: &ComplexMatrix, layout: &SpaceLayout, kept: &SpaceLayout) -> Result<ComplexMatrix> {
    let split = layout.split_indices(kept)?;
    let d = kept.total_dim();
    let mut out = ComplexMatrix::zeros(d, d);
    for (i, &(ki, ri)) in split.iter().enumerate() {
        for (j, &(kj, rj)) in split.iter().enumerate() {
            if ri == rj {
                out[(ki, kj)] += m[(i, j)];
            }
        }
    }
    Ok(out)
}

/// An operator acting on a subset of the factors of some larger space.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOperator {
    layout: SpaceLayout,
    matrix: ComplexMatrix,
}

impl LocalOperator {
    pub fn new(layout: SpaceLayout, matrix: ComplexMatrix) -> Result<Self> {
        check_square_on(&matrix, &layout)?;
        Ok(Self { layout, matrix })
    }

    pub fn on(label: impl Into<String>, matrix: ComplexMatrix) -> Result<Self> {
        let layout = SpaceLayout::single(label, matrix.rows())?;
        Self::new(layout, matrix)
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// The operator tensored with identities on every factor of `target`
    /// that it does not act on. Factor order in `target` may differ.
    pub fn embed(&self, target: &SpaceLayout) -> Result<ComplexMatrix> {
        let split = target.split_indices(&self.layout)?;
        let d = target.total_dim();
        let mut out = ComplexMatrix::zeros(d, d);
        for (i, &(si, ri)) in split.iter().enumerate() {
            for (j, &(sj, rj)) in split.iter().enumerate() {
                if ri == rj {
                    out[(i, j)] = self.matrix[(si, sj)];
                }
            }
        }
        Ok(out)
    }

    /// Product of operators acting on pairwise disjoint factors.
    pub fn disjoint_product(ops: &[&LocalOperator]) -> Result<LocalOperator> {
        let mut factors: Vec<(String, usize)> = Vec::new();
        for op in ops {
            for f in op.layout.factors() {
                if factors.iter().any(|(l, _)| *l == f.0) {
                    return Err(Error::Layout(format!("factor {} appears twice", f.0)));
                }
                factors.push(f.clone());
            }
        }
        let layout = SpaceLayout::new(factors)?;
        let mut acc = ComplexMatrix::identity(layout.total_dim());
        for op in ops {
            acc = &acc * &op.embed(&layout)?;
        }
        LocalOperator::new(layout, acc)
    }
}

/// Embeds a single-factor vector into a composite space by tensoring with
/// the standard basis vector `rest` over all other factors.
pub fn embed_vector(
    v: &[Complex64],
    v_layout: &SpaceLayout,
    target: &SpaceLayout,
    rest: usize,
) -> Result<Vec<Complex64>> {
    if v.len() != v_layout.total_dim() {
        return Err(Error::DimensionMismatch("vector length vs layout".into()));
    }
    let split = target.split_indices(v_layout)?;
    Ok(split
        .iter()
        .map(|&(s, r)| if r == rest { v[s] } else { ZERO })
        .collect())
}
