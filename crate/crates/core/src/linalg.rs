//! Dense linear algebra over F_p.
//!
//! Subspaces are kept as reduced row-echelon bases with no zero rows, so two
//! subspaces are equal exactly when their bases are equal entry for entry.

use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::gf::PrimeField;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("field mismatch: p = {0} vs p = {1}")]
    FieldMismatch(u64, u64),
    #[error("asked for {want} complement vectors but only {available} are available")]
    InsufficientDimension { want: usize, available: usize },
}

/// Row-major dense matrix of residues mod p.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
    field: PrimeField,
}

impl Matrix {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0; rows * cols],
            field,
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Build from row vectors; entries are reduced mod p.
    pub fn from_rows(field: PrimeField, cols: usize, rows: &[Vec<u64>]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged row");
            data.extend(r.iter().map(|&v| field.reduce(v)));
        }
        Self {
            rows: rows.len(),
            cols,
            data,
            field,
        }
    }

    pub fn from_fn(
        field: PrimeField,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> u64,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(field.reduce(f(i, j)));
            }
        }
        Self {
            rows,
            cols,
            data,
            field,
        }
    }

    /// I.i.d. uniform entries.
    pub fn random<R: Rng + ?Sized>(field: PrimeField, rows: usize, cols: usize, rng: &mut R) -> Self {
        let p = field.modulus();
        let data = (0..rows * cols).map(|_| rng.gen_range(0..p)).collect();
        Self {
            rows,
            cols,
            data,
            field,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = self.field.reduce(v);
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[u64]> {
        // chunks_exact(0) panics, and a zero-column matrix has no entries anyway.
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.data
    }

    pub fn push_row(&mut self, row: &[u64]) {
        assert_eq!(row.len(), self.cols, "row length");
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    /// The first `n` rows.
    pub fn top_rows(&self, n: usize) -> Matrix {
        let n = n.min(self.rows);
        Matrix {
            rows: n,
            cols: self.cols,
            data: self.data[..n * self.cols].to_vec(),
            field: self.field,
        }
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.field, 0, self.cols);
        for &i in idx {
            out.push_row(self.row(i));
        }
        out
    }

    pub fn without_row(&self, skip: usize) -> Matrix {
        let idx: Vec<usize> = (0..self.rows).filter(|&i| i != skip).collect();
        self.select_rows(&idx)
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.field, self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Stack row-wise. All parts must share the column count.
    pub fn vstack(field: PrimeField, cols: usize, parts: &[&Matrix]) -> Result<Matrix, LinalgError> {
        let mut out = Matrix::zeros(field, 0, cols);
        for m in parts {
            if m.cols != cols {
                return Err(LinalgError::DimensionMismatch(cols, m.cols));
            }
            if m.field != field {
                return Err(LinalgError::FieldMismatch(field.modulus(), m.field.modulus()));
            }
            out.data.extend_from_slice(&m.data);
            out.rows += m.rows;
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch(self.cols, other.rows));
        }
        let f = self.field;
        let mut out = Matrix::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                let src = other.row(k);
                let dst = out.row_mut(i);
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d = f.add(*d, f.mul(a, s));
                }
            }
        }
        Ok(out)
    }

    /// Bring the matrix to reduced row-echelon form in place, drop the zero
    /// rows, and return the pivot columns.
    pub fn rref_in_place(&mut self) -> Vec<usize> {
        let f = self.field;
        let (rows, cols) = (self.rows, self.cols);
        let mut pivots = Vec::new();
        let mut buf = vec![0u64; cols];
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(piv) = (r..rows).find(|&i| self.data[i * cols + c] != 0) else {
                continue;
            };
            if piv != r {
                for j in c..cols {
                    self.data.swap(piv * cols + j, r * cols + j);
                }
            }
            let inv = f.inv(self.data[r * cols + c]).expect("pivot is nonzero");
            for j in c..cols {
                let v = f.mul(self.data[r * cols + j], inv);
                self.data[r * cols + j] = v;
                buf[j] = v;
            }
            for i in 0..rows {
                if i == r {
                    continue;
                }
                let factor = self.data[i * cols + c];
                if factor == 0 {
                    continue;
                }
                let row = &mut self.data[i * cols..(i + 1) * cols];
                for j in c..cols {
                    if buf[j] != 0 {
                        row[j] = f.sub_mul(row[j], factor, buf[j]);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        self.data.truncate(r * cols);
        self.rows = r;
        pivots
    }

    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let p = m.rref_in_place();
        (m, p)
    }

    pub fn rank(&self) -> usize {
        rank(self)
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} over F_{}", self.rows, self.cols, self.field.modulus())?;
        for r in self.iter_rows() {
            writeln!(f, "  {:?}", r)?;
        }
        Ok(())
    }
}

/// Row rank via Gaussian elimination; 0 for an empty matrix.
pub fn rank(m: &Matrix) -> usize {
    if m.rows == 0 || m.cols == 0 {
        return 0;
    }
    m.rref().1.len()
}

/// A subspace of F_p^n held as a canonical (RREF) basis.
#[derive(Clone, PartialEq, Eq)]
pub struct Subspace {
    basis: Matrix,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(field: PrimeField, ambient_dim: usize) -> Self {
        Self {
            basis: Matrix::zeros(field, 0, ambient_dim),
            pivots: Vec::new(),
        }
    }

    pub fn full(field: PrimeField, ambient_dim: usize) -> Self {
        Self {
            basis: Matrix::identity(field, ambient_dim),
            pivots: (0..ambient_dim).collect(),
        }
    }

    /// Span of the rows of `m`.
    pub fn row_span(m: &Matrix) -> Self {
        let (basis, pivots) = m.rref();
        Self { basis, pivots }
    }

    /// Span of the columns of `m` (the usual ⟨E⟩ for a B x k cache matrix).
    pub fn column_span(m: &Matrix) -> Self {
        Self::row_span(&m.transpose())
    }

    pub fn dim(&self) -> usize {
        self.basis.rows
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.cols
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn field(&self) -> PrimeField {
        self.basis.field
    }

    /// Subtract the basis components of `v` in place; the result is zero iff
    /// `v` lies in the subspace.
    pub fn reduce_in_place(&self, v: &mut [u64]) {
        let f = self.basis.field;
        for (i, &pc) in self.pivots.iter().enumerate() {
            let factor = v[pc];
            if factor == 0 {
                continue;
            }
            let row = self.basis.row(i);
            for j in pc..v.len() {
                if row[j] != 0 {
                    v[j] = f.sub_mul(v[j], factor, row[j]);
                }
            }
        }
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        assert_eq!(v.len(), self.ambient_dim(), "vector length");
        let mut w = v.to_vec();
        self.reduce_in_place(&mut w);
        w.iter().all(|&x| x == 0)
    }

    pub fn contains_all(&self, m: &Matrix) -> bool {
        m.iter_rows().all(|r| self.contains(r))
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        other.contains_all(&self.basis)
    }

    /// The annihilator {y : <x, y> = 0 for all x in self}, i.e. the right
    /// kernel of the basis matrix.
    pub fn annihilator(&self) -> Subspace {
        let f = self.field();
        let n = self.ambient_dim();
        let mut is_pivot = vec![false; n];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        let mut out = Matrix::zeros(f, 0, n);
        let mut v = vec![0u64; n];
        for free in (0..n).filter(|&c| !is_pivot[c]) {
            v.iter_mut().for_each(|x| *x = 0);
            v[free] = 1;
            for (i, &pc) in self.pivots.iter().enumerate() {
                v[pc] = f.neg(self.basis.get(i, free));
            }
            out.push_row(&v);
        }
        // Rows are already in reduced echelon form up to ordering; canonicalize.
        Subspace::row_span(&out)
    }

    fn check_compatible(&self, other: &Subspace) -> Result<(), LinalgError> {
        if self.ambient_dim() != other.ambient_dim() {
            return Err(LinalgError::DimensionMismatch(
                self.ambient_dim(),
                other.ambient_dim(),
            ));
        }
        if self.field() != other.field() {
            return Err(LinalgError::FieldMismatch(
                self.field().modulus(),
                other.field().modulus(),
            ));
        }
        Ok(())
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace(dim {} in F^{})", self.dim(), self.ambient_dim())
    }
}

/// U + V.
pub fn sum_space(u: &Subspace, v: &Subspace) -> Result<Subspace, LinalgError> {
    u.check_compatible(v)?;
    let stacked = Matrix::vstack(u.field(), u.ambient_dim(), &[&u.basis, &v.basis])?;
    Ok(Subspace::row_span(&stacked))
}

/// U ∩ V by Zassenhaus: row-reduce [U | U; V | 0] and read the intersection
/// off the rows whose left half vanished.
pub fn intersect(u: &Subspace, v: &Subspace) -> Result<Subspace, LinalgError> {
    u.check_compatible(v)?;
    let f = u.field();
    let n = u.ambient_dim();
    if u.dim() == 0 || v.dim() == 0 {
        return Ok(Subspace::zero(f, n));
    }
    let mut big = Matrix::zeros(f, 0, 2 * n);
    let mut row = vec![0u64; 2 * n];
    for r in u.basis.iter_rows() {
        row[..n].copy_from_slice(r);
        row[n..].copy_from_slice(r);
        big.push_row(&row);
    }
    for r in v.basis.iter_rows() {
        row[..n].copy_from_slice(r);
        row[n..].iter_mut().for_each(|x| *x = 0);
        big.push_row(&row);
    }
    let pivots = big.rref_in_place();
    let mut inter = Matrix::zeros(f, 0, n);
    for (i, &pc) in pivots.iter().enumerate() {
        if pc >= n {
            inter.push_row(&big.row(i)[n..]);
        }
    }
    Ok(Subspace::row_span(&inter))
}

/// Intersection of many subspaces through their annihilators:
/// ∩ U_i = (Σ U_i^⊥)^⊥. Cheaper than a pairwise fold when the subspaces are
/// large, since only the (small) annihilators get stacked.
pub fn intersect_all_dual(annihilators: &[&Subspace], field: PrimeField, n: usize) -> Subspace {
    let parts: Vec<&Matrix> = annihilators.iter().map(|a| &a.basis).collect();
    let stacked = Matrix::vstack(field, n, &parts).expect("annihilators share the ambient space");
    Subspace::row_span(&stacked).annihilator()
}

/// Pick `want` rows of `candidates`, in order, that are jointly independent
/// of each other and of `part`. Returns the chosen rows unchanged.
pub fn complement_from(
    candidates: &Matrix,
    part: &Subspace,
    want: usize,
) -> Result<Matrix, LinalgError> {
    if candidates.cols != part.ambient_dim() {
        return Err(LinalgError::DimensionMismatch(candidates.cols, part.ambient_dim()));
    }
    let f = part.field();
    let n = part.ambient_dim();
    let mut chosen = Matrix::zeros(f, 0, n);
    if want == 0 {
        return Ok(chosen);
    }
    // Incremental echelon set: each entry is reduced against the ones before
    // it, so reducing in insertion order is sound.
    let mut echelon: Vec<(usize, Vec<u64>)> = Vec::new();
    for cand in candidates.iter_rows() {
        let mut w = cand.to_vec();
        part.reduce_in_place(&mut w);
        for (pc, prow) in &echelon {
            let factor = w[*pc];
            if factor != 0 {
                for j in *pc..n {
                    if prow[j] != 0 {
                        w[j] = f.sub_mul(w[j], factor, prow[j]);
                    }
                }
            }
        }
        let Some(pc) = w.iter().position(|&x| x != 0) else {
            continue;
        };
        let inv = f.inv(w[pc]).expect("nonzero");
        w.iter_mut().for_each(|x| *x = f.mul(*x, inv));
        echelon.push((pc, w));
        chosen.push_row(cand);
        if chosen.rows == want {
            return Ok(chosen);
        }
    }
    Err(LinalgError::InsufficientDimension {
        want,
        available: chosen.rows,
    })
}

/// `want` vectors inside `whole` that are jointly independent of `part`.
pub fn complement_basis(
    whole: &Subspace,
    part: &Subspace,
    want: usize,
) -> Result<Matrix, LinalgError> {
    whole.check_compatible(part)?;
    complement_from(&whole.basis, part, want)
}

/// Whether every row of `target` lies in the row span of `generators`.
pub fn in_rowspan(target: &Matrix, generators: &Matrix) -> Result<bool, LinalgError> {
    if target.cols != generators.cols {
        return Err(LinalgError::DimensionMismatch(target.cols, generators.cols));
    }
    if target.rows == 0 {
        return Ok(true);
    }
    let span = Subspace::row_span(generators);
    Ok(span.contains_all(target))
}
