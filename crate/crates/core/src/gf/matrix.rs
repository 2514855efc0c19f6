//! Dense matrices over GF(q) with deterministic Gaussian elimination.
//!
//! Elimination always picks the first nonzero entry in column order as the
//! pivot, so reduced forms, null-space bases and particular solutions are
//! canonical: the same input yields the same output on every platform. A
//! bit-packed fast path handles GF(2) and is required (and tested) to be
//! bit-identical to the generic path.

use super::FieldSpec;
use crate::error::{Error, Result};
use rand::Rng;

/// Row-major matrix over a finite field.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldMatrix {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    entries: Vec<u32>,
}

impl FieldMatrix {
    pub fn zero(field: FieldSpec, rows: usize, cols: usize) -> Self {
        FieldMatrix {
            field,
            rows,
            cols,
            entries: vec![0; rows * cols],
        }
    }

    pub fn identity(field: FieldSpec, n: usize) -> Self {
        let mut m = Self::zero(field, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Build from nested rows; all rows must have equal length and entries
    /// must lie in `[0, q)`.
    pub fn from_rows(field: FieldSpec, rows: Vec<Vec<u32>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut entries = Vec::with_capacity(nrows * ncols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has length {}, expected {ncols}",
                    row.len()
                )));
            }
            for &v in row {
                entries.push(field.check(v)?);
            }
        }
        Ok(FieldMatrix {
            field,
            rows: nrows,
            cols: ncols,
            entries,
        })
    }

    /// Build from a flat row-major buffer.
    pub fn from_flat(field: FieldSpec, rows: usize, cols: usize, entries: Vec<u32>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        for &v in &entries {
            field.check(v)?;
        }
        Ok(FieldMatrix {
            field,
            rows,
            cols,
            entries,
        })
    }

    /// A 1-row matrix.
    pub fn row_vector(field: FieldSpec, row: Vec<u32>) -> Result<Self> {
        let cols = row.len();
        Self::from_flat(field, 1, cols, row)
    }

    /// Uniformly random matrix; entries are drawn row-major so a seeded
    /// generator reproduces the same matrix.
    pub fn random<R: Rng + ?Sized>(field: FieldSpec, rows: usize, cols: usize, rng: &mut R) -> Self {
        let entries = (0..rows * cols).map(|_| field.random_element(rng)).collect();
        FieldMatrix {
            field,
            rows,
            cols,
            entries,
        }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.entries[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        debug_assert!(self.field.contains(v));
        self.entries[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<u32> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zero(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    fn check_same_field(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field.order(), other.field.order()));
        }
        Ok(())
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        self.check_same_field(rhs)?;
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let f = self.field;
        let mut out = Self::zero(f, self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    let prod = f.mul(a, rhs.get(k, j));
                    out.set(i, j, f.add(out.get(i, j), prod));
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product `self * v`.
    pub fn mat_vec(&self, v: &[u32]) -> Result<Vec<u32>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        let f = self.field;
        let mut out = vec![0u32; self.rows];
        for i in 0..self.rows {
            let mut acc = 0;
            for j in 0..self.cols {
                acc = f.add(acc, f.mul(self.get(i, j), v[j]));
            }
            out[i] = acc;
        }
        Ok(out)
    }

    /// Stack matrices with equal column counts on top of each other.
    pub fn stack_vertical(parts: &[&Self]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::DimensionMismatch("stack of zero matrices".into()))?;
        let field = first.field;
        let cols = first.cols;
        let mut entries = Vec::new();
        let mut rows = 0;
        for p in parts {
            first.check_same_field(p)?;
            if p.cols != cols {
                return Err(Error::DimensionMismatch(format!(
                    "stacking {} columns onto {} columns",
                    p.cols, cols
                )));
            }
            entries.extend_from_slice(&p.entries);
            rows += p.rows;
        }
        Ok(FieldMatrix {
            field,
            rows,
            cols,
            entries,
        })
    }

    /// Submatrix formed by the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut out = Self::zero(self.field, self.rows, cols.len());
        for i in 0..self.rows {
            for (jj, &j) in cols.iter().enumerate() {
                out.set(i, jj, self.get(i, j));
            }
        }
        out
    }

    /// Submatrix formed by the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut out = Self::zero(self.field, rows.len(), self.cols);
        for (ii, &i) in rows.iter().enumerate() {
            for j in 0..self.cols {
                out.set(ii, j, self.get(i, j));
            }
        }
        out
    }

    /// Place `rhs` to the right of `self`.
    pub fn augment(&self, rhs: &Self) -> Result<Self> {
        self.check_same_field(rhs)?;
        if self.rows != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "augmenting {} rows with {} rows",
                self.rows, rhs.rows
            )));
        }
        let mut out = Self::zero(self.field, self.rows, self.cols + rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j));
            }
            for j in 0..rhs.cols {
                out.set(i, self.cols + j, rhs.get(i, j));
            }
        }
        Ok(out)
    }

    /// Reduced row-echelon form plus pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        self.rref_prefix(self.cols)
    }

    /// Reduced row-echelon form where pivots may only be chosen among the
    /// first `prefix` columns; later columns still take part in row
    /// operations. Used to reduce augmented systems.
    pub fn rref_prefix(&self, prefix: usize) -> (Self, Vec<usize>) {
        debug_assert!(prefix <= self.cols);
        if self.field.order() == 2 {
            self.rref_prefix_gf2(prefix)
        } else {
            self.rref_prefix_generic(prefix)
        }
    }

    fn rref_prefix_generic(&self, prefix: usize) -> (Self, Vec<usize>) {
        let f = self.field;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..prefix {
            // first nonzero entry in column order is the pivot
            let Some(p) = (r..m.rows).find(|&i| m.get(i, c) != 0) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = f.inv(m.get(r, c)).expect("nonzero pivot");
            if inv != 1 {
                for j in 0..m.cols {
                    let v = f.mul(m.get(r, j), inv);
                    m.set(r, j, v);
                }
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let factor = m.get(i, c);
                if factor == 0 {
                    continue;
                }
                for j in 0..m.cols {
                    let v = f.sub(m.get(i, j), f.mul(factor, m.get(r, j)));
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
            if r == m.rows {
                break;
            }
        }
        (m, pivots)
    }

    /// Bit-packed elimination for GF(2); must match the generic path
    /// bit for bit (covered by tests).
    fn rref_prefix_gf2(&self, prefix: usize) -> (Self, Vec<usize>) {
        let words = self.cols.div_ceil(64).max(1);
        let mut packed: Vec<Vec<u64>> = (0..self.rows)
            .map(|i| {
                let mut w = vec![0u64; words];
                for j in 0..self.cols {
                    if self.get(i, j) == 1 {
                        w[j / 64] |= 1u64 << (j % 64);
                    }
                }
                w
            })
            .collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..prefix {
            let (wi, bit) = (c / 64, 1u64 << (c % 64));
            let Some(p) = (r..self.rows).find(|&i| packed[i][wi] & bit != 0) else {
                continue;
            };
            packed.swap(r, p);
            let pivot_row = packed[r].clone();
            for (i, row) in packed.iter_mut().enumerate() {
                if i != r && row[wi] & bit != 0 {
                    for (w, pw) in row.iter_mut().zip(&pivot_row) {
                        *w ^= pw;
                    }
                }
            }
            pivots.push(c);
            r += 1;
            if r == self.rows {
                break;
            }
        }
        let mut out = Self::zero(self.field, self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if packed[i][j / 64] >> (j % 64) & 1 == 1 {
                    out.set(i, j, 1);
                }
            }
        }
        (out, pivots)
    }

    #[cfg(test)]
    pub(crate) fn rref_generic_for_tests(&self) -> (Self, Vec<usize>) {
        self.rref_prefix_generic(self.cols)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Dimension of the row space.
    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Rows form a canonical basis of the right null space
    /// `{ v : self * v^T = 0 }`; the row count is `cols - rank`.
    pub fn nullspace_basis(&self) -> Self {
        let (r, pivots) = self.rref();
        let f = self.field;
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Self::zero(f, free.len(), self.cols);
        for (bi, &fc) in free.iter().enumerate() {
            basis.set(bi, fc, 1);
            for (pr, &pc) in pivots.iter().enumerate() {
                basis.set(bi, pc, f.neg(r.get(pr, fc)));
            }
        }
        basis
    }

    /// One solution of `self * x = b`, or `None` when the system is
    /// inconsistent. Free variables are set to zero, so the answer is
    /// canonical.
    pub fn solve_particular(&self, b: &[u32]) -> Result<Option<Vec<u32>>> {
        if b.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side of length {} against {} rows",
                b.len(),
                self.rows
            )));
        }
        let rhs = FieldMatrix::from_flat(self.field, self.rows, 1, b.to_vec())?;
        let aug = self.augment(&rhs)?;
        let (r, pivots) = aug.rref_prefix(self.cols);
        // inconsistent iff a row is all zero on the left with nonzero rhs
        for i in pivots.len()..self.rows {
            if r.get(i, self.cols) != 0 {
                return Ok(None);
            }
        }
        let mut x = vec![0u32; self.cols];
        for (pr, &pc) in pivots.iter().enumerate() {
            x[pc] = r.get(pr, self.cols);
        }
        Ok(Some(x))
    }

    /// Inverse of a square matrix, or `None` when the rank is deficient.
    pub fn invert(&self) -> Result<Option<Self>> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "inverse of a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let aug = self.augment(&Self::identity(self.field, self.rows))?;
        let (r, pivots) = aug.rref_prefix(self.cols);
        if pivots.len() < self.rows {
            return Ok(None);
        }
        let mut inv = Self::zero(self.field, self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                inv.set(i, j, r.get(i, self.cols + j));
            }
        }
        Ok(Some(inv))
    }

    /// Fixture text format: a `q rows cols` header line, then the entries
    /// row-major, whitespace separated.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {}\n", self.field.order(), self.rows, self.cols);
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let mut next_num = |what: &str| -> Result<u64> {
            tokens
                .next()
                .ok_or_else(|| Error::Parse {
                    line: 0,
                    msg: format!("missing {what}"),
                })?
                .parse::<u64>()
                .map_err(|e| Error::Parse {
                    line: 0,
                    msg: format!("bad {what}: {e}"),
                })
        };
        let q = next_num("field order")?;
        let rows = next_num("row count")? as usize;
        let cols = next_num("column count")? as usize;
        let field = FieldSpec::new(u32::try_from(q).map_err(|_| Error::UnsupportedFieldOrder(q))?)?;
        let mut entries = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            entries.push(next_num("entry")? as u32);
        }
        if tokens.next().is_some() {
            return Err(Error::Parse {
                line: 0,
                msg: "trailing tokens after matrix entries".into(),
            });
        }
        Self::from_flat(field, rows, cols, entries)
    }
}

impl std::fmt::Display for FieldMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}
