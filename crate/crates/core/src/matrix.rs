//! Dense matrices over a [`Field`] with Gaussian elimination.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{Field, Symbol};

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Symbol>,
    field: Field,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} over GF({})", self.rows, self.cols, self.field.order())?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r).iter().map(|s| s.value()).collect::<Vec<_>>())?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Symbol::ZERO; rows * cols], field: field.clone() }
    }

    pub fn identity(field: &Field, size: usize) -> Self {
        let mut m = Matrix::zeros(field, size, size);
        for i in 0..size {
            m.set(i, i, Symbol::ONE);
        }
        m
    }

    pub fn from_vec(field: &Field, rows: usize, cols: usize, data: Vec<Symbol>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|s| !field.contains(**s)) {
            return Err(Error::InvalidSymbol { value: bad.value().into(), order: field.order() });
        }
        Ok(Matrix { rows, cols, data, field: field.clone() })
    }

    /// Builds a matrix from raw values; convenient in tests and examples.
    pub fn from_values(field: &Field, rows: &[&[u32]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch("ragged rows".into()));
            }
            for &v in *r {
                data.push(field.symbol(v)?);
            }
        }
        Ok(Matrix { rows: rows.len(), cols, data, field: field.clone() })
    }

    pub fn from_rows(field: &Field, rows: &[Vec<Symbol>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Matrix::from_vec(field, rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Symbol {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Symbol) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Symbol] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Symbol> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(&self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    /// The submatrix made of the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(&self.field, self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                m.set(r, j, self.get(r, c));
            }
        }
        m
    }

    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        let data = rows.iter().flat_map(|&r| self.row(r).iter().copied()).collect();
        Matrix { rows: rows.len(), cols: self.cols, data, field: self.field.clone() }
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        if self.cols != other.cols && self.rows > 0 && other.rows > 0 {
            return Err(Error::DimensionMismatch(format!(
                "cannot stack {} columns on {} columns",
                other.cols, self.cols
            )));
        }
        let cols = if self.rows > 0 { self.cols } else { other.cols };
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Matrix { rows: self.rows + other.rows, cols, data, field: self.field.clone() })
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut out = Matrix::zeros(f, self.rows, other.cols);
        for r in 0..self.rows {
            let acc = &mut out.data[r * other.cols..(r + 1) * other.cols];
            for k in 0..self.cols {
                f.axpy(acc, self.get(r, k), other.row(k));
            }
        }
        Ok(out)
    }

    /// `self * v` for a column vector `v`.
    pub fn mul_vec(&self, v: &[Symbol]) -> Result<Vec<Symbol>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows).map(|r| self.field.dot(self.row(r), v)).collect())
    }

    /// `v * self` for a row vector `v`.
    pub fn vec_mul(&self, v: &[Symbol]) -> Result<Vec<Symbol>> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {} rows",
                v.len(),
                self.rows
            )));
        }
        let mut acc = vec![Symbol::ZERO; self.cols];
        for (r, &c) in v.iter().enumerate() {
            self.field.axpy(&mut acc, c, self.row(r));
        }
        Ok(acc)
    }

    /// Reduces in place to row echelon form and returns the pivot columns.
    fn echelon(&mut self) -> Vec<usize> {
        let f = self.field.clone();
        let mut pivots = Vec::new();
        let mut lead = 0;
        for c in 0..self.cols {
            if lead == self.rows {
                break;
            }
            let Some(p) = (lead..self.rows).find(|&r| !self.get(r, c).is_zero()) else {
                continue;
            };
            if p != lead {
                for j in 0..self.cols {
                    self.data.swap(p * self.cols + j, lead * self.cols + j);
                }
            }
            let inv = f.inv(self.get(lead, c)).expect("pivot is nonzero");
            for j in 0..self.cols {
                let v = self.get(lead, j);
                self.set(lead, j, f.mul(v, inv));
            }
            let pivot_row = self.row(lead).to_vec();
            for r in 0..self.rows {
                if r == lead {
                    continue;
                }
                let factor = self.get(r, c);
                if !factor.is_zero() {
                    let row = &mut self.data[r * self.cols..(r + 1) * self.cols];
                    f.axpy(row, f.neg(factor), &pivot_row);
                }
            }
            pivots.push(c);
            lead += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().echelon().len()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn inverse(&self) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix has no inverse",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let mut aug = Matrix::zeros(&self.field, n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                aug.set(r, c, self.get(r, c));
            }
            aug.set(r, n + r, Symbol::ONE);
        }
        let pivots = aug.echelon();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(Error::SingularMatrix);
        }
        let cols: Vec<usize> = (n..2 * n).collect();
        Ok(aug.select_columns(&cols))
    }

    /// Solves `self * x = y` for square invertible `self`.
    pub fn solve(&self, y: &[Symbol]) -> Result<Vec<Symbol>> {
        if !self.is_square() || y.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "solve needs a square system, got {}x{} with rhs {}",
                self.rows,
                self.cols,
                y.len()
            )));
        }
        let n = self.rows;
        let mut aug = Matrix::zeros(&self.field, n, n + 1);
        for r in 0..n {
            for c in 0..n {
                aug.set(r, c, self.get(r, c));
            }
            aug.set(r, n, y[r]);
        }
        let pivots = aug.echelon();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(Error::SingularMatrix);
        }
        Ok(aug.column(n))
    }

    /// Whether every row of `other` lies in the row space of `self`.
    pub fn row_space_contains(&self, other: &Matrix) -> Result<bool> {
        if other.rows == 0 {
            return Ok(true);
        }
        let joined = self.vstack(other)?;
        Ok(joined.rank() == self.rank())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gf7() -> Field {
        Field::prime(7).unwrap()
    }

    #[test]
    fn rank_basics() {
        let f = Field::gf256();
        assert_eq!(Matrix::identity(&f, 3).rank(), 3);
        assert_eq!(Matrix::zeros(&f, 2, 5).rank(), 0);
        let m = Matrix::from_values(&f, &[&[3, 9], &[3, 9]]).unwrap();
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn solve_identity_and_diagonal() {
        let f = gf7();
        let y = vec![f.symbol(4).unwrap(), f.symbol(6).unwrap()];
        assert_eq!(Matrix::identity(&f, 2).solve(&y).unwrap(), y);
        let d = Matrix::from_values(&f, &[&[2, 0], &[0, 2]]).unwrap();
        let x = d.solve(&y).unwrap();
        assert_eq!(x, vec![f.symbol(2).unwrap(), f.symbol(3).unwrap()]);
    }

    #[test]
    fn solve_singular_fails() {
        let f = gf7();
        let m = Matrix::from_values(&f, &[&[1, 2], &[2, 4]]).unwrap();
        assert_eq!(m.solve(&[Symbol::ONE, Symbol::ONE]), Err(Error::SingularMatrix));
        assert_eq!(m.inverse(), Err(Error::SingularMatrix));
    }

    #[test]
    fn solve_random_roundtrip_gf256() {
        let f = Field::gf256();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut solved = 0;
        while solved < 20 {
            let a = Matrix::from_vec(&f, 4, 4, f.random_vec(&mut rng, 16)).unwrap();
            if a.rank() < 4 {
                continue;
            }
            let y = f.random_vec(&mut rng, 4);
            let x = a.solve(&y).unwrap();
            assert_eq!(a.mul_vec(&x).unwrap(), y);
            let inv = a.inverse().unwrap();
            assert_eq!(a.mul(&inv).unwrap(), Matrix::identity(&f, 4));
            solved += 1;
        }
    }

    #[test]
    fn field_mismatch_detected() {
        let a = Matrix::identity(&Field::gf256(), 2);
        let b = Matrix::identity(&gf7(), 2);
        assert_eq!(a.mul(&b), Err(Error::FieldMismatch));
        assert_eq!(a.vstack(&b), Err(Error::FieldMismatch));
    }

    #[test]
    fn row_space_membership() {
        let f = gf7();
        let base = Matrix::from_values(&f, &[&[1, 0, 1], &[0, 1, 1]]).unwrap();
        let inside = Matrix::from_values(&f, &[&[2, 3, 5]]).unwrap();
        let outside = Matrix::from_values(&f, &[&[0, 0, 1]]).unwrap();
        assert!(base.row_space_contains(&inside).unwrap());
        assert!(!base.row_space_contains(&outside).unwrap());
    }

    proptest! {
        #[test]
        fn gf256_field_axioms(a in 0u32..256, b in 0u32..256, c in 0u32..256) {
            let f = Field::gf256();
            let (a, b, c) = (f.symbol(a).unwrap(), f.symbol(b).unwrap(), f.symbol(c).unwrap());
            prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
            prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        }

        #[test]
        fn prime_field_axioms(a in 0u32..251, b in 0u32..251, c in 0u32..251) {
            let f = Field::prime(251).unwrap();
            let (a, b, c) = (f.symbol(a).unwrap(), f.symbol(b).unwrap(), f.symbol(c).unwrap());
            prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
            prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            prop_assert_eq!(f.sub(f.add(a, b), b), a);
        }

        #[test]
        fn rank_invariant_under_row_ops(seed in any::<u64>(), rows in 1usize..6, cols in 1usize..6) {
            let f = Field::gf256();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let data = f.random_vec(&mut rng, rows * cols);
            let m = Matrix::from_vec(&f, rows, cols, data).unwrap();
            let rank = m.rank();
            let mut order: Vec<usize> = (0..rows).collect();
            order.reverse();
            prop_assert_eq!(m.select_rows(&order).rank(), rank);
            let mut scaled = m.clone();
            let r = rng.random_range(0..rows);
            let c = f.symbol(rng.random_range(1..256)).unwrap();
            for j in 0..cols {
                let v = scaled.get(r, j);
                scaled.set(r, j, f.mul(v, c));
            }
            prop_assert_eq!(scaled.rank(), rank);
        }
    }
}
