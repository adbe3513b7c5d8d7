//! Exact scalar and matrix arithmetic over prime fields and the integers.
//!
//! Matrices store `i64` entries. Over `GF(p)` every entry is a canonical
//! residue in `[0, p)`. Over `ℤ` the entries of module actions and
//! differentials stay small, so products are computed with checked
//! arithmetic and panic on overflow; anything that can blow up (Smith normal
//! form, invariant factors, integer solving) runs on a checked `i64` fast
//! path and falls back to arbitrary precision.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficient ring: a prime field `GF(p)` or the integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum RingSpec {
    #[serde(rename = "gf")]
    PrimeField { p: u32 },
    #[serde(rename = "int")]
    Integers,
}

impl RingSpec {
    /// `GF(p)`, rejecting non-primes.
    pub fn gf(p: u32) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::InvalidRing(format!("{p} is not prime")));
        }
        if p >= 1 << 31 {
            return Err(Error::InvalidRing(format!("{p} is too large")));
        }
        Ok(RingSpec::PrimeField { p })
    }

    pub fn is_field(&self) -> bool {
        matches!(self, RingSpec::PrimeField { .. })
    }

    /// `p` for `GF(p)`, 0 for `ℤ`.
    pub fn characteristic(&self) -> u32 {
        match self {
            RingSpec::PrimeField { p } => *p,
            RingSpec::Integers => 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RingSpec::PrimeField { p } => RingSpec::gf(*p).map(|_| ()),
            RingSpec::Integers => Ok(()),
        }
    }

    #[inline]
    pub fn reduce(&self, x: i64) -> i64 {
        match self {
            RingSpec::PrimeField { p } => x.rem_euclid(*p as i64),
            RingSpec::Integers => x,
        }
    }

    #[inline]
    pub fn add(&self, a: i64, b: i64) -> i64 {
        match self {
            RingSpec::PrimeField { p } => {
                let s = a + b;
                if s >= *p as i64 {
                    s - *p as i64
                } else {
                    s
                }
            }
            RingSpec::Integers => a.checked_add(b).expect("integer overflow in matrix arithmetic"),
        }
    }

    #[inline]
    pub fn sub(&self, a: i64, b: i64) -> i64 {
        match self {
            RingSpec::PrimeField { p } => {
                let s = a - b;
                if s < 0 {
                    s + *p as i64
                } else {
                    s
                }
            }
            RingSpec::Integers => a.checked_sub(b).expect("integer overflow in matrix arithmetic"),
        }
    }

    #[inline]
    pub fn mul(&self, a: i64, b: i64) -> i64 {
        match self {
            RingSpec::PrimeField { p } => (a * b) % *p as i64,
            RingSpec::Integers => a.checked_mul(b).expect("integer overflow in matrix arithmetic"),
        }
    }

    #[inline]
    pub fn neg(&self, a: i64) -> i64 {
        self.sub(0, a)
    }

    /// Multiplicative inverse in `GF(p)`; `None` for zero or over `ℤ` unless `±1`.
    pub fn inv(&self, a: i64) -> Option<i64> {
        match self {
            RingSpec::PrimeField { p } => {
                let a = self.reduce(a);
                if a == 0 {
                    None
                } else {
                    Some(pow_mod(a as u64, *p as u64 - 2, *p as u64) as i64)
                }
            }
            RingSpec::Integers => match a {
                1 => Some(1),
                -1 => Some(-1),
                _ => None,
            },
        }
    }

    /// The image of the integer `n` in the ring.
    pub fn from_int(&self, n: i64) -> i64 {
        self.reduce(n)
    }
}

impl fmt::Display for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingSpec::PrimeField { p } => write!(f, "GF({p})"),
            RingSpec::Integers => write!(f, "Z"),
        }
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    r
}

/// Dense matrix over a [`RingSpec`], row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    ring: RingSpec,
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} over {}", self.rows, self.cols, self.ring)?;
        for r in 0..self.rows.min(16) {
            writeln!(f, "  {:?}", &self.row(r)[..self.cols.min(24)])?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zeros(ring: RingSpec, rows: usize, cols: usize) -> Self {
        Matrix { ring, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(ring: RingSpec, n: usize) -> Self {
        let mut m = Self::zeros(ring, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Builds from row vectors, reducing entries into the ring.
    pub fn from_rows(ring: RingSpec, rows: &[Vec<i64>]) -> Result<Self> {
        let c = rows.first().map_or(0, |x| x.len());
        Self::from_rows_with_cols(ring, rows, c)
    }

    /// Like [`Matrix::from_rows`] but fixes the column count (needed for `r x 0` shapes
    /// and to validate ragged input).
    pub fn from_rows_with_cols(ring: RingSpec, rows: &[Vec<i64>], cols: usize) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::ShapeMismatch(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            data.extend(row.iter().map(|&x| ring.reduce(x)));
        }
        Ok(Matrix { ring, rows: rows.len(), cols, data })
    }

    pub fn from_vec(ring: RingSpec, rows: usize, cols: usize, data: Vec<i64>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must equal rows*cols");
        let data = data.into_iter().map(|x| ring.reduce(x)).collect();
        Matrix { ring, rows, cols, data }
    }

    /// A single column vector.
    pub fn column(ring: RingSpec, v: &[i64]) -> Self {
        Self::from_vec(ring, v.len(), 1, v.to_vec())
    }

    pub fn ring(&self) -> RingSpec {
        self.ring
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
    pub fn data(&self) -> &[i64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: i64) {
        self.data[r * self.cols + c] = self.ring.reduce(v);
    }

    pub fn row(&self, r: usize) -> &[i64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn col_vec(&self, c: usize) -> Vec<i64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows)
                .all(|r| (0..self.cols).all(|c| self.get(r, c) == if r == c { 1 } else { 0 }))
    }

    fn check_ring(&self, other: &Matrix) {
        assert_eq!(self.ring, other.ring, "matrix ring mismatch");
    }

    /// Matrix product; panics on shape or ring mismatch.
    pub fn mul(&self, other: &Matrix) -> Matrix {
        self.check_ring(other);
        assert_eq!(
            self.cols, other.rows,
            "shape mismatch in product: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let (n, k, m) = (self.rows, self.cols, other.cols);
        let mut out = vec![0i64; n * m];
        match self.ring {
            RingSpec::PrimeField { p } => {
                let p = p as i64;
                // accumulate without reduction while the sum stays below 2^62
                let bound = ((1i64 << 62) / ((p - 1).max(1) * (p - 1).max(1))).max(1);
                for i in 0..n {
                    let orow = &mut out[i * m..(i + 1) * m];
                    let mut pending = 0i64;
                    for t in 0..k {
                        let a = self.data[i * k + t];
                        if a == 0 {
                            continue;
                        }
                        let brow = &other.data[t * m..(t + 1) * m];
                        for (o, &b) in orow.iter_mut().zip(brow) {
                            *o += a * b;
                        }
                        pending += 1;
                        if pending >= bound - 1 {
                            for o in orow.iter_mut() {
                                *o %= p;
                            }
                            pending = 0;
                        }
                    }
                    for o in orow.iter_mut() {
                        *o %= p;
                    }
                }
            }
            RingSpec::Integers => {
                for i in 0..n {
                    for t in 0..k {
                        let a = self.data[i * k + t];
                        if a == 0 {
                            continue;
                        }
                        for j in 0..m {
                            let b = other.data[t * m + j];
                            if b != 0 {
                                let prod = a.checked_mul(b).expect("integer overflow in matrix product");
                                out[i * m + j] = out[i * m + j]
                                    .checked_add(prod)
                                    .expect("integer overflow in matrix product");
                            }
                        }
                    }
                }
            }
        }
        Matrix { ring: self.ring, rows: n, cols: m, data: out }
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        self.check_ring(other);
        assert_eq!(self.shape(), other.shape(), "shape mismatch in sum");
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| self.ring.add(a, b)).collect();
        Matrix { ring: self.ring, rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        self.check_ring(other);
        assert_eq!(self.shape(), other.shape(), "shape mismatch in difference");
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| self.ring.sub(a, b)).collect();
        Matrix { ring: self.ring, rows: self.rows, cols: self.cols, data }
    }

    pub fn neg(&self) -> Matrix {
        self.scale(-1)
    }

    pub fn scale(&self, s: i64) -> Matrix {
        let s = self.ring.reduce(s);
        let data = self.data.iter().map(|&a| self.ring.mul(a, s)).collect();
        Matrix { ring: self.ring, rows: self.rows, cols: self.cols, data }
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.ring, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        out
    }

    /// Kronecker product `self ⊗ other`; row index `i*other.rows + k`.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        self.check_ring(other);
        let (r1, c1, r2, c2) = (self.rows, self.cols, other.rows, other.cols);
        let mut out = Matrix::zeros(self.ring, r1 * r2, c1 * c2);
        for i in 0..r1 {
            for j in 0..c1 {
                let a = self.get(i, j);
                if a == 0 {
                    continue;
                }
                for k in 0..r2 {
                    for l in 0..c2 {
                        let b = other.get(k, l);
                        if b != 0 {
                            out.data[(i * r2 + k) * (c1 * c2) + j * c2 + l] = self.ring.mul(a, b);
                        }
                    }
                }
            }
        }
        out
    }

    /// Copies `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Matrix) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols, "block out of range");
        for r in 0..block.rows {
            let dst = (r0 + r) * self.cols + c0;
            self.data[dst..dst + block.cols].copy_from_slice(block.row(r));
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Matrix {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols, "block out of range");
        let mut out = Matrix::zeros(self.ring, rows, cols);
        for r in 0..rows {
            let src = (r0 + r) * self.cols + c0;
            out.data[r * cols..(r + 1) * cols].copy_from_slice(&self.data[src..src + cols]);
        }
        out
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.ring, idx.len(), self.cols);
        for (i, &r) in idx.iter().enumerate() {
            out.data[i * self.cols..(i + 1) * self.cols].copy_from_slice(self.row(r));
        }
        out
    }

    pub fn select_cols(&self, idx: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.ring, self.rows, idx.len());
        for r in 0..self.rows {
            for (j, &c) in idx.iter().enumerate() {
                out.data[r * idx.len() + j] = self.get(r, c);
            }
        }
        out
    }

    pub fn hstack(&self, other: &Matrix) -> Matrix {
        self.check_ring(other);
        assert_eq!(self.rows, other.rows, "hstack row mismatch");
        let mut out = Matrix::zeros(self.ring, self.rows, self.cols + other.cols);
        out.set_block(0, 0, self);
        out.set_block(0, self.cols, other);
        out
    }

    pub fn vstack(&self, other: &Matrix) -> Matrix {
        self.check_ring(other);
        assert_eq!(self.cols, other.cols, "vstack column mismatch");
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Matrix { ring: self.ring, rows: self.rows + other.rows, cols: self.cols, data }
    }

    pub fn block_diag(&self, other: &Matrix) -> Matrix {
        self.check_ring(other);
        let mut out = Matrix::zeros(self.ring, self.rows + other.rows, self.cols + other.cols);
        out.set_block(0, 0, self);
        out.set_block(self.rows, self.cols, other);
        out
    }

    /// Number of nonzero entries.
    pub fn nnz(&self) -> usize {
        self.data.iter().filter(|&&x| x != 0).count()
    }

    /// Reduced row echelon data over a prime field.
    pub fn rref_field(&self) -> Result<Rref> {
        if !self.ring.is_field() {
            return Err(Error::RingMismatch("rref_field called on an integer matrix".into()));
        }
        let mut a = self.clone();
        let pivots = a.gauss_jordan_in_place(true);
        let kernel_basis = kernel_from_rref(&a, &pivots);
        Ok(Rref { rank: pivots.len(), pivot_cols: pivots, reduced: a, kernel_basis })
    }

    /// Row-reduces in place over a field and returns pivot columns.
    /// With `full`, entries above pivots are cleared as well (RREF).
    fn gauss_jordan_in_place(&mut self, full: bool) -> Vec<usize> {
        let ring = self.ring;
        let p = ring.characteristic() as i64;
        let (rows, cols) = (self.rows, self.cols);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(piv) = (r..rows).find(|&i| self.data[i * cols + c] != 0) else { continue };
            if piv != r {
                for j in 0..cols {
                    self.data.swap(piv * cols + j, r * cols + j);
                }
            }
            let inv = ring.inv(self.data[r * cols + c]).expect("nonzero pivot");
            if inv != 1 {
                for j in c..cols {
                    let x = self.data[r * cols + j];
                    if x != 0 {
                        self.data[r * cols + j] = x * inv % p;
                    }
                }
            }
            let (head, tail) = self.data.split_at_mut(r * cols);
            let (prow, rest) = tail.split_at_mut(cols);
            let prow = &*prow;
            let eliminate = |row: &mut [i64]| {
                let f = row[c];
                if f != 0 {
                    let f = p - f;
                    for j in c..cols {
                        let b = prow[j];
                        if b != 0 {
                            row[j] = (row[j] + f * b) % p;
                        }
                    }
                }
            };
            for row in rest.chunks_mut(cols) {
                eliminate(row);
            }
            if full {
                for row in head.chunks_mut(cols) {
                    eliminate(row);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// Rank over a field, or over `ℚ` for integer matrices.
    pub fn rank(&self) -> usize {
        if self.ring.is_field() {
            let mut a = self.clone();
            a.gauss_jordan_in_place(false).len()
        } else {
            invariant_factors(self).len()
        }
    }

    /// Basis (as columns) of `{x : self·x = 0}` over a field.
    pub fn kernel(&self) -> Result<Matrix> {
        Ok(self.rref_field()?.kernel_basis)
    }

    /// Basis of the column space over a field, as a subset of the columns.
    pub fn column_space(&self) -> Result<Matrix> {
        let r = self.rref_field()?;
        Ok(self.select_cols(&r.pivot_cols))
    }

    /// Inverse over a field; `None` if singular.
    pub fn inverse(&self) -> Result<Option<Matrix>> {
        if self.rows != self.cols {
            return Err(Error::ShapeMismatch("inverse of a non-square matrix".into()));
        }
        solve_field(self, &Matrix::identity(self.ring, self.rows))
    }

    /// Inverse over a field, or over `ℤ` when the matrix is unimodular.
    pub fn inverse_any(&self) -> Option<Matrix> {
        if self.ring.is_field() {
            self.inverse().ok().flatten()
        } else {
            solve_integer(self, &Matrix::identity(self.ring, self.rows)).ok().flatten()
        }
    }

    pub fn is_invertible(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        if self.ring.is_field() {
            self.rank() == self.rows
        } else {
            let f = invariant_factors(self);
            f.len() == self.rows && f.iter().all(|d| d.is_one())
        }
    }

    /// Reinterprets the entries in another ring (reducing).
    pub fn change_ring(&self, ring: RingSpec) -> Matrix {
        Matrix::from_vec(ring, self.rows, self.cols, self.data.clone())
    }

    /// Entries as signed integers: for `GF(p)` residues above `p/2` become negative.
    pub fn signed_entries(&self) -> Vec<i64> {
        match self.ring {
            RingSpec::PrimeField { p } => {
                let p = p as i64;
                self.data.iter().map(|&x| if x > p / 2 { x - p } else { x }).collect()
            }
            RingSpec::Integers => self.data.clone(),
        }
    }

    /// Nonzero entries of each column as `(row, value)` pairs.
    pub fn sparse_columns(&self) -> Vec<Vec<(usize, i64)>> {
        let mut cols = vec![Vec::new(); self.cols];
        for r in 0..self.rows {
            for (c, &v) in self.row(r).iter().enumerate() {
                if v != 0 {
                    cols[c].push((r, v));
                }
            }
        }
        cols
    }
}

/// Output of [`Matrix::rref_field`].
#[derive(Debug, Clone)]
pub struct Rref {
    pub rank: usize,
    pub pivot_cols: Vec<usize>,
    pub reduced: Matrix,
    /// Columns span the null space.
    pub kernel_basis: Matrix,
}

fn kernel_from_rref(a: &Matrix, pivots: &[usize]) -> Matrix {
    let ring = a.ring;
    let cols = a.cols;
    let mut is_pivot = vec![None; cols];
    for (i, &c) in pivots.iter().enumerate() {
        is_pivot[c] = Some(i);
    }
    let free: Vec<usize> = (0..cols).filter(|&c| is_pivot[c].is_none()).collect();
    let mut k = Matrix::zeros(ring, cols, free.len());
    for (j, &f) in free.iter().enumerate() {
        k.data[f * free.len() + j] = 1;
        for (i, &pc) in pivots.iter().enumerate() {
            let v = a.get(i, f);
            if v != 0 {
                k.data[pc * free.len() + j] = ring.neg(v);
            }
        }
    }
    k
}

/// Particular solution `x` of `a·x = b` over a prime field, or `None` if inconsistent.
pub fn solve_field(a: &Matrix, b: &Matrix) -> Result<Option<Matrix>> {
    if !a.ring.is_field() {
        return Err(Error::NotAField);
    }
    if a.ring != b.ring {
        return Err(Error::RingMismatch("solve_field operands".into()));
    }
    if a.rows != b.rows {
        return Err(Error::ShapeMismatch(format!(
            "solve_field: A has {} rows, b has {}",
            a.rows, b.rows
        )));
    }
    let mut aug = a.hstack(b);
    let pivots = aug.gauss_jordan_in_place(true);
    if pivots.iter().any(|&c| c >= a.cols) {
        return Ok(None);
    }
    let mut x = Matrix::zeros(a.ring, a.cols, b.cols);
    for (i, &c) in pivots.iter().enumerate() {
        for j in 0..b.cols {
            x.data[c * b.cols + j] = aug.get(i, a.cols + j);
        }
    }
    Ok(Some(x))
}

/// Dense matrix of arbitrary-precision integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<BigInt>,
}

impl ZMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ZMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }
    pub fn from_matrix(m: &Matrix) -> Self {
        ZMatrix { rows: m.rows, cols: m.cols, data: m.data.iter().map(|&x| BigInt::from(x)).collect() }
    }
    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.data[r * self.cols + c]
    }
    pub fn mul(&self, o: &ZMatrix) -> ZMatrix {
        assert_eq!(self.cols, o.rows, "shape mismatch in integer product");
        let mut out = ZMatrix::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = &o.data[k * o.cols + j];
                    if !b.is_zero() {
                        out.data[i * o.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }
    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.data.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k * n + k].is_zero() {
                match (k + 1..n).find(|&i| !a[i * n + k].is_zero()) {
                    Some(i) => {
                        for j in 0..n {
                            a.swap(i * n + j, k * n + j);
                        }
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i * n + j] * &a[k * n + k] - &a[i * n + k] * &a[k * n + j];
                    a[i * n + j] = v / &prev;
                }
            }
            prev = a[k * n + k].clone();
        }
        sign * &a[n * n - 1]
    }
    /// Converts to an `i64` matrix over `ℤ` if every entry fits.
    pub fn to_matrix(&self) -> Option<Matrix> {
        let data: Option<Vec<i64>> = self.data.iter().map(|x| x.to_i64()).collect();
        data.map(|d| Matrix { ring: RingSpec::Integers, rows: self.rows, cols: self.cols, data: d })
    }
}

/// Smith normal form `U·A·V = D` over the integers.
#[derive(Debug, Clone)]
pub struct Snf {
    pub d: ZMatrix,
    pub u: ZMatrix,
    pub v: ZMatrix,
}

impl Snf {
    /// Nonzero diagonal entries `d₁ | d₂ | …`.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        (0..self.d.rows.min(self.d.cols))
            .map(|i| self.d.get(i, i).clone())
            .filter(|x| !x.is_zero())
            .collect()
    }
}

/// Euclidean scalar used by the elimination kernels: `i64` with overflow
/// detection, or `BigInt`.
trait Euclid: Clone + PartialEq {
    fn e_zero() -> Self;
    fn e_one() -> Self;
    fn e_is_zero(&self) -> bool;
    fn e_is_unit(&self) -> bool;
    fn e_neg(&self) -> Option<Self>;
    /// `self - q*o`
    fn sub_mul(&self, q: &Self, o: &Self) -> Option<Self>;
    fn e_div_floor(&self, o: &Self) -> Self;
    fn e_rem_zero(&self, o: &Self) -> bool;
    fn e_is_negative(&self) -> bool;
    fn to_big(&self) -> BigInt;
    fn small_abs(&self) -> u128;
}

impl Euclid for i64 {
    fn e_zero() -> Self {
        0
    }
    fn e_one() -> Self {
        1
    }
    fn e_is_zero(&self) -> bool {
        *self == 0
    }
    fn e_is_unit(&self) -> bool {
        *self == 1 || *self == -1
    }
    fn e_neg(&self) -> Option<Self> {
        self.checked_neg()
    }
    fn sub_mul(&self, q: &Self, o: &Self) -> Option<Self> {
        q.checked_mul(*o).and_then(|t| self.checked_sub(t))
    }
    fn e_div_floor(&self, o: &Self) -> Self {
        Integer::div_floor(self, o)
    }
    fn e_rem_zero(&self, o: &Self) -> bool {
        self % o == 0
    }
    fn e_is_negative(&self) -> bool {
        *self < 0
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn small_abs(&self) -> u128 {
        self.unsigned_abs() as u128
    }
}

impl Euclid for BigInt {
    fn e_zero() -> Self {
        Zero::zero()
    }
    fn e_one() -> Self {
        One::one()
    }
    fn e_is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn e_is_unit(&self) -> bool {
        self.abs().is_one()
    }
    fn e_neg(&self) -> Option<Self> {
        Some(-self)
    }
    fn sub_mul(&self, q: &Self, o: &Self) -> Option<Self> {
        Some(self - q * o)
    }
    fn e_div_floor(&self, o: &Self) -> Self {
        Integer::div_floor(self, o)
    }
    fn e_rem_zero(&self, o: &Self) -> bool {
        Zero::is_zero(&(self % o))
    }
    fn e_is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
    fn small_abs(&self) -> u128 {
        self.abs().to_u128().unwrap_or(u128::MAX)
    }
}

struct Work<T> {
    rows: usize,
    cols: usize,
    a: Vec<T>,
    u: Option<Vec<T>>,
    v: Option<Vec<T>>,
}

impl<T: Euclid> Work<T> {
    fn at(&self, r: usize, c: usize) -> &T {
        &self.a[r * self.cols + c]
    }
    /// row_i -= q * row_j
    fn row_op(&mut self, i: usize, j: usize, q: &T) -> Option<()> {
        let c = self.cols;
        for k in 0..c {
            let x = self.a[j * c + k].clone();
            if !x.e_is_zero() {
                self.a[i * c + k] = self.a[i * c + k].sub_mul(q, &x)?;
            }
        }
        if let Some(u) = self.u.as_mut() {
            let n = self.rows;
            for k in 0..n {
                let x = u[j * n + k].clone();
                if !x.e_is_zero() {
                    u[i * n + k] = u[i * n + k].sub_mul(q, &x)?;
                }
            }
        }
        Some(())
    }
    /// col_i -= q * col_j
    fn col_op(&mut self, i: usize, j: usize, q: &T) -> Option<()> {
        let c = self.cols;
        for r in 0..self.rows {
            let x = self.a[r * c + j].clone();
            if !x.e_is_zero() {
                self.a[r * c + i] = self.a[r * c + i].sub_mul(q, &x)?;
            }
        }
        if let Some(v) = self.v.as_mut() {
            for r in 0..c {
                let x = v[r * c + j].clone();
                if !x.e_is_zero() {
                    v[r * c + i] = v[r * c + i].sub_mul(q, &x)?;
                }
            }
        }
        Some(())
    }
    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        let c = self.cols;
        for k in 0..c {
            self.a.swap(i * c + k, j * c + k);
        }
        if let Some(u) = self.u.as_mut() {
            let n = self.rows;
            for k in 0..n {
                u.swap(i * n + k, j * n + k);
            }
        }
    }
    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        let c = self.cols;
        for r in 0..self.rows {
            self.a.swap(r * c + i, r * c + j);
        }
        if let Some(v) = self.v.as_mut() {
            for r in 0..c {
                v.swap(r * c + i, r * c + j);
            }
        }
    }
    fn negate_row(&mut self, i: usize) -> Option<()> {
        let c = self.cols;
        for k in 0..c {
            self.a[i * c + k] = self.a[i * c + k].e_neg()?;
        }
        if let Some(u) = self.u.as_mut() {
            let n = self.rows;
            for k in 0..n {
                u[i * n + k] = u[i * n + k].e_neg()?;
            }
        }
        Some(())
    }
}

fn identity_vec<T: Euclid>(n: usize) -> Vec<T> {
    let mut v = vec![T::e_zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::e_one();
    }
    v
}

/// Diagonalizes `w.a` with unimodular row/column operations. With
/// `strict_pivot` the pivot is the entry of smallest absolute value (ties:
/// lowest row, then column); otherwise the first unit entry is taken when one
/// exists. Returns `None` on `i64` overflow.
fn diagonalize<T: Euclid>(w: &mut Work<T>, strict_pivot: bool) -> Option<usize> {
    let (rows, cols) = (w.rows, w.cols);
    let mut t = 0;
    while t < rows.min(cols) {
        // pivot search in the active block
        let mut best: Option<(usize, usize, u128)> = None;
        'search: for r in t..rows {
            for c in t..cols {
                let x = w.at(r, c);
                if x.e_is_zero() {
                    continue;
                }
                if !strict_pivot && x.e_is_unit() {
                    best = Some((r, c, 1));
                    break 'search;
                }
                let key = x.small_abs();
                if best.map_or(true, |(_, _, k)| key < k) {
                    best = Some((r, c, key));
                    if key == 1 && strict_pivot {
                        // nothing smaller exists; earlier (row, col) already preferred
                        break 'search;
                    }
                }
            }
        }
        let Some((pr, pc, _)) = best else { break };
        w.swap_rows(t, pr);
        w.swap_cols(t, pc);
        loop {
            let mut dirty = false;
            // clear column t
            for r in t + 1..rows {
                if w.at(r, t).e_is_zero() {
                    continue;
                }
                let q = w.at(r, t).e_div_floor(w.at(t, t));
                w.row_op(r, t, &q)?;
                if !w.at(r, t).e_is_zero() {
                    dirty = true;
                }
            }
            // clear row t
            for c in t + 1..cols {
                if w.at(t, c).e_is_zero() {
                    continue;
                }
                let q = w.at(t, c).e_div_floor(w.at(t, t));
                w.col_op(c, t, &q)?;
                if !w.at(t, c).e_is_zero() {
                    dirty = true;
                }
            }
            if !dirty {
                break;
            }
            // move the smallest remaining entry of row/column t to the pivot
            let mut best = (t, t, w.at(t, t).small_abs());
            for r in t + 1..rows {
                let x = w.at(r, t);
                if !x.e_is_zero() && x.small_abs() < best.2 {
                    best = (r, t, x.small_abs());
                }
            }
            for c in t + 1..cols {
                let x = w.at(t, c);
                if !x.e_is_zero() && x.small_abs() < best.2 {
                    best = (t, c, x.small_abs());
                }
            }
            w.swap_rows(t, best.0);
            w.swap_cols(t, best.1);
        }
        t += 1;
    }
    Some(t)
}

/// Full Smith normal form with transforms, following the smallest-pivot rule.
fn snf_generic<T: Euclid>(m: &Matrix) -> Option<(Vec<T>, Vec<T>, Vec<T>)>
where
    T: From<i64>,
{
    let (rows, cols) = m.shape();
    let mut w = Work {
        rows,
        cols,
        a: m.data.iter().map(|&x| T::from(x)).collect(),
        u: Some(identity_vec(rows)),
        v: Some(identity_vec(cols)),
    };
    loop {
        let r = diagonalize(&mut w, true)?;
        // enforce the divisibility chain: if d_i ∤ d_j, add row j to row i and redo
        let mut fixed = true;
        'outer: for i in 0..r {
            for j in i + 1..r {
                if !w.at(j, j).e_rem_zero(w.at(i, i)) {
                    let minus_one = T::e_one().e_neg()?;
                    w.row_op(i, j, &minus_one)?;
                    fixed = false;
                    break 'outer;
                }
            }
        }
        if fixed {
            for i in 0..r {
                if w.at(i, i).e_is_negative() {
                    w.negate_row(i)?;
                }
            }
            return Some((w.a, w.u.unwrap(), w.v.unwrap()));
        }
    }
}

/// Smith normal form over `ℤ`: `U·A·V = D`, `U`,`V` unimodular, `D` diagonal with
/// nonnegative entries forming a divisibility chain.
pub fn smith_normal_form(a: &Matrix) -> Result<Snf> {
    if a.ring != RingSpec::Integers {
        return Err(Error::RingMismatch("smith_normal_form requires integer matrices".into()));
    }
    let (rows, cols) = a.shape();
    let to_z = |v: Vec<BigInt>, r: usize, c: usize| ZMatrix { rows: r, cols: c, data: v };
    if let Some((d, u, v)) = snf_generic::<i64>(a) {
        let big = |x: Vec<i64>| x.into_iter().map(BigInt::from).collect::<Vec<_>>();
        return Ok(Snf { d: to_z(big(d), rows, cols), u: to_z(big(u), rows, rows), v: to_z(big(v), cols, cols) });
    }
    let (d, u, v) = snf_generic::<BigInt>(a).expect("bigint arithmetic cannot overflow");
    Ok(Snf { d: to_z(d, rows, cols), u: to_z(u, rows, rows), v: to_z(v, cols, cols) })
}

/// Invariant factors (nonzero Smith diagonal, sorted by divisibility) of an
/// integer matrix. Over a field this returns `rank` ones.
pub fn invariant_factors(a: &Matrix) -> Vec<BigInt> {
    if a.ring.is_field() {
        return vec![BigInt::one(); a.rank()];
    }
    fn run<T: Euclid + From<i64>>(a: &Matrix) -> Option<Vec<BigInt>> {
        let mut w = Work { rows: a.rows, cols: a.cols, a: a.data.iter().map(|&x| T::from(x)).collect(), u: None, v: None };
        let r = diagonalize(&mut w, false)?;
        Some((0..r).map(|i| w.at(i, i).to_big().abs()).collect())
    }
    let diag = run::<i64>(a).unwrap_or_else(|| run::<BigInt>(a).expect("bigint arithmetic cannot overflow"));
    normalize_diagonal(diag)
}

/// Turns an arbitrary nonzero diagonal into the divisibility chain of the
/// equivalent Smith form via repeated gcd/lcm.
fn normalize_diagonal(mut d: Vec<BigInt>) -> Vec<BigInt> {
    let n = d.len();
    for i in 0..n {
        for j in i + 1..n {
            if d[i].is_one() {
                break;
            }
            if !(&d[j] % &d[i]).is_zero() {
                let g = d[i].gcd(&d[j]);
                let l = d[i].lcm(&d[j]);
                d[i] = g;
                d[j] = l;
            }
        }
    }
    d.sort();
    d
}

/// Integer solution of `a·x = b` (all columns of `b`), or `None` if none exists.
pub fn solve_integer(a: &Matrix, b: &Matrix) -> Result<Option<Matrix>> {
    if a.ring != RingSpec::Integers || b.ring != RingSpec::Integers {
        return Err(Error::RingMismatch("solve_integer requires integer matrices".into()));
    }
    if a.rows != b.rows {
        return Err(Error::ShapeMismatch("solve_integer: row mismatch".into()));
    }
    let snf = smith_normal_form(a)?;
    // A = U⁻¹ D V⁻¹, so A x = b  ⇔  D (V⁻¹ x) = U b
    let ub = snf.u.mul(&ZMatrix::from_matrix(b));
    let mut y = ZMatrix::zeros(a.cols, b.cols);
    for i in 0..a.rows {
        let d = if i < a.cols { snf.d.get(i, i).clone() } else { BigInt::zero() };
        for j in 0..b.cols {
            let rhs = ub.get(i, j);
            if d.is_zero() {
                if !rhs.is_zero() {
                    return Ok(None);
                }
            } else {
                if !(rhs % &d).is_zero() {
                    return Ok(None);
                }
                y.data[i * b.cols + j] = rhs / &d;
            }
        }
    }
    let x = snf.v.mul(&y);
    Ok(x.to_matrix())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u32) -> RingSpec {
        RingSpec::gf(p).unwrap()
    }

    #[test]
    fn identity_rref() {
        let r = Matrix::identity(gf(2), 3).rref_field().unwrap();
        assert_eq!(r.rank, 3);
        assert_eq!(r.kernel_basis.cols(), 0);
    }

    #[test]
    fn single_row_kernel() {
        let a = Matrix::from_rows(gf(2), &[vec![1, 1]]).unwrap();
        let r = a.rref_field().unwrap();
        assert_eq!(r.rank, 1);
        assert_eq!(r.kernel_basis.col_vec(0), vec![1, 1]);
    }

    #[test]
    fn rref_rejects_integers() {
        let a = Matrix::identity(RingSpec::Integers, 2);
        assert!(matches!(a.rref_field(), Err(Error::RingMismatch(_))));
    }

    #[test]
    fn solve_identity_and_inconsistent() {
        let ring = gf(5);
        let b = Matrix::column(ring, &[1, 2, 3]);
        assert_eq!(solve_field(&Matrix::identity(ring, 3), &b).unwrap(), Some(b.clone()));
        assert_eq!(solve_field(&Matrix::zeros(ring, 3, 3), &b).unwrap(), None);
        let bad = Matrix::column(ring, &[1, 2]);
        assert!(matches!(solve_field(&Matrix::identity(ring, 3), &bad), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn snf_of_diag_2_3() {
        let a = Matrix::from_rows(RingSpec::Integers, &[vec![2, 0], vec![0, 3]]).unwrap();
        let s = smith_normal_form(&a).unwrap();
        assert_eq!(s.invariant_factors(), vec![BigInt::from(1), BigInt::from(6)]);
        assert_eq!(s.u.mul(&ZMatrix::from_matrix(&a)).mul(&s.v), s.d);
        assert_eq!(s.u.determinant().abs(), BigInt::one());
        assert_eq!(s.v.determinant().abs(), BigInt::one());
    }

    #[test]
    fn snf_of_zero() {
        let a = Matrix::zeros(RingSpec::Integers, 2, 3);
        let s = smith_normal_form(&a).unwrap();
        assert!(s.invariant_factors().is_empty());
        assert_eq!(s.u, ZMatrix::identity(2));
        assert_eq!(s.v, ZMatrix::identity(3));
    }

    #[test]
    fn integer_solve() {
        let a = Matrix::from_rows(RingSpec::Integers, &[vec![2, 4], vec![0, 3]]).unwrap();
        let b = Matrix::column(RingSpec::Integers, &[6, 3]);
        let x = solve_integer(&a, &b).unwrap().unwrap();
        assert_eq!(a.mul(&x), b);
        let b2 = Matrix::column(RingSpec::Integers, &[1, 0]);
        assert_eq!(solve_integer(&a, &b2).unwrap(), None);
    }

    #[test]
    fn invariant_factors_match_snf() {
        let a = Matrix::from_rows(RingSpec::Integers, &[vec![4, 6, 2], vec![6, 9, 3], vec![2, 2, 8]]).unwrap();
        let s = smith_normal_form(&a).unwrap();
        assert_eq!(invariant_factors(&a), s.invariant_factors());
    }
}
