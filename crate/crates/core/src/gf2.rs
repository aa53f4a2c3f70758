//! Linear algebra over the two-element field and homology of finite chain
//! complexes.
//!
//! Vectors are bit-packed into `u64` words and matrices are stored column
//! by column, so a column of a boundary matrix is literally the boundary of
//! the corresponding basis element. Elimination is the left-to-right column
//! reduction familiar from persistence computations: each column is reduced
//! against earlier columns keyed on its lowest (largest-index) nonzero row.
//! Every routine is deterministic.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("dimension mismatch: expected length {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("entry ({row}, {col}) out of range for a {rows}x{cols} matrix")]
    IndexOutOfRange { row: usize, col: usize, rows: usize, cols: usize },
    #[error("duplicate entry ({row}, {col})")]
    DuplicateEntry { row: usize, col: usize },
    #[error("boundary is {rows}x{cols} but the basis has {basis} elements")]
    BasisMismatch { rows: usize, cols: usize, basis: usize },
    #[error("boundary squares to a nonzero map at column {column} ({label})")]
    NotAComplex { column: usize, label: String },
    #[error("vector is not a cycle")]
    NotACycle,
}

const WORD: usize = 64;

/// A vector over GF(2) of fixed length.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Gf2Vec {
    len: usize,
    words: Vec<u64>,
}

impl Gf2Vec {
    pub fn zeros(len: usize) -> Self {
        Gf2Vec { len, words: vec![0; len.div_ceil(WORD)] }
    }

    pub fn unit(len: usize, index: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(index, true);
        v
    }

    /// Builds a vector from the positions of its nonzero entries. Repeated
    /// positions cancel, as they would in a sum.
    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in indices {
            v.flip(i);
        }
        v
    }

    /// Builds a vector from 0/1 entries; any nonzero byte counts as 1.
    pub fn from_bits(bits: &[u8]) -> Self {
        Self::from_indices(
            bits.len(),
            bits.iter().enumerate().filter(|(_, &b)| b != 0).map(|(i, _)| i),
        )
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "index {i} out of range for length {}", self.len);
        self.words[i / WORD] >> (i % WORD) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "index {i} out of range for length {}", self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Adds `other` into `self`.
    pub fn add_assign(&mut self, other: &Gf2Vec) {
        assert_eq!(self.len, other.len, "adding vectors of different length");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Largest index holding a 1.
    pub fn last_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w != 0)
            .map(|(k, &w)| k * WORD + (WORD - 1 - w.leading_zeros() as usize))
    }

    /// Indices holding a 1, in increasing order.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(k * WORD + bit)
            })
        })
    }

    pub fn dot(&self, other: &Gf2Vec) -> bool {
        assert_eq!(self.len, other.len, "dot product of vectors of different length");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum::<u32>()
            % 2
            == 1
    }

    /// Copies `self` into positions `offset..offset + self.len()` of a
    /// longer zero vector.
    pub fn embed(&self, len: usize, offset: usize) -> Gf2Vec {
        assert!(offset + self.len <= len, "embedding does not fit");
        Gf2Vec::from_indices(len, self.ones().map(|i| i + offset))
    }
}

impl fmt::Debug for Gf2Vec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.len {
            write!(f, "{}", u8::from(self.get(i)))?;
        }
        write!(f, "]")
    }
}

/// A matrix over GF(2), stored as columns.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Gf2Matrix {
    rows: usize,
    cols: usize,
    columns: Vec<Gf2Vec>,
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Gf2Matrix { rows, cols, columns: vec![Gf2Vec::zeros(rows); cols] }
    }

    pub fn identity(n: usize) -> Self {
        let columns = (0..n).map(|i| Gf2Vec::unit(n, i)).collect();
        Gf2Matrix { rows: n, cols: n, columns }
    }

    /// Builds a matrix from the positions of its 1 entries.
    pub fn from_entries(
        rows: usize,
        cols: usize,
        entries: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, ChainError> {
        let mut m = Self::zeros(rows, cols);
        for (row, col) in entries {
            if row >= rows || col >= cols {
                return Err(ChainError::IndexOutOfRange { row, col, rows, cols });
            }
            if m.get(row, col) {
                return Err(ChainError::DuplicateEntry { row, col });
            }
            m.columns[col].set(row, true);
        }
        Ok(m)
    }

    pub fn from_columns(rows: usize, columns: Vec<Gf2Vec>) -> Result<Self, ChainError> {
        if let Some(bad) = columns.iter().find(|c| c.len() != rows) {
            return Err(ChainError::DimensionMismatch { expected: rows, found: bad.len() });
        }
        Ok(Gf2Matrix { rows, cols: columns.len(), columns })
    }

    /// Builds a matrix from dense rows of 0/1 entries.
    pub fn from_dense<R: AsRef<[u8]>>(dense: &[R]) -> Result<Self, ChainError> {
        let rows = dense.len();
        let cols = dense.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(rows, cols);
        for (i, row) in dense.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(ChainError::DimensionMismatch { expected: cols, found: row.len() });
            }
            for (j, &x) in row.iter().enumerate() {
                if x != 0 {
                    m.columns[j].set(i, true);
                }
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.columns[col].get(row)
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.columns[col].set(row, value);
    }

    pub fn flip(&mut self, row: usize, col: usize) {
        self.columns[col].flip(row);
    }

    pub fn column(&self, col: usize) -> &Gf2Vec {
        &self.columns[col]
    }

    pub fn columns(&self) -> &[Gf2Vec] {
        &self.columns
    }

    /// The `(row, col)` positions of all 1 entries in column-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.columns.iter().enumerate().flat_map(|(c, col)| col.ones().map(move |r| (r, c)))
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Gf2Vec::weight).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(Gf2Vec::is_zero)
    }

    pub fn transpose(&self) -> Gf2Matrix {
        let mut t = Gf2Matrix::zeros(self.cols, self.rows);
        for (r, c) in self.entries() {
            t.columns[r].set(c, true);
        }
        t
    }

    pub fn apply(&self, x: &Gf2Vec) -> Result<Gf2Vec, ChainError> {
        if x.len() != self.cols {
            return Err(ChainError::DimensionMismatch { expected: self.cols, found: x.len() });
        }
        let mut y = Gf2Vec::zeros(self.rows);
        for c in x.ones() {
            y.add_assign(&self.columns[c]);
        }
        Ok(y)
    }

    /// The product `self * rhs`.
    pub fn mul(&self, rhs: &Gf2Matrix) -> Result<Gf2Matrix, ChainError> {
        if rhs.rows != self.cols {
            return Err(ChainError::DimensionMismatch { expected: self.cols, found: rhs.rows });
        }
        let columns = rhs
            .columns
            .iter()
            .map(|c| self.apply(c))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Gf2Matrix { rows: self.rows, cols: rhs.cols, columns })
    }

    pub fn rank(&self) -> usize {
        ColumnReduction::new(self).rank()
    }

    /// Some `x` with `self * x = y`, or `None` when `y` is outside the
    /// column space.
    pub fn preimage(&self, y: &Gf2Vec) -> Result<Option<Gf2Vec>, ChainError> {
        if y.len() != self.rows {
            return Err(ChainError::DimensionMismatch { expected: self.rows, found: y.len() });
        }
        Ok(ColumnReduction::new(self).solve(y))
    }
}

impl fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Gf2Matrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            for c in 0..self.cols {
                write!(f, "{}", u8::from(self.get(r, c)))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Column reduction `R = M V` with `V` invertible and upper unitriangular.
/// Nonzero columns of `R` have distinct lowest rows.
struct ColumnReduction {
    reduced: Vec<Gf2Vec>,
    combos: Vec<Gf2Vec>,
    pivot_col: HashMap<usize, usize>,
}

impl ColumnReduction {
    fn new(m: &Gf2Matrix) -> Self {
        let mut reduced = Vec::with_capacity(m.cols);
        let mut combos = Vec::with_capacity(m.cols);
        let mut pivot_col = HashMap::new();
        for (j, col) in m.columns.iter().enumerate() {
            let mut r = col.clone();
            let mut v = Gf2Vec::unit(m.cols, j);
            while let Some(low) = r.last_one() {
                match pivot_col.get(&low) {
                    Some(&k) => {
                        r.add_assign(&reduced[k]);
                        v.add_assign(&combos[k]);
                    }
                    None => {
                        pivot_col.insert(low, j);
                        break;
                    }
                }
            }
            reduced.push(r);
            combos.push(v);
        }
        ColumnReduction { reduced, combos, pivot_col }
    }

    fn rank(&self) -> usize {
        self.pivot_col.len()
    }

    fn solve(&self, y: &Gf2Vec) -> Option<Gf2Vec> {
        let mut residual = y.clone();
        let mut x = Gf2Vec::zeros(self.combos.len());
        while let Some(low) = residual.last_one() {
            let &k = self.pivot_col.get(&low)?;
            residual.add_assign(&self.reduced[k]);
            x.add_assign(&self.combos[k]);
        }
        Some(x)
    }

    /// Kernel basis: the combinations whose reduced column vanished.
    fn kernel(&self) -> impl Iterator<Item = &Gf2Vec> {
        self.reduced.iter().zip(&self.combos).filter(|(r, _)| r.is_zero()).map(|(_, v)| v)
    }

    /// Echelon basis of the column space.
    fn image(&self) -> Span {
        let mut span = Span::new();
        for &k in self.pivot_col.values() {
            span.pivots.insert(self.reduced[k].last_one().unwrap(), self.reduced[k].clone());
        }
        span
    }
}

/// A subspace kept in echelon form keyed on each vector's lowest row.
#[derive(Clone, Default)]
struct Span {
    pivots: HashMap<usize, Gf2Vec>,
}

impl Span {
    fn new() -> Self {
        Self::default()
    }

    fn residual(&self, v: &Gf2Vec) -> Gf2Vec {
        let mut r = v.clone();
        while let Some(low) = r.last_one() {
            match self.pivots.get(&low) {
                Some(p) => r.add_assign(p),
                None => break,
            }
        }
        r
    }

    fn contains(&self, v: &Gf2Vec) -> bool {
        self.residual(v).is_zero()
    }

    /// Adds `v`; returns false when it was already in the span.
    fn insert(&mut self, v: &Gf2Vec) -> bool {
        let r = self.residual(v);
        match r.last_one() {
            Some(low) => {
                self.pivots.insert(low, r);
                true
            }
            None => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomologySummary {
    pub rank: usize,
    /// One cycle per homology generator, independent modulo boundaries.
    pub representatives: Vec<Gf2Vec>,
}

/// A finite chain complex: column `x` of `boundary` lists the basis
/// elements appearing in the boundary of basis element `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gf2Complex<L> {
    basis: Vec<L>,
    boundary: Gf2Matrix,
}

impl<L: fmt::Display> Gf2Complex<L> {
    /// Checks shapes only; use [`Gf2Complex::validate`] for `∂² = 0`.
    pub fn new(basis: Vec<L>, boundary: Gf2Matrix) -> Result<Self, ChainError> {
        if boundary.rows() != basis.len() || boundary.cols() != basis.len() {
            return Err(ChainError::BasisMismatch {
                rows: boundary.rows(),
                cols: boundary.cols(),
                basis: basis.len(),
            });
        }
        Ok(Gf2Complex { basis, boundary })
    }

    pub fn basis(&self) -> &[L] {
        &self.basis
    }

    pub fn boundary(&self) -> &Gf2Matrix {
        &self.boundary
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Reports the first column whose boundary has nonzero boundary.
    pub fn validate(&self) -> Result<(), ChainError> {
        for (c, col) in self.boundary.columns().iter().enumerate() {
            if !self.boundary.apply(col)?.is_zero() {
                return Err(ChainError::NotAComplex { column: c, label: self.basis[c].to_string() });
            }
        }
        Ok(())
    }

    pub fn is_cycle(&self, z: &Gf2Vec) -> Result<bool, ChainError> {
        Ok(self.boundary.apply(z)?.is_zero())
    }

    /// Validates the complex and reduces its boundary once, so that many
    /// homology or boundary queries can share the elimination.
    pub fn reduce(&self) -> Result<ReducedComplex<'_, L>, ChainError> {
        self.validate()?;
        let reduction = ColumnReduction::new(&self.boundary);
        let image = reduction.image();
        Ok(ReducedComplex { complex: self, reduction, image })
    }

    pub fn homology(&self) -> Result<HomologySummary, ChainError> {
        Ok(self.reduce()?.homology())
    }

    pub fn is_boundary(&self, z: &Gf2Vec) -> Result<bool, ChainError> {
        self.reduce()?.is_boundary(z)
    }
}

/// A validated complex with its boundary matrix reduced.
pub struct ReducedComplex<'a, L> {
    complex: &'a Gf2Complex<L>,
    reduction: ColumnReduction,
    image: Span,
}

impl<L: fmt::Display> ReducedComplex<'_, L> {
    pub fn boundary_rank(&self) -> usize {
        self.reduction.rank()
    }

    pub fn homology_rank(&self) -> usize {
        self.complex.dim() - 2 * self.reduction.rank()
    }

    pub fn homology(&self) -> HomologySummary {
        let mut span = self.image.clone();
        let representatives: Vec<Gf2Vec> =
            self.reduction.kernel().filter(|z| span.insert(z)).cloned().collect();
        HomologySummary { rank: representatives.len(), representatives }
    }

    pub fn is_boundary(&self, z: &Gf2Vec) -> Result<bool, ChainError> {
        if !self.complex.is_cycle(z)? {
            return Err(ChainError::NotACycle);
        }
        Ok(self.image.contains(z))
    }

    /// Some chain `x` with `∂x = z`, if one exists.
    pub fn bounding_chain(&self, z: &Gf2Vec) -> Result<Option<Gf2Vec>, ChainError> {
        if z.len() != self.complex.dim() {
            return Err(ChainError::DimensionMismatch { expected: self.complex.dim(), found: z.len() });
        }
        Ok(self.reduction.solve(z))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("e{i}")).collect()
    }

    /// Rank by brute force: size of the set of all column combinations.
    fn rank_by_enumeration(m: &Gf2Matrix) -> usize {
        assert!(m.cols() <= 16);
        let mut seen = std::collections::HashSet::new();
        for mask in 0u32..(1 << m.cols()) {
            let x = Gf2Vec::from_indices(m.cols(), (0..m.cols()).filter(|i| mask >> i & 1 == 1));
            seen.insert(m.apply(&x).unwrap());
        }
        seen.len().trailing_zeros() as usize
    }

    #[test]
    fn rank_examples() {
        assert_eq!(Gf2Matrix::zeros(3, 3).rank(), 0);
        assert_eq!(Gf2Matrix::identity(3).rank(), 3);
        let ones = Gf2Matrix::from_dense(&[[1, 1], [1, 1]]).unwrap();
        assert_eq!(rank_by_enumeration(&ones), 1);
        assert_eq!(ones.rank(), 1);
    }

    #[test]
    fn preimage_examples() {
        let id = Gf2Matrix::identity(2);
        let y = Gf2Vec::from_bits(&[1, 0]);
        assert_eq!(id.preimage(&y).unwrap(), Some(Gf2Vec::from_bits(&[1, 0])));

        let zero = Gf2Matrix::zeros(1, 1);
        assert_eq!(zero.preimage(&Gf2Vec::from_bits(&[1])).unwrap(), None);

        let col = Gf2Matrix::from_dense(&[[1], [1]]).unwrap();
        assert_eq!(col.preimage(&Gf2Vec::from_bits(&[1, 1])).unwrap(), Some(Gf2Vec::from_bits(&[1])));

        assert_eq!(
            id.preimage(&Gf2Vec::zeros(3)),
            Err(ChainError::DimensionMismatch { expected: 2, found: 3 })
        );
    }

    #[test]
    fn entries_are_checked() {
        assert!(matches!(
            Gf2Matrix::from_entries(2, 2, [(2, 0)]),
            Err(ChainError::IndexOutOfRange { .. })
        ));
        assert_eq!(
            Gf2Matrix::from_entries(2, 2, [(1, 0), (1, 0)]),
            Err(ChainError::DuplicateEntry { row: 1, col: 0 })
        );
    }

    #[test]
    fn homology_examples() {
        let c = Gf2Complex::new(labels(4), Gf2Matrix::zeros(4, 4)).unwrap();
        assert_eq!(c.homology().unwrap().rank, 4);

        // dx = y
        let pair = Gf2Complex::new(labels(2), Gf2Matrix::from_entries(2, 2, [(1, 0)]).unwrap()).unwrap();
        let h = pair.homology().unwrap();
        assert_eq!(h.rank, 0);
        assert!(h.representatives.is_empty());
        assert!(pair.is_boundary(&Gf2Vec::zeros(2)).unwrap());
        assert!(pair.is_boundary(&Gf2Vec::unit(2, 1)).unwrap());
        assert_eq!(pair.is_boundary(&Gf2Vec::unit(2, 0)), Err(ChainError::NotACycle));
    }

    #[test]
    fn trefoil_hat_complex_by_hand() {
        // basis a, b, c with db = c
        let c = Gf2Complex::new(
            vec!["a".to_string(), "b".into(), "c".into()],
            Gf2Matrix::from_entries(3, 3, [(2, 1)]).unwrap(),
        )
        .unwrap();
        let h = c.homology().unwrap();
        assert_eq!(h.rank, 1);
        assert_eq!(h.representatives, vec![Gf2Vec::unit(3, 0)]);
        assert!(!c.is_boundary(&Gf2Vec::unit(3, 0)).unwrap());
    }

    #[test]
    fn validate_finds_first_bad_column() {
        // dx = y, dy = x
        let c = Gf2Complex::new(
            vec!["x".to_string(), "y".into()],
            Gf2Matrix::from_entries(2, 2, [(1, 0), (0, 1)]).unwrap(),
        )
        .unwrap();
        assert_eq!(c.validate(), Err(ChainError::NotAComplex { column: 0, label: "x".into() }));
        assert!(c.homology().is_err());
    }

    #[test]
    fn basis_mismatch() {
        assert!(matches!(
            Gf2Complex::new(labels(2), Gf2Matrix::zeros(3, 3)),
            Err(ChainError::BasisMismatch { .. })
        ));
    }

    #[test]
    fn vector_helpers() {
        let v = Gf2Vec::from_indices(130, [0, 64, 129, 64]);
        assert_eq!(v.ones().collect::<Vec<_>>(), vec![0, 129]);
        assert_eq!(v.last_one(), Some(129));
        assert_eq!(v.weight(), 2);
        assert_eq!(Gf2Vec::zeros(5).last_one(), None);
        let e = Gf2Vec::from_bits(&[1, 1]).embed(5, 2);
        assert_eq!(e, Gf2Vec::from_bits(&[0, 0, 1, 1, 0]));
        assert!(e.dot(&Gf2Vec::from_bits(&[0, 0, 1, 0, 0])));
    }

    #[test]
    fn reduced_complex_solves_boundaries() {
        // d e2 = e0 + e1
        let c = Gf2Complex::new(labels(3), Gf2Matrix::from_entries(3, 3, [(0, 2), (1, 2)]).unwrap()).unwrap();
        let red = c.reduce().unwrap();
        let z = Gf2Vec::from_bits(&[1, 1, 0]);
        let x = red.bounding_chain(&z).unwrap().unwrap();
        assert_eq!(c.boundary().apply(&x).unwrap(), z);
        assert_eq!(red.homology_rank(), 1);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn square(max: usize) -> impl Strategy<Value = Gf2Matrix> {
            (1..=max).prop_flat_map(|n| shaped(n, n))
        }

        fn matrix(max: usize) -> impl Strategy<Value = Gf2Matrix> {
            (1..=max, 1..=max).prop_flat_map(|(r, c)| shaped(r, c))
        }

        fn shaped(r: usize, c: usize) -> impl Strategy<Value = Gf2Matrix> {
            {
                proptest::collection::vec(any::<bool>(), r * c).prop_map(move |bits| {
                    let entries = bits
                        .iter()
                        .enumerate()
                        .filter(|(_, &b)| b)
                        .map(|(k, _)| (k / c, k % c));
                    Gf2Matrix::from_entries(r, c, entries).unwrap()
                })
            }
        }

        /// A random complex of the form `∂ = P N P⁻¹` with `N² = 0`, sampled by
        /// pairing disjoint basis elements and conjugating by a random
        /// upper-unitriangular change of basis.
        fn complex(max: usize) -> impl Strategy<Value = Gf2Complex<String>> {
            (2..=max).prop_flat_map(|n| {
                (
                    Just(n),
                    proptest::collection::vec(0..n, n),
                    proptest::collection::vec(any::<bool>(), n * n),
                )
                    .prop_map(|(n, targets, bits)| {
                        // N: element j with j odd maps to element j - 1 when targets says so
                        let mut nil = Gf2Matrix::zeros(n, n);
                        for j in (1..n).step_by(2) {
                            if targets[j] % 2 == 0 {
                                nil.set(j - 1, j, true);
                            }
                        }
                        let mut p = Gf2Matrix::identity(n);
                        for (k, &b) in bits.iter().enumerate() {
                            let (r, c) = (k / n, k % n);
                            if b && r < c {
                                p.set(r, c, true);
                            }
                        }
                        // inverse of upper unitriangular p via column solves
                        let pinv_cols = (0..n)
                            .map(|i| p.preimage(&Gf2Vec::unit(n, i)).unwrap().unwrap())
                            .collect();
                        let pinv = Gf2Matrix::from_columns(n, pinv_cols).unwrap();
                        let d = p.mul(&nil).unwrap().mul(&pinv).unwrap();
                        Gf2Complex::new((0..n).map(|i| format!("e{i}")).collect(), d).unwrap()
                    })
            })
        }

        proptest! {
            #[test]
            fn rank_is_transpose_invariant(m in matrix(12)) {
                prop_assert_eq!(m.rank(), m.transpose().rank());
            }

            #[test]
            fn rank_matches_enumeration(m in matrix(8)) {
                prop_assert_eq!(m.rank(), super::rank_by_enumeration(&m));
            }

            #[test]
            fn preimage_contract(m in matrix(10), seed in any::<u64>()) {
                let y = Gf2Vec::from_indices(m.rows(), (0..m.rows()).filter(|i| seed >> (i % 64) & 1 == 1));
                match m.preimage(&y).unwrap() {
                    Some(x) => prop_assert_eq!(m.apply(&x).unwrap(), y),
                    None => {
                        let mut cols = m.columns().to_vec();
                        cols.push(y);
                        let ext = Gf2Matrix::from_columns(m.rows(), cols).unwrap();
                        prop_assert_eq!(ext.rank(), m.rank() + 1);
                    }
                }
            }

            #[test]
            fn homology_counts_basis(c in complex(14)) {
                prop_assert!(c.validate().is_ok());
                let h = c.homology().unwrap();
                prop_assert_eq!(h.rank + 2 * c.boundary().rank(), c.dim());
                let red = c.reduce().unwrap();
                for z in &h.representatives {
                    prop_assert!(c.is_cycle(z).unwrap());
                    prop_assert!(!red.is_boundary(z).unwrap());
                }
                // independence modulo boundaries: every nonempty sum is a non-boundary
                let k = h.representatives.len().min(8);
                for mask in 1u32..(1 << k) {
                    let mut s = Gf2Vec::zeros(c.dim());
                    for (i, z) in h.representatives.iter().take(k).enumerate() {
                        if mask >> i & 1 == 1 { s.add_assign(z); }
                    }
                    prop_assert!(!red.is_boundary(&s).unwrap());
                }
            }

            #[test]
            fn random_square_nonzero_is_diagnosed(m in square(8)) {
                let c = Gf2Complex::new((0..m.rows()).map(|i| i.to_string()).collect(), m.clone()).unwrap();
                let square_zero = m.mul(&m).unwrap().is_zero();
                prop_assert_eq!(c.validate().is_ok(), square_zero);
            }
        }
    }
}
