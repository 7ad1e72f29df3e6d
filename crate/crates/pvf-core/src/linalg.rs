//! Exact matrix machinery over Z_p: reduced row echelon form, rank,
//! inversion, and generation of the public freeze matrices together with the
//! individual-element privacy check.

use crate::field::{FieldConfig, Zp};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

/// Attempt budget for rejection-sampling a usable freeze matrix.
pub const DEFAULT_GENERATION_BUDGET: usize = 1000;

const MATRIX_FILE_MAGIC: &[u8; 4] = b"PVFZ";
const MATRIX_FILE_VERSION: u16 = 1;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinalgError {
    #[error("matrix dimensions {rows}x{cols} do not match {len} entries")]
    ShapeMismatch { rows: usize, cols: usize, len: usize },
    #[error("entry {value} at ({row}, {col}) is not a field element (p = {p})")]
    EntryOutOfRange { row: usize, col: usize, value: u64, p: u64 },
    #[error("dimension mismatch: matrix has {cols} columns, vector has {len} entries")]
    DimensionMismatch { cols: usize, len: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("matrix must be square for inversion, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("compression factor must exceed 2, got {0}")]
    LambdaTooSmall(usize),
    #[error("broken-element bound {delta} must be below lambda - 1 = {max}")]
    DeltaTooLarge { delta: usize, max: usize },
    #[error("no acceptable matrix found within {attempts} attempts")]
    GenerationFailure { attempts: usize },
    #[error("matrix file is malformed: {0}")]
    MalformedFile(String),
    #[error("matrix file failed cross-check on load: {0}")]
    CrossCheckFailed(String),
}

/// A dense row-major matrix with entries in `[0, p)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<u64>,
}

impl FieldMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<u64>, field: &Zp) -> Result<Self, LinalgError> {
        if entries.len() != rows * cols {
            return Err(LinalgError::ShapeMismatch { rows, cols, len: entries.len() });
        }
        for (i, &value) in entries.iter().enumerate() {
            if value >= field.modulus() {
                return Err(LinalgError::EntryOutOfRange {
                    row: i / cols,
                    col: i % cols,
                    value,
                    p: field.modulus(),
                });
            }
        }
        Ok(FieldMatrix { rows, cols, entries })
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        FieldMatrix { rows, cols, entries: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.entries[i * n + i] = 1;
        }
        m
    }

    /// Builds a matrix from integer rows, reducing each entry mod p. Handy
    /// for tests and for small hand-written matrices.
    pub fn from_rows(rows: &[&[u64]], field: &Zp) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            entries.extend(row.iter().map(|&v| v % field.modulus()));
        }
        FieldMatrix { rows: r, cols: c, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.entries[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    /// Copies rows `[from, to)` into a new matrix.
    pub fn row_slice(&self, from: usize, to: usize) -> FieldMatrix {
        assert!(from <= to && to <= self.rows);
        FieldMatrix {
            rows: to - from,
            cols: self.cols,
            entries: self.entries[from * self.cols..to * self.cols].to_vec(),
        }
    }

    /// Matrix-vector product mod p.
    pub fn mat_vec(&self, v: &[u64], field: &Zp) -> Result<Vec<u64>, LinalgError> {
        if v.len() != self.cols {
            return Err(LinalgError::DimensionMismatch { cols: self.cols, len: v.len() });
        }
        let p = field.modulus() as u128;
        let mut out = Vec::with_capacity(self.rows);
        for r in 0..self.rows {
            let row = self.row(r);
            let mut acc: u128 = 0;
            for (a, b) in row.iter().zip(v) {
                acc += *a as u128 * *b as u128 % p;
                if acc >= p << 3 {
                    acc %= p;
                }
            }
            out.push((acc % p) as u64);
        }
        Ok(out)
    }

    pub fn mat_mul(&self, other: &FieldMatrix, field: &Zp) -> Result<FieldMatrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch { cols: self.cols, len: other.rows });
        }
        let mut out = FieldMatrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let cur = out.entries[i * other.cols + j];
                    out.entries[i * other.cols + j] =
                        field.add(cur, field.mul(a, other.get(k, j)));
                }
            }
        }
        Ok(out)
    }

    /// Canonical reduced row echelon form over Z_p.
    pub fn rref(&self, field: &Zp) -> FieldMatrix {
        let mut m = self.clone();
        let mut pivot_row = 0usize;
        for col in 0..m.cols {
            if pivot_row == m.rows {
                break;
            }
            let Some(src) = (pivot_row..m.rows).find(|&r| m.get(r, col) != 0) else {
                continue;
            };
            if src != pivot_row {
                for c in 0..m.cols {
                    m.entries.swap(src * m.cols + c, pivot_row * m.cols + c);
                }
            }
            let inv = field.inv(m.get(pivot_row, col));
            for c in col..m.cols {
                let v = m.get(pivot_row, c);
                m.entries[pivot_row * m.cols + c] = field.mul(v, inv);
            }
            for r in 0..m.rows {
                if r == pivot_row {
                    continue;
                }
                let factor = m.get(r, col);
                if factor == 0 {
                    continue;
                }
                for c in col..m.cols {
                    let v = field.sub(m.get(r, c), field.mul(factor, m.get(pivot_row, c)));
                    m.entries[r * m.cols + c] = v;
                }
            }
            pivot_row += 1;
        }
        m
    }

    /// Rank = number of nonzero rows of the RREF.
    pub fn rank(&self, field: &Zp) -> usize {
        let r = self.rref(field);
        (0..r.rows).filter(|&i| r.row(i).iter().any(|&v| v != 0)).count()
    }

    /// Inverse via Gauss-Jordan on the augmented matrix.
    pub fn invert(&self, field: &Zp) -> Result<FieldMatrix, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::NotSquare { rows: self.rows, cols: self.cols });
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = FieldMatrix::identity(n);
        for col in 0..n {
            let Some(src) = (col..n).find(|&r| a.get(r, col) != 0) else {
                return Err(LinalgError::Singular);
            };
            if src != col {
                for c in 0..n {
                    a.entries.swap(src * n + c, col * n + c);
                    inv.entries.swap(src * n + c, col * n + c);
                }
            }
            let s = field.inv(a.get(col, col));
            for c in 0..n {
                a.entries[col * n + c] = field.mul(a.get(col, c), s);
                inv.entries[col * n + c] = field.mul(inv.get(col, c), s);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a.get(r, col);
                if factor == 0 {
                    continue;
                }
                for c in 0..n {
                    let va = field.sub(a.get(r, c), field.mul(factor, a.get(col, c)));
                    a.entries[r * n + c] = va;
                    let vi = field.sub(inv.get(r, c), field.mul(factor, inv.get(col, c)));
                    inv.entries[r * n + c] = vi;
                }
            }
        }
        Ok(inv)
    }

    pub fn sample_uniform<R: rand::RngCore + ?Sized>(
        rows: usize,
        cols: usize,
        field: &Zp,
        rng: &mut R,
    ) -> FieldMatrix {
        let entries = (0..rows * cols).map(|_| field.sample(rng)).collect();
        FieldMatrix { rows, cols, entries }
    }
}

/// True iff no row of RREF(m) has exactly one nonzero entry. Zero rows are
/// permitted: they expose nothing. A single-nonzero row would place a
/// standard basis vector in the row space, linearly exposing one original
/// element to anyone holding the frozen image.
pub fn privacy_check(m: &FieldMatrix, field: &Zp) -> bool {
    let r = m.rref(field);
    for i in 0..r.rows() {
        let nonzeros = r.row(i).iter().filter(|&&v| v != 0).count();
        if nonzeros == 1 {
            return false;
        }
    }
    true
}

/// The public matrices of one freeze configuration: the invertible base
/// matrix `a`, its inverse, the incomplete matrix `a_check` (first
/// `lambda - delta - 1` rows) applied by users to produce frozen vectors,
/// and the residual matrix `alpha` (last `delta + 1` rows) producing key
/// vectors. All four are public parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreezeMatrixSet {
    lambda: usize,
    delta: usize,
    seed: u64,
    field: Zp,
    a: FieldMatrix,
    a_inv: FieldMatrix,
    a_check: FieldMatrix,
    alpha: FieldMatrix,
}

impl FreezeMatrixSet {
    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn field(&self) -> Zp {
        self.field
    }

    pub fn a(&self) -> &FieldMatrix {
        &self.a
    }

    pub fn a_inv(&self) -> &FieldMatrix {
        &self.a_inv
    }

    /// Rows applied to each group to produce the frozen vector.
    pub fn a_check(&self) -> &FieldMatrix {
        &self.a_check
    }

    /// Rows applied to each group to produce the key vector.
    pub fn alpha(&self) -> &FieldMatrix {
        &self.alpha
    }

    /// A residual matrix that deliberately disagrees with the public one in
    /// a single entry; tests and tamper demos only.
    #[doc(hidden)]
    pub fn alpha_perturbed(&self) -> FieldMatrix {
        let mut wrong = self.alpha.clone();
        wrong.entries[0] = self.field.add(wrong.entries[0], 1);
        wrong
    }

    /// Frozen entries per group.
    pub fn frozen_rows(&self) -> usize {
        self.lambda - self.delta - 1
    }

    /// Key entries per group.
    pub fn key_rows(&self) -> usize {
        self.delta + 1
    }

    fn assemble(
        lambda: usize,
        delta: usize,
        seed: u64,
        field: Zp,
        a: FieldMatrix,
        a_inv: FieldMatrix,
    ) -> Self {
        let a_check = a.row_slice(0, lambda - delta - 1);
        let alpha = a.row_slice(lambda - delta - 1, lambda);
        FreezeMatrixSet { lambda, delta, seed, field, a, a_inv, a_check, alpha }
    }

    /// Wraps an explicitly chosen base matrix, enforcing every invariant of
    /// a generated set (invertibility and the element-privacy check).
    pub fn from_matrix(
        a: FieldMatrix,
        delta: usize,
        seed: u64,
        field: Zp,
    ) -> Result<Self, LinalgError> {
        let set = Self::from_matrix_unchecked(a, delta, seed, field)?;
        if !privacy_check(&set.a_check, &field) {
            return Err(LinalgError::CrossCheckFailed(
                "incomplete matrix fails the element-privacy check".into(),
            ));
        }
        Ok(set)
    }

    /// Like [`Self::from_matrix`] but skips the element-privacy check, so
    /// deliberately leaky matrices can be mounted in tests and demos.
    #[doc(hidden)]
    pub fn from_matrix_unchecked(
        a: FieldMatrix,
        delta: usize,
        seed: u64,
        field: Zp,
    ) -> Result<Self, LinalgError> {
        let lambda = a.rows();
        if lambda <= 2 {
            return Err(LinalgError::LambdaTooSmall(lambda));
        }
        if a.cols() != lambda {
            return Err(LinalgError::NotSquare { rows: lambda, cols: a.cols() });
        }
        if delta + 1 >= lambda {
            return Err(LinalgError::DeltaTooLarge { delta, max: lambda - 1 });
        }
        let a_inv = a.invert(&field)?;
        Ok(Self::assemble(lambda, delta, seed, field, a, a_inv))
    }

    /// Serializes header `{p, lambda, delta, seed}` plus the row-major
    /// entries of `a` only; the derived matrices are recomputed on load.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 + 2 + 8 + 4 + 4 + 8 + self.a.entries().len() * 8);
        out.extend_from_slice(MATRIX_FILE_MAGIC);
        out.extend_from_slice(&MATRIX_FILE_VERSION.to_le_bytes());
        out.extend_from_slice(&self.field.modulus().to_le_bytes());
        out.extend_from_slice(&(self.lambda as u32).to_le_bytes());
        out.extend_from_slice(&(self.delta as u32).to_le_bytes());
        out.extend_from_slice(&self.seed.to_le_bytes());
        for &e in self.a.entries() {
            out.extend_from_slice(&e.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, LinalgError> {
        let err = |s: &str| LinalgError::MalformedFile(s.to_string());
        if bytes.len() < 30 {
            return Err(err("truncated header"));
        }
        if &bytes[0..4] != MATRIX_FILE_MAGIC {
            return Err(err("bad magic"));
        }
        let version = u16::from_le_bytes(bytes[4..6].try_into().unwrap());
        if version != MATRIX_FILE_VERSION {
            return Err(LinalgError::MalformedFile(format!("unsupported version {version}")));
        }
        let p = u64::from_le_bytes(bytes[6..14].try_into().unwrap());
        let lambda = u32::from_le_bytes(bytes[14..18].try_into().unwrap()) as usize;
        let delta = u32::from_le_bytes(bytes[18..22].try_into().unwrap()) as usize;
        let seed = u64::from_le_bytes(bytes[22..30].try_into().unwrap());
        if lambda <= 2 {
            return Err(LinalgError::LambdaTooSmall(lambda));
        }
        if delta + 1 >= lambda {
            return Err(LinalgError::DeltaTooLarge { delta, max: lambda - 1 });
        }
        if !crate::field::is_prime_u64(p) {
            return Err(err("modulus is not prime"));
        }
        let body = &bytes[30..];
        if body.len() != lambda * lambda * 8 {
            return Err(err("entry block has wrong length"));
        }
        let field = Zp::new_unchecked(p);
        let entries: Vec<u64> = body
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let a = FieldMatrix::new(lambda, lambda, entries, &field)
            .map_err(|e| LinalgError::MalformedFile(e.to_string()))?;
        let a_inv = a
            .invert(&field)
            .map_err(|_| LinalgError::CrossCheckFailed("stored matrix is singular".into()))?;
        let set = Self::assemble(lambda, delta, seed, field, a, a_inv);
        if !privacy_check(&set.a_check, &field) {
            return Err(LinalgError::CrossCheckFailed(
                "incomplete matrix fails the element-privacy check".into(),
            ));
        }
        Ok(set)
    }
}

/// Rejection-samples a uniform random invertible matrix whose incomplete
/// part passes the element-privacy check. Deterministic for a fixed seed.
pub fn generate_freeze_matrices(
    cfg: &FieldConfig,
    lambda: usize,
    delta: usize,
    seed: u64,
) -> Result<FreezeMatrixSet, LinalgError> {
    generate_freeze_matrices_with_budget(cfg, lambda, delta, seed, DEFAULT_GENERATION_BUDGET)
}

pub fn generate_freeze_matrices_with_budget(
    cfg: &FieldConfig,
    lambda: usize,
    delta: usize,
    seed: u64,
    budget: usize,
) -> Result<FreezeMatrixSet, LinalgError> {
    if lambda <= 2 {
        return Err(LinalgError::LambdaTooSmall(lambda));
    }
    if delta + 1 >= lambda {
        return Err(LinalgError::DeltaTooLarge { delta, max: lambda - 1 });
    }
    let field = cfg.field();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for _ in 0..budget {
        let a = FieldMatrix::sample_uniform(lambda, lambda, &field, &mut rng);
        let Ok(a_inv) = a.invert(&field) else {
            continue;
        };
        let a_check = a.row_slice(0, lambda - delta - 1);
        if !privacy_check(&a_check, &field) {
            continue;
        }
        return Ok(FreezeMatrixSet::assemble(lambda, delta, seed, field, a, a_inv));
    }
    Err(LinalgError::GenerationFailure { attempts: budget })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::DEFAULT_PRIME;
    use proptest::prelude::*;

    fn f() -> Zp {
        Zp::new_unchecked(DEFAULT_PRIME)
    }

    // Worked 3x3 example: an invertible matrix whose incomplete part leaks
    // one element.
    fn leaky_a3() -> FieldMatrix {
        FieldMatrix::from_rows(&[&[1, 2, 3], &[1, 3, 3], &[1, 2, 4]], &f())
    }

    #[test]
    fn rref_of_two_row_example() {
        let m = FieldMatrix::from_rows(&[&[1, 2, 3], &[1, 3, 3]], &f());
        let r = m.rref(&f());
        assert_eq!(r.entries(), &[1, 0, 3, 0, 1, 0]);
        assert_eq!(m.rank(&f()), 2);
    }

    #[test]
    fn rref_zero_matrix() {
        let m = FieldMatrix::zero(3, 4);
        assert_eq!(m.rref(&f()), m);
        assert_eq!(m.rank(&f()), 0);
    }

    #[test]
    fn rref_proportional_rows() {
        let m = FieldMatrix::from_rows(&[&[1, 2], &[2, 4]], &f());
        let r = m.rref(&f());
        assert_eq!(r.entries(), &[1, 2, 0, 0]);
        assert_eq!(m.rank(&f()), 1);
    }

    #[test]
    fn privacy_check_rejects_leaky_incomplete_matrix() {
        // RREF has row [0,1,0]: the second original element is exposed.
        let m = FieldMatrix::from_rows(&[&[1, 2, 3], &[1, 3, 3]], &f());
        assert!(!privacy_check(&m, &f()));
    }

    #[test]
    fn privacy_check_rejects_identity() {
        assert!(!privacy_check(&FieldMatrix::identity(3), &f()));
    }

    #[test]
    fn privacy_check_accepts_two_nonzero_rows() {
        // RREF = [[1,0,-1],[0,1,1]]; both rows have two nonzeros.
        let m = FieldMatrix::from_rows(&[&[1, 1, 0], &[0, 1, 1]], &f());
        assert!(privacy_check(&m, &f()));
    }

    #[test]
    fn privacy_check_ignores_zero_rows() {
        let m = FieldMatrix::from_rows(&[&[1, 1, 0], &[2, 2, 0], &[0, 1, 1]], &f());
        assert!(privacy_check(&m, &f()));
    }

    #[test]
    fn invert_worked_example() {
        let a = leaky_a3();
        let inv = a.invert(&f()).unwrap();
        assert_eq!(a.mat_mul(&inv, &f()).unwrap(), FieldMatrix::identity(3));
        assert_eq!(inv.mat_mul(&a, &f()).unwrap(), FieldMatrix::identity(3));
    }

    #[test]
    fn invert_identity() {
        let i = FieldMatrix::identity(4);
        assert_eq!(i.invert(&f()).unwrap(), i);
    }

    #[test]
    fn invert_singular_fails() {
        let m = FieldMatrix::from_rows(&[&[1, 2, 3], &[2, 4, 6], &[0, 0, 1]], &f());
        assert_eq!(m.invert(&f()), Err(LinalgError::Singular));
    }

    #[test]
    fn mat_vec_worked_example() {
        let m = FieldMatrix::from_rows(&[&[1, 2, 3], &[1, 3, 3]], &f());
        assert_eq!(m.mat_vec(&[1, 2, 3], &f()).unwrap(), vec![14, 16]);
        let alpha = FieldMatrix::from_rows(&[&[1, 2, 4]], &f());
        assert_eq!(alpha.mat_vec(&[1, 2, 3], &f()).unwrap(), vec![17]);
        let i = FieldMatrix::identity(3);
        assert_eq!(i.mat_vec(&[5, 6, 7], &f()).unwrap(), vec![5, 6, 7]);
        assert!(m.mat_vec(&[1, 2], &f()).is_err());
    }

    #[test]
    fn generation_rejects_bad_parameters() {
        let cfg = FieldConfig::default();
        assert_eq!(
            generate_freeze_matrices(&cfg, 2, 0, 1),
            Err(LinalgError::LambdaTooSmall(2))
        );
        assert_eq!(
            generate_freeze_matrices(&cfg, 3, 2, 1),
            Err(LinalgError::DeltaTooLarge { delta: 2, max: 2 })
        );
    }

    #[test]
    fn generation_satisfies_invariants() {
        let cfg = FieldConfig::default();
        for seed in 0..20 {
            for (lambda, delta) in [(3, 0), (3, 1), (5, 0), (5, 2), (8, 3)] {
                let set = generate_freeze_matrices(&cfg, lambda, delta, seed).unwrap();
                let field = set.field();
                assert_eq!(
                    set.a().mat_mul(set.a_inv(), &field).unwrap(),
                    FieldMatrix::identity(lambda)
                );
                assert_eq!(set.a_check(), &set.a().row_slice(0, lambda - delta - 1));
                assert_eq!(set.alpha(), &set.a().row_slice(lambda - delta - 1, lambda));
                assert_eq!(set.a_check().rank(&field), lambda - delta - 1);
                assert!(privacy_check(set.a_check(), &field));
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = FieldConfig::default();
        let a = generate_freeze_matrices(&cfg, 4, 1, 99).unwrap();
        let b = generate_freeze_matrices(&cfg, 4, 1, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn serialization_roundtrip_is_bit_exact() {
        let cfg = FieldConfig::default();
        let set = generate_freeze_matrices(&cfg, 6, 2, 123).unwrap();
        let bytes = set.to_bytes();
        let back = FreezeMatrixSet::from_bytes(&bytes).unwrap();
        assert_eq!(set, back);
        assert_eq!(bytes, back.to_bytes());
    }

    #[test]
    fn deserialization_rejects_corruption() {
        let cfg = FieldConfig::default();
        let set = generate_freeze_matrices(&cfg, 4, 0, 5).unwrap();
        let mut bytes = set.to_bytes();
        bytes[0] = b'X';
        assert!(matches!(
            FreezeMatrixSet::from_bytes(&bytes),
            Err(LinalgError::MalformedFile(_))
        ));
        let mut short = set.to_bytes();
        short.truncate(short.len() - 8);
        assert!(FreezeMatrixSet::from_bytes(&short).is_err());
    }

    proptest! {
        #[test]
        fn rref_is_idempotent(seed in any::<u64>(), rows in 1usize..6, cols in 1usize..6) {
            let field = f();
            let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
            let m = FieldMatrix::sample_uniform(rows, cols, &field, &mut rng);
            let r = m.rref(&field);
            prop_assert_eq!(r.rref(&field), r);
        }

        #[test]
        fn invert_is_involutive(seed in any::<u64>(), n in 1usize..6) {
            let field = f();
            let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
            let m = FieldMatrix::sample_uniform(n, n, &field, &mut rng);
            if let Ok(inv) = m.invert(&field) {
                let back = inv.invert(&field).unwrap();
                prop_assert_eq!(back, m);
            }
        }

        #[test]
        fn rank_matches_rref_pivots(seed in any::<u64>(), rows in 1usize..6, cols in 1usize..6) {
            let field = f();
            let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
            let m = FieldMatrix::sample_uniform(rows, cols, &field, &mut rng);
            prop_assert!(m.rank(&field) <= rows.min(cols));
            prop_assert_eq!(m.rank(&field), m.rref(&field).rank(&field));
        }
    }
}
