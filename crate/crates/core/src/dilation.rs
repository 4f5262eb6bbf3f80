//! Unitary dilations of a magic contraction `T` on `X = K^d`.
//!
//! * Halmos: the `2 x 2` block unitary `[[T, M_{T*}], [M_T, -T*]]`.
//! * Egervary: an `(N+1) x (N+1)` block unitary whose compressions reproduce
//!   `T^k` for `k <= N` (and in general not for `k = N + 1`).
//! * Sz.-Nagy: a unitary on the bi-infinite direct sum, applied lazily to
//!   finitely supported sequences. Its compressions reproduce every power.
//!
//! `X` sits at block 0 for the finite dilations and at index 0 for the
//! sequence space.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fields::{FieldDescriptor, Scalar};
use crate::linalg::{inner_product, Matrix, Vector};
use crate::magic::{require_magic, MagicWitness};

/// A grid of `d x d` blocks; `None` is the zero block.
#[derive(Debug, Clone)]
pub struct BlockSpec {
    base_dim: usize,
    desc: FieldDescriptor,
    blocks: Vec<Vec<Option<Matrix>>>,
}

impl BlockSpec {
    pub fn new(base_dim: usize, desc: FieldDescriptor, blocks: Vec<Vec<Option<Matrix>>>) -> Result<Self> {
        let width = blocks.first().map_or(0, Vec::len);
        if blocks.is_empty() || width == 0 || blocks.iter().any(|r| r.len() != width) {
            return Err(Error::InvalidDimension("block grid must be rectangular and nonempty".into()));
        }
        for b in blocks.iter().flatten().flatten() {
            desc.ensure_same(&b.descriptor())?;
            if b.shape() != (base_dim, base_dim) {
                return Err(Error::ShapeMismatch {
                    op: "block",
                    left: (base_dim, base_dim),
                    right: b.shape(),
                });
            }
        }
        Ok(Self {
            base_dim,
            desc,
            blocks,
        })
    }

    pub fn assemble(&self) -> Matrix {
        let d = self.base_dim;
        let rows = self.blocks.len() * d;
        let cols = self.blocks[0].len() * d;
        let mut out = Matrix::zeros(rows, cols, self.desc);
        for (bi, row) in self.blocks.iter().enumerate() {
            for (bj, block) in row.iter().enumerate() {
                let Some(b) = block else { continue };
                for i in 0..d {
                    for j in 0..d {
                        out.set(bi * d + i, bj * d + j, b.get(i, j).clone());
                    }
                }
            }
        }
        out
    }
}

fn check_square_with_witness(t: &Matrix, w: &MagicWitness) -> Result<usize> {
    let d = t.require_square("dilation")?;
    t.descriptor().ensure_same(&w.m_t.descriptor())?;
    t.descriptor().ensure_same(&w.m_t_star.descriptor())?;
    for m in [&w.m_t, &w.m_t_star] {
        if m.shape() != (d, d) {
            return Err(Error::ShapeMismatch {
                op: "witness",
                left: (d, d),
                right: m.shape(),
            });
        }
    }
    Ok(d)
}

/// `[[T, M_{T*}], [M_T, -T*]]` without checking the witness.
pub fn halmos_matrix(t: &Matrix, w: &MagicWitness) -> Result<Matrix> {
    let d = check_square_with_witness(t, w)?;
    let spec = BlockSpec::new(
        d,
        t.descriptor(),
        vec![
            vec![Some(t.clone()), Some(w.m_t_star.clone())],
            vec![Some(w.m_t.clone()), Some(t.adjoint().neg())],
        ],
    )?;
    Ok(spec.assemble())
}

/// The Halmos dilation of a verified magic contraction.
pub fn halmos(t: &Matrix, w: &MagicWitness) -> Result<Matrix> {
    check_square_with_witness(t, w)?;
    require_magic(t, w)?;
    halmos_matrix(t, w)
}

/// Top-left `d x d` block of `U^k`: the matrix of `P_X U^k |_X`.
pub fn compress(u: &Matrix, d: usize, k: u64) -> Result<Matrix> {
    let n = u.require_square("compress")?;
    if d == 0 || n % d != 0 {
        return Err(Error::InvalidDimension(format!(
            "dimension {n} is not a multiple of block size {d}"
        )));
    }
    u.pow(k)?.block(0, 0, d, d)
}

/// Egervary block matrix without checking the witness.
///
/// Block-row 0 is `[T, 0, .., 0, M_{T*}]`, block-row 1 is
/// `[M_T, 0, .., 0, -T*]` and block-row `i >= 2` holds `I` in block-column
/// `i - 1`.
pub fn egervary_matrix(t: &Matrix, w: &MagicWitness, order: usize) -> Result<Matrix> {
    let d = check_square_with_witness(t, w)?;
    if order == 0 {
        return Err(Error::InvalidDimension("Egervary order N must be >= 1".into()));
    }
    let size = order + 1;
    let id = Matrix::identity(d, t.descriptor());
    let mut grid: Vec<Vec<Option<Matrix>>> = vec![vec![None; size]; size];
    grid[0][0] = Some(t.clone());
    grid[0][order] = Some(w.m_t_star.clone());
    grid[1][0] = Some(w.m_t.clone());
    grid[1][order] = Some(t.adjoint().neg());
    for (i, row) in grid.iter_mut().enumerate().skip(2) {
        row[i - 1] = Some(id.clone());
    }
    Ok(BlockSpec::new(d, t.descriptor(), grid)?.assemble())
}

pub fn egervary(t: &Matrix, w: &MagicWitness, order: usize) -> Result<Matrix> {
    check_square_with_witness(t, w)?;
    require_magic(t, w)?;
    egervary_matrix(t, w, order)
}

/// A `Z`-indexed family of vectors in `K^d`, all but finitely many zero.
///
/// Zero vectors are never stored, so structural equality is value equality.
#[derive(Debug, Clone, PartialEq)]
pub struct FinSuppSequence {
    desc: FieldDescriptor,
    dim: usize,
    support: BTreeMap<i64, Vector>,
}

impl FinSuppSequence {
    pub fn zero(dim: usize, desc: FieldDescriptor) -> Self {
        Self {
            desc,
            dim,
            support: BTreeMap::new(),
        }
    }

    /// `v` placed at `index`.
    pub fn single(index: i64, v: Vector) -> Self {
        let mut s = Self::zero(v.len(), v.descriptor());
        s.support_insert(index, v);
        s
    }

    pub fn from_entries(dim: usize, desc: FieldDescriptor, entries: impl IntoIterator<Item = (i64, Vector)>) -> Result<Self> {
        let mut s = Self::zero(dim, desc);
        for (n, v) in entries {
            s.set(n, v)?;
        }
        Ok(s)
    }

    pub fn descriptor(&self) -> FieldDescriptor {
        self.desc
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn set(&mut self, index: i64, v: Vector) -> Result<()> {
        self.desc.ensure_same(&v.descriptor())?;
        if v.len() != self.dim {
            return Err(Error::ShapeMismatch {
                op: "sequence entry",
                left: (self.dim, 1),
                right: (v.len(), 1),
            });
        }
        self.support_insert(index, v);
        Ok(())
    }

    fn support_insert(&mut self, index: i64, v: Vector) {
        if v.is_zero() {
            self.support.remove(&index);
        } else {
            self.support.insert(index, v);
        }
    }

    /// The entry at `index`, zero outside the support.
    pub fn get(&self, index: i64) -> Vector {
        self.support
            .get(&index)
            .cloned()
            .unwrap_or_else(|| Vector::zeros(self.dim, self.desc))
    }

    pub fn support(&self) -> impl Iterator<Item = (&i64, &Vector)> {
        self.support.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    /// `sup_n ||x_n||`.
    pub fn sup_norm(&self) -> BigRational {
        self.support
            .values()
            .map(Vector::sup_norm)
            .fold(BigRational::zero(), |a, b| if b > a { b } else { a })
    }

    fn check_conformable(&self, other: &FinSuppSequence) -> Result<()> {
        self.desc.ensure_same(&other.desc)?;
        if self.dim != other.dim {
            return Err(Error::ShapeMismatch {
                op: "sequence",
                left: (self.dim, 1),
                right: (other.dim, 1),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &FinSuppSequence) -> Result<FinSuppSequence> {
        self.check_conformable(other)?;
        let mut out = self.clone();
        for (&n, v) in &other.support {
            let sum = out.get(n).add(v)?;
            out.support_insert(n, sum);
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Scalar) -> Result<FinSuppSequence> {
        let mut out = Self::zero(self.dim, self.desc);
        for (&n, v) in &self.support {
            out.support_insert(n, v.scale(c)?);
        }
        Ok(out)
    }

    /// `sum_n <x_n, y_n>`.
    pub fn inner_product(&self, other: &FinSuppSequence) -> Result<Scalar> {
        self.check_conformable(other)?;
        let mut acc = Scalar::zero(self.desc);
        for (n, v) in &self.support {
            if let Some(w) = other.support.get(n) {
                acc = &acc + &inner_product(v, w)?;
            }
        }
        Ok(acc)
    }
}

/// The Sz.-Nagy dilation of `T`, acting on finitely supported sequences.
///
/// ```text
/// (U x)_0  = T x_0 + M_{T*} x_1
/// (U x)_-1 = M_T x_0 - T* x_1
/// (U x)_n  = x_{n+1}                  otherwise
///
/// (U* x)_0 = M_T x_-1 + T* x_0
/// (U* x)_1 = -T x_-1 + M_{T*} x_0
/// (U* x)_n = x_{n-1}                  otherwise
/// ```
#[derive(Debug, Clone)]
pub struct SzNagyOperator {
    t: Matrix,
    t_star: Matrix,
    witness: MagicWitness,
}

impl SzNagyOperator {
    pub fn new(t: Matrix, witness: MagicWitness) -> Result<Self> {
        check_square_with_witness(&t, &witness)?;
        require_magic(&t, &witness)?;
        Ok(Self::build(t, witness))
    }

    /// Skips witness verification. Only shapes are checked; the result is
    /// generally not unitary.
    pub fn new_unchecked(t: Matrix, witness: MagicWitness) -> Result<Self> {
        check_square_with_witness(&t, &witness)?;
        Ok(Self::build(t, witness))
    }

    fn build(t: Matrix, witness: MagicWitness) -> Self {
        Self {
            t_star: t.adjoint(),
            t,
            witness,
        }
    }

    pub fn t(&self) -> &Matrix {
        &self.t
    }

    pub fn witness(&self) -> &MagicWitness {
        &self.witness
    }

    pub fn dim(&self) -> usize {
        self.t.rows()
    }

    fn check_input(&self, x: &FinSuppSequence) -> Result<()> {
        self.t.descriptor().ensure_same(&x.desc)?;
        if x.dim != self.dim() {
            return Err(Error::ShapeMismatch {
                op: "Sz.-Nagy apply",
                left: (self.dim(), 1),
                right: (x.dim, 1),
            });
        }
        Ok(())
    }

    pub fn apply(&self, x: &FinSuppSequence) -> Result<FinSuppSequence> {
        self.check_input(x)?;
        let mut y = FinSuppSequence::zero(x.dim, x.desc);
        for (&n, v) in &x.support {
            if n != 0 && n != 1 {
                y.support_insert(n - 1, v.clone());
            }
        }
        let (x0, x1) = (x.get(0), x.get(1));
        let w = &self.witness;
        y.support_insert(0, self.t.apply(&x0)?.add(&w.m_t_star.apply(&x1)?)?);
        y.support_insert(-1, w.m_t.apply(&x0)?.sub(&self.t_star.apply(&x1)?)?);
        Ok(y)
    }

    pub fn apply_adjoint(&self, x: &FinSuppSequence) -> Result<FinSuppSequence> {
        self.check_input(x)?;
        let mut y = FinSuppSequence::zero(x.dim, x.desc);
        for (&n, v) in &x.support {
            if n != -1 && n != 0 {
                y.support_insert(n + 1, v.clone());
            }
        }
        let (xm1, x0) = (x.get(-1), x.get(0));
        let w = &self.witness;
        y.support_insert(0, w.m_t.apply(&xm1)?.add(&self.t_star.apply(&x0)?)?);
        y.support_insert(1, w.m_t_star.apply(&x0)?.sub(&self.t.apply(&xm1)?)?);
        Ok(y)
    }

    /// Index-0 component of `U^n (v at index 0)`; equals `T^n v`.
    pub fn compress(&self, n: u64, v: &Vector) -> Result<Vector> {
        let mut x = FinSuppSequence::single(0, v.clone());
        for _ in 0..n {
            x = self.apply(&x)?;
        }
        Ok(x.get(0))
    }

    /// Index-0 component of `(U*)^n (v at index 0)`; equals `(T*)^n v`.
    pub fn compress_adjoint(&self, n: u64, v: &Vector) -> Result<Vector> {
        let mut x = FinSuppSequence::single(0, v.clone());
        for _ in 0..n {
            x = self.apply_adjoint(&x)?;
        }
        Ok(x.get(0))
    }

    /// Checks `UV = VU = I` on every basis sequence with index in
    /// `[-window, window]`, and `<Ua, b> = <a, Vb>` on all basis pairs plus
    /// `random_pairs` seeded random pairs supported in the window.
    pub fn verify_unitary_window(&self, window: u32, random_pairs: usize, seed: u64) -> Result<WindowReport> {
        let desc = self.t.descriptor();
        let d = self.dim();
        let w = window as i64;
        let mut report = WindowReport::default();

        let mut basis = Vec::new();
        for k in -w..=w {
            for j in 0..d {
                basis.push((k, j, FinSuppSequence::single(k, Vector::basis(d, j, desc))));
            }
        }

        for (k, j, e) in &basis {
            report.basis_checked += 1;
            if report.failure.is_none() && self.apply(&self.apply_adjoint(e)?)? != *e {
                report.failure = Some(WindowFailure::new("UV = I", *k, *j));
            }
            if report.failure.is_none() && self.apply_adjoint(&self.apply(e)?)? != *e {
                report.failure = Some(WindowFailure::new("VU = I", *k, *j));
            }
        }

        let mut adjoint_pair = |a: &FinSuppSequence, b: &FinSuppSequence, k: i64, j: usize| -> Result<bool> {
            let lhs = self.apply(a)?.inner_product(b)?;
            let rhs = a.inner_product(&self.apply_adjoint(b)?)?;
            report.pairs_checked += 1;
            if lhs != rhs && report.failure.is_none() {
                report.failure = Some(WindowFailure::new("<Ua, b> = <a, Vb>", k, j));
            }
            Ok(lhs == rhs)
        };
        for (k, j, a) in &basis {
            for (_, _, b) in &basis {
                adjoint_pair(a, b, *k, *j)?;
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..random_pairs {
            let a = random_sequence(&mut rng, d, desc, w)?;
            let b = random_sequence(&mut rng, d, desc, w)?;
            let k = a.support.keys().next().copied().unwrap_or(0);
            adjoint_pair(&a, &b, k, 0)?;
        }
        Ok(report)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowFailure {
    pub check: &'static str,
    /// Sequence index of the offending basis element.
    pub index: i64,
    /// Coordinate within `K^d`.
    pub coordinate: usize,
}

impl WindowFailure {
    fn new(check: &'static str, index: i64, coordinate: usize) -> Self {
        Self {
            check,
            index,
            coordinate,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WindowReport {
    pub basis_checked: usize,
    pub pairs_checked: usize,
    pub failure: Option<WindowFailure>,
}

impl WindowReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// A random scalar: uniform over `F_p`, or a small rational in `Q_p`.
pub fn random_scalar<R: Rng>(rng: &mut R, desc: FieldDescriptor) -> Scalar {
    if desc.is_prime_field() {
        Scalar::from_int(rng.gen_range(0..desc.p()) as i64, desc)
    } else {
        let num = rng.gen_range(-100..=100);
        let den = rng.gen_range(1..=100);
        Scalar::from_rational(num, den, desc).expect("nonzero denominator")
    }
}

pub fn random_vector<R: Rng>(rng: &mut R, d: usize, desc: FieldDescriptor) -> Vector {
    Vector::new(desc, (0..d).map(|_| random_scalar(rng, desc)).collect()).expect("d >= 1")
}

/// A random sequence supported in `[-window, window]`.
pub fn random_sequence<R: Rng>(rng: &mut R, d: usize, desc: FieldDescriptor, window: i64) -> Result<FinSuppSequence> {
    let mut s = FinSuppSequence::zero(d, desc);
    let count = rng.gen_range(1..=3);
    for _ in 0..count {
        let n = rng.gen_range(-window..=window);
        let v = random_vector(rng, d, desc);
        s = s.add(&FinSuppSequence::single(n, v))?;
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::magic::verify_magic;

    fn fp(p: u64) -> FieldDescriptor {
        FieldDescriptor::prime_field(p).unwrap()
    }

    fn m(p: u64, rows: &[&[i64]]) -> Matrix {
        Matrix::from_ints(fp(p), rows).unwrap()
    }

    fn z3_fixture() -> (Matrix, MagicWitness) {
        (
            m(3, &[&[2, 2], &[2, 2]]),
            MagicWitness::symmetric(m(3, &[&[2, 1], &[1, 2]])),
        )
    }

    fn z2_fixture() -> (Matrix, MagicWitness) {
        (
            m(2, &[&[1, 1], &[1, 1]]),
            MagicWitness::symmetric(m(2, &[&[0, 1], &[1, 0]])),
        )
    }

    #[test]
    fn halmos_z2_matrices() {
        let (t, w) = z2_fixture();
        let u = halmos(&t, &w).unwrap();
        assert_eq!(
            u,
            m(2, &[&[1, 1, 0, 1], &[1, 1, 1, 0], &[0, 1, 1, 1], &[1, 0, 1, 1]])
        );
        assert!(u.is_unitary());
        let u2 = halmos(&t, &MagicWitness::symmetric(Matrix::identity(2, fp(2)))).unwrap();
        assert_eq!(
            u2,
            m(2, &[&[1, 1, 1, 0], &[1, 1, 0, 1], &[1, 0, 1, 1], &[0, 1, 1, 1]])
        );
    }

    #[test]
    fn halmos_of_identity() {
        let d = fp(5);
        let u = halmos(
            &Matrix::identity(2, d),
            &MagicWitness::symmetric(Matrix::zeros(2, 2, d)),
        )
        .unwrap();
        let mut expected = Matrix::identity(4, d);
        expected.set(2, 2, Scalar::from_int(-1, d));
        expected.set(3, 3, Scalar::from_int(-1, d));
        assert_eq!(u, expected);
    }

    #[test]
    fn halmos_adjoint_has_the_inverse_pattern() {
        let (t, w) = z3_fixture();
        let u = halmos(&t, &w).unwrap();
        let v = BlockSpec::new(
            2,
            fp(3),
            vec![
                vec![Some(t.adjoint()), Some(w.m_t.clone())],
                vec![Some(w.m_t_star.clone()), Some(t.neg())],
            ],
        )
        .unwrap()
        .assemble();
        assert_eq!(u.adjoint(), v);
        assert_eq!(u.mul(&v).unwrap(), Matrix::identity(4, fp(3)));
    }

    #[test]
    fn halmos_rejects_bad_witness() {
        let (t, _) = z3_fixture();
        let bad = MagicWitness::symmetric(Matrix::identity(2, fp(3)));
        assert!(matches!(halmos(&t, &bad), Err(Error::InvalidWitness(_))));
        assert!(!halmos_matrix(&t, &bad).unwrap().is_unitary());
    }

    #[test]
    fn compress_examples() {
        let (t, w) = z3_fixture();
        let u = halmos(&t, &w).unwrap();
        assert_eq!(compress(&u, 2, 1).unwrap(), t);
        assert_eq!(compress(&u, 2, 0).unwrap(), Matrix::identity(2, fp(3)));
        assert_eq!(compress(&u.adjoint(), 2, 1).unwrap(), t.adjoint());
        assert!(compress(&u, 3, 1).is_err());
    }

    #[test]
    fn egervary_examples() {
        let (t, w) = z3_fixture();
        assert_eq!(egervary(&t, &w, 1).unwrap(), halmos(&t, &w).unwrap());
        let u = egervary(&t, &w, 2).unwrap();
        assert_eq!(u.shape(), (6, 6));
        assert!(u.is_unitary());
        for k in 1..=2 {
            assert_eq!(compress(&u, 2, k).unwrap(), t.pow(k).unwrap());
        }
        assert_ne!(compress(&u, 2, 3).unwrap(), t.pow(3).unwrap());
        assert!(egervary(&t, &w, 0).is_err());
    }

    #[test]
    fn egervary_unitary_up_to_six() {
        for (t, w) in [z3_fixture(), z2_fixture()] {
            for order in 1..=6 {
                let u = egervary(&t, &w, order).unwrap();
                assert!(u.is_unitary(), "order {order}");
                assert_eq!(
                    u.adjoint().mul(&u).unwrap(),
                    Matrix::identity(u.rows(), t.descriptor())
                );
                for k in 1..=order as u64 {
                    assert_eq!(compress(&u, 2, k).unwrap(), t.pow(k).unwrap());
                    assert_eq!(
                        compress(&u.adjoint(), 2, k).unwrap(),
                        t.adjoint().pow(k).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn sznagy_apply_examples() {
        let (t, w) = z3_fixture();
        let op = SzNagyOperator::new(t.clone(), w.clone()).unwrap();
        let v = Vector::from_ints(fp(3), &[1, 0]).unwrap();
        let y = op.apply(&FinSuppSequence::single(0, v.clone())).unwrap();
        assert_eq!(y.get(0), Vector::from_ints(fp(3), &[2, 2]).unwrap());
        assert_eq!(y.get(-1), Vector::from_ints(fp(3), &[2, 1]).unwrap());
        assert_eq!(y.support().count(), 2);

        let zero = FinSuppSequence::zero(2, fp(3));
        assert!(op.apply(&zero).unwrap().is_zero());
        assert!(op.apply_adjoint(&zero).unwrap().is_zero());

        let ya = op.apply_adjoint(&FinSuppSequence::single(0, v.clone())).unwrap();
        assert_eq!(ya.get(0), t.adjoint().apply(&v).unwrap());
        assert_eq!(ya.get(1), w.m_t_star.apply(&v).unwrap());
    }

    #[test]
    fn sznagy_shifts_outside_the_core() {
        let (t, w) = z2_fixture();
        let op = SzNagyOperator::new(t, w).unwrap();
        let v = Vector::from_ints(fp(2), &[1, 1]).unwrap();
        let y = op.apply(&FinSuppSequence::single(5, v.clone())).unwrap();
        assert_eq!(y, FinSuppSequence::single(4, v.clone()));
        let y = op.apply(&FinSuppSequence::single(-3, v.clone())).unwrap();
        assert_eq!(y, FinSuppSequence::single(-4, v.clone()));
        let y = op.apply_adjoint(&FinSuppSequence::single(3, v.clone())).unwrap();
        assert_eq!(y, FinSuppSequence::single(4, v));
    }

    #[test]
    fn sznagy_round_trip_on_random_sequences() {
        let (t, w) = z3_fixture();
        let op = SzNagyOperator::new(t, w).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let x = random_sequence(&mut rng, 2, fp(3), 8).unwrap();
            assert_eq!(op.apply_adjoint(&op.apply(&x).unwrap()).unwrap(), x);
            assert_eq!(op.apply(&op.apply_adjoint(&x).unwrap()).unwrap(), x);
        }
    }

    #[test]
    fn sznagy_compression_matches_powers() {
        for (t, w) in [z3_fixture(), z2_fixture()] {
            let op = SzNagyOperator::new(t.clone(), w).unwrap();
            let desc = t.descriptor();
            for j in 0..2 {
                let v = Vector::basis(2, j, desc);
                for n in 0..=10 {
                    assert_eq!(op.compress(n, &v).unwrap(), t.pow(n).unwrap().apply(&v).unwrap());
                    assert_eq!(
                        op.compress_adjoint(n, &v).unwrap(),
                        t.adjoint().pow(n).unwrap().apply(&v).unwrap()
                    );
                }
            }
            assert!(op.compress(4, &Vector::zeros(2, desc)).unwrap().is_zero());
        }
        let (t, _) = z3_fixture();
        let op = SzNagyOperator::new(t, z3_fixture().1).unwrap();
        assert_eq!(
            op.compress(1, &Vector::from_ints(fp(3), &[1, 0]).unwrap()).unwrap(),
            Vector::from_ints(fp(3), &[2, 2]).unwrap()
        );
    }

    #[test]
    fn window_verification() {
        for (t, w) in [z3_fixture(), z2_fixture()] {
            let op = SzNagyOperator::new(t, w).unwrap();
            let report = op.verify_unitary_window(8, 50, 1).unwrap();
            assert!(report.passed(), "{report:?}");
            assert_eq!(report.basis_checked, 17 * 2);
        }
    }

    #[test]
    fn window_negative_control() {
        let (t, _) = z3_fixture();
        let bad = MagicWitness::symmetric(Matrix::identity(2, fp(3)));
        assert!(SzNagyOperator::new(t.clone(), bad.clone()).is_err());
        let op = SzNagyOperator::new_unchecked(t, bad).unwrap();
        let report = op.verify_unitary_window(8, 10, 1).unwrap();
        let failure = report.failure.expect("invalid witness must fail");
        assert!(failure.index.abs() <= 1, "{failure:?}");
    }

    #[test]
    fn norm_preservation_over_fp() {
        let (t, w) = z3_fixture();
        let op = SzNagyOperator::new(t, w).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x = random_sequence(&mut rng, 2, fp(3), 6).unwrap();
            assert_eq!(op.apply(&x).unwrap().sup_norm(), x.sup_norm());
        }
    }

    #[test]
    fn norm_preservation_for_integral_padic_dilation() {
        let q3 = FieldDescriptor::padic(3, 12).unwrap();
        let t = Matrix::from_ints(q3, &[&[3]]).unwrap();
        let root = crate::magic::is_magic_1x1(t.get(0, 0)).unwrap().unwrap();
        let w = MagicWitness::symmetric(Matrix::new(q3, 1, 1, vec![root]).unwrap());
        assert!(verify_magic(&t, &w).unwrap().holds());
        let op = SzNagyOperator::new(t, w).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let x = random_sequence(&mut rng, 1, q3, 6).unwrap();
            assert_eq!(op.apply(&x).unwrap().sup_norm(), x.sup_norm());
        }
    }

    #[test]
    fn padic_unitary_need_not_be_isometric() {
        let q5 = FieldDescriptor::padic(5, 10).unwrap();
        let t = Matrix::new(q5, 1, 1, vec![Scalar::from_rational(1, 5, q5).unwrap()]).unwrap();
        let root = crate::magic::is_magic_1x1(t.get(0, 0)).unwrap().unwrap();
        assert_eq!(root.valuation(), Some(-1));
        let u = halmos(&t, &MagicWitness::symmetric(Matrix::new(q5, 1, 1, vec![root]).unwrap())).unwrap();
        assert!(u.is_unitary());
        assert_eq!(u.op_norm(), BigRational::from_integer(5.into()));
        let e0 = Vector::basis(2, 0, q5);
        assert_eq!(u.apply(&e0).unwrap().sup_norm(), BigRational::from_integer(5.into()));
    }

    #[test]
    fn block_spec_validation() {
        let d = fp(3);
        assert!(BlockSpec::new(2, d, vec![vec![Some(Matrix::identity(3, d))]]).is_err());
        assert!(BlockSpec::new(2, d, vec![vec![None], vec![None, None]]).is_err());
        assert!(BlockSpec::new(1, d, vec![vec![Some(Matrix::identity(1, fp(5)))]]).is_err());
    }
}
