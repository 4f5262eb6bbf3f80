//! Dense vectors and matrices over a single field descriptor, the coordinate
//! bilinear form, sup norms, adjoints and the operator predicates.
//!
//! The form `<x, y> = sum x_j y_j` is symmetric and bilinear with the
//! identity involution on scalars, so the adjoint of a matrix is its
//! transpose.

use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fields::{FieldDescriptor, FieldKind, Scalar};

fn check_uniform(desc: FieldDescriptor, entries: &[Scalar]) -> Result<()> {
    for e in entries {
        desc.ensure_same(&e.descriptor())?;
    }
    Ok(())
}

fn max_norm<'a>(it: impl Iterator<Item = &'a Scalar>) -> BigRational {
    it.map(Scalar::norm)
        .fold(BigRational::zero(), |acc, n| if n > acc { n } else { acc })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    desc: FieldDescriptor,
    entries: Vec<Scalar>,
}

impl Vector {
    pub fn new(desc: FieldDescriptor, entries: Vec<Scalar>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidDimension("vector must have length >= 1".into()));
        }
        check_uniform(desc, &entries)?;
        Ok(Self { desc, entries })
    }

    pub fn from_ints(desc: FieldDescriptor, values: &[i64]) -> Result<Self> {
        Self::new(
            desc,
            values.iter().map(|&v| Scalar::from_int(v, desc)).collect(),
        )
    }

    pub fn zeros(len: usize, desc: FieldDescriptor) -> Self {
        assert!(len >= 1, "vector length must be >= 1");
        Self {
            desc,
            entries: vec![Scalar::zero(desc); len],
        }
    }

    /// The standard basis vector `e_j`.
    pub fn basis(len: usize, j: usize, desc: FieldDescriptor) -> Self {
        let mut v = Self::zeros(len, desc);
        v.entries[j] = Scalar::one(desc);
        v
    }

    pub fn descriptor(&self) -> FieldDescriptor {
        self.desc
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> &Scalar {
        &self.entries[i]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Scalar::is_zero)
    }

    fn check_conformable(&self, other: &Vector) -> Result<()> {
        self.desc.ensure_same(&other.desc)?;
        if self.len() != other.len() {
            return Err(Error::ShapeMismatch {
                op: "vector",
                left: (self.len(), 1),
                right: (other.len(), 1),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Vector) -> Result<Vector> {
        self.check_conformable(other)?;
        Ok(Vector {
            desc: self.desc,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Vector) -> Result<Vector> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Vector {
        Vector {
            desc: self.desc,
            entries: self.entries.iter().map(Scalar::neg).collect(),
        }
    }

    pub fn scale(&self, c: &Scalar) -> Result<Vector> {
        self.desc.ensure_same(&c.descriptor())?;
        Ok(Vector {
            desc: self.desc,
            entries: self.entries.iter().map(|a| c * a).collect(),
        })
    }

    /// `max_j |x_j|`.
    pub fn sup_norm(&self) -> BigRational {
        max_norm(self.entries.iter())
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// `<x, y> = sum_j x_j y_j`.
pub fn inner_product(x: &Vector, y: &Vector) -> Result<Scalar> {
    x.check_conformable(y)?;
    Ok(x
        .entries
        .iter()
        .zip(&y.entries)
        .fold(Scalar::zero(x.desc), |acc, (a, b)| &acc + &(a * b)))
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    desc: FieldDescriptor,
    rows: usize,
    cols: usize,
    entries: Vec<Scalar>,
}

impl Matrix {
    pub fn new(desc: FieldDescriptor, rows: usize, cols: usize, entries: Vec<Scalar>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDimension(format!(
                "matrix shape {rows}x{cols} must be at least 1x1"
            )));
        }
        if entries.len() != rows * cols {
            return Err(Error::InvalidDimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        check_uniform(desc, &entries)?;
        Ok(Self {
            desc,
            rows,
            cols,
            entries,
        })
    }

    pub fn from_rows(desc: FieldDescriptor, rows: Vec<Vec<Scalar>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidDimension("ragged matrix rows".into()));
        }
        Self::new(desc, r, c, rows.into_iter().flatten().collect())
    }

    pub fn from_ints(desc: FieldDescriptor, rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(
            desc,
            rows.iter()
                .map(|row| row.iter().map(|&v| Scalar::from_int(v, desc)).collect())
                .collect(),
        )
    }

    pub fn zeros(rows: usize, cols: usize, desc: FieldDescriptor) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix shape must be at least 1x1");
        Self {
            desc,
            rows,
            cols,
            entries: vec![Scalar::zero(desc); rows * cols],
        }
    }

    pub fn identity(n: usize, desc: FieldDescriptor) -> Self {
        let mut m = Self::zeros(n, n, desc);
        for i in 0..n {
            m.entries[i * n + i] = Scalar::one(desc);
        }
        m
    }

    pub fn descriptor(&self) -> FieldDescriptor {
        self.desc
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

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Scalar) {
        assert_eq!(value.descriptor(), self.desc);
        self.entries[i * self.cols + j] = value;
    }

    pub fn row_vec(&self, i: usize) -> Vec<Scalar> {
        self.entries[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> Vector {
        Vector {
            desc: self.desc,
            entries: (0..self.rows).map(|i| self.get(i, j).clone()).collect(),
        }
    }

    pub(crate) fn require_square(&self, op: &'static str) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                op,
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    fn check_same_shape(&self, other: &Matrix, op: &'static str) -> Result<()> {
        self.desc.ensure_same(&other.desc)?;
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                op,
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(())
    }

    /// The transpose, which is the adjoint for the symmetric bilinear form.
    pub fn adjoint(&self) -> Matrix {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(self.get(i, j).clone());
            }
        }
        Matrix {
            desc: self.desc,
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_shape(other, "add")?;
        Ok(Matrix {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
            ..self.clone()
        })
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Matrix {
        Matrix {
            desc: self.desc,
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(Scalar::neg).collect(),
        }
    }

    pub fn scale(&self, c: &Scalar) -> Result<Matrix> {
        self.desc.ensure_same(&c.descriptor())?;
        Ok(Matrix {
            desc: self.desc,
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|a| c * a).collect(),
        })
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        self.desc.ensure_same(&other.desc)?;
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch {
                op: "mul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut entries = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Scalar::zero(self.desc);
                for k in 0..self.cols {
                    acc = &acc + &(self.get(i, k) * other.get(k, j));
                }
                entries.push(acc);
            }
        }
        Ok(Matrix {
            desc: self.desc,
            rows: self.rows,
            cols: other.cols,
            entries,
        })
    }

    /// `A^k`, with `A^0 = I`.
    pub fn pow(&self, k: u64) -> Result<Matrix> {
        let n = self.require_square("pow")?;
        let mut acc = Matrix::identity(n, self.desc);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        self.desc.ensure_same(&x.desc)?;
        if self.cols != x.len() {
            return Err(Error::ShapeMismatch {
                op: "apply",
                left: self.shape(),
                right: (x.len(), 1),
            });
        }
        Ok(Vector {
            desc: self.desc,
            entries: (0..self.rows)
                .map(|i| {
                    (0..self.cols).fold(Scalar::zero(self.desc), |acc, k| {
                        &acc + &(self.get(i, k) * x.get(k))
                    })
                })
                .collect(),
        })
    }

    /// Operator norm for the sup norm on both sides: the largest entry norm.
    ///
    /// `|(Ax)_i| <= max_k |a_ik| |x_k|` by the ultrametric inequality, and the
    /// bound is attained on the standard basis vector of the largest entry.
    pub fn op_norm(&self) -> BigRational {
        max_norm(self.entries.iter())
    }

    /// The `height x width` sub-block starting at `(row, col)`.
    pub fn block(&self, row: usize, col: usize, height: usize, width: usize) -> Result<Matrix> {
        if row + height > self.rows || col + width > self.cols || height == 0 || width == 0 {
            return Err(Error::InvalidDimension(format!(
                "block {height}x{width} at ({row}, {col}) outside {}x{}",
                self.rows, self.cols
            )));
        }
        let mut entries = Vec::with_capacity(height * width);
        for i in row..row + height {
            entries.extend_from_slice(&self.entries[i * self.cols + col..i * self.cols + col + width]);
        }
        Ok(Matrix {
            desc: self.desc,
            rows: height,
            cols: width,
            entries,
        })
    }

    /// Row-major position of the first entry where `self` and `other` differ.
    pub fn first_difference(&self, other: &Matrix) -> Option<(usize, usize)> {
        if self.shape() != other.shape() || self.desc != other.desc {
            return Some((0, 0));
        }
        self.entries
            .iter()
            .zip(&other.entries)
            .position(|(a, b)| a != b)
            .map(|k| (k / self.cols, k % self.cols))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Scalar::is_zero)
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.is_square() && self.adjoint() == *self
    }

    pub fn is_unitary(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        let id = Matrix::identity(self.rows, self.desc);
        let star = self.adjoint();
        self.mul(&star).is_ok_and(|m| m == id) && star.mul(self).is_ok_and(|m| m == id)
    }

    /// `A* A = I`; rectangular matrices allowed.
    pub fn is_isometry(&self) -> bool {
        let id = Matrix::identity(self.cols, self.desc);
        self.adjoint().mul(self).is_ok_and(|m| m == id)
    }

    pub fn is_projection(&self) -> bool {
        self.is_self_adjoint() && self.mul(self).is_ok_and(|m| m == *self)
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row_vec(i).iter().map(ToString::to_string).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axiom {
    /// (i) `<x, y> = 0` for all `y` forces `x = 0`.
    Nondegeneracy,
    /// (ii) `<x, y> = <y, x>`.
    Symmetry,
    /// (iii) `<a x + y, z> = a <x, z> + <y, z>`.
    Linearity,
    /// (iv) `|<x, y>| <= ||x|| ||y||`.
    NormBound,
}

impl Axiom {
    pub fn name(&self) -> &'static str {
        match self {
            Axiom::Nondegeneracy => "nondegeneracy",
            Axiom::Symmetry => "symmetry",
            Axiom::Linearity => "linearity",
            Axiom::NormBound => "norm_bound",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxiomCheck {
    pub axiom: Axiom,
    pub passed: bool,
    pub counterexample: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxiomReport {
    pub checks: Vec<AxiomCheck>,
    pub gram_is_identity: bool,
}

impl AxiomReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, axiom: Axiom) -> &AxiomCheck {
        self.checks.iter().find(|c| c.axiom == axiom).unwrap()
    }
}

/// Triples used for the linearity check are drawn from this many samples.
const LINEARITY_SAMPLE_CAP: usize = 12;

/// Checks the p-adic Hilbert space axioms of `K^d` on the given samples.
pub fn check_axioms(desc: FieldDescriptor, samples: &[Vector]) -> Result<AxiomReport> {
    let Some(first) = samples.first() else {
        return Err(Error::Precondition("axiom check needs at least one sample".into()));
    };
    let d = first.len();
    for s in samples {
        desc.ensure_same(&s.descriptor())?;
        if s.len() != d {
            return Err(Error::InvalidDimension(format!(
                "samples of lengths {d} and {}",
                s.len()
            )));
        }
    }

    let basis: Vec<Vector> = (0..d).map(|j| Vector::basis(d, j, desc)).collect();
    let mut gram = Matrix::zeros(d, d, desc);
    for i in 0..d {
        for j in 0..d {
            gram.set(i, j, inner_product(&basis[i], &basis[j])?);
        }
    }
    let gram_is_identity = gram == Matrix::identity(d, desc);
    let mut nondegenerate = AxiomCheck {
        axiom: Axiom::Nondegeneracy,
        passed: gram_is_identity,
        counterexample: (!gram_is_identity).then(|| format!("Gram matrix of basis:\n{gram}")),
    };
    if nondegenerate.passed {
        for x in samples.iter().filter(|x| !x.is_zero()) {
            let mut witnessed = false;
            for e in &basis {
                if !inner_product(x, e)?.is_zero() {
                    witnessed = true;
                    break;
                }
            }
            if !witnessed {
                nondegenerate.passed = false;
                nondegenerate.counterexample = Some(format!("{x} is orthogonal to every basis vector"));
                break;
            }
        }
    }

    let mut symmetry = AxiomCheck {
        axiom: Axiom::Symmetry,
        passed: true,
        counterexample: None,
    };
    let mut norm_bound = AxiomCheck {
        axiom: Axiom::NormBound,
        passed: true,
        counterexample: None,
    };
    for x in samples {
        for y in samples {
            let xy = inner_product(x, y)?;
            if symmetry.passed && xy != inner_product(y, x)? {
                symmetry.passed = false;
                symmetry.counterexample = Some(format!("x = {x}, y = {y}"));
            }
            if norm_bound.passed && xy.norm() > x.sup_norm() * y.sup_norm() {
                norm_bound.passed = false;
                norm_bound.counterexample = Some(format!("x = {x}, y = {y}, <x, y> = {xy}"));
            }
        }
    }

    let mut alphas: Vec<Scalar> = [0i64, 1, -1, 2, desc.p() as i64]
        .iter()
        .map(|&a| Scalar::from_int(a, desc))
        .collect();
    if desc.kind() == FieldKind::PadicField {
        alphas.push(Scalar::from_rational(1, desc.p() as i64, desc)?);
    }
    alphas.extend(first.entries().iter().cloned());

    let mut linearity = AxiomCheck {
        axiom: Axiom::Linearity,
        passed: true,
        counterexample: None,
    };
    let sub = &samples[..samples.len().min(LINEARITY_SAMPLE_CAP)];
    'outer: for x in sub {
        for y in sub {
            for z in sub {
                for a in &alphas {
                    let lhs = inner_product(&x.scale(a)?.add(y)?, z)?;
                    let rhs = &(a * &inner_product(x, z)?) + &inner_product(y, z)?;
                    if lhs != rhs {
                        linearity.passed = false;
                        linearity.counterexample =
                            Some(format!("a = {a}, x = {x}, y = {y}, z = {z}"));
                        break 'outer;
                    }
                }
            }
        }
    }

    Ok(AxiomReport {
        checks: vec![nondegenerate, symmetry, linearity, norm_bound],
        gram_is_identity,
    })
}
