//! Polynomial functional calculus, the von Neumann inequality
//! `||f(T)|| <= ||f(U)||` for Egervary dilations, and the Cesàro averages
//! `(1/(N+1)) sum_{n=1}^{N} T^n` behind the mean ergodic statement.

use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;

use crate::dilation::{egervary, FinSuppSequence, SzNagyOperator};
use crate::error::{Error, Result};
use crate::fields::{FieldDescriptor, FieldKind, Scalar};
use crate::linalg::{Matrix, Vector};
use crate::magic::MagicWitness;

/// `a_0 + a_1 z + ... + a_N z^N`, trimmed so the leading coefficient is
/// nonzero. The zero polynomial has no coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    desc: FieldDescriptor,
    coeffs: Vec<Scalar>,
}

impl Polynomial {
    pub fn new(desc: FieldDescriptor, mut coeffs: Vec<Scalar>) -> Result<Self> {
        for c in &coeffs {
            desc.ensure_same(&c.descriptor())?;
        }
        while coeffs.last().is_some_and(Scalar::is_zero) {
            coeffs.pop();
        }
        Ok(Self { desc, coeffs })
    }

    pub fn from_ints(desc: FieldDescriptor, coeffs: &[i64]) -> Self {
        Self::new(desc, coeffs.iter().map(|&c| Scalar::from_int(c, desc)).collect())
            .expect("uniform descriptor")
    }

    /// `z^k`.
    pub fn monomial(desc: FieldDescriptor, k: usize) -> Self {
        let mut coeffs = vec![Scalar::zero(desc); k];
        coeffs.push(Scalar::one(desc));
        Self { desc, coeffs }
    }

    /// Comma-separated coefficients `a0,a1,...,aN` in the scalar grammar.
    pub fn parse(s: &str, desc: FieldDescriptor) -> Result<Self> {
        let coeffs = s
            .split(',')
            .map(|c| Scalar::parse(c, desc))
            .collect::<Result<Vec<_>>>()?;
        Self::new(desc, coeffs)
    }

    pub fn descriptor(&self) -> FieldDescriptor {
        self.desc
    }

    pub fn coefficients(&self) -> &[Scalar] {
        &self.coeffs
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.desc.ensure_same(&other.desc)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Polynomial {
                desc: self.desc,
                coeffs: vec![],
            });
        }
        let mut out = vec![Scalar::zero(self.desc); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Polynomial::new(self.desc, out)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.coeffs.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// `f(A)` by Horner's rule.
pub fn eval_on_matrix(f: &Polynomial, a: &Matrix) -> Result<Matrix> {
    let n = a.require_square("polynomial evaluation")?;
    f.desc.ensure_same(&a.descriptor())?;
    let id = Matrix::identity(n, a.descriptor());
    let mut acc = Matrix::zeros(n, n, a.descriptor());
    for c in f.coeffs.iter().rev() {
        acc = acc.mul(a)?.add(&id.scale(c)?)?;
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VnReport {
    /// `||f(T)||`.
    pub lhs: BigRational,
    /// `||f(U)||` for the Egervary `N`-dilation `U`.
    pub rhs: BigRational,
    pub holds: bool,
}

/// Compares `||f(T)||` with `||f(U)||`, `U` the Egervary `N`-dilation of `T`.
pub fn vn_check(f: &Polynomial, t: &Matrix, w: &MagicWitness, order: usize) -> Result<VnReport> {
    if f.degree() > order {
        return Err(Error::DegreeExceedsOrder {
            degree: f.degree(),
            order,
        });
    }
    let u = egervary(t, w, order)?;
    let lhs = eval_on_matrix(f, t)?.op_norm();
    let rhs = eval_on_matrix(f, &u)?.op_norm();
    Ok(VnReport {
        holds: lhs <= rhs,
        lhs,
        rhs,
    })
}

fn cesaro_weight(desc: FieldDescriptor, order: u64) -> Result<Scalar> {
    if order == 0 {
        return Err(Error::InvalidDimension("Cesaro order N must be >= 1".into()));
    }
    let weight = order + 1;
    if desc.kind() == FieldKind::PrimeField && weight.is_multiple_of(desc.p()) {
        return Err(Error::CesaroWeightNotInvertible {
            weight,
            p: desc.p(),
        });
    }
    Scalar::from_rational(1, weight as i64, desc)
}

fn power_sum(t: &Matrix, order: u64) -> Result<Matrix> {
    let n = t.require_square("Cesaro average")?;
    let mut power = Matrix::identity(n, t.descriptor());
    let mut sum = Matrix::zeros(n, n, t.descriptor());
    for _ in 0..order {
        power = power.mul(t)?;
        sum = sum.add(&power)?;
    }
    Ok(sum)
}

/// `(1/(N+1)) sum_{n=1}^{N} T^n`. Note the weight is `1/(N+1)` over `N`
/// terms.
pub fn cesaro_average(t: &Matrix, order: u64) -> Result<Matrix> {
    let weight = cesaro_weight(t.descriptor(), order)?;
    power_sum(t, order)?.scale(&weight)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicReport {
    /// Cesàro average of `T` applied to `v`.
    pub lhs_vector: Vector,
    /// Index-0 component of the Cesàro average of the Sz.-Nagy dilation
    /// applied to `v` embedded at index 0.
    pub rhs_vector: Vector,
    pub equal: bool,
}

/// The compression identity behind the mean ergodic statement:
/// `A_N(T) v = P_X A_N(U) (v at 0)`.
pub fn ergodic_compression_check(t: &Matrix, w: &MagicWitness, order: u64, v: &Vector) -> Result<ErgodicReport> {
    let weight = cesaro_weight(t.descriptor(), order)?;
    let op = SzNagyOperator::new(t.clone(), w.clone())?;
    let lhs_vector = cesaro_average(t, order)?.apply(v)?;

    let mut x = FinSuppSequence::single(0, v.clone());
    let mut acc = FinSuppSequence::zero(v.len(), v.descriptor());
    for _ in 0..order {
        x = op.apply(&x)?;
        acc = acc.add(&x)?;
    }
    let rhs_vector = acc.scale(&weight)?.get(0);
    Ok(ErgodicReport {
        equal: lhs_vector == rhs_vector,
        lhs_vector,
        rhs_vector,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilizationReport {
    /// `(n, ||A_{n+1} v - A_n v||)` for `n = 1..=N_max`.
    pub differences: Vec<(u64, BigRational)>,
    /// Differences never increase and the last one is zero.
    pub nonincreasing_to_zero: bool,
}

/// Tabulates successive differences of Cesàro averages over `Q_p`.
/// Diagnostic only: nothing is inferred about convergence.
pub fn cesaro_stabilization(t: &Matrix, v: &Vector, max_order: u64) -> Result<StabilizationReport> {
    let desc = t.descriptor();
    if desc.kind() != FieldKind::PadicField {
        return Err(Error::Precondition(
            "Cesaro stabilization is tabulated over Q_p only".into(),
        ));
    }
    let n = t.require_square("Cesaro stabilization")?;
    let mut power = Matrix::identity(n, desc);
    let mut sum = Matrix::zeros(n, n, desc);
    let mut averages = Vec::with_capacity(max_order as usize + 1);
    for order in 1..=max_order + 1 {
        power = power.mul(t)?;
        sum = sum.add(&power)?;
        averages.push(sum.scale(&cesaro_weight(desc, order)?)?.apply(v)?);
    }
    let differences: Vec<(u64, BigRational)> = averages
        .windows(2)
        .enumerate()
        .map(|(i, pair)| Ok((i as u64 + 1, pair[1].sub(&pair[0])?.sup_norm())))
        .collect::<Result<_>>()?;
    let nonincreasing = differences.windows(2).all(|w| w[1].1 <= w[0].1);
    let ends_at_zero = differences.last().is_some_and(|(_, d)| d.is_zero());
    Ok(StabilizationReport {
        nonincreasing_to_zero: nonincreasing && ends_at_zero,
        differences,
    })
}
