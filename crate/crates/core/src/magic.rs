//! Magic contractions: matrices `T` admitting self-adjoint `M_T`, `M_{T*}`
//! with
//!
//! ```text
//! M_T^2 = I - T*T,   M_{T*}^2 = I - TT*,   T M_T = M_{T*} T.
//! ```
//!
//! Witnesses are not unique. Over `F_p` they are found by exhaustive search
//! over symmetric matrices, pruned in three stages: square roots of the
//! defect, square roots of the codefect, then the intertwining identity.

use crate::error::{Error, Result};
use crate::fields::{FieldDescriptor, Scalar};
use crate::linalg::{Matrix, Vector};

pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// A pair `(M_T, M_{T*})` certifying the magic-contraction identities.
#[derive(Debug, Clone, PartialEq)]
pub struct MagicWitness {
    pub m_t: Matrix,
    pub m_t_star: Matrix,
}

impl MagicWitness {
    pub fn new(m_t: Matrix, m_t_star: Matrix) -> Self {
        Self { m_t, m_t_star }
    }

    /// `M_T = M_{T*} = m`.
    pub fn symmetric(m: Matrix) -> Self {
        Self {
            m_t: m.clone(),
            m_t_star: m,
        }
    }

    pub fn negated(&self) -> Self {
        Self {
            m_t: self.m_t.neg(),
            m_t_star: self.m_t_star.neg(),
        }
    }

    /// The witness for `T*`: the two roles swap.
    pub fn swapped(&self) -> Self {
        Self {
            m_t: self.m_t_star.clone(),
            m_t_star: self.m_t.clone(),
        }
    }
}

/// `I - T*T`.
pub fn defect(t: &Matrix) -> Matrix {
    let gram = t.adjoint().mul(t).expect("T*T is always conformable");
    Matrix::identity(t.cols(), t.descriptor())
        .sub(&gram)
        .expect("same shape")
}

/// `I - TT*`.
pub fn codefect(t: &Matrix) -> Matrix {
    let gram = t.mul(&t.adjoint()).expect("TT* is always conformable");
    Matrix::identity(t.rows(), t.descriptor())
        .sub(&gram)
        .expect("same shape")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub holds: bool,
    /// First `(row, col)` where the two sides differ.
    pub first_failure: Option<(usize, usize)>,
}

impl IdentityCheck {
    fn compare(name: &'static str, lhs: &Matrix, rhs: &Matrix) -> Self {
        let first_failure = lhs.first_difference(rhs);
        Self {
            name,
            holds: first_failure.is_none(),
            first_failure,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MagicReport {
    pub checks: Vec<IdentityCheck>,
}

impl MagicReport {
    pub fn holds(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn first_failing(&self) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| !c.holds)
    }
}

fn check_witness_shapes(t: &Matrix, w: &MagicWitness) -> Result<()> {
    let desc = t.descriptor();
    desc.ensure_same(&w.m_t.descriptor())?;
    desc.ensure_same(&w.m_t_star.descriptor())?;
    let (m, n) = t.shape();
    if w.m_t.shape() != (n, n) {
        return Err(Error::ShapeMismatch {
            op: "M_T",
            left: (n, n),
            right: w.m_t.shape(),
        });
    }
    if w.m_t_star.shape() != (m, m) {
        return Err(Error::ShapeMismatch {
            op: "M_T*",
            left: (m, m),
            right: w.m_t_star.shape(),
        });
    }
    Ok(())
}

/// Checks the two self-adjointness conditions, both square identities and
/// the intertwining `T M_T = M_{T*} T`, exactly.
pub fn verify_magic(t: &Matrix, w: &MagicWitness) -> Result<MagicReport> {
    check_witness_shapes(t, w)?;
    let checks = vec![
        IdentityCheck::compare("m_t_self_adjoint", &w.m_t, &w.m_t.adjoint()),
        IdentityCheck::compare("m_t_star_self_adjoint", &w.m_t_star, &w.m_t_star.adjoint()),
        IdentityCheck::compare("m_t_squared_is_defect", &w.m_t.mul(&w.m_t)?, &defect(t)),
        IdentityCheck::compare(
            "m_t_star_squared_is_codefect",
            &w.m_t_star.mul(&w.m_t_star)?,
            &codefect(t),
        ),
        IdentityCheck::compare("intertwining", &t.mul(&w.m_t)?, &w.m_t_star.mul(t)?),
    ];
    Ok(MagicReport { checks })
}

/// Fails with [`Error::InvalidWitness`] naming the first broken identity.
pub fn require_magic(t: &Matrix, w: &MagicWitness) -> Result<()> {
    let report = verify_magic(t, w)?;
    match report.first_failing() {
        None => Ok(()),
        Some(c) => Err(Error::InvalidWitness(format!(
            "{} fails at {:?}",
            c.name,
            c.first_failure.unwrap_or_default()
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    /// Maximum number of symmetric candidates examined.
    pub budget: u64,
    /// Stop at the first witness.
    pub early_exit: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            early_exit: false,
        }
    }
}

/// Small dense residue matrix used inside the search loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Raw {
    n: usize,
    m: usize,
    p: u64,
    data: Vec<u64>,
}

impl Raw {
    pub(crate) fn from_matrix(a: &Matrix) -> Self {
        Self {
            n: a.rows(),
            m: a.cols(),
            p: a.descriptor().p(),
            data: a.entries().iter().map(|s| s.residue().expect("prime field")).collect(),
        }
    }

    fn to_matrix(&self, desc: FieldDescriptor) -> Matrix {
        Matrix::new(
            desc,
            self.n,
            self.m,
            self.data.iter().map(|&r| Scalar::from_int(r as i64, desc)).collect(),
        )
        .expect("shape is consistent")
    }

    fn mul(&self, other: &Raw) -> Raw {
        let mut data = vec![0u64; self.n * other.m];
        for i in 0..self.n {
            for k in 0..self.m {
                let a = self.data[i * self.m + k];
                if a == 0 {
                    continue;
                }
                for j in 0..other.m {
                    let idx = i * other.m + j;
                    data[idx] = (data[idx] + a * other.data[k * other.m + j]) % self.p;
                }
            }
        }
        Raw {
            n: self.n,
            m: other.m,
            p: self.p,
            data,
        }
    }
}

/// Number of symmetric `n x n` matrices over `F_p`, saturating.
pub fn symmetric_count(n: usize, p: u64) -> u128 {
    let dims = (n * (n + 1) / 2) as u32;
    (p as u128).checked_pow(dims).unwrap_or(u128::MAX)
}

/// All symmetric `S` with `S^2 = target`, in lexicographic order of the
/// upper-triangular entries (row-major, first entry most significant).
fn symmetric_roots(target: &Raw) -> Vec<Raw> {
    let n = target.n;
    let p = target.p;
    let slots: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i..n).map(move |j| (i, j)))
        .collect();
    let mut digits = vec![0u64; slots.len()];
    let mut s = Raw {
        n,
        m: n,
        p,
        data: vec![0; n * n],
    };
    let mut out = Vec::new();
    loop {
        for (&(i, j), &d) in slots.iter().zip(&digits) {
            s.data[i * n + j] = d;
            s.data[j * n + i] = d;
        }
        if square_matches(&s, target) {
            out.push(s.clone());
        }
        // odometer: last slot varies fastest
        let mut k = slots.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < p {
                break;
            }
            digits[k] = 0;
        }
    }
}

fn square_matches(s: &Raw, target: &Raw) -> bool {
    let n = s.n;
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0u64;
            for k in 0..n {
                acc = (acc + s.data[i * n + k] * s.data[k * n + j]) % s.p;
            }
            if acc != target.data[i * n + j] {
                return false;
            }
        }
    }
    true
}

/// Exhaustive witness search over `F_p`.
///
/// The empty list means `T` is not a magic contraction.
pub fn search_witnesses_with(t: &Matrix, config: &SearchConfig) -> Result<Vec<MagicWitness>> {
    let desc = t.descriptor();
    if !desc.is_prime_field() {
        return Err(Error::SearchRequiresPrimeField(desc));
    }
    let (m, n) = t.shape();
    let p = desc.p();
    let required = symmetric_count(n, p).saturating_add(symmetric_count(m, p));
    if required > config.budget as u128 {
        return Err(Error::BudgetExceeded {
            required,
            budget: config.budget,
        });
    }

    let roots_t = symmetric_roots(&Raw::from_matrix(&defect(t)));
    if roots_t.is_empty() {
        return Ok(vec![]);
    }
    let roots_star = symmetric_roots(&Raw::from_matrix(&codefect(t)));
    let raw_t = Raw::from_matrix(t);

    let mut out = Vec::new();
    for a in &roots_t {
        let ta = raw_t.mul(a);
        for b in &roots_star {
            if ta == b.mul(&raw_t) {
                out.push(MagicWitness::new(a.to_matrix(desc), b.to_matrix(desc)));
                if config.early_exit {
                    return Ok(out);
                }
            }
        }
    }
    Ok(out)
}

/// Every witness for `T`, with the default budget.
pub fn search_witnesses(t: &Matrix) -> Result<Vec<MagicWitness>> {
    search_witnesses_with(t, &SearchConfig::default())
}

/// The first witness in search order, if any.
pub fn find_witness(t: &Matrix, budget: u64) -> Result<Option<MagicWitness>> {
    let config = SearchConfig {
        budget,
        early_exit: true,
    };
    Ok(search_witnesses_with(t, &config)?.into_iter().next())
}

/// A `1 x 1` matrix `[t]` is magic iff `1 - t^2` is a square; the
/// intertwining identity is automatic for scalars. Returns the smallest
/// square root as the witness.
pub fn is_magic_1x1(t: &Scalar) -> Result<Option<Scalar>> {
    let one = Scalar::one(t.descriptor());
    let d = &one - &(t * t);
    Ok(d.sqrt_all()?.into_iter().next())
}

/// For a magic contraction `T`, a fixed point of `T` is a fixed point of `T*`.
///
/// Returns whether `T* x = x`. A witness that fails verification or an `x`
/// with `T x != x` is a precondition error, distinct from a `false` answer.
pub fn check_fixed_point_transfer(t: &Matrix, w: &MagicWitness, x: &Vector) -> Result<bool> {
    t.require_square("fixed point transfer")?;
    require_magic(t, w)?;
    if t.apply(x)? != *x {
        return Err(Error::Precondition("T x != x".into()));
    }
    Ok(t.adjoint().apply(x)? == *x)
}
