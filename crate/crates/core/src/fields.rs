//! Exact scalar arithmetic over non-Archimedean fields.
//!
//! Two scalar universes are supported:
//!
//! * the finite prime field `F_p` with the trivial valuation (`|x| = 1` for
//!   every nonzero `x`), and
//! * the p-adic numbers `Q_p` at capped relative precision, where a nonzero
//!   element is stored as `p^v * u` with `u` a unit known modulo `p^r`.
//!
//! A p-adic scalar may also be an exact zero or a zero that is only known
//! modulo `p^k` (written `O(p^k)`). The latter appears when every tracked
//! digit of a sum cancels. Equality compares two p-adic values at the
//! smaller of their absolute precisions, so `O(p^k)` equals zero.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub const DEFAULT_PRECISION: u32 = 20;

/// Primes must stay below this bound so residue products fit in a `u64`.
pub const PRIME_BOUND: u64 = 1 << 31;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    PrimeField,
    PadicField,
}

/// Selects the scalar universe: `F_p` or `Q_p` with a fixed number of
/// significant base-p digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldDescriptor {
    kind: FieldKind,
    p: u64,
    precision: u32,
}

impl FieldDescriptor {
    pub fn prime_field(p: u64) -> Result<Self> {
        check_prime(p)?;
        Ok(Self {
            kind: FieldKind::PrimeField,
            p,
            precision: 0,
        })
    }

    pub fn padic(p: u64, precision: u32) -> Result<Self> {
        check_prime(p)?;
        if precision == 0 {
            return Err(Error::ZeroPrecision);
        }
        Ok(Self {
            kind: FieldKind::PadicField,
            p,
            precision,
        })
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Number of significant digits; `None` for a prime field.
    pub fn precision(&self) -> Option<u32> {
        match self.kind {
            FieldKind::PrimeField => None,
            FieldKind::PadicField => Some(self.precision),
        }
    }

    pub fn is_prime_field(&self) -> bool {
        self.kind == FieldKind::PrimeField
    }

    pub fn ensure_same(&self, other: &FieldDescriptor) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::DescriptorMismatch {
                left: *self,
                right: *other,
            })
        }
    }
}

impl fmt::Display for FieldDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FieldKind::PrimeField => write!(f, "F_{}", self.p),
            FieldKind::PadicField => write!(f, "Q_{} (precision {})", self.p, self.precision),
        }
    }
}

/// Trial division; inputs are bounded by [`PRIME_BOUND`].
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn check_prime(p: u64) -> Result<()> {
    if p >= PRIME_BOUND {
        return Err(Error::PrimeTooLarge(p));
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    Ok(())
}

pub(crate) fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    let m128 = m as u128;
    let mut b = (base % m) as u128;
    let mut acc = 1u128 % m128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        exp >>= 1;
    }
    acc as u64
}

/// Euler's criterion for an odd prime. Zero counts as a square.
pub fn euler_is_square(a: u64, p: u64) -> bool {
    let a = a % p;
    if a == 0 || p == 2 {
        return true;
    }
    pow_mod(a, (p - 1) / 2, p) == 1
}

/// A square root of `a` modulo the prime `p`, or `None` for a non-residue.
pub fn tonelli_shanks(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if p == 2 {
        return Some(a);
    }
    if !euler_is_square(a, p) {
        return None;
    }
    let mut q = p - 1;
    let mut s = 0u32;
    while q.is_multiple_of(2) {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while pow_mod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = t2 * t2 % p;
            i += 1;
        }
        let b = pow_mod(c, 1u64 << (m - i - 1), p);
        m = i;
        c = b * b % p;
        t = t * c % p;
        r = r * b % p;
    }
    Some(r)
}

fn big_pow(p: u64, k: u32) -> BigUint {
    BigUint::from(p).pow(k)
}

fn mod_inverse(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    let a = BigInt::from_biguint(Sign::Plus, a % m);
    let m = BigInt::from_biguint(Sign::Plus, m.clone());
    let ext = a.extended_gcd(&m);
    if !ext.gcd.is_one() {
        return None;
    }
    ext.x.mod_floor(&m).to_biguint()
}

/// Splits `n != 0` as `p^v * rest` with `p` not dividing `rest`.
fn split_valuation(n: &BigUint, p: u64) -> (i64, BigUint) {
    let pb = BigUint::from(p);
    let mut v = 0i64;
    let mut rest = n.clone();
    while (&rest % &pb).is_zero() {
        rest /= &pb;
        v += 1;
    }
    (v, rest)
}

/// Square root of a p-adic unit modulo `p^prec` by Newton-Hensel lifting
/// from a root modulo `p`. `p` must be odd.
fn hensel_sqrt(unit: &BigUint, p: u64, prec: u32) -> Option<BigUint> {
    let r0 = tonelli_shanks((unit % p).to_u64().unwrap_or(0), p)?;
    let mut x = BigUint::from(r0);
    let mut known = 1u32;
    while known < prec {
        known = (known * 2).min(prec);
        let m = big_pow(p, known);
        let target = unit % &m;
        let fx = (&x * &x + &m - target) % &m;
        let deriv = (&x * 2u32) % &m;
        let inv = mod_inverse(&deriv, &m)?;
        x = (&x + &m - (fx * inv) % &m) % &m;
    }
    Some(x)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Repr {
    /// Element of `F_p`, reduced.
    Residue(u64),
    /// Exact p-adic zero.
    Zero,
    /// A p-adic value only known to be divisible by `p^k`.
    ZeroAt(i64),
    /// `p^val * unit` with `unit` coprime to p and known modulo `p^prec`.
    Unit { val: i64, unit: BigUint, prec: u32 },
}

/// How a p-adic sum whose tracked digits all cancel is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cancellation {
    /// Return [`Error::PrecisionExhausted`].
    Error,
    /// Return the zero-at-precision value `O(p^k)`.
    ZeroAtPrecision,
}

/// One field element together with its descriptor.
#[derive(Debug, Clone)]
pub struct Scalar {
    desc: FieldDescriptor,
    repr: Repr,
}

impl Scalar {
    pub fn zero(desc: FieldDescriptor) -> Self {
        let repr = match desc.kind {
            FieldKind::PrimeField => Repr::Residue(0),
            FieldKind::PadicField => Repr::Zero,
        };
        Self { desc, repr }
    }

    pub fn one(desc: FieldDescriptor) -> Self {
        Self::from_int(1, desc)
    }

    pub fn from_int(n: i64, desc: FieldDescriptor) -> Self {
        Self::from_bigint(&BigInt::from(n), desc)
    }

    pub fn from_bigint(n: &BigInt, desc: FieldDescriptor) -> Self {
        Self::from_bigint_ratio(n, &BigInt::one(), desc).expect("unit denominator")
    }

    /// Exact image of `num / den` in the field.
    pub fn from_rational(num: i64, den: i64, desc: FieldDescriptor) -> Result<Self> {
        Self::from_bigint_ratio(&BigInt::from(num), &BigInt::from(den), desc)
    }

    pub fn from_bigint_ratio(num: &BigInt, den: &BigInt, desc: FieldDescriptor) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let p = desc.p;
        let pb = BigInt::from(p);
        match desc.kind {
            FieldKind::PrimeField => {
                let d = den.mod_floor(&pb).to_u64().unwrap();
                if d == 0 {
                    return Err(Error::DenominatorDivisibleByP {
                        den: den.to_string(),
                        p,
                    });
                }
                let n = num.mod_floor(&pb).to_u64().unwrap();
                let inv = pow_mod(d, p - 2, p);
                Ok(Self {
                    desc,
                    repr: Repr::Residue(mul_mod(n, inv, p)),
                })
            }
            FieldKind::PadicField => {
                if num.is_zero() {
                    return Ok(Self::zero(desc));
                }
                let negative = num.is_negative() != den.is_negative();
                let (vn, un) = split_valuation(num.magnitude(), p);
                let (vd, ud) = split_valuation(den.magnitude(), p);
                let prec = desc.precision;
                let m = big_pow(p, prec);
                let inv = mod_inverse(&ud, &m).expect("unit is invertible");
                let mut unit = (un * inv) % &m;
                if negative {
                    unit = (&m - unit) % &m;
                }
                Ok(Self {
                    desc,
                    repr: Repr::Unit {
                        val: vn - vd,
                        unit,
                        prec,
                    },
                })
            }
        }
    }

    /// `p^val * unit` at full precision. `unit` must be coprime to p.
    pub fn from_parts(val: i64, unit: &BigUint, desc: FieldDescriptor) -> Result<Self> {
        if desc.is_prime_field() {
            return Err(Error::Precondition(
                "p^v * u form is only meaningful in Q_p".into(),
            ));
        }
        let prec = desc.precision;
        let m = big_pow(desc.p, prec);
        let unit = unit % &m;
        if (&unit % desc.p).is_zero() {
            return Err(Error::Parse(format!(
                "unit {unit} is divisible by p = {}",
                desc.p
            )));
        }
        Ok(Self {
            desc,
            repr: Repr::Unit { val, unit, prec },
        })
    }

    /// The zero known only modulo `p^k`.
    pub fn zero_at(k: i64, desc: FieldDescriptor) -> Self {
        match desc.kind {
            FieldKind::PrimeField => Self::zero(desc),
            FieldKind::PadicField => Self {
                desc,
                repr: Repr::ZeroAt(k),
            },
        }
    }

    pub fn descriptor(&self) -> FieldDescriptor {
        self.desc
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Residue(0) | Repr::Zero | Repr::ZeroAt(_))
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.repr, Repr::Residue(0) | Repr::Zero)
    }

    /// The residue of an `F_p` element.
    pub fn residue(&self) -> Option<u64> {
        match self.repr {
            Repr::Residue(r) => Some(r),
            _ => None,
        }
    }

    /// p-adic valuation of a nonzero `Q_p` element.
    pub fn valuation(&self) -> Option<i64> {
        match self.repr {
            Repr::Unit { val, .. } => Some(val),
            _ => None,
        }
    }

    pub fn unit(&self) -> Option<&BigUint> {
        match &self.repr {
            Repr::Unit { unit, .. } => Some(unit),
            _ => None,
        }
    }

    /// Number of significant digits still tracked for a nonzero `Q_p` value.
    pub fn relative_precision(&self) -> Option<u32> {
        match self.repr {
            Repr::Unit { prec, .. } => Some(prec),
            _ => None,
        }
    }

    /// Exponent `k` such that the value is known modulo `p^k`; `None` when
    /// exact (prime-field elements and exact zero).
    pub fn absolute_precision(&self) -> Option<i64> {
        match self.repr {
            Repr::Residue(_) | Repr::Zero => None,
            Repr::ZeroAt(k) => Some(k),
            Repr::Unit { val, prec, .. } => Some(val + prec as i64),
        }
    }

    /// `|x|`: the trivial valuation on `F_p`, `p^(-v)` on `Q_p`.
    pub fn norm(&self) -> BigRational {
        match self.repr {
            Repr::Residue(0) | Repr::Zero | Repr::ZeroAt(_) => BigRational::zero(),
            Repr::Residue(_) => BigRational::one(),
            Repr::Unit { val, .. } => p_power(self.desc.p, -val),
        }
    }

    pub fn add(&self, other: &Scalar) -> Result<Scalar> {
        self.add_with(other, Cancellation::Error)
    }

    pub fn add_with(&self, other: &Scalar, policy: Cancellation) -> Result<Scalar> {
        self.desc.ensure_same(&other.desc)?;
        let p = self.desc.p;
        let repr = match (&self.repr, &other.repr) {
            (Repr::Residue(a), Repr::Residue(b)) => Repr::Residue((a + b) % p),
            (Repr::Zero, x) | (x, Repr::Zero) => x.clone(),
            (Repr::ZeroAt(k), Repr::ZeroAt(j)) => Repr::ZeroAt(*k.min(j)),
            (Repr::ZeroAt(k), Repr::Unit { val, unit, prec })
            | (Repr::Unit { val, unit, prec }, Repr::ZeroAt(k)) => {
                truncate_unit(p, *val, unit, *prec, *k)
            }
            (
                Repr::Unit {
                    val: v1,
                    unit: u1,
                    prec: r1,
                },
                Repr::Unit {
                    val: v2,
                    unit: u2,
                    prec: r2,
                },
            ) => {
                let abs = (v1 + *r1 as i64).min(v2 + *r2 as i64);
                let vmin = *v1.min(v2);
                let width = (abs - vmin) as u32;
                let m = big_pow(p, width);
                let s = (u1 * big_pow(p, (v1 - vmin) as u32) + u2 * big_pow(p, (v2 - vmin) as u32))
                    % &m;
                if s.is_zero() {
                    match policy {
                        Cancellation::Error => {
                            return Err(Error::PrecisionExhausted { absolute: abs })
                        }
                        Cancellation::ZeroAtPrecision => Repr::ZeroAt(abs),
                    }
                } else {
                    let (w, unit) = split_valuation(&s, p);
                    Repr::Unit {
                        val: vmin + w,
                        unit,
                        prec: width - w as u32,
                    }
                }
            }
            _ => unreachable!("descriptor kinds already matched"),
        };
        Ok(Scalar {
            desc: self.desc,
            repr,
        })
    }

    pub fn neg(&self) -> Scalar {
        let p = self.desc.p;
        let repr = match &self.repr {
            Repr::Residue(a) => Repr::Residue((p - a) % p),
            Repr::Unit { val, unit, prec } => {
                let m = big_pow(p, *prec);
                Repr::Unit {
                    val: *val,
                    unit: (&m - unit) % &m,
                    prec: *prec,
                }
            }
            other => other.clone(),
        };
        Scalar {
            desc: self.desc,
            repr,
        }
    }

    pub fn sub(&self, other: &Scalar) -> Result<Scalar> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Scalar) -> Result<Scalar> {
        self.desc.ensure_same(&other.desc)?;
        let p = self.desc.p;
        let repr = match (&self.repr, &other.repr) {
            (Repr::Residue(a), Repr::Residue(b)) => Repr::Residue(mul_mod(*a, *b, p)),
            (Repr::Zero, _) | (_, Repr::Zero) => Repr::Zero,
            (Repr::ZeroAt(k), Repr::ZeroAt(j)) => Repr::ZeroAt(k + j),
            (Repr::ZeroAt(k), Repr::Unit { val, .. }) | (Repr::Unit { val, .. }, Repr::ZeroAt(k)) => {
                Repr::ZeroAt(k + val)
            }
            (
                Repr::Unit {
                    val: v1,
                    unit: u1,
                    prec: r1,
                },
                Repr::Unit {
                    val: v2,
                    unit: u2,
                    prec: r2,
                },
            ) => {
                let prec = *r1.min(r2);
                Repr::Unit {
                    val: v1 + v2,
                    unit: (u1 * u2) % big_pow(p, prec),
                    prec,
                }
            }
            _ => unreachable!("descriptor kinds already matched"),
        };
        Ok(Scalar {
            desc: self.desc,
            repr,
        })
    }

    pub fn inv(&self) -> Result<Scalar> {
        let p = self.desc.p;
        let repr = match &self.repr {
            Repr::Residue(0) | Repr::Zero | Repr::ZeroAt(_) => return Err(Error::DivisionByZero),
            Repr::Residue(a) => Repr::Residue(pow_mod(*a, p - 2, p)),
            Repr::Unit { val, unit, prec } => Repr::Unit {
                val: -val,
                unit: mod_inverse(unit, &big_pow(p, *prec)).expect("unit is invertible"),
                prec: *prec,
            },
        };
        Ok(Scalar {
            desc: self.desc,
            repr,
        })
    }

    pub fn pow(&self, mut exp: u64) -> Scalar {
        let mut acc = Scalar::one(self.desc);
        let mut base = self.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            exp >>= 1;
        }
        acc
    }

    pub fn is_square(&self) -> Result<bool> {
        match &self.repr {
            Repr::Residue(a) => Ok(euler_is_square(*a, self.desc.p)),
            _ => Ok(!self.sqrt_all()?.is_empty()),
        }
    }

    /// Every square root, smallest canonical representative first.
    ///
    /// Over `F_p` the roots come from Tonelli-Shanks; over `Q_p` (p odd)
    /// a root modulo `p` is Hensel-lifted to the full tracked precision.
    /// Nonzero squares have two roots except in characteristic 2, where
    /// `r = -r`.
    pub fn sqrt_all(&self) -> Result<Vec<Scalar>> {
        let p = self.desc.p;
        let desc = self.desc;
        if !desc.is_prime_field() && p == 2 {
            return Err(Error::UnsupportedQ2Sqrt);
        }
        let make = |repr| Scalar { desc, repr };
        match &self.repr {
            Repr::Residue(a) => Ok(match tonelli_shanks(*a, p) {
                None => vec![],
                Some(r) => {
                    let s = (p - r) % p;
                    let (lo, hi) = (r.min(s), r.max(s));
                    if lo == hi {
                        vec![make(Repr::Residue(lo))]
                    } else {
                        vec![make(Repr::Residue(lo)), make(Repr::Residue(hi))]
                    }
                }
            }),
            Repr::Zero => Ok(vec![make(Repr::Zero)]),
            Repr::ZeroAt(k) => Ok(vec![make(Repr::ZeroAt(k.div_ceil(&2)))]),
            Repr::Unit { val, unit, prec } => {
                if val.rem_euclid(2) != 0 {
                    return Ok(vec![]);
                }
                let Some(root) = hensel_sqrt(unit, p, *prec) else {
                    return Ok(vec![]);
                };
                let m = big_pow(p, *prec);
                let other = (&m - &root) % &m;
                let (lo, hi) = if root <= other {
                    (root, other)
                } else {
                    (other, root)
                };
                let half = val / 2;
                Ok(vec![
                    make(Repr::Unit {
                        val: half,
                        unit: lo,
                        prec: *prec,
                    }),
                    make(Repr::Unit {
                        val: half,
                        unit: hi,
                        prec: *prec,
                    }),
                ])
            }
        }
    }

    /// Parses the scalar grammar: a decimal integer, `a/b`, `p^v * u`,
    /// `O(p^k)`, or `0`.
    pub fn parse(s: &str, desc: FieldDescriptor) -> Result<Scalar> {
        let s = s.trim();
        let bad = || Error::Parse(format!("invalid scalar {s:?} for {desc}"));
        if let Some(inner) = s.strip_prefix("O(").and_then(|r| r.strip_suffix(')')) {
            let (base, k) = parse_power(inner).ok_or_else(bad)?;
            if base != desc.p {
                return Err(bad());
            }
            return Ok(Scalar::zero_at(k, desc));
        }
        if let Some((pow, unit)) = s.split_once('*') {
            let (base, v) = parse_power(pow.trim()).ok_or_else(bad)?;
            if base != desc.p {
                return Err(bad());
            }
            let unit: BigUint = unit.trim().parse().map_err(|_| bad())?;
            if desc.is_prime_field() {
                let pv = if v >= 0 {
                    Scalar::from_int(desc.p as i64, desc).pow(v as u64)
                } else {
                    return Err(Error::DivisionByZero);
                };
                return Ok(&pv * &Scalar::from_bigint(&BigInt::from(unit), desc));
            }
            return Scalar::from_parts(v, &unit, desc);
        }
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            return Scalar::from_bigint_ratio(&n, &d, desc);
        }
        let n: BigInt = s.parse().map_err(|_| bad())?;
        Ok(Scalar::from_bigint(&n, desc))
    }
}

fn parse_power(s: &str) -> Option<(u64, i64)> {
    let (b, e) = s.split_once('^')?;
    Some((b.trim().parse().ok()?, e.trim().parse().ok()?))
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

/// `p^e` as an exact rational, `e` of either sign.
pub fn p_power(p: u64, e: i64) -> BigRational {
    let pk = BigInt::from(p).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        BigRational::from_integer(pk)
    } else {
        BigRational::new(BigInt::one(), pk)
    }
}

fn truncate_unit(p: u64, val: i64, unit: &BigUint, prec: u32, abs: i64) -> Repr {
    if val >= abs {
        return Repr::ZeroAt(abs);
    }
    let keep = ((abs - val) as u32).min(prec);
    Repr::Unit {
        val,
        unit: unit % big_pow(p, keep),
        prec: keep,
    }
}

impl PartialEq for Scalar {
    /// Exact over `F_p`; over `Q_p` the two values are compared modulo the
    /// smaller of their absolute precisions.
    fn eq(&self, other: &Self) -> bool {
        if self.desc != other.desc {
            return false;
        }
        match (&self.repr, &other.repr) {
            (Repr::Residue(a), Repr::Residue(b)) => a == b,
            _ => self
                .add_with(&other.neg(), Cancellation::ZeroAtPrecision)
                .map(|d| d.is_zero())
                .unwrap_or(false),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Residue(r) => write!(f, "{r}"),
            Repr::Zero => write!(f, "0"),
            Repr::ZeroAt(k) => write!(f, "O({}^{k})", self.desc.p),
            Repr::Unit { val, unit, .. } => write!(f, "{}^{val} * {unit}", self.desc.p),
        }
    }
}

// Operator forms panic on descriptor mismatch and keep cancelled sums as
// zero-at-precision values. Matrices and vectors only call them on entries
// sharing one descriptor.

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        self.add_with(rhs, Cancellation::ZeroAtPrecision)
            .expect("scalar descriptors differ")
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn sub(self, rhs: &Scalar) -> Scalar {
        self + &rhs.neg()
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        Scalar::mul(self, rhs).expect("scalar descriptors differ")
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fp(p: u64) -> FieldDescriptor {
        FieldDescriptor::prime_field(p).unwrap()
    }

    fn qp(p: u64, prec: u32) -> FieldDescriptor {
        FieldDescriptor::padic(p, prec).unwrap()
    }

    fn exhaustive_roots(a: u64, p: u64) -> Vec<u64> {
        (0..p).filter(|r| r * r % p == a % p).collect()
    }

    #[test]
    fn descriptor_validation() {
        assert_eq!(FieldDescriptor::prime_field(9), Err(Error::NotPrime(9)));
        assert_eq!(FieldDescriptor::prime_field(1), Err(Error::NotPrime(1)));
        assert_eq!(
            FieldDescriptor::prime_field(1 << 31),
            Err(Error::PrimeTooLarge(1 << 31))
        );
        assert_eq!(FieldDescriptor::padic(3, 0), Err(Error::ZeroPrecision));
        assert_eq!(qp(5, 20).precision(), Some(20));
        assert_eq!(fp(5).precision(), None);
        assert!(FieldDescriptor::prime_field(2_147_483_647).is_ok());
    }

    #[test]
    fn prime_field_arithmetic() {
        let f3 = fp(3);
        let two = Scalar::from_int(2, f3);
        assert_eq!((&two + &two).residue(), Some(1));
        assert_eq!(Scalar::from_int(1, f3).neg().residue(), Some(2));
        let f5 = fp(5);
        assert_eq!(Scalar::from_int(2, f5).inv().unwrap().residue(), Some(3));
        assert_eq!(Scalar::zero(f5).inv(), Err(Error::DivisionByZero));
        assert_eq!(Scalar::from_int(-1, f5).residue(), Some(4));
    }

    #[test]
    fn padic_arithmetic_examples() {
        let q3 = qp(3, 4);
        let three = Scalar::from_int(3, q3);
        let sum = three.add(&Scalar::zero(q3)).unwrap();
        assert_eq!(sum.valuation(), Some(1));
        assert_eq!(sum.unit(), Some(&BigUint::from(1u32)));

        let one = Scalar::one(q3);
        let minus_one = Scalar::from_int(-1, q3);
        assert_eq!(
            one.add(&minus_one),
            Err(Error::PrecisionExhausted { absolute: 4 })
        );
        let z = one
            .add_with(&minus_one, Cancellation::ZeroAtPrecision)
            .unwrap();
        assert!(z.is_zero());
        assert_eq!(z.absolute_precision(), Some(4));
        assert_eq!(z, Scalar::zero(q3));

        let nine = three.mul(&three).unwrap();
        assert_eq!(nine.valuation(), Some(2));
        assert_eq!(nine.unit(), Some(&BigUint::from(1u32)));
    }

    #[test]
    fn partial_cancellation_drops_precision() {
        let q3 = qp(3, 4);
        // 1 + 2 = 3: one digit of cancellation.
        let s = Scalar::from_int(1, q3)
            .add(&Scalar::from_int(2, q3))
            .unwrap();
        assert_eq!(s.valuation(), Some(1));
        assert_eq!(s.relative_precision(), Some(3));
        assert_eq!(s.absolute_precision(), Some(4));
    }

    #[test]
    fn norms() {
        assert_eq!(Scalar::from_int(2, fp(5)).norm(), BigRational::one());
        assert_eq!(
            Scalar::from_int(9, qp(3, 10)).norm(),
            BigRational::new(1.into(), 9.into())
        );
        assert_eq!(Scalar::zero(fp(5)).norm(), BigRational::zero());
        assert_eq!(Scalar::zero(qp(3, 5)).norm(), BigRational::zero());
        let third = Scalar::from_rational(1, 3, qp(3, 5)).unwrap();
        assert_eq!(third.norm(), BigRational::from_integer(3.into()));
    }

    #[test]
    fn from_rational_examples() {
        assert_eq!(
            Scalar::from_rational(1, 4, fp(5)).unwrap().residue(),
            Some(4)
        );
        let x = Scalar::from_rational(1, 3, qp(3, 6)).unwrap();
        assert_eq!(x.valuation(), Some(-1));
        assert_eq!(x.unit(), Some(&BigUint::from(1u32)));
        assert!(matches!(
            Scalar::from_rational(1, 3, fp(3)),
            Err(Error::DenominatorDivisibleByP { .. })
        ));
        assert_eq!(
            Scalar::from_rational(1, 0, fp(3)),
            Err(Error::DivisionByZero)
        );
    }

    #[test]
    fn sqrt_examples() {
        assert!(!Scalar::from_int(2, fp(5)).is_square().unwrap());
        let roots: Vec<_> = Scalar::one(fp(3))
            .sqrt_all()
            .unwrap()
            .iter()
            .map(|r| r.residue().unwrap())
            .collect();
        assert_eq!(roots, exhaustive_roots(1, 3));
        assert_eq!(roots, vec![1, 2]);
        assert_eq!(Scalar::zero(fp(7)).sqrt_all().unwrap().len(), 1);
        assert_eq!(Scalar::one(fp(2)).sqrt_all().unwrap().len(), 1);
    }

    #[test]
    fn hensel_root_of_minus_eight() {
        // Brute force over residues mod 27.
        let oracle: Vec<u32> = (0..27u32).filter(|m| (m * m + 8) % 27 == 0).collect();
        assert_eq!(oracle, vec![10, 17]);

        let roots = Scalar::from_int(-8, qp(3, 3)).sqrt_all().unwrap();
        let units: Vec<_> = roots.iter().map(|r| r.unit().unwrap().clone()).collect();
        assert_eq!(units, vec![BigUint::from(10u32), BigUint::from(17u32)]);
        for r in &roots {
            assert_eq!(r.valuation(), Some(0));
            assert_eq!(&(r * r), &Scalar::from_int(-8, qp(3, 3)));
        }
    }

    #[test]
    fn padic_sqrt_rejections() {
        let q3 = qp(3, 8);
        assert!(Scalar::from_int(3, q3).sqrt_all().unwrap().is_empty());
        assert!(Scalar::from_int(2, q3).sqrt_all().unwrap().is_empty());
        let nine = Scalar::from_int(9, q3).sqrt_all().unwrap();
        assert_eq!(nine.len(), 2);
        assert_eq!(nine[0].valuation(), Some(1));
        assert_eq!(
            Scalar::from_int(1, qp(2, 8)).sqrt_all(),
            Err(Error::UnsupportedQ2Sqrt)
        );
    }

    #[test]
    fn euler_matches_exhaustive_up_to_97() {
        for p in (3..=97).filter(|&p| is_prime(p)) {
            for a in 0..p {
                let brute = exhaustive_roots(a, p);
                assert_eq!(euler_is_square(a, p), !brute.is_empty(), "p={p} a={a}");
                let roots: Vec<u64> = Scalar::from_int(a as i64, fp(p))
                    .sqrt_all()
                    .unwrap()
                    .iter()
                    .map(|r| r.residue().unwrap())
                    .collect();
                assert_eq!(roots, brute, "p={p} a={a}");
            }
        }
    }

    #[test]
    fn tonelli_on_larger_primes() {
        for p in [65_521u64, 1_000_003, 2_147_483_647] {
            for a in [2u64, 3, 5, 7, 11, 1234] {
                if let Some(r) = tonelli_shanks(a, p) {
                    assert_eq!(mul_mod(r, r, p), a % p);
                } else {
                    assert!(!euler_is_square(a, p));
                }
            }
        }
    }

    #[test]
    fn display_and_parse() {
        let q3 = qp(3, 5);
        let x = Scalar::from_int(18, q3);
        assert_eq!(x.to_string(), "3^2 * 2");
        assert_eq!(Scalar::parse("3^2 * 2", q3).unwrap(), x);
        assert_eq!(Scalar::parse("-8", q3).unwrap(), Scalar::from_int(-8, q3));
        assert_eq!(
            Scalar::parse("1/3", q3).unwrap().valuation(),
            Some(-1)
        );
        assert_eq!(Scalar::parse("O(3^4)", q3).unwrap(), Scalar::zero(q3));
        assert_eq!(Scalar::zero(q3).to_string(), "0");
        assert_eq!(Scalar::parse("7", fp(5)).unwrap().residue(), Some(2));
        assert_eq!(Scalar::parse("3/2", fp(5)).unwrap().residue(), Some(4));
        assert!(Scalar::parse("x", fp(5)).is_err());
        assert!(Scalar::parse("5^1 * 3", q3).is_err());
        assert!(Scalar::parse("3^1 * 3", q3).is_err());
    }

    fn qp_scalar(p: u64, prec: u32) -> impl Strategy<Value = Scalar> {
        (-1000i64..=1000, 1i64..=1000).prop_map(move |(n, d)| {
            Scalar::from_rational(n, d, qp(p, prec)).unwrap()
        })
    }

    proptest! {
        #[test]
        fn ultrametric_inequality(a in qp_scalar(3, 20), b in qp_scalar(3, 20)) {
            let s = &a + &b;
            let (na, nb) = (a.norm(), b.norm());
            let bound = if na > nb { na.clone() } else { nb.clone() };
            prop_assert!(s.norm() <= bound);
            if na != nb {
                prop_assert_eq!(s.norm(), bound);
            }
        }

        #[test]
        fn norm_is_multiplicative(a in qp_scalar(5, 20), b in qp_scalar(5, 20)) {
            prop_assert_eq!((&a * &b).norm(), a.norm() * b.norm());
        }

        #[test]
        fn fp_norm_is_multiplicative(a in 0i64..31, b in 0i64..31) {
            let (a, b) = (Scalar::from_int(a, fp(31)), Scalar::from_int(b, fp(31)));
            prop_assert_eq!((&a * &b).norm(), a.norm() * b.norm());
        }

        #[test]
        fn sqrt_roots_square_back(n in -1000i64..=1000, d in 1i64..=1000, p in prop::sample::select(vec![3u64, 5, 7])) {
            let a = Scalar::from_rational(n, d, qp(p, 20)).unwrap();
            let roots = a.sqrt_all().unwrap();
            prop_assert_eq!(a.is_square().unwrap(), !roots.is_empty());
            if !roots.is_empty() {
                prop_assert_eq!(roots.len(), if a.is_zero() { 1 } else { 2 });
            }
            for r in &roots {
                prop_assert_eq!(&(r * r), &a);
            }
        }

        #[test]
        fn rational_round_trip(n in -1000i64..=1000, d in 1i64..=1000, p in prop::sample::select(vec![3u64, 5, 7])) {
            let desc = qp(p, 20);
            let x = Scalar::from_rational(n, d, desc).unwrap();
            // Re-expanding x as p^v * u must satisfy d * x = n at full precision.
            let back = &x * &Scalar::from_int(d, desc);
            prop_assert_eq!(&back, &Scalar::from_int(n, desc));
            if n != 0 {
                let v = x.valuation().unwrap();
                let expected = {
                    let (vn, _) = split_valuation(&BigUint::from(n.unsigned_abs()), p);
                    let (vd, _) = split_valuation(&BigUint::from(d.unsigned_abs()), p);
                    vn - vd
                };
                prop_assert_eq!(v, expected);
                prop_assert_eq!(x.relative_precision(), Some(20));
            }
        }

        #[test]
        fn inverse_round_trip(n in 1i64..=1000, d in 1i64..=1000) {
            let x = Scalar::from_rational(n, d, qp(7, 20)).unwrap();
            prop_assert_eq!(&(&x * &x.inv().unwrap()), &Scalar::one(qp(7, 20)));
        }
    }
}
