//! Exhaustive counts of magic contractions in `M_n(F_p)` and the
//! all-`(p-1)` parametric family.

use std::io::Write;

use crate::error::{Error, Result};
use crate::fields::{euler_is_square, FieldDescriptor, Scalar};
use crate::linalg::Matrix;
use crate::magic::{search_witnesses_with, symmetric_count, verify_magic, MagicWitness, SearchConfig, DEFAULT_BUDGET};

#[derive(Debug, Clone, PartialEq)]
pub struct CensusRow {
    pub t: Matrix,
    /// Number of witnesses found. In early-exit mode this is 0 or 1.
    pub witness_count: u64,
    pub sample_witness: Option<MagicWitness>,
}

impl CensusRow {
    pub fn is_magic(&self) -> bool {
        self.witness_count > 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CensusConfig {
    /// Cap on `p^(n^2) * p^(n(n+1)/2)`.
    pub budget: u64,
    /// Count every witness instead of stopping at the first.
    pub full_witness_count: bool,
    /// Number of contiguous slices of the matrix range scanned in parallel.
    pub partitions: usize,
}

impl Default for CensusConfig {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            full_witness_count: false,
            partitions: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CensusResult {
    pub n: usize,
    pub p: u64,
    pub total_matrices: u64,
    pub magic_count: u64,
    /// One row per matrix, in lexicographic order of the row-major entries.
    pub rows: Vec<CensusRow>,
    pub full_witness_count: bool,
}

impl CensusResult {
    pub fn magic_rows(&self) -> impl Iterator<Item = &CensusRow> {
        self.rows.iter().filter(|r| r.is_magic())
    }
}

/// The matrix whose row-major entries are the base-p digits of `index`,
/// first entry most significant.
pub fn matrix_at(index: u64, n: usize, desc: FieldDescriptor) -> Matrix {
    let p = desc.p();
    let mut digits = vec![0u64; n * n];
    let mut rest = index;
    for d in digits.iter_mut().rev() {
        *d = rest % p;
        rest /= p;
    }
    Matrix::new(
        desc,
        n,
        n,
        digits.into_iter().map(|d| Scalar::from_int(d as i64, desc)).collect(),
    )
    .expect("n >= 1")
}

fn scan(range: std::ops::Range<u64>, n: usize, desc: FieldDescriptor, search: &SearchConfig) -> Result<Vec<CensusRow>> {
    range
        .map(|i| {
            let t = matrix_at(i, n, desc);
            let ws = search_witnesses_with(&t, search)?;
            Ok(CensusRow {
                witness_count: ws.len() as u64,
                sample_witness: ws.into_iter().next(),
                t,
            })
        })
        .collect()
}

/// Scans every `T` in `M_n(F_p)` and decides whether it is magic.
pub fn count_magic(n: usize, p: u64, config: &CensusConfig) -> Result<CensusResult> {
    let desc = FieldDescriptor::prime_field(p)?;
    if n == 0 {
        return Err(Error::InvalidDimension("census needs n >= 1".into()));
    }
    let total = (p as u128).checked_pow((n * n) as u32).unwrap_or(u128::MAX);
    let required = total.saturating_mul(symmetric_count(n, p));
    if required > config.budget as u128 {
        return Err(Error::BudgetExceeded {
            required,
            budget: config.budget,
        });
    }
    let total = total as u64;
    let search = SearchConfig {
        budget: config.budget,
        early_exit: !config.full_witness_count,
    };

    let parts = config.partitions.clamp(1, total.max(1) as usize) as u64;
    let chunk = total.div_ceil(parts);
    let ranges: Vec<_> = (0..parts)
        .map(|k| (k * chunk).min(total)..((k + 1) * chunk).min(total))
        .collect();
    let rows = if parts == 1 {
        scan(0..total, n, desc, &search)?
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = ranges
                .into_iter()
                .map(|r| s.spawn(move || scan(r, n, desc, &search)))
                .collect();
            let mut rows = Vec::with_capacity(total as usize);
            for h in handles {
                rows.extend(h.join().expect("census worker panicked")?);
            }
            Ok::<_, Error>(rows)
        })?
    };

    Ok(CensusResult {
        n,
        p,
        total_matrices: total,
        magic_count: rows.iter().filter(|r| r.is_magic()).count() as u64,
        rows,
        full_witness_count: config.full_witness_count,
    })
}

/// Number of `t` in `F_p` with `1 - t^2` a square, by Euler's criterion.
pub fn scalar_census(p: u64) -> Result<u64> {
    FieldDescriptor::prime_field(p)?;
    if p == 2 {
        return Err(Error::Precondition(
            "scalar census needs an odd prime; use count_magic for p = 2".into(),
        ));
    }
    Ok((0..p)
        .filter(|&t| {
            let t2 = (t * t) % p;
            euler_is_square((1 + p - t2) % p, p)
        })
        .count() as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyMember {
    pub a: u64,
    pub b: u64,
    pub t: Matrix,
    pub witness: MagicWitness,
}

/// All `(a, b)` with `a^2 + b^2 = p - 1` and `2ab = p - 2` mod p, each with
/// `T = [[p-1, p-1], [p-1, p-1]]` and `M_T = M_{T*} = [[a, b], [b, a]]`.
pub fn parametric_family(p: u64) -> Result<Vec<FamilyMember>> {
    let desc = FieldDescriptor::prime_field(p)?;
    let top = (p - 1) as i64;
    let t = Matrix::from_ints(desc, &[&[top, top], &[top, top]])?;
    let mut out = Vec::new();
    for a in 0..p {
        for b in 0..p {
            if (a * a + b * b) % p == (p - 1) % p && (2 * a * b) % p == (2 * p - 2) % p {
                let m = Matrix::from_ints(desc, &[&[a as i64, b as i64], &[b as i64, a as i64]])?;
                out.push(FamilyMember {
                    a,
                    b,
                    t: t.clone(),
                    witness: MagicWitness::symmetric(m),
                });
            }
        }
    }
    Ok(out)
}

/// Checks every family member with [`verify_magic`].
pub fn family_verifies(members: &[FamilyMember]) -> Result<bool> {
    for m in members {
        if !verify_magic(&m.t, &m.witness)?.holds() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn join_entries(m: &Matrix) -> String {
    m.entries()
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

/// One CSV row per magic `T`:
/// `p,n,matrix_entries,witness_count,sample_m_t,sample_m_t_star`, matrices
/// as semicolon-joined row-major entries.
pub fn write_csv<W: Write>(result: &CensusResult, out: W) -> Result<()> {
    let io = |e: csv::Error| Error::Parse(format!("CSV write failed: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "p",
        "n",
        "matrix_entries",
        "witness_count",
        "sample_m_t",
        "sample_m_t_star",
    ])
    .map_err(io)?;
    for row in result.magic_rows() {
        let witness = row.sample_witness.as_ref().expect("magic rows carry a witness");
        w.write_record([
            result.p.to_string(),
            result.n.to_string(),
            join_entries(&row.t),
            row.witness_count.to_string(),
            join_entries(&witness.m_t),
            join_entries(&witness.m_t_star),
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::Parse(format!("CSV write failed: {e}")))?;
    Ok(())
}
