//! Dirac eigenvalues and their multiplicities on spin lens spaces.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{lattice_of, reduced_counts, stats, HalfIntVector, ReducedCountTable};
use crate::lens::SpinLensSpace;
use crate::numtheory::{binomial, binomial_column, BigCount};

/// Sign of a Dirac eigenvalue `+-lambda_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EigenSign {
    Minus,
    Plus,
}

/// Label of the half-spin representations `pi_k^+-`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HalfSpin {
    Plus,
    Minus,
}

/// `sign * lambda_k` with `lambda_k = k + (2m - 1)/2`, stored as `value2 = 2 lambda_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub sign: EigenSign,
    pub k: u64,
    pub value2: u64,
}

impl Eigenvalue {
    pub fn new(m: usize, k: u64, sign: EigenSign) -> Self {
        Eigenvalue {
            sign,
            k,
            value2: 2 * k + 2 * m as u64 - 1,
        }
    }
}

impl fmt::Display for Eigenvalue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.sign {
            EigenSign::Minus => "-",
            EigenSign::Plus => "+",
        };
        write!(f, "{s}{}/2", self.value2)
    }
}

/// A weight of `Spin(2m)`: integral or in `(1/2 + Z)^m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Weight {
    Integral(Vec<i64>),
    HalfIntegral(HalfIntVector),
}

/// Multiplicity of the weight `mu` in `pi_k^+-`.
///
/// With `r = k + m/2 - ||mu||_1`, a half-integral weight has multiplicity
/// `binom(r + m - 2, m - 2)` when `r >= 0` and `R(mu) = r` (for `+`) or
/// `R(mu) = r + 1` (for `-`) modulo 2.
pub fn weight_multiplicity(m: usize, k: u64, pi: HalfSpin, mu: &Weight) -> BigCount {
    let mu = match mu {
        Weight::Integral(_) => return BigCount::zero(),
        Weight::HalfIntegral(mu) => mu,
    };
    debug_assert_eq!(mu.m(), m);
    let (norm2, neg) = stats(mu);
    let twice_r = 2 * k as i128 + m as i128 - norm2 as i128;
    if twice_r < 0 {
        return BigCount::zero();
    }
    let r = (twice_r / 2) as u64;
    let want = match pi {
        HalfSpin::Plus => r % 2,
        HalfSpin::Minus => (r + 1) % 2,
    };
    if neg as u64 % 2 != want {
        return BigCount::zero();
    }
    binomial(r + m as u64 - 2, m as u64 - 2)
}

/// One row of a multiplicity table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiplicityRow {
    pub k: u64,
    pub value2: u64,
    pub minus: BigCount,
    pub plus: BigCount,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiplicityTable {
    pub m: usize,
    pub rows: Vec<MultiplicityRow>,
}

impl MultiplicityTable {
    pub fn get(&self, k: u64, sign: EigenSign) -> Option<&BigCount> {
        self.rows.get(k as usize).map(|row| match sign {
            EigenSign::Minus => &row.minus,
            EigenSign::Plus => &row.plus,
        })
    }
}

/// Multiplicities of `-lambda_k` and `+lambda_k` for `k <= k_max` from a
/// reduced table:
/// `mult(-lambda_k) = sum_r binom(r + m - 2, m - 2) N(r, k - r)` and the same
/// with `N(r + 1, k - r)` for `+lambda_k`.
pub fn table_from_reduced(reduced: &ReducedCountTable, k_max: u64) -> MultiplicityTable {
    let m = reduced.m();
    let counts = reduced.counts_upto(k_max);
    let coeffs = binomial_column(m as u64 - 2, k_max as usize + 1);
    let rows = (0..=k_max)
        .map(|k| {
            let mut minus = BigCount::zero();
            let mut plus = BigCount::zero();
            for r in 0..=k {
                let c = &coeffs[r as usize];
                let idx = (k - r) as usize;
                let n_same = &counts[(r % 2) as usize][idx];
                let n_other = &counts[((r + 1) % 2) as usize][idx];
                if !n_same.is_zero() {
                    minus += &(c * n_same);
                }
                if !n_other.is_zero() {
                    plus += &(c * n_other);
                }
            }
            MultiplicityRow {
                k,
                value2: 2 * k + 2 * m as u64 - 1,
                minus,
                plus,
            }
        })
        .collect();
    MultiplicityTable { m, rows }
}

/// Multiplicity of `sign * lambda_k` on `x`.
pub fn multiplicity(x: &SpinLensSpace, k: u64, sign: EigenSign) -> Result<BigCount> {
    let table = spectrum_table(x, k)?;
    Ok(table.get(k, sign).cloned().expect("row k present"))
}

/// Multiplicities for `k = 0..=k_max`, sharing one reduced table.
pub fn spectrum_table(x: &SpinLensSpace, k_max: u64) -> Result<MultiplicityTable> {
    let fp = fingerprint(x)?;
    Ok(table_from_reduced(&fp.table, k_max))
}

/// The reduced count table of a spin lens space, a complete invariant of
/// its Dirac spectrum.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpectrumFingerprint {
    pub q: u64,
    pub m: usize,
    pub table: ReducedCountTable,
}

impl SpectrumFingerprint {
    pub fn from_table(table: ReducedCountTable) -> Self {
        SpectrumFingerprint {
            q: table.q(),
            m: table.m(),
            table,
        }
    }

    pub fn digest(&self) -> String {
        self.table.digest()
    }

    /// Fingerprint of the orientation-reversed space (rows exchanged).
    pub fn swapped(&self) -> SpectrumFingerprint {
        SpectrumFingerprint::from_table(self.table.swapped())
    }
}

pub fn fingerprint(x: &SpinLensSpace) -> Result<SpectrumFingerprint> {
    let lattice = lattice_of(x)?;
    Ok(SpectrumFingerprint::from_table(reduced_counts(&lattice)))
}

/// `true` iff `x` and `y` have the same Dirac spectrum. Spaces with
/// different `q` or `m` are reported as not isospectral without computing.
pub fn dirac_isospectral(x: &SpinLensSpace, y: &SpinLensSpace) -> Result<bool> {
    if x.q() != y.q() || x.m() != y.m() {
        return Ok(false);
    }
    Ok(fingerprint(x)? == fingerprint(y)?)
}

/// `true` iff the fingerprint rows of `x` and `y` are exchanged, i.e. the
/// spectrum of `x` is the reflection of the spectrum of `y`.
pub fn inverse_isospectral(x: &SpinLensSpace, y: &SpinLensSpace) -> Result<bool> {
    if x.q() != y.q() || x.m() != y.m() {
        return Ok(false);
    }
    Ok(fingerprint(x)? == fingerprint(y)?.swapped())
}

/// Isospectral after possibly reversing the orientation of one side.
pub fn isospectral_up_to_orientation(x: &SpinLensSpace, y: &SpinLensSpace) -> Result<bool> {
    if x.q() != y.q() || x.m() != y.m() {
        return Ok(false);
    }
    let (fx, fy) = (fingerprint(x)?, fingerprint(y)?);
    Ok(fx == fy || fx == fy.swapped())
}

/// `2^{(n-1)/2} binom(k + n - 1, n - 1)`, the multiplicity of either sign of
/// the `k`-th Dirac eigenvalue on the round `S^n`.
pub fn sphere_multiplicity(n: u64, k: u64) -> Result<BigCount> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "sphere dimension must be odd and at least 3, got {n}"
        )));
    }
    let pow = BigCount::from(1u128 << ((n - 1) / 2));
    Ok(&pow * &binomial(k + n - 1, n - 1))
}

/// `true` when every multiplicity in the table is at most the sphere value.
pub fn within_sphere_bound(table: &MultiplicityTable) -> bool {
    let n = 2 * table.m as u64 - 1;
    table.rows.iter().all(|row| {
        let bound = sphere_multiplicity(n, row.k).expect("n is odd and >= 3");
        row.minus <= bound && row.plus <= bound
    })
}
