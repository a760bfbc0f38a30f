//! Affine congruence lattices inside `(1/2 + Z)^m` and their reduced
//! one-norm counts.
//!
//! Points `mu = (a_1, ..., a_m) / 2` are stored doubled, so every coordinate
//! is an odd integer and all arithmetic stays integral. The one-norm level
//! `k` of a point is `||mu||_1 - m/2 = (sum |a_j| - m) / 2`.

use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lens::{SpinLabel, SpinLensSpace};
use crate::numtheory::{binomial_column, is_coprime, BigCount};

/// A point of `(1/2 + Z)^m`, stored as its doubled odd coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HalfIntVector {
    doubled: Vec<i64>,
}

impl HalfIntVector {
    pub fn new(doubled: Vec<i64>) -> Result<Self> {
        if let Some(j) = doubled.iter().position(|a| a % 2 == 0) {
            return Err(Error::EvenCoordinate(j));
        }
        Ok(HalfIntVector { doubled })
    }

    pub fn doubled(&self) -> &[i64] {
        &self.doubled
    }

    pub fn m(&self) -> usize {
        self.doubled.len()
    }

    pub fn neg(&self) -> HalfIntVector {
        HalfIntVector {
            doubled: self.doubled.iter().map(|a| -a).collect(),
        }
    }

    /// Translation by `q * eta` for an integer vector `eta`.
    pub fn translate(&self, q: u64, eta: &[i64]) -> HalfIntVector {
        HalfIntVector {
            doubled: self
                .doubled
                .iter()
                .zip(eta)
                .map(|(a, e)| a + 2 * q as i64 * e)
                .collect(),
        }
    }
}

impl fmt::Display for HalfIntVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("1/2(")?;
        for (i, a) in self.doubled.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

/// `(2 ||mu||_1, R(mu))`: the doubled one-norm and the number of negative
/// coordinates.
pub fn stats(mu: &HalfIntVector) -> (u64, usize) {
    let norm2 = mu.doubled.iter().map(|a| a.unsigned_abs()).sum();
    let neg = mu.doubled.iter().filter(|&&a| a < 0).count();
    (norm2, neg)
}

/// One-norm level `k` with `||mu||_1 = k + m/2`.
pub fn norm_level(mu: &HalfIntVector) -> u64 {
    let (norm2, _) = stats(mu);
    (norm2 - mu.m() as u64) / 2
}

/// `phi(mu)` with `phi(mu)_{sigma(j)} = eps_j * mu_j` (zero-based `sigma`).
pub fn apply_norm_isometry(sigma: &[usize], eps: &[i8], mu: &HalfIntVector) -> HalfIntVector {
    let mut out = vec![0i64; mu.m()];
    for (j, &a) in mu.doubled.iter().enumerate() {
        out[sigma[j]] = eps[j] as i64 * a;
    }
    HalfIntVector { doubled: out }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LatticeMode {
    /// `sum a_j s_j = 0 (mod q)`, odd `q`.
    ModQ,
    /// `sum a_j s_j = h_eff * q (mod 2q)`, even `q`.
    Mod2Q { h_eff: u8 },
}

/// The affine congruence lattice attached to a spin lens space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CongruenceLattice {
    q: u64,
    s: Vec<i64>,
    mode: LatticeMode,
}

impl CongruenceLattice {
    pub fn new(q: u64, s: Vec<i64>, mode: LatticeMode) -> Result<Self> {
        if q == 0 {
            return Err(Error::ZeroOrder);
        }
        if s.is_empty() {
            return Err(Error::DimensionTooSmall(0));
        }
        if let Some((j, &v)) = s.iter().enumerate().find(|(_, &v)| !is_coprime(v, q)) {
            return Err(Error::NotCoprime { index: j + 1, value: v, q });
        }
        match mode {
            LatticeMode::ModQ if q % 2 == 0 => {
                return Err(Error::InvalidLattice("mod-q lattice needs odd q".into()))
            }
            LatticeMode::Mod2Q { .. } if q % 2 == 1 => {
                return Err(Error::InvalidLattice("mod-2q lattice needs even q".into()))
            }
            LatticeMode::Mod2Q { h_eff } if h_eff > 1 => {
                return Err(Error::InvalidLattice(format!("h_eff = {h_eff} not in {{0,1}}")))
            }
            _ => {}
        }
        Ok(CongruenceLattice { q, s, mode })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn s(&self) -> &[i64] {
        &self.s
    }

    pub fn m(&self) -> usize {
        self.s.len()
    }

    pub fn mode(&self) -> LatticeMode {
        self.mode
    }

    /// Modulus of the defining congruence: `q` or `2q`.
    pub fn modulus(&self) -> u64 {
        match self.mode {
            LatticeMode::ModQ => self.q,
            LatticeMode::Mod2Q { .. } => 2 * self.q,
        }
    }

    /// Right-hand side of the defining congruence.
    pub fn target(&self) -> u64 {
        match self.mode {
            LatticeMode::ModQ => 0,
            LatticeMode::Mod2Q { h_eff } => h_eff as u64 * self.q,
        }
    }
}

/// The lattice of a spin lens space: mod `q` for odd `q`, and mod `2q` with
/// target `(h + h_{q;s}) q` for even `q`.
pub fn lattice_of(x: &SpinLensSpace) -> Result<CongruenceLattice> {
    let mode = match x.spin() {
        SpinLabel::Unique => LatticeMode::ModQ,
        SpinLabel::Even(_) => LatticeMode::Mod2Q {
            h_eff: x.effective_h().expect("even label"),
        },
    };
    if x.q() % 2 == 0 && x.m() % 2 == 1 {
        return Err(Error::NoSpinStructure);
    }
    CongruenceLattice::new(x.q(), x.s().to_vec(), mode)
}

pub fn contains(lattice: &CongruenceLattice, mu: &HalfIntVector) -> Result<bool> {
    if mu.m() != lattice.m() {
        return Err(Error::DimensionMismatch {
            expected: lattice.m(),
            got: mu.m(),
        });
    }
    let modulus = lattice.modulus() as i128;
    let sum: i128 = mu
        .doubled
        .iter()
        .zip(&lattice.s)
        .map(|(&a, &s)| a as i128 * s as i128)
        .sum();
    Ok(sum.rem_euclid(modulus) == lattice.target() as i128)
}

/// `N^red(eps, k)` for `eps in {0, 1}` and `0 <= k < mq`: lattice points with
/// every `|a_j| < 2q`, one-norm `k + m/2` and `R(mu) = eps (mod 2)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReducedCountTable {
    m: usize,
    q: u64,
    rows: [Vec<BigCount>; 2],
}

impl ReducedCountTable {
    pub fn from_rows(m: usize, q: u64, rows: [Vec<BigCount>; 2]) -> Result<Self> {
        let len = m * q as usize;
        if rows[0].len() != len || rows[1].len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: rows[0].len().max(rows[1].len()),
            });
        }
        Ok(ReducedCountTable { m, q, rows })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// Number of stored levels, `mq`.
    pub fn len(&self) -> usize {
        self.m * self.q as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn row(&self, eps: usize) -> &[BigCount] {
        &self.rows[eps % 2]
    }

    pub fn rows(&self) -> &[Vec<BigCount>; 2] {
        &self.rows
    }

    /// `N^red(eps, k)`; zero outside the stored range.
    pub fn get(&self, eps: i64, k: u64) -> BigCount {
        let row = &self.rows[eps.rem_euclid(2) as usize];
        row.get(k as usize).cloned().unwrap_or_else(BigCount::zero)
    }

    /// Table with the two rows exchanged.
    pub fn swapped(&self) -> ReducedCountTable {
        ReducedCountTable {
            m: self.m,
            q: self.q,
            rows: [self.rows[1].clone(), self.rows[0].clone()],
        }
    }

    /// Full count `N(eps, k) = sum_beta binom(beta + m - 1, m - 1) N^red(eps, k - beta q)`.
    pub fn count(&self, eps: i64, k: u64) -> BigCount {
        let betas = (k / self.q) as usize + 1;
        let coeffs = binomial_column(self.m as u64 - 1, betas);
        let mut acc = BigCount::zero();
        for (beta, c) in coeffs.iter().enumerate() {
            let n = self.get(eps, k - beta as u64 * self.q);
            if !n.is_zero() {
                acc += &(c * &n);
            }
        }
        acc
    }

    /// `[N(0, k), N(1, k)]` for all `k <= k_max`, sharing the binomials.
    pub fn counts_upto(&self, k_max: u64) -> [Vec<BigCount>; 2] {
        let betas = (k_max / self.q) as usize + 1;
        let coeffs = binomial_column(self.m as u64 - 1, betas);
        let mut out = [Vec::new(), Vec::new()];
        for (eps, row) in out.iter_mut().enumerate() {
            row.reserve(k_max as usize + 1);
            for k in 0..=k_max {
                let mut acc = BigCount::zero();
                for (beta, c) in coeffs.iter().enumerate().take((k / self.q) as usize + 1) {
                    let n = self.get(eps as i64, k - beta as u64 * self.q);
                    if !n.is_zero() {
                        acc += &(c * &n);
                    }
                }
                row.push(acc);
            }
        }
        out
    }

    /// Hex SHA-256 over the shape and every entry.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.m as u64).to_le_bytes());
        h.update(self.q.to_le_bytes());
        for row in &self.rows {
            for c in row {
                let bytes = c.to_bytes_le();
                h.update((bytes.len() as u32).to_le_bytes());
                h.update(&bytes);
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Counter cell used by the dynamic program. Values are sums of non-negative
/// counts, so the subtraction never underflows for the bound in use.
trait Cell: Clone + Send {
    fn zero() -> Self;
    fn one() -> Self;
    fn add_assign(&mut self, rhs: &Self);
    fn sub_assign(&mut self, rhs: &Self);
    fn into_count(self) -> BigCount;
}

impl Cell for u64 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    #[inline]
    fn add_assign(&mut self, rhs: &Self) {
        *self = self.wrapping_add(*rhs);
    }
    #[inline]
    fn sub_assign(&mut self, rhs: &Self) {
        *self = self.wrapping_sub(*rhs);
    }
    fn into_count(self) -> BigCount {
        BigCount::from(self)
    }
}

impl Cell for u128 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    #[inline]
    fn add_assign(&mut self, rhs: &Self) {
        *self = self.wrapping_add(*rhs);
    }
    #[inline]
    fn sub_assign(&mut self, rhs: &Self) {
        *self = self.wrapping_sub(*rhs);
    }
    fn into_count(self) -> BigCount {
        BigCount::from(self)
    }
}

impl Cell for BigUint {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        BigUint::from(1u8)
    }
    fn add_assign(&mut self, rhs: &Self) {
        *self += rhs;
    }
    fn sub_assign(&mut self, rhs: &Self) {
        *self -= rhs;
    }
    fn into_count(self) -> BigCount {
        BigCount::from(self)
    }
}

/// Reduced counts by dynamic programming over the coordinates.
///
/// State after `j` coordinates: (parity of negatives, level `t`, partial sum
/// of `a_i s_i` modulo the lattice modulus `M`). One coordinate with
/// `a = +-(2u + 1)`, `0 <= u < q`, adds `u` to the level. The window sum
/// `W[t][r] = sum_{u<q} old[t-u][r - 2us]` satisfies
/// `W[t][r] = old[t][r] + W[t-1][r-2s] - old[t-q][r]` because `2qs = 0 mod M`,
/// so each coordinate costs `O(M * m q)` instead of `O(M * m q^2)`.
pub fn reduced_counts(lattice: &CongruenceLattice) -> ReducedCountTable {
    let m = lattice.m();
    let q = lattice.q();
    // Every count is bounded by the number of points of C(q), (2q)^m.
    let bits = m as f64 * (2.0 * q as f64).log2();
    if bits < 63.0 {
        reduced_counts_dp::<u64>(lattice)
    } else if bits < 127.0 {
        reduced_counts_dp::<u128>(lattice)
    } else {
        reduced_counts_dp::<BigUint>(lattice)
    }
}

fn reduced_counts_dp<T: Cell>(lattice: &CongruenceLattice) -> ReducedCountTable {
    let m = lattice.m();
    let q = lattice.q() as usize;
    let modulus = lattice.modulus() as usize;
    let levels = m * (q - 1) + 1;
    let plane = levels * modulus;
    let target = lattice.target() as usize;
    let residues: Vec<usize> = lattice
        .s()
        .iter()
        .map(|&s| (s as i128).rem_euclid(modulus as i128) as usize)
        .collect();

    // first coordinate placed directly
    let mut cur: Vec<T> = vec![T::zero(); 2 * plane];
    let s0 = residues[0];
    for u in 0..q {
        let r = ((2 * u + 1) * s0) % modulus;
        cur[u * modulus + r].add_assign(&T::one());
        cur[plane + u * modulus + (modulus - r) % modulus].add_assign(&T::one());
    }
    let mut top = q - 1;

    if m > 1 {
        let mut next: Vec<T> = vec![T::zero(); 2 * plane];
        let mut w_prev: Vec<T> = vec![T::zero(); modulus];
        let mut w_cur: Vec<T> = vec![T::zero(); modulus];
        for &sv in &residues[1..m - 1] {
            let new_top = top + q - 1;
            for cell in next[..new_top * modulus + modulus].iter_mut() {
                *cell = T::zero();
            }
            for cell in next[plane..plane + new_top * modulus + modulus].iter_mut() {
                *cell = T::zero();
            }
            for (dir_s, toggle) in [(sv, 0usize), ((modulus - sv) % modulus, 1usize)] {
                let shift2 = (2 * dir_s) % modulus;
                for p in 0..2 {
                    let old = &cur[p * plane..(p + 1) * plane];
                    let dst_base = (p ^ toggle) * plane;
                    for t in 0..=new_top {
                        // w_cur = old[t] + rot(w_prev, 2s) - old[t - q]
                        if t == 0 {
                            w_cur.iter_mut().for_each(|c| *c = T::zero());
                        } else {
                            let (a, b) = w_cur.split_at_mut(shift2);
                            a.clone_from_slice(&w_prev[modulus - shift2..]);
                            b.clone_from_slice(&w_prev[..modulus - shift2]);
                        }
                        if t <= top {
                            let row = &old[t * modulus..(t + 1) * modulus];
                            for (c, v) in w_cur.iter_mut().zip(row) {
                                c.add_assign(v);
                            }
                        }
                        if t >= q && t - q <= top {
                            let row = &old[(t - q) * modulus..(t - q + 1) * modulus];
                            for (c, v) in w_cur.iter_mut().zip(row) {
                                c.sub_assign(v);
                            }
                        }
                        // next[p ^ toggle][t][r + s] += w_cur[r]
                        let dst = &mut next[dst_base + t * modulus..dst_base + (t + 1) * modulus];
                        let (lo, hi) = dst.split_at_mut(dir_s);
                        for (c, v) in hi.iter_mut().zip(&w_cur[..modulus - dir_s]) {
                            c.add_assign(v);
                        }
                        for (c, v) in lo.iter_mut().zip(&w_cur[modulus - dir_s..]) {
                            c.add_assign(v);
                        }
                        std::mem::swap(&mut w_prev, &mut w_cur);
                    }
                }
            }
            std::mem::swap(&mut cur, &mut next);
            top = new_top;
        }
    }

    let len = m * q;
    let mut rows = [vec![T::zero(); len], vec![T::zero(); len]];
    if m == 1 {
        for (p, row) in rows.iter_mut().enumerate() {
            for (k, cell) in row.iter_mut().enumerate().take(levels) {
                *cell = cur[p * plane + k * modulus + target].clone();
            }
        }
    } else {
        // last coordinate: only the target residue is needed
        let sl = residues[m - 1];
        for u in 0..q {
            let step = ((2 * u + 1) * sl) % modulus;
            let from_pos = (target + modulus - step) % modulus;
            let from_neg = (target + step) % modulus;
            for t in 0..=top {
                for p in 0..2 {
                    let v = &cur[p * plane + t * modulus + from_pos];
                    rows[p][t + u].add_assign(v);
                    let v = &cur[p * plane + t * modulus + from_neg];
                    rows[p ^ 1][t + u].add_assign(v);
                }
            }
        }
    }
    let rows = rows.map(|row| row.into_iter().map(Cell::into_count).collect::<Vec<_>>());
    ReducedCountTable { m, q: q as u64, rows }
}

/// `N(eps, k)` via the reduced table.
pub fn count(lattice: &CongruenceLattice, eps: i64, k: u64) -> BigCount {
    reduced_counts(lattice).count(eps, k)
}
