//! Lens spaces `L(q; s_1, ..., s_m)`, their spin structures, isometry
//! witnesses and canonical forms.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numtheory::{is_coprime, mod_inverse, units, Residue};

/// Validated parameters of a lens space. Parameters are kept exactly as
/// given; the spin bookkeeping depends on the raw values.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LensParams {
    q: u64,
    s: Vec<i64>,
}

impl LensParams {
    pub fn new(q: u64, s: Vec<i64>) -> Result<Self> {
        if q == 0 {
            return Err(Error::ZeroOrder);
        }
        if s.len() < 2 {
            return Err(Error::DimensionTooSmall(s.len()));
        }
        if let Some((j, &v)) = s.iter().enumerate().find(|(_, &v)| !is_coprime(v, q)) {
            return Err(Error::NotCoprime { index: j + 1, value: v, q });
        }
        Ok(LensParams { q, s })
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

    /// Manifold dimension `2m - 1`.
    pub fn dimension(&self) -> usize {
        2 * self.s.len() - 1
    }
}

pub fn make_lens(q: u64, s: &[i64]) -> Result<LensParams> {
    LensParams::new(q, s.to_vec())
}

/// Spin structure tag. `Unique` for odd `q`; `Even(h)` with `h in {0, 1}`
/// for even `q` and even `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum SpinLabel {
    Unique,
    Even(u8),
}

impl fmt::Display for SpinLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpinLabel::Unique => f.write_str("unique"),
            SpinLabel::Even(h) => write!(f, "h{h}"),
        }
    }
}

impl FromStr for SpinLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "unique" => Ok(SpinLabel::Unique),
            "h0" | "tau0" | "tau_0" => Ok(SpinLabel::Even(0)),
            "h1" | "tau1" | "tau_1" => Ok(SpinLabel::Even(1)),
            other => Err(Error::InvalidArgument(format!(
                "unknown spin tag '{other}' (expected unique, h0 or h1)"
            ))),
        }
    }
}

impl From<SpinLabel> for String {
    fn from(l: SpinLabel) -> String {
        l.to_string()
    }
}

impl TryFrom<String> for SpinLabel {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Spin structures admitted by `L`: one for odd `q`, two for even `q` and
/// even `m`, none otherwise.
pub fn spin_structures(lens: &LensParams) -> Vec<SpinLabel> {
    if lens.q % 2 == 1 {
        vec![SpinLabel::Unique]
    } else if lens.m() % 2 == 0 {
        vec![SpinLabel::Even(0), SpinLabel::Even(1)]
    } else {
        Vec::new()
    }
}

/// Parity of `sum_j floor(s_j / q)`.
pub fn h_shift(lens: &LensParams) -> u8 {
    let q = lens.q as i128;
    let sum: i128 = lens.s.iter().map(|&v| (v as i128).div_euclid(q)).sum();
    sum.rem_euclid(2) as u8
}

/// A lens space together with an admissible spin structure.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinLensSpace {
    lens: LensParams,
    spin: SpinLabel,
}

impl SpinLensSpace {
    pub fn new(lens: LensParams, spin: SpinLabel) -> Result<Self> {
        let allowed = spin_structures(&lens);
        if allowed.is_empty() {
            return Err(Error::NoSpinStructure);
        }
        if !allowed.contains(&spin) {
            return Err(Error::InadmissibleSpin {
                label: spin.to_string(),
                q: lens.q,
                m: lens.m(),
            });
        }
        Ok(SpinLensSpace { lens, spin })
    }

    /// Builds `L(q; s)` with the given spin tag; `None` selects the unique
    /// structure and is rejected for even `q`.
    pub fn from_parts(q: u64, s: &[i64], spin: Option<SpinLabel>) -> Result<Self> {
        let lens = make_lens(q, s)?;
        let spin = match spin {
            Some(l) => l,
            None if q % 2 == 1 => SpinLabel::Unique,
            None if lens.m() % 2 == 1 => return Err(Error::NoSpinStructure),
            None => {
                return Err(Error::InvalidArgument(
                    "q is even: choose a spin structure (h0 or h1)".into(),
                ))
            }
        };
        SpinLensSpace::new(lens, spin)
    }

    pub fn lens(&self) -> &LensParams {
        &self.lens
    }

    pub fn spin(&self) -> SpinLabel {
        self.spin
    }

    pub fn q(&self) -> u64 {
        self.lens.q
    }

    pub fn s(&self) -> &[i64] {
        &self.lens.s
    }

    pub fn m(&self) -> usize {
        self.lens.m()
    }

    /// `h + h_{q;s} mod 2` for even `q`, `None` for odd `q`.
    pub fn effective_h(&self) -> Option<u8> {
        match self.spin {
            SpinLabel::Unique => None,
            SpinLabel::Even(h) => Some((h + h_shift(&self.lens)) % 2),
        }
    }
}

impl fmt::Display for SpinLensSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L({}; ", self.lens.q)?;
        for (i, v) in self.lens.s.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")?;
        if let SpinLabel::Even(h) = self.spin {
            write!(f, " tau_{h}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IsometryMode {
    Any,
    Preserving,
    Reversing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrientationMode {
    Oriented,
    Unoriented,
}

impl OrientationMode {
    pub fn isometry_mode(self) -> IsometryMode {
        match self {
            OrientationMode::Oriented => IsometryMode::Preserving,
            OrientationMode::Unoriented => IsometryMode::Any,
        }
    }
}

impl fmt::Display for OrientationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrientationMode::Oriented => f.write_str("oriented"),
            OrientationMode::Unoriented => f.write_str("unoriented"),
        }
    }
}

/// Data `(l, sigma, eps)` with `l * eps_j * s_j = s'_{sigma(j)} (mod q)`.
/// `sigma` is zero-based: `sigma[j]` is the target coordinate of `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsometryWitness {
    pub ell: Residue,
    pub sigma: Vec<usize>,
    pub eps: Vec<i8>,
    /// `prod_j eps_j`.
    pub orientation: i8,
    /// `sum_j (l eps_j s_j - s'_{sigma(j)}) / q mod 2`, even `q` only.
    pub spin_shift: Option<u8>,
}

impl IsometryWitness {
    /// Composition `other . self` (apply `self` first), a witness from the
    /// source of `self` to the target of `other`.
    pub fn then(&self, other: &IsometryWitness) -> IsometryWitness {
        let q = self.ell.modulus();
        let ell = Residue::new(
            ((self.ell.value() as i128 * other.ell.value() as i128) % q as i128) as i64,
            q,
        );
        let sigma: Vec<usize> = self.sigma.iter().map(|&k| other.sigma[k]).collect();
        let eps: Vec<i8> = self
            .eps
            .iter()
            .zip(&self.sigma)
            .map(|(&e, &k)| e * other.eps[k])
            .collect();
        IsometryWitness {
            ell,
            orientation: self.orientation * other.orientation,
            sigma,
            eps,
            spin_shift: None,
        }
    }
}

fn pm_class(v: u64, q: u64) -> u64 {
    v.min((q - v) % q)
}

fn rho_parity(a: &[i64], b: &[i64], ell: u64, sigma: &[usize], eps: &[i8], q: u64) -> u8 {
    let q = q as i128;
    let total: i128 = a
        .iter()
        .enumerate()
        .map(|(j, &s)| {
            let lhs = ell as i128 * eps[j] as i128 * s as i128;
            let diff = lhs - b[sigma[j]] as i128;
            debug_assert_eq!(diff.rem_euclid(q), 0);
            diff / q
        })
        .sum();
    total.rem_euclid(2) as u8
}

/// An isometry witness between `a` and `b` for the smallest admissible `l`,
/// or `None` if there is none. For each `l` the coordinates are matched
/// greedily by `+-` class; the parity of the number of sign flips, and with
/// it the spin shift, does not depend on the matching, so only a coordinate
/// with `l s_j = -l s_j (mod q)` can repair orientation or spin. For even
/// `q` the witness must transport `a`'s spin structure onto `b`'s.
pub fn find_isometry(
    a: &SpinLensSpace,
    b: &SpinLensSpace,
    mode: IsometryMode,
) -> Result<Option<IsometryWitness>> {
    if a.q() != b.q() || a.m() != b.m() {
        return Err(Error::Mismatch(format!(
            "q = {} vs {}, m = {} vs {}",
            a.q(),
            b.q(),
            a.m(),
            b.m()
        )));
    }
    let q = a.q();
    let m = a.m();
    let ys: Vec<u64> = b.s().iter().map(|&v| Residue::new(v, q).value()).collect();
    let mut b_classes: Vec<u64> = ys.iter().map(|&y| pm_class(y, q)).collect();
    b_classes.sort_unstable();

    let spin_target = match (a.spin(), b.spin()) {
        (SpinLabel::Even(ha), SpinLabel::Even(hb)) => {
            Some((ha, hb, (h_shift(a.lens()) + h_shift(b.lens())) % 2))
        }
        _ => None,
    };

    let mut xs = vec![0u64; m];
    let mut a_classes = vec![0u64; m];
    for ell in units(q) {
        let l = ell.value();
        for (j, &s) in a.s().iter().enumerate() {
            xs[j] = ((l as i128 * s as i128).rem_euclid(q as i128)) as u64;
            a_classes[j] = pm_class(xs[j], q);
        }
        let mut sorted = a_classes.clone();
        sorted.sort_unstable();
        if sorted != b_classes {
            continue;
        }

        let mut used = vec![false; m];
        let mut sigma = vec![0usize; m];
        let mut eps = vec![1i8; m];
        let mut free = Vec::new();
        for j in 0..m {
            let k = (0..m)
                .find(|&k| !used[k] && pm_class(ys[k], q) == a_classes[j])
                .expect("class multisets agree");
            used[k] = true;
            sigma[j] = k;
            eps[j] = if ys[k] == xs[j] { 1 } else { -1 };
            if xs[j] == (q - xs[j]) % q {
                free.push(j);
            }
        }

        let flips = eps.iter().filter(|&&e| e < 0).count();
        let fix_orientation = match mode {
            IsometryMode::Any => None,
            IsometryMode::Preserving => Some(flips % 2 == 1),
            IsometryMode::Reversing => Some(flips % 2 == 0),
        };
        let fix_spin = spin_target.map(|(ha, hb, shifts)| {
            let rho = rho_parity(a.s(), b.s(), l, &sigma, &eps, q);
            (ha + shifts + rho) % 2 != hb
        });
        let toggle = match (fix_orientation, fix_spin) {
            (Some(x), Some(y)) if x != y => continue,
            (x, y) => x.or(y).unwrap_or(false),
        };
        if toggle {
            match free.last() {
                Some(&j) => eps[j] = -eps[j],
                None => continue,
            }
        }

        let orientation = eps.iter().product::<i8>();
        let spin_shift = (q % 2 == 0).then(|| rho_parity(a.s(), b.s(), l, &sigma, &eps, q));
        return Ok(Some(IsometryWitness {
            ell,
            sigma,
            eps,
            orientation,
            spin_shift,
        }));
    }
    Ok(None)
}

/// Re-checks a witness by direct modular arithmetic, including the spin
/// transport rule for even `q`.
pub fn verify_witness(a: &SpinLensSpace, b: &SpinLensSpace, w: &IsometryWitness) -> bool {
    let q = a.q();
    let m = a.m();
    if b.q() != q || b.m() != m || w.sigma.len() != m || w.eps.len() != m {
        return false;
    }
    if w.ell.modulus() != q || !is_coprime(w.ell.value() as i64, q) {
        return false;
    }
    let mut seen = vec![false; m];
    for &k in &w.sigma {
        if k >= m || seen[k] {
            return false;
        }
        seen[k] = true;
    }
    if w.eps.iter().any(|&e| e != 1 && e != -1) {
        return false;
    }
    if w.orientation != w.eps.iter().product::<i8>() {
        return false;
    }
    let l = w.ell.value() as i128;
    for j in 0..m {
        let lhs = l * w.eps[j] as i128 * a.s()[j] as i128;
        if (lhs - b.s()[w.sigma[j]] as i128).rem_euclid(q as i128) != 0 {
            return false;
        }
    }
    match (a.spin(), b.spin()) {
        (SpinLabel::Even(ha), SpinLabel::Even(hb)) => {
            let rho = rho_parity(a.s(), b.s(), w.ell.value(), &w.sigma, &w.eps, q);
            if w.spin_shift != Some(rho) {
                return false;
            }
            (ha + h_shift(a.lens()) + h_shift(b.lens()) + rho) % 2 == hb
        }
        (SpinLabel::Unique, SpinLabel::Unique) => w.spin_shift.is_none(),
        _ => false,
    }
}

/// Orbit representative of a spin lens space under `(l, sigma, eps)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey {
    pub q: u64,
    /// Sorted parameters in `[1, q)` (all zero for `q = 1`).
    pub params: Vec<u64>,
    pub spin: SpinLabel,
    pub mode: OrientationMode,
}

impl CanonicalKey {
    /// The representative as a spin lens space.
    pub fn to_space(&self) -> SpinLensSpace {
        let s: Vec<i64> = self.params.iter().map(|&v| v as i64).collect();
        SpinLensSpace::new(
            LensParams::new(self.q, s).expect("canonical parameters are valid"),
            self.spin,
        )
        .expect("canonical spin label is admissible")
    }
}

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_space())
    }
}

/// Working state for canonicalisation so that census loops avoid
/// reallocating per candidate.
#[derive(Default)]
pub(crate) struct KeyScratch {
    tuple: Vec<u64>,
    best: Vec<u64>,
    ells: Vec<u64>,
}

/// Lexicographically minimal `(params, spin)` over the orbit, with parameters
/// in `[1, q)` and sign flips realised as `s -> q - s`. In `Oriented` mode only
/// sign patterns with `prod eps = +1` are used.
pub fn canonical_key(x: &SpinLensSpace, mode: OrientationMode) -> CanonicalKey {
    let mut scratch = KeyScratch::default();
    canonical_key_with(x.q(), x.s(), x.effective_h(), mode, &mut scratch)
}

pub(crate) fn canonical_key_with(
    q: u64,
    s: &[i64],
    h_eff: Option<u8>,
    mode: OrientationMode,
    scratch: &mut KeyScratch,
) -> CanonicalKey {
    let m = s.len();
    if q == 1 {
        return CanonicalKey {
            q,
            params: vec![0; m],
            spin: SpinLabel::Unique,
            mode,
        };
    }

    // The minimum always contains a parameter equal to 1, so only
    // multipliers sending some s_j to +-1 need to be tried.
    scratch.ells.clear();
    let n_units = units_count_hint(q);
    if 2 * m < n_units {
        for &v in s {
            let inv = mod_inverse(v, q).expect("parameters are units").value();
            scratch.ells.push(inv);
            scratch.ells.push((q - inv) % q);
        }
        scratch.ells.sort_unstable();
        scratch.ells.dedup();
    } else {
        scratch.ells.extend(units(q).iter().map(|r| r.value()));
    }

    let qi = q as i128;
    let mut best_h = 2u8;
    let mut have_best = false;
    for idx in 0..scratch.ells.len() {
        let l = scratch.ells[idx] as i128;
        scratch.tuple.clear();
        let mut flips = 0u32;
        let mut floor_sum = 0i128;
        for &v in s {
            let prod = l * v as i128;
            floor_sum += prod.div_euclid(qi);
            let x = prod.rem_euclid(qi) as u64;
            if x <= q - x {
                scratch.tuple.push(x);
            } else {
                scratch.tuple.push(q - x);
                flips += 1;
            }
        }
        scratch.tuple.sort_unstable();
        if mode == OrientationMode::Oriented && flips % 2 == 1 && q > 2 {
            let last = scratch.tuple[m - 1];
            scratch.tuple[m - 1] = q - last;
            flips += 1;
        }
        let h = match h_eff {
            None => 2,
            Some(_) if q == 2 && mode == OrientationMode::Unoriented => 0,
            Some(he) => ((he as i128 + floor_sum + flips as i128).rem_euclid(2)) as u8,
        };
        let better = if !have_best {
            true
        } else {
            match scratch.tuple.cmp(&scratch.best) {
                Ordering::Less => true,
                Ordering::Equal => h < best_h,
                Ordering::Greater => false,
            }
        };
        if better {
            std::mem::swap(&mut scratch.tuple, &mut scratch.best);
            best_h = h;
            have_best = true;
        }
    }

    CanonicalKey {
        q,
        params: scratch.best.clone(),
        spin: if best_h == 2 {
            SpinLabel::Unique
        } else {
            SpinLabel::Even(best_h)
        },
        mode,
    }
}

fn units_count_hint(q: u64) -> usize {
    // Euler totient by trial division.
    let mut n = q;
    let mut phi = q;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            phi -= phi / p;
        }
        p += 1;
    }
    if n > 1 {
        phi -= phi / n;
    }
    phi as usize
}
