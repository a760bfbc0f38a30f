//! Census of isospectral spin lens spaces, the infinite families, and
//! persistence of census results.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{lattice_of, reduced_counts, ReducedCountTable};
use crate::lens::{
    canonical_key_with, find_isometry, spin_structures, IsometryMode, KeyScratch, LensParams,
    OrientationMode, SpinLabel, SpinLensSpace,
};
use crate::numtheory::units;
use crate::spectrum::dirac_isospectral;

/// Current version of the structured result format.
pub const FORMAT_VERSION: u32 = 1;

/// How the per-class work is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Data-parallel map; falls back to sequential without the `parallel` feature.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

fn map_items<T, U, S, I, F>(exec: Execution, items: &[T], init: I, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, &T) -> U + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map_init(&init, |s, x| f(s, x)).collect()
        }
        _ => {
            let mut state = init();
            items.iter().map(|x| f(&mut state, x)).collect()
        }
    }
}

fn dimension_to_m(n: u64) -> Result<usize> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "dimension must be odd and at least 3, got {n}"
        )));
    }
    Ok(((n + 1) / 2) as usize)
}

/// Multisets of size `len` from `values`, flattened with stride `len`.
fn multisets(values: &[u64], len: usize) -> Vec<u32> {
    let mut out = Vec::new();
    let mut idx = vec![0usize; len];
    if values.is_empty() {
        return out;
    }
    if len == 0 {
        return out;
    }
    loop {
        out.extend(idx.iter().map(|&i| values[i] as u32));
        // next non-decreasing index tuple
        let mut j = len;
        loop {
            if j == 0 {
                return out;
            }
            j -= 1;
            if idx[j] + 1 < values.len() {
                let v = idx[j] + 1;
                for slot in idx[j..].iter_mut() {
                    *slot = v;
                }
                break;
            }
        }
    }
}

/// One representative per isometry class of `(2m-1)`-dimensional lens spaces
/// with fundamental group of order `q` and a spin structure, ordered by the
/// canonical key.
pub fn enumerate_classes(n: u64, q: u64, mode: OrientationMode) -> Result<Vec<SpinLensSpace>> {
    enumerate_classes_with(n, q, mode, Execution::default())
}

pub fn enumerate_classes_with(
    n: u64,
    q: u64,
    mode: OrientationMode,
    exec: Execution,
) -> Result<Vec<SpinLensSpace>> {
    let m = dimension_to_m(n)?;
    if q == 0 {
        return Err(Error::ZeroOrder);
    }
    let labels = spin_structures(&LensParams::new(q, vec![1; m])?);
    if labels.is_empty() {
        return Err(Error::NoSpinStructure);
    }
    if q == 1 {
        let key = canonical_key_with(1, &vec![1; m], None, mode, &mut KeyScratch::default());
        return Ok(vec![key.to_space()]);
    }
    // Every class has a representative with s_1 = 1 and the rest sorted.
    let values: Vec<u64> = units(q)
        .iter()
        .map(|r| r.value())
        .filter(|&v| mode == OrientationMode::Oriented || v <= q - v)
        .collect();
    let tail = multisets(&values, m - 1);
    let count = if m > 1 { tail.len() / (m - 1) } else { 1 };
    let candidates: Vec<usize> = (0..count).collect();

    let found = map_items(
        exec,
        &candidates,
        || (KeyScratch::default(), Vec::with_capacity(m)),
        |(scratch, s): &mut (KeyScratch, Vec<i64>), &c| {
            s.clear();
            s.push(1);
            s.extend(tail[c * (m - 1)..(c + 1) * (m - 1)].iter().map(|&v| v as i64));
            let mut keys = Vec::new();
            for label in &labels {
                let h = match label {
                    SpinLabel::Unique => None,
                    SpinLabel::Even(h) => Some(*h),
                };
                let key = canonical_key_with(q, s, h, mode, scratch);
                if key.params.iter().zip(s.iter()).all(|(&a, &b)| a as i64 == b) {
                    keys.push(key);
                }
            }
            keys
        },
    );
    let mut keys: Vec<_> = found.into_iter().flatten().collect();
    keys.sort();
    keys.dedup();
    Ok(keys.iter().map(|k| k.to_space()).collect())
}

/// A set of pairwise isospectral, pairwise non-equivalent spin lens spaces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsospectralFamily {
    pub digest: String,
    #[serde(with = "member_list")]
    pub members: Vec<SpinLensSpace>,
    /// `true` when some pair of members is related by an isometry that
    /// carries one spin structure to the other.
    pub trivial: bool,
    #[serde(default)]
    pub trivial_pairs: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduced_table: Option<ReducedCountTable>,
}

/// Census outcome for one `(dimension, q, mode)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "CensusRecord", into = "CensusRecord")]
pub struct CensusResult {
    pub dimension: u64,
    pub q: u64,
    pub mode: OrientationMode,
    pub classes: usize,
    pub fingerprints: usize,
    /// Families with at least two members.
    pub families: Vec<IsospectralFamily>,
    /// Wall-clock time of the run; not persisted and ignored by `==`.
    pub elapsed: Duration,
}

impl PartialEq for CensusResult {
    fn eq(&self, other: &Self) -> bool {
        self.dimension == other.dimension
            && self.q == other.q
            && self.mode == other.mode
            && self.classes == other.classes
            && self.fingerprints == other.fingerprints
            && self.families == other.families
    }
}

impl CensusResult {
    /// Families whose members are not related by a spin-preserving isometry.
    pub fn nontrivial_families(&self) -> impl Iterator<Item = &IsospectralFamily> {
        self.families.iter().filter(|f| !f.trivial)
    }
}

#[derive(Serialize, Deserialize)]
struct CensusRecord {
    dimension: u64,
    q: u64,
    mode: OrientationMode,
    classes: usize,
    fingerprints: usize,
    families: Vec<IsospectralFamily>,
}

impl From<CensusResult> for CensusRecord {
    fn from(c: CensusResult) -> Self {
        CensusRecord {
            dimension: c.dimension,
            q: c.q,
            mode: c.mode,
            classes: c.classes,
            fingerprints: c.fingerprints,
            families: c.families,
        }
    }
}

impl TryFrom<CensusRecord> for CensusResult {
    type Error = String;
    fn try_from(r: CensusRecord) -> std::result::Result<Self, String> {
        let m = dimension_to_m(r.dimension).map_err(|e| e.to_string())?;
        for (i, fam) in r.families.iter().enumerate() {
            if fam.members.len() < 2 {
                return Err(format!("family {i} has fewer than two members"));
            }
            for x in &fam.members {
                if x.q() != r.q || x.m() != m {
                    return Err(format!(
                        "family {i}: member {x} does not match q = {}, m = {m}",
                        r.q
                    ));
                }
            }
            if let Some(t) = &fam.reduced_table {
                let len = m * r.q as usize;
                if t.m() != m || t.q() != r.q || t.rows().iter().any(|row| row.len() != len) {
                    return Err(format!(
                        "family {i}: reduced table shape does not match q = {}, m = {m}",
                        r.q
                    ));
                }
            }
        }
        Ok(CensusResult {
            dimension: r.dimension,
            q: r.q,
            mode: r.mode,
            classes: r.classes,
            fingerprints: r.fingerprints,
            families: r.families,
            elapsed: Duration::ZERO,
        })
    }
}

mod member_list {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Member {
        q: u64,
        s: Vec<i64>,
        spin: SpinLabel,
    }

    pub fn serialize<S: Serializer>(v: &[SpinLensSpace], ser: S) -> std::result::Result<S::Ok, S::Error> {
        let list: Vec<Member> = v
            .iter()
            .map(|x| Member {
                q: x.q(),
                s: x.s().to_vec(),
                spin: x.spin(),
            })
            .collect();
        list.serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<Vec<SpinLensSpace>, D::Error> {
        let list = Vec::<Member>::deserialize(de)?;
        list.into_iter()
            .map(|m| {
                SpinLensSpace::from_parts(m.q, &m.s, Some(m.spin)).map_err(serde::de::Error::custom)
            })
            .collect()
    }
}

/// Fingerprints every class representative and groups equal fingerprints.
/// In `Unoriented` mode a table and its row swap are identified.
pub fn run_census(n: u64, q: u64, mode: OrientationMode) -> Result<CensusResult> {
    run_census_with(n, q, mode, Execution::default())
}

pub fn run_census_with(n: u64, q: u64, mode: OrientationMode, exec: Execution) -> Result<CensusResult> {
    let start = Instant::now();
    let classes = enumerate_classes_with(n, q, mode, exec)?;
    let tables = map_items(exec, &classes, || (), |_, x| {
        let table = reduced_counts(&lattice_of(x).expect("representatives carry a spin structure"));
        match mode {
            OrientationMode::Oriented => {
                let d = table.digest();
                (d, table)
            }
            OrientationMode::Unoriented => {
                let swapped = table.swapped();
                let (d0, d1) = (table.digest(), swapped.digest());
                if d0 <= d1 {
                    (d0, table)
                } else {
                    (d1, swapped)
                }
            }
        }
    });

    // digest buckets, split further on full table comparison
    let mut buckets: BTreeMap<&str, Vec<Vec<usize>>> = BTreeMap::new();
    for (i, (digest, table)) in tables.iter().enumerate() {
        let groups = buckets.entry(digest.as_str()).or_default();
        match groups.iter_mut().find(|g| tables[g[0]].1 == *table) {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    let mut groups: Vec<Vec<usize>> = buckets
        .into_values()
        .flatten()
        .filter(|g| g.len() >= 2)
        .collect();
    groups.sort_by_key(|g| g[0]);

    let iso_mode = mode.isometry_mode();
    let mut families = Vec::with_capacity(groups.len());
    for g in groups {
        let members: Vec<SpinLensSpace> = g.iter().map(|&i| classes[i].clone()).collect();
        let mut trivial_pairs = Vec::new();
        for a in 0..members.len() {
            for b in a + 1..members.len() {
                if find_isometry(&members[a], &members[b], iso_mode)?.is_some() {
                    trivial_pairs.push((a, b));
                }
            }
        }
        families.push(IsospectralFamily {
            digest: tables[g[0]].0.clone(),
            trivial: !trivial_pairs.is_empty(),
            trivial_pairs,
            members,
            reduced_table: Some(tables[g[0]].1.clone()),
        });
    }

    Ok(CensusResult {
        dimension: n,
        q,
        mode,
        classes: classes.len(),
        fingerprints: tables.len(),
        families,
        elapsed: start.elapsed(),
    })
}

/// A `q` skipped by a range census, with the reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedOrder {
    pub q: u64,
    pub reason: String,
}

/// Censuses for every `q` in `q_min..=q_max`; orders without a spin
/// structure are listed in the second component.
pub fn run_census_range(
    n: u64,
    q_min: u64,
    q_max: u64,
    mode: OrientationMode,
    exec: Execution,
) -> Result<(Vec<CensusResult>, Vec<SkippedOrder>)> {
    dimension_to_m(n)?;
    let mut results = Vec::new();
    let mut skipped = Vec::new();
    for q in q_min.max(1)..=q_max {
        match run_census_with(n, q, mode, exec) {
            Ok(r) => results.push(r),
            Err(Error::NoSpinStructure) => skipped.push(SkippedOrder {
                q,
                reason: Error::NoSpinStructure.to_string(),
            }),
            Err(e) => return Err(e),
        }
    }
    Ok((results, skipped))
}

/// Members `L(40; s^(p)) tau_0`, `p = 0..=r`, with `s^(p)` made of
/// `m - 2p` entries `1, 11, 1, 11, ...` followed by `2p` entries
/// `21, 31, 21, 31, ...`, where `m = 4r + 2`.
pub fn family_thm51(r: u64) -> Result<Vec<SpinLensSpace>> {
    if r == 0 {
        return Err(Error::InvalidArgument("r must be positive".into()));
    }
    let m = 4 * r as usize + 2;
    (0..=r as usize)
        .map(|p| {
            let mut s = Vec::with_capacity(m);
            for _ in 0..(m - 2 * p) / 2 {
                s.extend([1, 11]);
            }
            for _ in 0..p {
                s.extend([21, 31]);
            }
            SpinLensSpace::from_parts(40, &s, Some(SpinLabel::Even(0)))
        })
        .collect()
}

/// `L(32t; 1, 1+4t, 1+16t, 1+28t)` with `tau_0` and with `tau_1`.
pub fn family_thm52(t: u64) -> Result<[SpinLensSpace; 2]> {
    if t == 0 {
        return Err(Error::InvalidArgument("t must be positive".into()));
    }
    let t = t as i64;
    let s = [1, 1 + 4 * t, 1 + 16 * t, 1 + 28 * t];
    let q = 32 * t as u64;
    Ok([
        SpinLensSpace::from_parts(q, &s, Some(SpinLabel::Even(0)))?,
        SpinLensSpace::from_parts(q, &s, Some(SpinLabel::Even(1)))?,
    ])
}

/// `L(r^2 t; 1, 1+rt, 1+2rt, 1+4rt)` against `L(r^2 t; 1, 1-rt, 1-2rt, 1-4rt)`,
/// one pair per spin label. `t >= 2` requires `experimental`.
pub fn family_thm53(r: u64, t: u64, experimental: bool) -> Result<Vec<[SpinLensSpace; 2]>> {
    if t == 0 {
        return Err(Error::InvalidArgument("t must be positive".into()));
    }
    if t > 1 && !experimental {
        return Err(Error::InvalidArgument(
            "t >= 2 is experimental; pass the experimental flag".into(),
        ));
    }
    if r % 2 == 0 || (t == 1 && r < 7) || r < 3 {
        return Err(Error::InvalidArgument(format!("r must be odd and at least 7, got {r}")));
    }
    let q = r * r * t;
    let rt = (r * t) as i64;
    let a = [1, 1 + rt, 1 + 2 * rt, 1 + 4 * rt];
    let b = [1, 1 - rt, 1 - 2 * rt, 1 - 4 * rt];
    let labels = spin_structures(&LensParams::new(q, a.to_vec())?);
    labels
        .into_iter()
        .map(|l| {
            Ok([
                SpinLensSpace::from_parts(q, &a, Some(l))?,
                SpinLensSpace::from_parts(q, &b, Some(l))?,
            ])
        })
        .collect()
}

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub description: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{} {}", if c.passed { "ok  " } else { "FAIL" }, c.description)?;
        }
        Ok(())
    }
}

/// Checks that all members are pairwise Dirac isospectral and, when asked,
/// that no pair is related by an isometry of `iso_mode` transporting the
/// spin structures.
pub fn verify_family(
    members: &[SpinLensSpace],
    expect_nonisometric: bool,
    iso_mode: IsometryMode,
) -> Result<VerificationReport> {
    if members.len() < 2 {
        return Err(Error::InvalidArgument("a family needs at least two members".into()));
    }
    let (q, m) = (members[0].q(), members[0].m());
    if let Some(x) = members.iter().find(|x| x.q() != q || x.m() != m) {
        return Err(Error::Mismatch(format!("{x} differs from q = {q}, m = {m}")));
    }
    let mut checks = Vec::new();
    for a in 0..members.len() {
        for b in a + 1..members.len() {
            let (x, y) = (&members[a], &members[b]);
            if !dirac_isospectral(x, y)? {
                return Err(Error::VerificationFailed(format!("{x} and {y} are not Dirac isospectral")));
            }
            checks.push(Check {
                description: format!("{x} ~ {y}: Dirac isospectral"),
                passed: true,
            });
            if expect_nonisometric {
                if let Some(w) = find_isometry(x, y, iso_mode)? {
                    return Err(Error::VerificationFailed(format!(
                        "{x} and {y} are isometric (l = {}, orientation {})",
                        w.ell, w.orientation
                    )));
                }
                checks.push(Check {
                    description: format!("{x} vs {y}: no isometry carrying the spin structure"),
                    passed: true,
                });
            }
        }
    }
    Ok(VerificationReport { checks })
}

/// Structured document holding several censuses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub format_version: u32,
    pub censuses: Vec<CensusResult>,
}

/// Writes censuses as pretty-printed JSON. Output is deterministic.
pub fn save_results(results: &[CensusResult], path: &Path) -> Result<()> {
    let doc = ResultFile {
        format_version: FORMAT_VERSION,
        censuses: results.to_vec(),
    };
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Format {
        line: 0,
        column: 0,
        message: e.to_string(),
    })?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn load_results(path: &Path) -> Result<Vec<CensusResult>> {
    let text = fs::read_to_string(path)?;
    let doc: ResultFile = serde_json::from_str(&text).map_err(|e| Error::Format {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if doc.format_version != FORMAT_VERSION {
        return Err(Error::Format {
            line: 1,
            column: 1,
            message: format!("unsupported format_version {}", doc.format_version),
        });
    }
    Ok(doc.censuses)
}

/// CSV with one row per family member.
pub fn export_csv<W: Write>(results: &[CensusResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Format {
        line: 0,
        column: 0,
        message: e.to_string(),
    };
    w.write_record(["dimension", "q", "mode", "family", "digest", "trivial", "s", "spin"])
        .map_err(csv_err)?;
    for r in results {
        for (i, fam) in r.families.iter().enumerate() {
            for x in &fam.members {
                let s: Vec<String> = x.s().iter().map(|v| v.to_string()).collect();
                w.write_record([
                    r.dimension.to_string(),
                    r.q.to_string(),
                    r.mode.to_string(),
                    i.to_string(),
                    fam.digest.clone(),
                    fam.trivial.to_string(),
                    s.join(" "),
                    x.spin().to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
