//! Property suites shared by the `properties` and `acceptance` targets.
#![allow(dead_code)]

use dirac_lens::lattice::{
    apply_norm_isometry, contains, lattice_of, reduced_counts, stats, HalfIntVector,
};
use dirac_lens::lens::{
    canonical_key, find_isometry, spin_structures, verify_witness, IsometryMode, LensParams,
    OrientationMode, SpinLabel, SpinLensSpace,
};
use dirac_lens::numtheory::{binomial, mod_inverse, units};
use dirac_lens::oracle::brute_counts;
use dirac_lens::spectrum::{
    dirac_isospectral, fingerprint, inverse_isospectral, spectrum_table, within_sphere_bound,
};
use proptest::collection::vec;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

pub const SEED: [u8; 32] = *b"dirac-lens property suite seed!!";
pub const CASES: u32 = 256;

pub fn runner() -> TestRunner {
    let config = Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &SEED))
}

/// Spin lens space built from raw draws: `q` in `1..=max_q`, `m` in
/// `2..=max_m` (bumped to even when `q` is even), parameters picked from the
/// units with random signs.
pub fn build_space(q: u64, m: usize, picks: &[(usize, bool)], label: bool, max_m: usize) -> SpinLensSpace {
    let mut m = m;
    if q % 2 == 0 && m % 2 == 1 {
        m = if m < max_m { m + 1 } else { m - 1 };
    }
    let us = units(q);
    let s: Vec<i64> = picks[..m]
        .iter()
        .map(|&(i, neg)| {
            let v = us[i % us.len()].value().max(1) as i64;
            if neg { -v } else { v }
        })
        .collect();
    let lens = LensParams::new(q, s).expect("units are coprime");
    let labels = spin_structures(&lens);
    let spin = labels[(label as usize) % labels.len()];
    SpinLensSpace::new(lens, spin).expect("admissible label")
}

pub fn space_strategy(max_q: u64, max_m: usize) -> impl Strategy<Value = SpinLensSpace> {
    (
        1..=max_q,
        2..=max_m,
        vec((0usize..64, any::<bool>()), max_m),
        any::<bool>(),
    )
        .prop_map(move |(q, m, picks, label)| build_space(q, m, &picks, label, max_m))
}

/// A point of the lattice of `x` whose first `m - 1` doubled coordinates
/// are the given odd numbers.
pub fn lattice_point(x: &SpinLensSpace, firsts: &[i64]) -> HalfIntVector {
    let l = lattice_of(x).unwrap();
    let m = x.m();
    let modulus = l.modulus() as i64;
    let mut a: Vec<i64> = firsts[..m - 1].iter().map(|v| 2 * v + 1).collect();
    let partial: i64 = a.iter().zip(x.s()).map(|(a, s)| a * s).sum();
    let inv = mod_inverse(x.s()[m - 1], l.modulus()).unwrap().value() as i64;
    let mut last = ((l.target() as i64 - partial).rem_euclid(modulus) * inv).rem_euclid(modulus);
    if last % 2 == 0 {
        last += x.q() as i64;
    }
    a.push(last);
    HalfIntVector::new(a).unwrap()
}

/// Image of `x` under `(l, sigma, eps)`, with the spin label for which the
/// witness transports the structure.
pub fn image(x: &SpinLensSpace, ell_pick: usize, sigma: &[usize], eps: &[i8]) -> (SpinLensSpace, u64) {
    let q = x.q();
    let us = units(q);
    let ell = us[ell_pick % us.len()].value().max(1);
    let m = x.m();
    let mut t = vec![0i64; m];
    for j in 0..m {
        let v = (ell as i128 * eps[j] as i128 * x.s()[j] as i128).rem_euclid(q as i128) as i64;
        t[sigma[j]] = if q == 1 { 1 } else { v };
    }
    let lens = LensParams::new(q, t).unwrap();
    let candidates = spin_structures(&lens);
    for spin in candidates {
        let y = SpinLensSpace::new(lens.clone(), spin).unwrap();
        let w = dirac_lens::lens::IsometryWitness {
            ell: dirac_lens::numtheory::Residue::new(ell as i64, q),
            sigma: sigma.to_vec(),
            eps: eps.to_vec(),
            orientation: eps.iter().product(),
            spin_shift: rho(x, &y, ell, sigma, eps),
        };
        if verify_witness(x, &y, &w) {
            return (y, ell);
        }
    }
    panic!("no label of the image is transported");
}

fn rho(x: &SpinLensSpace, y: &SpinLensSpace, ell: u64, sigma: &[usize], eps: &[i8]) -> Option<u8> {
    let q = x.q() as i128;
    if q % 2 == 1 {
        return None;
    }
    let total: i128 = (0..x.m())
        .map(|j| (ell as i128 * eps[j] as i128 * x.s()[j] as i128 - y.s()[sigma[j]] as i128) / q)
        .sum();
    Some(total.rem_euclid(2) as u8)
}

fn permutation(m: usize, keys: &[u32]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by_key(|&i| (keys[i], i));
    idx
}

fn signs(m: usize, bits: &[bool]) -> Vec<i8> {
    (0..m).map(|j| if bits[j] { -1 } else { 1 }).collect()
}

fn isometry_inputs(max_q: u64, max_m: usize) -> impl Strategy<Value = (SpinLensSpace, usize, Vec<u32>, Vec<bool>)> {
    (
        space_strategy(max_q, max_m),
        0usize..64,
        vec(any::<u32>(), max_m),
        vec(any::<bool>(), max_m),
    )
}

pub fn periodicity(r: &mut TestRunner) -> Result<(), String> {
    let strat = (
        space_strategy(30, 4),
        vec(-20i64..20, 4),
        vec(-20i64..20, 4),
        vec(-3i64..=3, 4),
    );
    r.run(&strat, |(x, firsts, raw, eta)| {
        let l = lattice_of(&x).unwrap();
        let m = x.m();
        let mu = lattice_point(&x, &firsts);
        prop_assert!(contains(&l, &mu).unwrap());
        prop_assert!(contains(&l, &mu.translate(x.q(), &eta[..m])).unwrap());
        let nu = HalfIntVector::new(raw[..m].iter().map(|v| 2 * v + 1).collect()).unwrap();
        prop_assert_eq!(
            contains(&l, &nu).unwrap(),
            contains(&l, &nu.translate(x.q(), &eta[..m])).unwrap()
        );
        Ok(())
    })
    .map_err(|e| e.to_string())
}

pub fn negation(r: &mut TestRunner) -> Result<(), String> {
    let strat = (space_strategy(30, 4), vec(-20i64..20, 4), vec(-20i64..20, 4));
    r.run(&strat, |(x, firsts, raw)| {
        let l = lattice_of(&x).unwrap();
        let m = x.m();
        let mu = lattice_point(&x, &firsts);
        prop_assert!(contains(&l, &mu.neg()).unwrap());
        prop_assert_eq!(stats(&mu.neg()).1, m - stats(&mu).1);
        prop_assert_eq!(stats(&mu.neg()).0, stats(&mu).0);
        let nu = HalfIntVector::new(raw[..m].iter().map(|v| 2 * v + 1).collect()).unwrap();
        prop_assert_eq!(contains(&l, &nu).unwrap(), contains(&l, &nu.neg()).unwrap());
        Ok(())
    })
    .map_err(|e| e.to_string())
}

pub fn odd_m_rows(r: &mut TestRunner) -> Result<(), String> {
    let strat = (0u64..15, prop_oneof![Just(3usize), Just(5)], vec((0usize..64, any::<bool>()), 5));
    r.run(&strat, |(half, m, picks)| {
        let q = 2 * half + 1;
        let x = build_space(q, m, &picks, false, 5);
        let t = reduced_counts(&lattice_of(&x).unwrap());
        prop_assert_eq!(t.row(0), t.row(1));
        Ok(())
    })
    .map_err(|e| e.to_string())
}

pub fn lattice_isometry(r: &mut TestRunner) -> Result<(), String> {
    let strat = (isometry_inputs(40, 4), vec(-20i64..20, 4), vec(-20i64..20, 4));
    r.run(&strat, |((x, ell, keys, bits), firsts, raw)| {
        let m = x.m();
        let sigma = permutation(m, &keys);
        let eps = signs(m, &bits);
        let (y, _) = image(&x, ell, &sigma, &eps);
        let (lx, ly) = (lattice_of(&x).unwrap(), lattice_of(&y).unwrap());
        let mu = lattice_point(&x, &firsts);
        let phi = apply_norm_isometry(&sigma, &eps, &mu);
        prop_assert!(contains(&ly, &phi).unwrap());
        prop_assert_eq!(stats(&phi).0, stats(&mu).0);
        let nu = HalfIntVector::new(raw[..m].iter().map(|v| 2 * v + 1).collect()).unwrap();
        prop_assert_eq!(
            contains(&lx, &nu).unwrap(),
            contains(&ly, &apply_norm_isometry(&sigma, &eps, &nu)).unwrap()
        );
        Ok(())
    })
    .map_err(|e| e.to_string())
}

pub fn key_witness(r: &mut TestRunner) -> Result<(), String> {
    let strat = (isometry_inputs(20, 4), space_strategy(20, 4), any::<bool>());
    r.run(&strat, |((x, ell, keys, bits), other, related)| {
        let m = x.m();
        let y = if related || other.q() != x.q() || other.m() != m {
            image(&x, ell, &permutation(m, &keys), &signs(m, &bits)).0
        } else {
            other
        };
        for (mode, iso) in [
            (OrientationMode::Unoriented, IsometryMode::Any),
            (OrientationMode::Oriented, IsometryMode::Preserving),
        ] {
            let same = canonical_key(&x, mode) == canonical_key(&y, mode);
            let w = find_isometry(&x, &y, iso).unwrap();
            prop_assert_eq!(same, w.is_some(), "{} vs {} in {}", x, y, mode);
            if let Some(w) = w {
                prop_assert!(verify_witness(&x, &y, &w));
                if iso == IsometryMode::Preserving {
                    prop_assert_eq!(w.orientation, 1);
                }
            }
        }
        let k = canonical_key(&x, OrientationMode::Unoriented).to_space();
        prop_assert!(find_isometry(&x, &k, IsometryMode::Any).unwrap().is_some());
        Ok(())
    })
    .map_err(|e| e.to_string())
}

/// Every `(l, sigma, eps)` checked directly.
fn brute_isometry(x: &SpinLensSpace, y: &SpinLensSpace, mode: IsometryMode) -> bool {
    let m = x.m();
    let q = x.q();
    let mut perms = vec![];
    permute(&mut (0..m).collect::<Vec<_>>(), 0, &mut perms);
    for ell in units(q) {
        for sigma in &perms {
            for bits in 0..(1u32 << m) {
                let eps: Vec<i8> = (0..m).map(|j| if bits >> j & 1 == 1 { -1 } else { 1 }).collect();
                let orientation: i8 = eps.iter().product();
                match mode {
                    IsometryMode::Preserving if orientation != 1 => continue,
                    IsometryMode::Reversing if orientation != -1 => continue,
                    _ => {}
                }
                let ok = (0..m).all(|j| {
                    (ell.value() as i128 * eps[j] as i128 * x.s()[j] as i128 - y.s()[sigma[j]] as i128)
                        .rem_euclid(q as i128)
                        == 0
                });
                if !ok {
                    continue;
                }
                let transported = match (x.spin(), y.spin()) {
                    (SpinLabel::Even(_), SpinLabel::Even(_)) => {
                        let shift = rho(x, y, ell.value(), sigma, &eps).unwrap();
                        (x.effective_h().unwrap() + shift) % 2 == y.effective_h().unwrap()
                    }
                    _ => true,
                };
                if transported {
                    return true;
                }
            }
        }
    }
    false
}

fn permute(v: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == v.len() {
        out.push(v.clone());
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, out);
        v.swap(k, i);
    }
}

pub fn isometry_completeness(r: &mut TestRunner) -> Result<(), String> {
    let strat = (isometry_inputs(16, 4), space_strategy(16, 4), any::<bool>());
    r.run(&strat, |((x, ell, keys, bits), other, related)| {
        let m = x.m();
        let y = if related || other.q() != x.q() || other.m() != m {
            let mut y = image(&x, ell, &permutation(m, &keys), &signs(m, &bits)).0;
            if let SpinLabel::Even(h) = y.spin() {
                if bits[0] {
                    y = SpinLensSpace::from_parts(y.q(), y.s(), Some(SpinLabel::Even(1 - h))).unwrap();
                }
            }
            y
        } else {
            other
        };
        for mode in [IsometryMode::Any, IsometryMode::Preserving, IsometryMode::Reversing] {
            let found = find_isometry(&x, &y, mode).unwrap();
            prop_assert_eq!(found.is_some(), brute_isometry(&x, &y, mode), "{} vs {} {:?}", x, y, mode);
        }
        Ok(())
    })
    .map_err(|e| e.to_string())
}

/// `mult(-lambda_k)` and `mult(+lambda_k)` from brute-force lattice counts.
pub fn brute_multiplicities(x: &SpinLensSpace, k_max: u64) -> Vec<(u64, u64)> {
    let m = x.m() as u64;
    let n = brute_counts(&lattice_of(x).unwrap(), k_max).unwrap();
    (0..=k_max)
        .map(|k| {
            let mut minus = 0u64;
            let mut plus = 0u64;
            for r in 0..=k {
                let c = binomial(r + m - 2, m - 2).to_u64().unwrap();
                let i = (k - r) as usize;
                minus += c * n[(r % 2) as usize][i];
                plus += c * n[((r + 1) % 2) as usize][i];
            }
            (minus, plus)
        })
        .collect()
}

pub fn fingerprint_completeness(r: &mut TestRunner) -> Result<(), String> {
    let strat = (isometry_inputs(12, 3), space_strategy(12, 3), any::<bool>());
    r.run(&strat, |((x, ell, keys, bits), other, related)| {
        let m = x.m();
        let y = if related || other.q() != x.q() || other.m() != m {
            image(&x, ell, &permutation(m, &keys), &signs(m, &bits)).0
        } else {
            other
        };
        let k_max = 3 * m as u64 * x.q();
        let same_print = fingerprint(&x).unwrap() == fingerprint(&y).unwrap();
        let same_table = brute_multiplicities(&x, k_max) == brute_multiplicities(&y, k_max);
        prop_assert_eq!(same_print, same_table, "{} vs {}", x, y);
        Ok(())
    })
    .map_err(|e| e.to_string())
}

pub fn isometry_spectra(r: &mut TestRunner) -> Result<(), String> {
    r.run(&isometry_inputs(40, 4), |(x, ell, keys, bits)| {
        let m = x.m();
        let eps = signs(m, &bits);
        let (y, _) = image(&x, ell, &permutation(m, &keys), &eps);
        if eps.iter().product::<i8>() == 1 {
            prop_assert!(dirac_isospectral(&x, &y).unwrap());
        } else {
            prop_assert!(inverse_isospectral(&x, &y).unwrap());
        }
        Ok(())
    })
    .map_err(|e| e.to_string())
}

pub fn sphere_bound(r: &mut TestRunner) -> Result<(), String> {
    r.run(&(space_strategy(40, 5), 0u64..120), |(x, k_max)| {
        prop_assert!(within_sphere_bound(&spectrum_table(&x, k_max).unwrap()));
        Ok(())
    })
    .map_err(|e| e.to_string())
}

pub fn arithmetic(r: &mut TestRunner) -> Result<(), String> {
    r.run(&(2u64..500, -1000i64..1000, 0u64..60, 0u64..60), |(q, a, n, k)| {
        match mod_inverse(a, q) {
            Ok(inv) => prop_assert_eq!((a as i128 * inv.value() as i128).rem_euclid(q as i128), 1),
            Err(_) => prop_assert!(num_gcd(a.unsigned_abs(), q) != 1),
        }
        if n >= 1 && k >= 1 {
            let lhs = binomial(n, k);
            let rhs = &binomial(n - 1, k - 1) + &binomial(n - 1, k);
            prop_assert_eq!(lhs, rhs);
        }
        prop_assert_eq!(binomial(n, k).is_zero(), k > n);
        Ok(())
    })
    .map_err(|e| e.to_string())
}

fn num_gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { num_gcd(b, a % b) }
}

pub type Suite = (&'static str, fn(&mut TestRunner) -> Result<(), String>);

pub const SUITES: [Suite; 10] = [
    ("lattice periodicity", periodicity),
    ("negation symmetry", negation),
    ("row equality for odd m", odd_m_rows),
    ("lattice isometry construction", lattice_isometry),
    ("canonical key vs witness", key_witness),
    ("isometry search completeness", isometry_completeness),
    ("fingerprint completeness", fingerprint_completeness),
    ("isometry implies isospectral", isometry_spectra),
    ("modular inverse and Pascal", arithmetic),
    ("sphere bound", sphere_bound),
];
