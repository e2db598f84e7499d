//! Configurations, determinant signs, admissible ranks and compound matrices.
//!
//! Orbitals are indexed from 0 in code. Sign rules use the 1-based position
//! of an orbital inside its configuration, so `sign_of_hole(&[0, 2, 3], 2)` is
//! `+1` (second slot) and `sign_of_hole(&[0, 2, 3], 0)` is `-1` (first slot).

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::{det, unitary_defect, CMatrix, CVector};

/// Strictly increasing orbital indices of one Slater determinant.
pub type Configuration = Vec<usize>;

/// Entry of a hole group: removing `orbital` from config `config` leaves the
/// group's shared remainder, with determinant sign `sign`.
#[derive(Clone, Copy, Debug)]
pub struct HoleEntry {
    pub orbital: usize,
    pub config: usize,
    pub sign: f64,
}

/// Ordered pair removal `(first, second)` from `config`, sign `(-1)^σ_{first,second}`.
#[derive(Clone, Copy, Debug)]
pub struct PairEntry {
    pub first: usize,
    pub second: usize,
    pub config: usize,
    pub sign: f64,
}

#[derive(Clone, Debug)]
pub struct ConfigTable {
    n: usize,
    k: usize,
    configs: Vec<Configuration>,
    masks: Vec<u128>,
    index: HashMap<u128, usize>,
    holes: Vec<Vec<HoleEntry>>,
    pairs: Vec<Vec<PairEntry>>,
}

/// Lexicographic table of all `N`-subsets of `0..K`.
pub fn enumerate_configs(n: usize, k: usize) -> Result<ConfigTable> {
    if n < 1 || n > k {
        return Err(Error::InvalidDimension(format!("need 1 <= N <= K, got N = {n}, K = {k}")));
    }
    if k > 128 {
        return Err(Error::InvalidDimension(format!("at most 128 orbitals supported, got {k}")));
    }
    let mut configs = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        configs.push(cur.clone());
        // advance to the next increasing tuple
        let mut pos = n;
        while pos > 0 && cur[pos - 1] == k - n + pos - 1 {
            pos -= 1;
        }
        if pos == 0 {
            break;
        }
        cur[pos - 1] += 1;
        for q in pos..n {
            cur[q] = cur[q - 1] + 1;
        }
    }
    let masks: Vec<u128> = configs.iter().map(|s| mask_of(s)).collect();
    let index = masks.iter().enumerate().map(|(i, &m)| (m, i)).collect();

    let mut hole_groups: HashMap<u128, Vec<HoleEntry>> = HashMap::new();
    let mut pair_groups: HashMap<u128, Vec<PairEntry>> = HashMap::new();
    for (ci, s) in configs.iter().enumerate() {
        for (p, &i) in s.iter().enumerate() {
            let sign = parity(p + 1);
            hole_groups.entry(masks[ci] & !(1u128 << i)).or_default().push(HoleEntry { orbital: i, config: ci, sign });
            for (q, &j) in s.iter().enumerate() {
                if p == q {
                    continue;
                }
                let sign = pair_sign_from_positions(i, j, p + 1, q + 1);
                let rest = masks[ci] & !(1u128 << i) & !(1u128 << j);
                pair_groups.entry(rest).or_default().push(PairEntry { first: i, second: j, config: ci, sign });
            }
        }
    }
    let mut holes: Vec<(u128, Vec<HoleEntry>)> = hole_groups.into_iter().collect();
    holes.sort_by_key(|(m, _)| *m);
    let mut pairs: Vec<(u128, Vec<PairEntry>)> = pair_groups.into_iter().collect();
    pairs.sort_by_key(|(m, _)| *m);

    Ok(ConfigTable {
        n,
        k,
        configs,
        masks,
        index,
        holes: holes.into_iter().map(|(_, v)| v).collect(),
        pairs: pairs.into_iter().map(|(_, v)| v).collect(),
    })
}

impl ConfigTable {
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn len(&self) -> usize {
        self.configs.len()
    }
    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }
    pub fn configs(&self) -> &[Configuration] {
        &self.configs
    }
    pub fn config(&self, idx: usize) -> &Configuration {
        &self.configs[idx]
    }
    pub fn mask(&self, idx: usize) -> u128 {
        self.masks[idx]
    }
    pub fn index_of(&self, config: &[usize]) -> Option<usize> {
        if config.len() != self.n || config.windows(2).any(|w| w[0] >= w[1]) || config.iter().any(|&i| i >= self.k) {
            return None;
        }
        self.index.get(&mask_of(config)).copied()
    }
    pub fn index_of_mask(&self, mask: u128) -> Option<usize> {
        self.index.get(&mask).copied()
    }
    /// Configurations grouped by their common `(N-1)`-remainder after one removal.
    pub fn hole_groups(&self) -> &[Vec<HoleEntry>] {
        &self.holes
    }
    /// Configurations grouped by their common `(N-2)`-remainder after an ordered pair removal.
    pub fn pair_groups(&self) -> &[Vec<PairEntry>] {
        &self.pairs
    }
}

fn mask_of(config: &[usize]) -> u128 {
    config.iter().fold(0u128, |m, &i| m | (1u128 << i))
}

fn parity(p: usize) -> f64 {
    if p.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn pair_sign_from_positions(i: usize, j: usize, pi: usize, pj: usize) -> f64 {
    let orient = if i > j { 1.0 } else { -1.0 };
    orient * parity(pi + pj)
}

fn position(config: &[usize], i: usize) -> Result<usize> {
    config.iter().position(|&x| x == i).map(|p| p + 1).ok_or_else(|| Error::IndexNotInConfiguration { orbital: i, config: config.to_vec() })
}

/// `(-1)^p` with `p` the 1-based position of orbital `i` in `config`.
pub fn sign_of_hole(config: &[usize], i: usize) -> Result<f64> {
    Ok(parity(position(config, i)?))
}

/// `sgn(i - j) (-1)^{pos(i) + pos(j)}`; equals the sign of `a_j a_i` acting on the determinant.
pub fn sign_of_pair(config: &[usize], i: usize, j: usize) -> Result<f64> {
    if i == j {
        return Err(Error::EqualPairIndices(i));
    }
    Ok(pair_sign_from_positions(i, j, position(config, i)?, position(config, j)?))
}

/// Ranks `K` that a first-order density matrix of `N` fermions can have.
pub fn is_admissible(n: usize, k: usize) -> bool {
    (n == 1 && k == 1) || (n == 2 && k.is_multiple_of(2) && k >= 2) || (n >= 3 && k >= n && k != n + 1)
}

/// Largest admissible rank strictly below `k`, if any.
pub fn previous_admissible(n: usize, k: usize) -> Option<usize> {
    (n..k).rev().find(|&kk| is_admissible(n, kk))
}

/// Minor determinants `det U[σ, τ]` for every pair of configurations.
pub fn compound_matrix(u: &CMatrix, table: &ConfigTable) -> Result<CMatrix> {
    if u.nrows() != table.k() || u.ncols() != table.k() {
        return Err(Error::ShapeMismatch(format!("expected {0}x{0} matrix, got {1}x{2}", table.k(), u.nrows(), u.ncols())));
    }
    let r = table.len();
    let n = table.n();
    let mut out = CMatrix::zeros(r, r);
    let mut minor = CMatrix::zeros(n, n);
    for (si, s) in table.configs().iter().enumerate() {
        for (ti, t) in table.configs().iter().enumerate() {
            for (a, &p) in s.iter().enumerate() {
                for (b, &q) in t.iter().enumerate() {
                    minor[(a, b)] = u[(p, q)];
                }
            }
            out[(si, ti)] = det(&minor);
        }
    }
    Ok(out)
}

/// Result of transporting coefficients by the compound of an orbital rotation.
#[derive(Clone, Debug)]
pub struct CoeffTransform {
    pub coeffs: CVector,
    /// Frobenius distance of `U*U` from the identity.
    pub unitary_defect: f64,
}

impl CoeffTransform {
    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitary_defect <= tol
    }
}

/// `C' = conj(compound(U)) C`, the coefficient half of the gauge action `Φ' = UΦ`.
pub fn coeff_transform(u: &CMatrix, coeffs: &CVector, table: &ConfigTable) -> Result<CoeffTransform> {
    if coeffs.len() != table.len() {
        return Err(Error::ShapeMismatch(format!("expected {} coefficients, got {}", table.len(), coeffs.len())));
    }
    let compound = compound_matrix(u, table)?;
    Ok(CoeffTransform { coeffs: compound.map(|z| z.conj()) * coeffs, unitary_defect: unitary_defect(u) })
}

/// Configuration-space matrix of the one-body operator `Σ_pq A_pq a†_p a_q`.
///
/// Entry `(σ, τ)` sums `(-1)^{pos_σ(p) + pos_τ(q)} A_pq` over `p ∈ σ`, `q ∈ τ`
/// with `σ \ p = τ \ q`.
pub fn one_body_config_matrix(a: &CMatrix, table: &ConfigTable) -> CMatrix {
    let r = table.len();
    let mut out = CMatrix::zeros(r, r);
    for group in table.hole_groups() {
        for x in group {
            for y in group {
                out[(x.config, y.config)] += a[(x.orbital, y.orbital)] * (x.sign * y.sign);
            }
        }
    }
    out
}

/// `a†_p a_q` applied to a coefficient vector.
pub fn apply_excitation(coeffs: &CVector, table: &ConfigTable, p: usize, q: usize) -> CVector {
    let mut out = CVector::zeros(table.len());
    for group in table.hole_groups() {
        for y in group.iter().filter(|e| e.orbital == q) {
            for x in group.iter().filter(|e| e.orbital == p) {
                out[x.config] += coeffs[y.config] * (x.sign * y.sign);
            }
        }
    }
    out
}

/// Applies `a_q` to bit-string determinant `mask`; returns sign and new mask.
pub fn annihilate(mask: u128, q: usize) -> Option<(f64, u128)> {
    if mask & (1u128 << q) == 0 {
        return None;
    }
    let below = (mask & ((1u128 << q) - 1)).count_ones() as usize;
    Some((parity(below), mask & !(1u128 << q)))
}

/// Applies `a†_p` to bit-string determinant `mask`.
pub fn create(mask: u128, p: usize) -> Option<(f64, u128)> {
    if mask & (1u128 << p) != 0 {
        return None;
    }
    let below = (mask & ((1u128 << p) - 1)).count_ones() as usize;
    Some((parity(below), mask | (1u128 << p)))
}
