//! Downward-closed multi-index sets: full tensor grids, total degree and
//! hyperbolic crosses.
//!
//! Indices are stored flat, `dim` entries per multi-index, in ascending
//! lexicographic order. Coefficient vectors elsewhere in the crate are aligned
//! to this order.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default ceiling on the number of multi-indices a set may hold.
pub const DEFAULT_MAX_INDICES: u64 = 20_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum IndexKind {
    /// `k_l <= K_l` for every coordinate.
    Full { k: Vec<u32> },
    /// `sum_l k_l <= deg`.
    Total { deg: u32 },
    /// `prod_l max(k_l, 1) <= deg`, `deg >= 1`.
    Hyperbolic { deg: u32 },
}

impl IndexKind {
    pub fn name(&self) -> &'static str {
        match self {
            IndexKind::Full { .. } => "full",
            IndexKind::Total { .. } => "total",
            IndexKind::Hyperbolic { .. } => "hyperbolic",
        }
    }

    /// Degree parameter as printed in reports; for full grids the largest `K_l`.
    pub fn degree(&self) -> u32 {
        match self {
            IndexKind::Full { k } => k.iter().copied().max().unwrap_or(0),
            IndexKind::Total { deg } | IndexKind::Hyperbolic { deg } => *deg,
        }
    }
}

impl fmt::Display for IndexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexKind::Full { k } => write!(f, "full{k:?}"),
            IndexKind::Total { deg } => write!(f, "total({deg})"),
            IndexKind::Hyperbolic { deg } => write!(f, "hyperbolic({deg})"),
        }
    }
}

/// Finite downward-closed subset of `N^d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiIndexSet {
    dim: usize,
    kind: IndexKind,
    flat: Vec<u32>,
}

impl MultiIndexSet {
    pub fn build(dim: usize, kind: IndexKind) -> Result<Self> {
        Self::build_with_limit(dim, kind, DEFAULT_MAX_INDICES)
    }

    pub fn build_with_limit(dim: usize, kind: IndexKind, max_indices: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("multi-index dimension must be at least 1".into()));
        }
        let size = match &kind {
            IndexKind::Full { k } => {
                if k.len() != dim {
                    return Err(Error::Contract(format!(
                        "full grid needs {dim} bounds, got {}",
                        k.len()
                    )));
                }
                k.iter().try_fold(1u64, |acc, &kl| {
                    acc.checked_mul(u64::from(kl) + 1).ok_or(Error::Capacity {
                        what: "full index set",
                        requested: u128::MAX,
                        limit: u128::from(max_indices),
                    })
                })?
            }
            IndexKind::Total { deg } => cardinality_total(dim, *deg)?,
            IndexKind::Hyperbolic { deg } => cardinality_hyperbolic(dim, *deg)?,
        };
        if size > max_indices {
            return Err(Error::Capacity {
                what: "index set",
                requested: u128::from(size),
                limit: u128::from(max_indices),
            });
        }
        let mut flat = Vec::with_capacity(size as usize * dim);
        let mut current = vec![0u32; dim];
        enumerate(&kind, 0, &mut current, Budget::initial(&kind), &mut flat);
        debug_assert_eq!(flat.len(), size as usize * dim);
        Ok(Self { dim, kind, flat })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &IndexKind {
        &self.kind
    }

    pub fn len(&self) -> usize {
        self.flat.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }

    pub fn get(&self, n: usize) -> &[u32] {
        &self.flat[n * self.dim..(n + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        self.flat.chunks_exact(self.dim)
    }

    /// Position of `k` in the set order, if present.
    pub fn position(&self, k: &[u32]) -> Option<usize> {
        if k.len() != self.dim {
            return None;
        }
        let (mut lo, mut hi) = (0, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.get(mid).cmp(k) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    pub fn contains(&self, k: &[u32]) -> bool {
        self.position(k).is_some()
    }

    /// Largest index used in each coordinate.
    pub fn max_per_coord(&self) -> Vec<u32> {
        let mut out = vec![0; self.dim];
        for k in self.iter() {
            for (m, &kl) in out.iter_mut().zip(k) {
                *m = (*m).max(kl);
            }
        }
        out
    }

    /// Checks every single-coordinate decrement of every member is a member.
    pub fn is_downward_closed(&self) -> bool {
        let mut probe = vec![0u32; self.dim];
        self.iter().all(|k| {
            (0..self.dim).all(|l| {
                if k[l] == 0 {
                    return true;
                }
                probe.copy_from_slice(k);
                probe[l] -= 1;
                self.contains(&probe)
            })
        })
    }
}

#[derive(Clone, Copy)]
enum Budget {
    None,
    Sum(u32),
    Product(u32),
}

impl Budget {
    fn initial(kind: &IndexKind) -> Self {
        match kind {
            IndexKind::Full { .. } => Budget::None,
            IndexKind::Total { deg } => Budget::Sum(*deg),
            IndexKind::Hyperbolic { deg } => Budget::Product(*deg),
        }
    }
}

fn enumerate(kind: &IndexKind, l: usize, current: &mut [u32], budget: Budget, out: &mut Vec<u32>) {
    let dim = current.len();
    if l == dim {
        out.extend_from_slice(current);
        return;
    }
    let upper = match (kind, budget) {
        (IndexKind::Full { k }, _) => k[l],
        (_, Budget::Sum(left)) => left,
        (_, Budget::Product(left)) => left,
        (_, Budget::None) => unreachable!(),
    };
    for v in 0..=upper {
        let next = match budget {
            Budget::None => Budget::None,
            Budget::Sum(left) => Budget::Sum(left - v),
            Budget::Product(left) => Budget::Product(left / v.max(1)),
        };
        current[l] = v;
        enumerate(kind, l + 1, current, next, out);
    }
    current[l] = 0;
}

fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=u128::from(k) {
        // acc * (n - k + i) is divisible by i at every step.
        acc = acc.checked_mul(u128::from(n - k) + i)? / i;
    }
    Some(acc)
}

fn to_u64(v: u128, what: &'static str) -> Result<u64> {
    u64::try_from(v).map_err(|_| Error::Capacity {
        what,
        requested: v,
        limit: u128::from(u64::MAX),
    })
}

fn overflow(what: &'static str) -> Error {
    Error::Capacity {
        what,
        requested: u128::MAX,
        limit: u128::from(u64::MAX),
    }
}

/// `#{k in N^d : sum k_l <= deg} = C(deg + d, d)`.
pub fn cardinality_total(dim: usize, deg: u32) -> Result<u64> {
    if dim == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    let v = binomial(u64::from(deg) + dim as u64, dim as u64).ok_or(overflow("total degree set"))?;
    to_u64(v, "total degree set")
}

/// Prime factorisation exponents by trial division.
fn prime_exponents(mut g: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut p = 2u32;
    while u64::from(p) * u64::from(p) <= u64::from(g) {
        let mut v = 0;
        while g % p == 0 {
            g /= p;
            v += 1;
        }
        if v > 0 {
            out.push(v);
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if g > 1 {
        out.push(1);
    }
    out
}

/// Number of multi-indices with all `e` entries non-zero and product `<= deg`:
/// one for the all-ones index plus, for every `g` in `2..=deg`, the number of
/// ordered ways to write `g` as a product of exactly `e` positive factors.
fn count_all_nonzero(e: usize, deg: u32, exps: &[Vec<u32>]) -> Option<u128> {
    if deg == 0 {
        return Some(0);
    }
    let mut total: u128 = 1;
    for g in 2..=deg {
        let mut ways: u128 = 1;
        for &v in &exps[g as usize] {
            let c = binomial(u64::from(v) + e as u64 - 1, e as u64 - 1)?;
            ways = ways.checked_mul(c)?;
        }
        total = total.checked_add(ways)?;
    }
    Some(total)
}

/// `#{k in N^d : prod max(k_l, 1) <= deg}` via the prime-factorisation count.
pub fn cardinality_hyperbolic(dim: usize, deg: u32) -> Result<u64> {
    if dim == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    if deg == 0 {
        return Err(Error::Domain("hyperbolic cross needs deg >= 1".into()));
    }
    let exps: Vec<Vec<u32>> = (0..=deg)
        .map(|g| if g < 2 { Vec::new() } else { prime_exponents(g) })
        .collect();
    let what = "hyperbolic cross";
    // Indices without zeros, then those with exactly c zeros (0 < c < d), then 0.
    let mut total = count_all_nonzero(dim, deg, &exps).ok_or(overflow(what))?;
    for c in 1..dim {
        let inner = count_all_nonzero(dim - c, deg, &exps).ok_or(overflow(what))?;
        let choose = binomial(dim as u64, c as u64).ok_or(overflow(what))?;
        total = choose
            .checked_mul(inner)
            .and_then(|t| t.checked_add(total))
            .ok_or(overflow(what))?;
    }
    to_u64(total + 1, what)
}
