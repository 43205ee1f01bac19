//! Exact integer combinatorics: binomials, colex ranking of coupling index
//! tuples, cardinalities of the index sets used by the energy bookkeeping,
//! and the interaction normalization `u_N`.
//!
//! Ranking is colexicographic because the rank of a tuple then depends only
//! on the tuple itself, not on the ambient width: a disorder array indexed by
//! colex rank stays valid when reinterpreted at a smaller width, and the
//! tuples confined to `[1, w-1]` occupy exactly the leading `C(w-1, r)` slots.

use crate::error::{Error, Result};

/// Default cached table bounds; large enough for every desk-scale engine.
pub const DEFAULT_N_MAX: usize = 64;
pub const DEFAULT_P_MAX: usize = 8;

/// Exact binomial coefficient with checked 128-bit arithmetic.
///
/// Returns 0 when `k > n`. Uses the multiplicative form with exact stepwise
/// division, so intermediate values stay within `C(n, k) * n`.
pub fn binom(n: u64, k: u64) -> Result<u128> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc
            .checked_mul((n - k + i) as u128)
            .ok_or(Error::Overflow("binom"))?;
        // exact: C(n-k+i, i) is an integer at every step
        acc /= i as u128;
    }
    Ok(acc)
}

/// Cached Pascal triangle of exact binomials, `n <= n_max`, `k <= k_max`.
#[derive(Debug, Clone)]
pub struct BinomialTable {
    n_max: usize,
    k_max: usize,
    rows: Vec<u128>,
}

impl BinomialTable {
    pub fn new(n_max: usize, k_max: usize) -> Result<Self> {
        let width = k_max + 1;
        let mut rows = vec![0u128; (n_max + 1) * width];
        for n in 0..=n_max {
            rows[n * width] = 1;
            for k in 1..=k_max.min(n) {
                let above = rows[(n - 1) * width + k];
                let left = rows[(n - 1) * width + k - 1];
                rows[n * width + k] = above
                    .checked_add(left)
                    .ok_or(Error::Overflow("binomial table"))?;
            }
        }
        Ok(Self { n_max, k_max, rows })
    }

    pub fn with_defaults() -> Self {
        // Default bounds cannot overflow u128.
        Self::new(DEFAULT_N_MAX, DEFAULT_P_MAX).expect("default binomial table")
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// `C(n, k)`, zero when `k > n`. Panics if outside the table bounds.
    pub fn get(&self, n: usize, k: usize) -> u128 {
        assert!(
            n <= self.n_max && k <= self.k_max,
            "binomial table lookup out of bounds: C({n},{k})"
        );
        if k > n {
            0
        } else {
            self.rows[n * (self.k_max + 1) + k]
        }
    }
}

/// A strictly increasing tuple of `r` indices in `[1, w]`: one element of
/// the coupling index family, ranked colexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndexTuple {
    indices: Vec<u32>,
}

impl IndexTuple {
    pub fn new(indices: Vec<u32>, w: u32) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidParams("empty index tuple".into()));
        }
        if indices[0] < 1 || *indices.last().unwrap() > w {
            return Err(Error::InvalidParams(format!(
                "tuple indices must lie in [1, {w}]: {indices:?}"
            )));
        }
        if !indices.windows(2).all(|ab| ab[0] < ab[1]) {
            return Err(Error::InvalidParams(format!(
                "tuple indices must be strictly increasing: {indices:?}"
            )));
        }
        Ok(Self { indices })
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Bitmask with bit `i-1` set for each 1-based index `i` (w <= 64).
    pub fn mask(&self) -> u64 {
        self.indices.iter().fold(0u64, |m, &i| m | (1u64 << (i - 1)))
    }

    pub fn contains(&self, site: u32) -> bool {
        self.indices.binary_search(&site).is_ok()
    }
}

/// Colex rank of a tuple: `sum_j C(i_j - 1, j)` over 1-based positions `j`.
pub fn rank_colex(tuple: &IndexTuple, table: &BinomialTable) -> u128 {
    tuple
        .indices()
        .iter()
        .enumerate()
        .map(|(j0, &i)| table.get((i - 1) as usize, j0 + 1))
        .sum()
}

/// Inverse of [`rank_colex`]: the tuple of length `r` over `[1, w]` with the
/// given rank. Errors when `rank >= C(w, r)`.
pub fn unrank_colex(rank: u128, r: u32, w: u32, table: &BinomialTable) -> Result<IndexTuple> {
    let total = binom(w as u64, r as u64)?;
    if rank >= total {
        return Err(Error::InvalidParams(format!(
            "colex rank {rank} out of range [0, {total})"
        )));
    }
    let mut rem = rank;
    let mut out = vec![0u32; r as usize];
    let mut hi = w;
    for j in (1..=r).rev() {
        // largest index i with C(i-1, j) <= rem
        let mut i = j; // smallest admissible value at position j
        for cand in (j..=hi).rev() {
            if table.get((cand - 1) as usize, j as usize) <= rem {
                i = cand;
                break;
            }
        }
        rem -= table.get((i - 1) as usize, j as usize);
        out[(j - 1) as usize] = i;
        hi = i - 1;
    }
    debug_assert_eq!(rem, 0);
    IndexTuple::new(out, w)
}

/// Iterator over the masks of all increasing `p`-tuples in `[1, n]`,
/// visited in colex rank order. Allocation-free per step.
pub struct ColexMasks {
    current: Vec<u32>,
    n: u32,
    done: bool,
}

/// All `C(n, p)` coupling masks in colex order (rank 0 first).
pub fn colex_masks(n: u32, p: u32) -> ColexMasks {
    assert!(p >= 1 && p <= n && n <= 64);
    ColexMasks {
        current: (1..=p).collect(),
        n,
        done: false,
    }
}

impl Iterator for ColexMasks {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.done {
            return None;
        }
        let mask = self
            .current
            .iter()
            .fold(0u64, |m, &i| m | (1u64 << (i - 1)));
        // colex successor: bump the lowest position that can move, reset below
        let r = self.current.len();
        let mut j = None;
        for idx in 0..r {
            let limit = if idx + 1 < r {
                self.current[idx + 1] - 1
            } else {
                self.n
            };
            if self.current[idx] < limit {
                j = Some(idx);
                break;
            }
        }
        match j {
            Some(idx) => {
                self.current[idx] += 1;
                for k in 0..idx {
                    self.current[k] = (k + 1) as u32;
                }
            }
            None => self.done = true,
        }
        Some(mask)
    }
}

/// `|A_w^r| = C(w, r)`: number of increasing r-tuples in `[1, w]`.
pub fn card_a(w: u64, r: u64) -> Result<u128> {
    binom(w, r)
}

/// `|Q_{N,k}^p| = C(N,p) - C(N-k,p)`: tuples whose largest index exceeds N-k.
pub fn card_q(n: u64, k: u64, p: u64) -> Result<u128> {
    Ok(binom(n, p)? - binom(n - k, p)?)
}

/// `|Qbar_{N,k}^p| = C(N,p) - C(N-k,p) - k*C(N-k,p-1)`: tuples whose two
/// largest indices both exceed N-k.
pub fn card_q_bar(n: u64, k: u64, p: u64) -> Result<u128> {
    let kc = (k as u128)
        .checked_mul(binom(n - k, p - 1)?)
        .ok_or(Error::Overflow("card_q_bar"))?;
    Ok(card_q(n, k, p)? - kc)
}

/// `|Qtilde_{N,k}^p| = |Q| - |Qbar| = k*C(N-k, p-1)`.
pub fn card_q_tilde(n: u64, k: u64, p: u64) -> Result<u128> {
    Ok(card_q(n, k, p)? - card_q_bar(n, k, p)?)
}

/// Number of r-tuples over `{1..N}^r` with at least one repeated index:
/// `N^r - N(N-1)...(N-r+1)`.
pub fn card_repeated_tuples(n: u64, r: u32) -> Result<u128> {
    let mut power: u128 = 1;
    let mut falling: u128 = 1;
    for j in 0..r as u64 {
        power = power
            .checked_mul(n as u128)
            .ok_or(Error::Overflow("card_repeated_tuples"))?;
        falling = falling
            .checked_mul((n - j) as u128)
            .ok_or(Error::Overflow("card_repeated_tuples"))?;
    }
    Ok(power - falling)
}

/// Interaction normalization `u_N = sqrt(p! / (2 N^{p-1}))`.
pub fn u_n(n: u64, p: u64) -> f64 {
    assert!(p >= 2 && n >= p, "u_N requires 2 <= p <= N");
    let mut fact = 1.0f64;
    for j in 2..=p {
        fact *= j as f64;
    }
    (fact / (2.0 * (n as f64).powi(p as i32 - 1))).sqrt()
}

/// All tuples of `A_N^p` containing `site`, exactly `C(N-1, p-1)` of them.
pub fn couplings_containing(
    site: u32,
    n: u32,
    p: u32,
) -> impl Iterator<Item = IndexTuple> {
    assert!((1..=n).contains(&site));
    // enumerate (p-1)-subsets of [1, n-1], then splice `site` back in
    let inner: Box<dyn Iterator<Item = Vec<u32>>> = if p == 1 {
        Box::new(std::iter::once(Vec::new()))
    } else {
        Box::new(subsets_increasing(n - 1, p - 1))
    };
    inner.map(move |reduced| {
        let mut idx: Vec<u32> = reduced
            .into_iter()
            .map(|j| if j < site { j } else { j + 1 })
            .collect();
        let pos = idx.partition_point(|&x| x < site);
        idx.insert(pos, site);
        IndexTuple::new(idx, n).expect("valid by construction")
    })
}

/// Increasing r-tuples over `[1, w]` in colex order, as vectors.
fn subsets_increasing(w: u32, r: u32) -> impl Iterator<Item = Vec<u32>> {
    let mut current: Option<Vec<u32>> = if r <= w {
        Some((1..=r).collect())
    } else {
        None
    };
    std::iter::from_fn(move || {
        let cur = current.clone()?;
        // advance (same successor rule as ColexMasks)
        let rr = cur.len();
        let mut next = cur.clone();
        let mut bumped = false;
        for idx in 0..rr {
            let limit = if idx + 1 < rr { next[idx + 1] - 1 } else { w };
            if next[idx] < limit {
                next[idx] += 1;
                for k in 0..idx {
                    next[k] = (k + 1) as u32;
                }
                bumped = true;
                break;
            }
        }
        current = if bumped { Some(next) } else { None };
        Some(cur)
    })
}
