//! Construction and verification of separated and spanning sets.
//!
//! A set is `(n, eps)`-separated when every pair of distinct members is moved
//! at least `eps` apart at some step of the mode window (`>= eps`, Bowen
//! steps `0..n-1`, Misiurewicz steps `1..=n`); a set is `(n, eps)`-spanning
//! when every point of the space stays strictly within `eps` of some member
//! at every step of the window. Separation uses `>=` and spanning uses `<`,
//! which keeps the counting inequalities between the two clean.
//!
//! Greedy construction is maximal, not maximum: exact maximum search is
//! exponential, so the exact oracles here ([`exact_max_separated`],
//! [`exact_min_spanning`], [`separated_count_exact_symbolic`]) bound the
//! greedy gap on small instances and on full shifts.

use crate::error::{NadsError, Result};
use crate::nads::{Mode, OrbitCache};
use crate::space::PointId;

/// A maximal separated set with the parameters it was built for.
#[derive(Debug, Clone)]
pub struct SeparatedSet {
    pub members: Vec<PointId>,
    pub n: usize,
    pub eps: f64,
    pub mode: Mode,
    /// Label of the potential whose n-step sums ordered the greedy scan.
    pub weight_label: Option<String>,
}

impl SeparatedSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Candidate ordering for the greedy scan: decreasing weight when given
/// (so the partition sum lower-bounds the sup over separated sets),
/// ascending point index otherwise; ties break on the index.
fn candidate_order(npts: usize, weight: Option<&[f64]>) -> Vec<u32> {
    let mut order: Vec<u32> = (0..npts as u32).collect();
    if let Some(w) = weight {
        order.sort_by(|&a, &b| {
            w[b as usize]
                .partial_cmp(&w[a as usize])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
    }
    order
}

/// Core greedy: scan candidates in order, keep a point when it is separated
/// from everything kept so far. The result is maximal by construction.
pub(crate) fn greedy_separated(
    cache: &OrbitCache,
    n: usize,
    eps: f64,
    mode: Mode,
    order: &[u32],
) -> Vec<PointId> {
    let npts = cache.space().len();
    let mut alive = vec![true; npts];
    let mut members = Vec::new();
    for &cand in order {
        let c = cand as PointId;
        if !alive[c] {
            continue;
        }
        members.push(c);
        for x in 0..npts {
            if alive[x] && !cache.separated(x, c, n, eps, mode) {
                alive[x] = false;
            }
        }
    }
    members
}

/// Greedy maximal `(n, eps)`-separated set. With a weight potential the scan
/// visits points in decreasing order of the mode-appropriate n-step sum, so
/// the induced partition sum lower-bounds the sup over all separated sets;
/// the first member is always the global argmax of the sums. Returns a
/// singleton when `eps` exceeds the n-step diameter.
pub fn max_separated_set(
    cache: &OrbitCache,
    n: usize,
    eps: f64,
    mode: Mode,
    weight: Option<(&str, &[f64])>,
) -> Result<SeparatedSet> {
    check_n_eps(n, eps)?;
    let sums;
    let (weight_label, order) = match weight {
        Some((label, phi)) => {
            sums = cache.sum_table(phi, n, mode).pop().expect("n >= 1");
            (
                Some(label.to_string()),
                candidate_order(cache.space().len(), Some(&sums)),
            )
        }
        None => (None, candidate_order(cache.space().len(), None)),
    };
    let members = greedy_separated(cache, n, eps, mode, &order);
    Ok(SeparatedSet {
        members,
        n,
        eps,
        mode,
        weight_label,
    })
}

/// Greedy `(n, eps)`-spanning set: the smaller of a farthest-point cover and
/// a maximal separated set (which always spans). Taking the smaller keeps the
/// counting sandwich `|spanning(eps)| <= |separated(eps)| <= |spanning(eps/2)|`
/// valid by construction rather than by luck of the two greedy orders.
pub fn min_spanning_set(
    cache: &OrbitCache,
    n: usize,
    eps: f64,
    mode: Mode,
) -> Result<Vec<PointId>> {
    let farthest = farthest_point_cover(cache, n, eps, mode)?;
    let separated = max_separated_set(cache, n, eps, mode, None)?.members;
    Ok(if farthest.len() <= separated.len() {
        farthest
    } else {
        separated
    })
}

/// Farthest-point traversal in the n-step metric: starts at point 0,
/// repeatedly adds the point farthest from the chosen centers until
/// everything is strictly within `eps` at every window step.
fn farthest_point_cover(
    cache: &OrbitCache,
    n: usize,
    eps: f64,
    mode: Mode,
) -> Result<Vec<PointId>> {
    check_n_eps(n, eps)?;
    let npts = cache.space().len();
    let n_dist = |x: PointId, y: PointId| -> f64 {
        let mut m = 0.0f64;
        for i in mode.window(n) {
            m = m.max(cache.space().dist(cache.image(i, x), cache.image(i, y)));
        }
        m
    };
    let mut centers = vec![0];
    let mut min_dist: Vec<f64> = (0..npts).map(|p| n_dist(p, 0)).collect();
    loop {
        let mut far = 0;
        let mut far_d = 0.0;
        for p in 0..npts {
            if min_dist[p] > far_d {
                far_d = min_dist[p];
                far = p;
            }
        }
        if far_d < eps {
            break;
        }
        centers.push(far);
        for p in 0..npts {
            let d = n_dist(p, far);
            if d < min_dist[p] {
                min_dist[p] = d;
            }
        }
    }
    Ok(centers)
}

/// Exact maximal `(n, 2^-k)`-separated cardinality on the full shift over
/// `m` symbols: `m^(n+k)` by cylinder counting. Rejects depths below
/// `n + k`, where truncation would corrupt the count.
pub fn separated_count_exact_symbolic(m: usize, n: usize, k: usize, depth: usize) -> Result<u64> {
    if m < 2 || n < 1 {
        return Err(NadsError::InvalidArgument(
            "symbolic count needs m >= 2 and n >= 1".into(),
        ));
    }
    if depth < n + k {
        return Err(NadsError::InvalidArgument(format!(
            "depth {depth} < n + k = {} truncates the cylinder count",
            n + k
        )));
    }
    (m as u64)
        .checked_pow((n + k) as u32)
        .ok_or_else(|| NadsError::InvalidArgument("cylinder count overflows u64".into()))
}

fn check_n_eps(n: usize, eps: f64) -> Result<()> {
    if n < 1 {
        return Err(NadsError::InvalidArgument("separated sets need n >= 1".into()));
    }
    if !(eps > 0.0) {
        return Err(NadsError::InvalidArgument(format!(
            "separated sets need eps > 0, got {eps}"
        )));
    }
    Ok(())
}

/// Independent pairwise verification of the separation invariant.
pub fn verify_separated(cache: &OrbitCache, set: &SeparatedSet) -> bool {
    for (a, &x) in set.members.iter().enumerate() {
        for &y in &set.members[a + 1..] {
            if !cache.separated(x, y, set.n, set.eps, set.mode) {
                return false;
            }
        }
    }
    true
}

/// Exhaustive check that every point of the space is strictly within `eps`
/// of some member at every step of the mode window.
pub fn verify_spanning(
    cache: &OrbitCache,
    members: &[PointId],
    n: usize,
    eps: f64,
    mode: Mode,
) -> bool {
    let npts = cache.space().len();
    'points: for p in 0..npts {
        for &c in members {
            if !cache.separated(p, c, n, eps, mode) {
                continue 'points;
            }
        }
        return false;
    }
    true
}

/// Exhaustive maximum-separated-set search (exact maximum independent set on
/// the conflict graph). Reference oracle; exponential, limited to 64 points.
pub fn exact_max_separated(cache: &OrbitCache, n: usize, eps: f64, mode: Mode) -> usize {
    let npts = cache.space().len();
    assert!(npts <= 64, "exhaustive search is limited to 64 points");
    // adj[x] = bitmask of points NOT separated from x (conflicts), x excluded
    let mut adj = vec![0u64; npts];
    for x in 0..npts {
        for y in 0..npts {
            if x != y && !cache.separated(x, y, n, eps, mode) {
                adj[x] |= 1u64 << y;
            }
        }
    }
    let full = if npts == 64 {
        u64::MAX
    } else {
        (1u64 << npts) - 1
    };
    mis_size(&adj, full)
}

fn mis_size(adj: &[u64], mask: u64) -> usize {
    if mask == 0 {
        return 0;
    }
    // take degree-0 and degree-1 vertices greedily (always optimal), and
    // branch on a maximum-degree vertex otherwise
    let mut m = mask;
    let mut best_v = usize::MAX;
    let mut best_deg = 0u32;
    while m != 0 {
        let v = m.trailing_zeros() as usize;
        m &= m - 1;
        let deg = (adj[v] & mask).count_ones();
        if deg == 0 {
            return 1 + mis_size(adj, mask & !(1u64 << v));
        }
        if deg == 1 {
            let nb = (adj[v] & mask).trailing_zeros() as usize;
            return 1 + mis_size(adj, mask & !(1u64 << v) & !(1u64 << nb) & !adj[v]);
        }
        if deg >= best_deg {
            best_deg = deg;
            best_v = v;
        }
    }
    let v = best_v;
    let without = mis_size(adj, mask & !(1u64 << v));
    let with = 1 + mis_size(adj, mask & !(1u64 << v) & !adj[v]);
    with.max(without)
}

/// Exhaustive minimum spanning-set search (exact set cover). Reference
/// oracle; exponential, limited to 64 points.
pub fn exact_min_spanning(cache: &OrbitCache, n: usize, eps: f64, mode: Mode) -> usize {
    let npts = cache.space().len();
    assert!(npts <= 64, "exhaustive search is limited to 64 points");
    // covers[c] = bitmask of points covered by center c (within eps at all steps)
    let mut covers = vec![0u64; npts];
    for c in 0..npts {
        for p in 0..npts {
            if !cache.separated(p, c, n, eps, mode) {
                covers[c] |= 1u64 << p;
            }
        }
    }
    let full = if npts == 64 {
        u64::MAX
    } else {
        (1u64 << npts) - 1
    };
    let mut best = npts;
    cover_search(&covers, full, 0, &mut best);
    best
}

fn cover_search(covers: &[u64], uncovered: u64, used: usize, best: &mut usize) {
    if uncovered == 0 {
        *best = (*best).min(used);
        return;
    }
    if used + 1 >= *best {
        return;
    }
    // branch on the uncovered point with the fewest candidate centers
    let mut pick = u64::MAX;
    let mut pick_count = usize::MAX;
    let mut m = uncovered;
    while m != 0 {
        let p = m.trailing_zeros() as usize;
        m &= m - 1;
        let count = covers.iter().filter(|&&c| c & (1 << p) != 0).count();
        if count < pick_count {
            pick_count = count;
            pick = p as u64;
        }
    }
    for (c, &cov) in covers.iter().enumerate() {
        let _ = c;
        if cov & (1 << pick) != 0 {
            cover_search(covers, uncovered & !cov, used + 1, best);
        }
    }
}
