//! Map sequences, composition orbits, sequence metrics and orbit sums.
//!
//! A nonautonomous system is a sequence of self-maps `f_1, f_2, ...` of one
//! sampled space; time-`n` evolution is the composition
//! `F_n = f_n ∘ ... ∘ f_1`, with `F_0` the identity. Two orbit-sum variants
//! coexist:
//!
//! * the Birkhoff sum `S_n φ(x) = φ(F_0 x) + ... + φ(F_{n-1} x)` (n terms,
//!   starting at `φ(x)`), and
//! * the shifted sum `φ_n(x) = φ(F_1 x) + ... + φ(F_n x)` (n terms, starting
//!   at `φ(f_1 x)`),
//!
//! which differ exactly by `φ(x) - φ(F_n x)`. The sequence metric
//! `d_n(x, y) = max_{0 <= i <= n-1} d(F_i x, F_i y)` includes the `i = 0`
//! term, so `d_1` is the base metric and `d_n` is nondecreasing in `n`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{NadsError, Result};
use crate::space::{PointId, SampledSpace};

/// Which orbit-sum and which separation window a computation uses.
///
/// `Bowen` sums start at the base point and separation looks at steps
/// `0..n-1`; `Misiurewicz` sums start after the first map and separation
/// looks at steps `1..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    #[serde(rename = "top")]
    Bowen,
    #[serde(rename = "mis")]
    Misiurewicz,
}

impl Mode {
    /// Short tag used in CSV/JSON artifacts.
    pub fn tag(self) -> &'static str {
        match self {
            Mode::Bowen => "top",
            Mode::Misiurewicz => "mis",
        }
    }

    /// Composition steps inspected for horizon `n`: `0..n` for Bowen,
    /// `1..=n` for Misiurewicz.
    pub fn window(self, n: usize) -> std::ops::Range<usize> {
        match self {
            Mode::Bowen => 0..n,
            Mode::Misiurewicz => 1..n + 1,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

type Rule = dyn Fn(usize, PointId) -> PointId + Send + Sync;

/// The system `f_{1,∞}`: a rule `(step n >= 1, point) -> point` on a fixed
/// space, with an optional declared period. Rules must be pure; orbits are
/// then reproducible and cacheable.
pub struct MapSequence {
    label: String,
    space: Arc<SampledSpace>,
    rule: Box<Rule>,
    period: Option<usize>,
}

impl fmt::Debug for MapSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MapSequence")
            .field("label", &self.label)
            .field("period", &self.period)
            .finish()
    }
}

impl MapSequence {
    pub fn new(
        label: impl Into<String>,
        space: Arc<SampledSpace>,
        rule: impl Fn(usize, PointId) -> PointId + Send + Sync + 'static,
        period: Option<usize>,
    ) -> Self {
        MapSequence {
            label: label.into(),
            space,
            rule: Box::new(rule),
            period,
        }
    }

    /// Constant sequence `f_n = f` for all `n` (period 1).
    pub fn autonomous(
        label: impl Into<String>,
        space: Arc<SampledSpace>,
        map: impl Fn(PointId) -> PointId + Send + Sync + 'static,
    ) -> Self {
        Self::new(label, space, move |_, p| map(p), Some(1))
    }

    /// Cycles through the given step maps: `f_n = maps[(n-1) mod maps.len()]`.
    pub fn periodic(
        label: impl Into<String>,
        space: Arc<SampledSpace>,
        maps: Vec<Box<dyn Fn(PointId) -> PointId + Send + Sync>>,
    ) -> Self {
        assert!(!maps.is_empty(), "periodic sequence needs at least one map");
        let p = maps.len();
        Self::new(
            label,
            space,
            move |n, x| (maps[(n - 1) % p])(x),
            Some(p),
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn space(&self) -> &Arc<SampledSpace> {
        &self.space
    }

    pub fn period(&self) -> Option<usize> {
        self.period
    }

    /// Applies `f_n` (`n >= 1`). Panics if the rule escapes the space, which
    /// would break the self-map closure invariant.
    pub fn step(&self, n: usize, p: PointId) -> PointId {
        debug_assert!(n >= 1, "step index starts at 1");
        let q = (self.rule)(n, p);
        assert!(
            q < self.space.len(),
            "rule({n}, {p}) = {q} escapes the space of {} points",
            self.space.len()
        );
        q
    }
}

/// The forward orbit `[F_0(x), F_1(x), ..., F_n(x)]` of one base point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitTable {
    pub base_point: PointId,
    pub entries: Vec<PointId>,
}

impl OrbitTable {
    pub fn horizon(&self) -> usize {
        self.entries.len() - 1
    }
}

/// Computes the composition orbit of `x` out to horizon `n` (inclusive).
pub fn composition_orbit(seq: &MapSequence, x: PointId, n: usize) -> Result<OrbitTable> {
    if x >= seq.space().len() {
        return Err(NadsError::InvalidArgument(format!(
            "point {x} is not in the space of {} points",
            seq.space().len()
        )));
    }
    let mut entries = Vec::with_capacity(n + 1);
    entries.push(x);
    let mut cur = x;
    for i in 1..=n {
        cur = seq.step(i, cur);
        entries.push(cur);
    }
    Ok(OrbitTable {
        base_point: x,
        entries,
    })
}

/// `d_n(x, y) = max_{0 <= i <= n-1} d(F_i x, F_i y)`; `d_1` is the base metric.
pub fn bowen_metric(seq: &MapSequence, x: PointId, y: PointId, n: usize) -> Result<f64> {
    if n < 1 {
        return Err(NadsError::InvalidArgument("bowen_metric needs n >= 1".into()));
    }
    let ox = composition_orbit(seq, x, n - 1)?;
    let oy = composition_orbit(seq, y, n - 1)?;
    let space = seq.space();
    let mut m = 0.0f64;
    for i in 0..n {
        m = m.max(space.dist(ox.entries[i], oy.entries[i]));
    }
    Ok(m)
}

/// Birkhoff sum over `n` terms starting at `φ(x)`.
pub fn birkhoff_sum(seq: &MapSequence, phi: &[f64], x: PointId, n: usize) -> Result<f64> {
    orbit_sum(seq, phi, x, n, Mode::Bowen)
}

/// Shifted orbit sum over `n` terms starting at `φ(f_1 x)`.
pub fn misiurewicz_sum(seq: &MapSequence, phi: &[f64], x: PointId, n: usize) -> Result<f64> {
    orbit_sum(seq, phi, x, n, Mode::Misiurewicz)
}

fn orbit_sum(seq: &MapSequence, phi: &[f64], x: PointId, n: usize, mode: Mode) -> Result<f64> {
    if n < 1 {
        return Err(NadsError::InvalidArgument("orbit sums need n >= 1".into()));
    }
    if phi.len() != seq.space().len() {
        return Err(NadsError::InvalidArgument(
            "potential is not total on the space".into(),
        ));
    }
    let horizon = match mode {
        Mode::Bowen => n - 1,
        Mode::Misiurewicz => n,
    };
    let orbit = composition_orbit(seq, x, horizon)?;
    Ok(mode.window(n).map(|i| phi[orbit.entries[i]]).sum())
}

/// Precomputed orbits of every point out to a fixed horizon.
///
/// `step_row(i)[x] = F_i(x)`; row 0 is the identity. Separated-set search
/// reduces to O(1) distance lookups per step after this O(|X| * horizon)
/// precomputation. Immutable once built.
pub struct OrbitCache {
    space: Arc<SampledSpace>,
    horizon: usize,
    rows: Vec<Vec<u32>>,
}

impl OrbitCache {
    pub fn new(seq: &MapSequence, horizon: usize) -> Self {
        let space = seq.space().clone();
        let n = space.len();
        let mut rows = Vec::with_capacity(horizon + 1);
        rows.push((0..n as u32).collect::<Vec<u32>>());
        for i in 1..=horizon {
            let prev = &rows[i - 1];
            let mut row = Vec::with_capacity(n);
            for x in 0..n {
                row.push(seq.step(i, prev[x] as PointId) as u32);
            }
            rows.push(row);
        }
        OrbitCache {
            space,
            horizon,
            rows,
        }
    }

    pub fn space(&self) -> &Arc<SampledSpace> {
        &self.space
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// `F_i(x)` for `0 <= i <= horizon`.
    #[inline]
    pub fn image(&self, i: usize, x: PointId) -> PointId {
        self.rows[i][x] as PointId
    }

    /// `d_n` from cached orbits.
    pub fn bowen_dist(&self, x: PointId, y: PointId, n: usize) -> f64 {
        let mut m = 0.0f64;
        for i in 0..n {
            let row = &self.rows[i];
            m = m.max(self.space.dist(row[x] as PointId, row[y] as PointId));
        }
        m
    }

    /// Whether `x`, `y` are separated at scale `eps` for the given mode:
    /// some step in the mode window moves them at least `eps` apart.
    #[inline]
    pub fn separated(&self, x: PointId, y: PointId, n: usize, eps: f64, mode: Mode) -> bool {
        for i in mode.window(n) {
            let row = &self.rows[i];
            if self.space.dist(row[x] as PointId, row[y] as PointId) >= eps {
                return true;
            }
        }
        false
    }

    /// Orbit sums of every point for each horizon `1..=n_max`;
    /// `table[n-1][x]` is the mode sum of `x` at horizon `n`.
    pub fn sum_table(&self, phi: &[f64], n_max: usize, mode: Mode) -> Vec<Vec<f64>> {
        assert!(phi.len() == self.space.len(), "potential not total on space");
        assert!(
            n_max <= self.horizon + if mode == Mode::Bowen { 1 } else { 0 },
            "horizon {} too short for n_max {} in mode {}",
            self.horizon,
            n_max,
            mode
        );
        let npts = self.space.len();
        let mut table: Vec<Vec<f64>> = Vec::with_capacity(n_max);
        let mut current = vec![0.0f64; npts];
        for n in 1..=n_max {
            let i = match mode {
                Mode::Bowen => n - 1,
                Mode::Misiurewicz => n,
            };
            let row = &self.rows[i];
            for x in 0..npts {
                current[x] += phi[row[x] as usize];
            }
            table.push(current.clone());
        }
        table
    }
}
