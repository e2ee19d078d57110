//! Finite computational models of compact metric spaces.
//!
//! Every supremum in the entropy and pressure definitions is taken over a
//! finite sample of the space, so each quantity computed downstream is the
//! exact value of the corresponding finite-`n` functional on the sampled
//! space. Built-in models:
//!
//! * `interval` — uniform grid on `[0, 1]` with `|x - y|`,
//! * `circle` — uniform grid on `[0, 1)` with arc distance,
//! * `symbolic` — all words of length `D` over `m` symbols with the
//!   first-difference metric `d(x, y) = 2^(-j)`, `j` the smallest (0-based)
//!   index where the words differ,
//! * `custom` — explicit point labels plus a metric matrix loaded from JSON.

use std::fmt;

use serde::Deserialize;

use crate::error::{NadsError, Result};

/// Index of a sampled point; stable for the life of the space.
pub type PointId = usize;

/// Default cap on the number of sampled points (`NADS_THERMO_POINT_BUDGET`).
pub const DEFAULT_POINT_BUDGET: usize = 65_536;

/// Reads the point budget from the environment, falling back to
/// [`DEFAULT_POINT_BUDGET`] when unset or unparsable.
pub fn point_budget() -> usize {
    std::env::var("NADS_THERMO_POINT_BUDGET")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_POINT_BUDGET)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    Interval,
    Circle,
    Symbolic,
    Custom,
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SpaceKind::Interval => "interval",
            SpaceKind::Circle => "circle",
            SpaceKind::Symbolic => "symbolic",
            SpaceKind::Custom => "custom",
        };
        f.write_str(s)
    }
}

/// Parameters of the symbolic (full-shift cylinder) model: words of length
/// `depth` over an alphabet of size `alphabet`, one point per word.
#[derive(Debug, Clone, Copy)]
pub struct SymbolicParams {
    pub alphabet: usize,
    pub depth: usize,
}

enum Model {
    /// Uniform grid on [0,1]; `mesh = 1/(n-1)`.
    Interval { grid: Vec<f64> },
    /// Uniform grid on [0,1); arc distance; `mesh = 1/n`.
    Circle { grid: Vec<f64> },
    /// Words in lexicographic order; `words[p]` has length `depth`.
    Symbolic {
        params: SymbolicParams,
        words: Vec<Vec<u8>>,
        /// Radix encoding of each word into [0,1), used by coordinate potentials.
        encodings: Vec<f64>,
    },
    Custom {
        labels: Vec<String>,
        matrix: Vec<Vec<f64>>,
    },
}

/// A finite model of a compact metric space. Immutable after construction;
/// safe to share across threads behind an `Arc`.
pub struct SampledSpace {
    kind: SpaceKind,
    model: Model,
    diameter: f64,
}

impl fmt::Debug for SampledSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SampledSpace")
            .field("kind", &self.kind)
            .field("len", &self.len())
            .field("diameter", &self.diameter)
            .finish()
    }
}

#[derive(Deserialize)]
struct CustomSpaceDoc {
    points: Vec<serde_json::Value>,
    metric: Vec<Vec<f64>>,
}

impl SampledSpace {
    /// Uniform grid of `n >= 2` points on the interval `[0, 1]`.
    pub fn interval(n: usize) -> Result<Self> {
        Self::interval_with_budget(n, point_budget())
    }

    pub fn interval_with_budget(n: usize, budget: usize) -> Result<Self> {
        check_size(n, budget)?;
        let grid = (0..n).map(|k| k as f64 / (n - 1) as f64).collect();
        Ok(SampledSpace {
            kind: SpaceKind::Interval,
            model: Model::Interval { grid },
            diameter: 1.0,
        })
    }

    /// Uniform grid of `n >= 2` points on the circle `[0, 1)` with arc distance.
    pub fn circle(n: usize) -> Result<Self> {
        Self::circle_with_budget(n, point_budget())
    }

    pub fn circle_with_budget(n: usize, budget: usize) -> Result<Self> {
        check_size(n, budget)?;
        let grid = (0..n).map(|k| k as f64 / n as f64).collect();
        Ok(SampledSpace {
            kind: SpaceKind::Circle,
            model: Model::Circle { grid },
            diameter: 0.5,
        })
    }

    /// All `m^D` words of length `D` over `m` symbols, lexicographic order.
    pub fn symbolic(alphabet: usize, depth: usize) -> Result<Self> {
        Self::symbolic_with_budget(alphabet, depth, point_budget())
    }

    pub fn symbolic_with_budget(alphabet: usize, depth: usize, budget: usize) -> Result<Self> {
        if alphabet < 2 {
            return Err(NadsError::InvalidSpace(format!(
                "symbolic alphabet must have m >= 2 symbols, got {alphabet}"
            )));
        }
        if depth < 1 {
            return Err(NadsError::InvalidSpace("symbolic depth must be >= 1".into()));
        }
        let count = (alphabet as u128).checked_pow(depth as u32).ok_or_else(|| {
            NadsError::InvalidSpace(format!("symbolic space m={alphabet} D={depth} overflows"))
        })?;
        if count > budget as u128 {
            return Err(NadsError::PointBudget {
                requested: count as usize,
                budget,
            });
        }
        let count = count as usize;
        let mut words = Vec::with_capacity(count);
        let mut encodings = Vec::with_capacity(count);
        for idx in 0..count {
            let mut w = vec![0u8; depth];
            let mut rem = idx;
            for pos in (0..depth).rev() {
                w[pos] = (rem % alphabet) as u8;
                rem /= alphabet;
            }
            let mut enc = 0.0;
            let mut scale = 1.0 / alphabet as f64;
            for &s in &w {
                enc += s as f64 * scale;
                scale /= alphabet as f64;
            }
            words.push(w);
            encodings.push(enc);
        }
        Ok(SampledSpace {
            kind: SpaceKind::Symbolic,
            model: Model::Symbolic {
                params: SymbolicParams { alphabet, depth },
                words,
                encodings,
            },
            diameter: 1.0,
        })
    }

    /// Custom space from explicit labels and a symmetric, row-major metric
    /// matrix. The triangle inequality is validated on every triple up to 512
    /// points and on 1000 deterministic pseudo-random triples beyond that.
    pub fn custom(labels: Vec<String>, matrix: Vec<Vec<f64>>) -> Result<Self> {
        Self::custom_with_budget(labels, matrix, point_budget())
    }

    pub fn custom_with_budget(
        labels: Vec<String>,
        matrix: Vec<Vec<f64>>,
        budget: usize,
    ) -> Result<Self> {
        let n = labels.len();
        check_size(n, budget)?;
        if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
            return Err(NadsError::InvalidSpace(format!(
                "metric matrix must be {n}x{n} to match the point list"
            )));
        }
        let mut diameter = 0.0f64;
        for i in 0..n {
            if matrix[i][i] != 0.0 {
                return Err(NadsError::InvalidSpace(format!(
                    "metric({i},{i}) must be 0"
                )));
            }
            for j in 0..n {
                let d = matrix[i][j];
                if !d.is_finite() || d < 0.0 {
                    return Err(NadsError::InvalidSpace(format!(
                        "metric({i},{j}) = {d} is not a nonnegative real"
                    )));
                }
                if (d - matrix[j][i]).abs() > 1e-12 {
                    return Err(NadsError::InvalidSpace(format!(
                        "metric is not symmetric at ({i},{j})"
                    )));
                }
                if i != j && d == 0.0 {
                    return Err(NadsError::InvalidSpace(format!(
                        "distinct points {i},{j} at distance 0"
                    )));
                }
                diameter = diameter.max(d);
            }
        }
        validate_triangle(&matrix)?;
        Ok(SampledSpace {
            kind: SpaceKind::Custom,
            model: Model::Custom { labels, matrix },
            diameter,
        })
    }

    /// Loads a custom space from a JSON document `{"points": [...], "metric": [[...]]}`.
    pub fn custom_from_json(doc: &str) -> Result<Self> {
        let parsed: CustomSpaceDoc = serde_json::from_str(doc)?;
        let labels = parsed
            .points
            .iter()
            .map(|v| match v {
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            })
            .collect();
        Self::custom(labels, parsed.metric)
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        match &self.model {
            Model::Interval { grid } | Model::Circle { grid } => grid.len(),
            Model::Symbolic { words, .. } => words.len(),
            Model::Custom { labels, .. } => labels.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Max over sampled pairs of the metric.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Smallest nonzero distance between adjacent samples; the resolution
    /// floor below which scale parameters only see the grid.
    pub fn mesh(&self) -> f64 {
        match &self.model {
            Model::Interval { grid } => 1.0 / (grid.len() - 1) as f64,
            Model::Circle { grid } => 1.0 / grid.len() as f64,
            Model::Symbolic { params, .. } => 0.5f64.powi(params.depth as i32 - 1),
            Model::Custom { matrix, .. } => {
                let n = matrix.len();
                let mut m = f64::INFINITY;
                for i in 0..n {
                    for j in (i + 1)..n {
                        m = m.min(matrix[i][j]);
                    }
                }
                m
            }
        }
    }

    /// Metric on point identifiers.
    #[inline]
    pub fn dist(&self, p: PointId, q: PointId) -> f64 {
        match &self.model {
            Model::Interval { grid } => (grid[p] - grid[q]).abs(),
            Model::Circle { grid } => {
                let d = (grid[p] - grid[q]).abs();
                d.min(1.0 - d)
            }
            Model::Symbolic { words, params, .. } => {
                let (a, b) = (&words[p], &words[q]);
                for j in 0..params.depth {
                    if a[j] != b[j] {
                        return 0.5f64.powi(j as i32);
                    }
                }
                0.0
            }
            Model::Custom { matrix, .. } => matrix[p][q],
        }
    }

    /// Real coordinate of a point: the grid value for interval/circle spaces,
    /// the radix encoding into [0,1) for symbolic spaces. Custom spaces carry
    /// no geometric coordinate.
    pub fn coord(&self, p: PointId) -> Option<f64> {
        match &self.model {
            Model::Interval { grid } | Model::Circle { grid } => Some(grid[p]),
            Model::Symbolic { encodings, .. } => Some(encodings[p]),
            Model::Custom { .. } => None,
        }
    }

    /// Word of a symbolic point.
    pub fn word(&self, p: PointId) -> Option<&[u8]> {
        match &self.model {
            Model::Symbolic { words, .. } => Some(&words[p]),
            _ => None,
        }
    }

    pub fn symbolic_params(&self) -> Option<SymbolicParams> {
        match &self.model {
            Model::Symbolic { params, .. } => Some(*params),
            _ => None,
        }
    }

    /// Point index of a symbolic word (lexicographic rank).
    pub fn word_index(&self, w: &[u8]) -> Option<PointId> {
        match &self.model {
            Model::Symbolic { params, .. } => {
                if w.len() != params.depth || w.iter().any(|&s| s as usize >= params.alphabet) {
                    return None;
                }
                let mut idx = 0usize;
                for &s in w {
                    idx = idx * params.alphabet + s as usize;
                }
                Some(idx)
            }
            _ => None,
        }
    }

    /// Human-readable label of a point.
    pub fn label(&self, p: PointId) -> String {
        match &self.model {
            Model::Interval { grid } | Model::Circle { grid } => format!("{}", grid[p]),
            Model::Symbolic { words, .. } => {
                words[p].iter().map(|s| (b'0' + s) as char).collect()
            }
            Model::Custom { labels, .. } => labels[p].clone(),
        }
    }

    /// Nearest grid point to a real value, for maps whose analytic image
    /// falls off the sample. Ties break toward the smaller index. Interval
    /// values are clamped to [0,1]; circle values are wrapped mod 1.
    pub fn snap(&self, x: f64) -> PointId {
        match &self.model {
            Model::Interval { grid } => {
                let n = grid.len();
                let x = x.clamp(0.0, 1.0);
                let k = x * (n - 1) as f64;
                let lo = k.floor() as usize;
                let hi = (lo + 1).min(n - 1);
                // d(lo) <= d(hi) picks the smaller index on ties
                if (x - grid[lo]).abs() <= (grid[hi] - x).abs() {
                    lo
                } else {
                    hi
                }
            }
            Model::Circle { grid } => {
                let n = grid.len();
                let x = x.rem_euclid(1.0);
                let k = x * n as f64;
                let lo = k.floor() as usize % n;
                let hi = (lo + 1) % n;
                let d_lo = {
                    let d = (x - grid[lo]).abs();
                    d.min(1.0 - d)
                };
                let d_hi = {
                    let d = (x - grid[hi]).abs();
                    d.min(1.0 - d)
                };
                let (a, b) = (lo.min(hi), lo.max(hi));
                let (d_a, d_b) = if a == lo { (d_lo, d_hi) } else { (d_hi, d_lo) };
                if d_a <= d_b {
                    a
                } else {
                    b
                }
            }
            _ => 0,
        }
    }
}

fn check_size(n: usize, budget: usize) -> Result<()> {
    if n < 2 {
        return Err(NadsError::InvalidSpace(format!(
            "space needs at least 2 points, got {n}"
        )));
    }
    if n > budget {
        return Err(NadsError::PointBudget {
            requested: n,
            budget,
        });
    }
    Ok(())
}

/// Full triangle check up to 512 points, 1000 deterministic sampled triples beyond.
fn validate_triangle(matrix: &[Vec<f64>]) -> Result<()> {
    let n = matrix.len();
    let check = |i: usize, j: usize, k: usize| -> Result<()> {
        if matrix[i][j] > matrix[i][k] + matrix[k][j] + 1e-12 {
            return Err(NadsError::InvalidSpace(format!(
                "triangle inequality fails on ({i},{j},{k})"
            )));
        }
        Ok(())
    };
    if n <= 512 {
        for i in 0..n {
            for j in (i + 1)..n {
                for k in 0..n {
                    check(i, j, k)?;
                }
            }
        }
    } else {
        // xorshift with a fixed seed keeps the load deterministic
        let mut state = 0x9e37_79b9_7f4a_7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..1000 {
            let i = (next() % n as u64) as usize;
            let j = (next() % n as u64) as usize;
            let k = (next() % n as u64) as usize;
            check(i, j, k)?;
        }
    }
    Ok(())
}

/// Greedy farthest-point net: every point of the space ends up within `eps`
/// of some returned point. Deterministic: starts from point 0 and repeatedly
/// adds the farthest uncovered point (smallest index on ties).
pub fn epsilon_net(space: &SampledSpace, eps: f64) -> Result<Vec<PointId>> {
    if !(eps > 0.0) {
        return Err(NadsError::InvalidArgument(format!(
            "epsilon_net requires eps > 0, got {eps}"
        )));
    }
    let n = space.len();
    let mut net = vec![0];
    let mut min_dist: Vec<f64> = (0..n).map(|p| space.dist(p, 0)).collect();
    loop {
        let mut far = 0;
        let mut far_d = 0.0;
        for p in 0..n {
            if min_dist[p] > far_d {
                far_d = min_dist[p];
                far = p;
            }
        }
        if far_d <= eps {
            break;
        }
        net.push(far);
        for p in 0..n {
            let d = space.dist(p, far);
            if d < min_dist[p] {
                min_dist[p] = d;
            }
        }
    }
    Ok(net)
}
