//! Built-in systems and potentials addressable from configs and the CLI.
//!
//! System keys:
//!
//! * `identity` — identity maps (any space; interval by default),
//! * `doubling` / `tripling` — `x -> 2x mod 1` / `x -> 3x mod 1` on the
//!   circle grid (exact index maps, no snapping),
//! * `rotation:a` — circle rotation by `a`, snapped to a whole number of
//!   grid steps,
//! * `tent` — `x -> 1 - |1 - 2x|` on the interval grid,
//! * `logistic:r` — `x -> r x (1 - x)` on the interval grid,
//! * `shift:m` — the full shift on words of the symbolic space, realized as
//!   the cyclic word rotation so the sampled map stays a bijection,
//! * `northsouth:p,q` — a circle map with one source `p` and one sink `q`;
//!   every other grid point moves at least one step toward the sink,
//! * `periodic:[k1,k2,...]` — cycles through catalog entries (`;` also
//!   separates entries, for members that contain commas).
//!
//! Potential specs: `zero`, `coord`, `first-symbol:[a,b,...]`,
//! `lipschitz-random:seed,L`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{NadsError, Result};
use crate::nads::MapSequence;
use crate::space::{PointId, SampledSpace, SpaceKind};

/// Grid sizes used when a catalog key has to build its own space.
#[derive(Debug, Clone, Copy)]
pub struct SpaceParams {
    /// Points on interval/circle grids.
    pub size: usize,
    /// Word length of symbolic spaces.
    pub depth: usize,
    pub budget: usize,
}

impl Default for SpaceParams {
    fn default() -> Self {
        SpaceParams {
            size: 256,
            depth: 8,
            budget: crate::space::point_budget(),
        }
    }
}

/// `(key, description)` pairs for the `catalog` subcommand.
pub fn catalog_entries() -> Vec<(&'static str, &'static str)> {
    vec![
        ("identity", "identity maps on the interval grid"),
        ("doubling", "x -> 2x mod 1 on the circle grid"),
        ("tripling", "x -> 3x mod 1 on the circle grid"),
        ("rotation:a", "circle rotation by a (snapped to grid steps)"),
        ("tent", "tent map on the interval grid"),
        ("logistic:r", "logistic map r x (1-x) on the interval grid"),
        ("shift:m", "full shift on length-D words over m symbols"),
        (
            "northsouth:p,q",
            "circle map with source p and sink q (fixed points exactly {p, q})",
        ),
        (
            "periodic:[k1,k2,...]",
            "cycles through catalog entries; use ';' between entries containing commas",
        ),
    ]
}

/// Potential spec strings for the `catalog` subcommand.
pub fn potential_entries() -> Vec<(&'static str, &'static str)> {
    vec![
        ("zero", "the zero potential"),
        ("coord", "grid coordinate / radix word encoding in [0,1)"),
        (
            "first-symbol:[a,b,...]",
            "value of the leading symbol (symbolic spaces)",
        ),
        (
            "lipschitz-random:seed,L",
            "seeded random L-Lipschitz potential (McShane extension of anchors)",
        ),
    ]
}

fn required_kind(key: &str) -> Result<Option<SpaceKind>> {
    let head = key.split(':').next().unwrap_or(key);
    Ok(match head {
        "identity" => None,
        "doubling" | "tripling" | "rotation" | "northsouth" => Some(SpaceKind::Circle),
        "tent" | "logistic" => Some(SpaceKind::Interval),
        "shift" => Some(SpaceKind::Symbolic),
        "periodic" => {
            let mut kind = None;
            for part in split_periodic(key)? {
                if let Some(k) = required_kind(&part)? {
                    match kind {
                        None => kind = Some(k),
                        Some(prev) if prev == k => {}
                        Some(prev) => {
                            return Err(NadsError::UnknownCatalogKey(format!(
                                "periodic members need one space kind, got {prev} and {k}"
                            )))
                        }
                    }
                }
            }
            kind
        }
        _ => return Err(NadsError::UnknownCatalogKey(key.to_string())),
    })
}

fn split_periodic(key: &str) -> Result<Vec<String>> {
    let inner = key
        .strip_prefix("periodic:[")
        .and_then(|rest| rest.strip_suffix(']'))
        .ok_or_else(|| NadsError::UnknownCatalogKey(format!("malformed periodic key: {key}")))?;
    let sep = if inner.contains(';') { ';' } else { ',' };
    let parts: Vec<String> = inner
        .split(sep)
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if parts.is_empty() {
        return Err(NadsError::UnknownCatalogKey(
            "periodic key needs at least one member".into(),
        ));
    }
    Ok(parts)
}

/// Builds the space a catalog key wants at the given sizes.
pub fn build_space_for(key: &str, params: &SpaceParams) -> Result<Arc<SampledSpace>> {
    let kind = required_kind(key)?.unwrap_or(SpaceKind::Interval);
    let space = match kind {
        SpaceKind::Interval => SampledSpace::interval_with_budget(params.size, params.budget)?,
        SpaceKind::Circle => SampledSpace::circle_with_budget(params.size, params.budget)?,
        SpaceKind::Symbolic => {
            let m = shift_alphabet(key)?;
            SampledSpace::symbolic_with_budget(m, params.depth, params.budget)?
        }
        SpaceKind::Custom => unreachable!("catalog keys never demand custom spaces"),
    };
    Ok(Arc::new(space))
}

fn shift_alphabet(key: &str) -> Result<usize> {
    // finds the shift:m member (periodic keys may nest one)
    for part in if key.starts_with("periodic:") {
        split_periodic(key)?
    } else {
        vec![key.to_string()]
    } {
        if let Some(m) = part.strip_prefix("shift:") {
            return m
                .parse::<usize>()
                .map_err(|_| NadsError::UnknownCatalogKey(format!("bad shift alphabet in {part}")));
        }
    }
    Err(NadsError::UnknownCatalogKey(format!(
        "symbolic space requested without a shift:m member in {key}"
    )))
}

type PointMap = Box<dyn Fn(PointId) -> PointId + Send + Sync>;

fn point_map(key: &str, space: &Arc<SampledSpace>) -> Result<PointMap> {
    let n = space.len();
    let (head, arg) = match key.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (key, None),
    };
    match head {
        "identity" => Ok(Box::new(|p| p)),
        "doubling" => {
            expect_kind(key, space, SpaceKind::Circle)?;
            Ok(Box::new(move |p| (2 * p) % n))
        }
        "tripling" => {
            expect_kind(key, space, SpaceKind::Circle)?;
            Ok(Box::new(move |p| (3 * p) % n))
        }
        "rotation" => {
            expect_kind(key, space, SpaceKind::Circle)?;
            let alpha: f64 = parse_num(key, arg)?;
            let steps = (alpha * n as f64).round().rem_euclid(n as f64) as usize;
            Ok(Box::new(move |p| (p + steps) % n))
        }
        "tent" => {
            expect_kind(key, space, SpaceKind::Interval)?;
            let s = space.clone();
            Ok(Box::new(move |p| {
                let x = s.coord(p).unwrap();
                s.snap(1.0 - (1.0 - 2.0 * x).abs())
            }))
        }
        "logistic" => {
            expect_kind(key, space, SpaceKind::Interval)?;
            let r: f64 = parse_num(key, arg)?;
            if !(0.0..=4.0).contains(&r) {
                return Err(NadsError::UnknownCatalogKey(format!(
                    "logistic parameter must be in [0,4], got {r}"
                )));
            }
            let s = space.clone();
            Ok(Box::new(move |p| {
                let x = s.coord(p).unwrap();
                s.snap(r * x * (1.0 - x))
            }))
        }
        "shift" => {
            let m: usize = parse_num(key, arg)?;
            let params = space.symbolic_params().ok_or_else(|| {
                NadsError::UnknownCatalogKey(format!("{key} needs a symbolic space"))
            })?;
            if params.alphabet != m {
                return Err(NadsError::UnknownCatalogKey(format!(
                    "{key} does not match the space alphabet {}",
                    params.alphabet
                )));
            }
            let s = space.clone();
            Ok(Box::new(move |p| {
                let w = s.word(p).unwrap();
                let mut r = w[1..].to_vec();
                r.push(w[0]);
                s.word_index(&r).unwrap()
            }))
        }
        "northsouth" => {
            expect_kind(key, space, SpaceKind::Circle)?;
            let (p_raw, q_raw) = parse_pair(key, arg)?;
            north_south_map(space, p_raw, q_raw)
        }
        _ => Err(NadsError::UnknownCatalogKey(key.to_string())),
    }
}

fn expect_kind(key: &str, space: &SampledSpace, kind: SpaceKind) -> Result<()> {
    if space.kind() != kind {
        return Err(NadsError::UnknownCatalogKey(format!(
            "{key} needs a {kind} space, got {}",
            space.kind()
        )));
    }
    Ok(())
}

fn parse_num<T: std::str::FromStr>(key: &str, arg: Option<&str>) -> Result<T> {
    arg.and_then(|a| a.parse().ok())
        .ok_or_else(|| NadsError::UnknownCatalogKey(format!("{key} needs a numeric parameter")))
}

fn parse_pair(key: &str, arg: Option<&str>) -> Result<(f64, f64)> {
    let arg = arg
        .ok_or_else(|| NadsError::UnknownCatalogKey(format!("{key} needs two parameters p,q")))?;
    let mut it = arg.split(',');
    let p = it.next().and_then(|v| v.parse().ok());
    let q = it.next().and_then(|v| v.parse().ok());
    match (p, q, it.next()) {
        (Some(p), Some(q), None) => Ok((p, q)),
        _ => Err(NadsError::UnknownCatalogKey(format!(
            "{key} needs two parameters p,q"
        ))),
    }
}

/// Circle map fixing exactly the source `p` and the sink `q`. On each of the
/// two arcs between them the normalized position `u` moves by `0.75 u (1-u)`
/// toward the sink, which exceeds half a grid step everywhere off the fixed
/// points, so snapping never re-freezes a moving point.
fn north_south_map(space: &Arc<SampledSpace>, p_raw: f64, q_raw: f64) -> Result<PointMap> {
    let pi = space.snap(p_raw);
    let qi = space.snap(q_raw);
    if pi == qi {
        return Err(NadsError::UnknownCatalogKey(
            "northsouth needs distinct source and sink".into(),
        ));
    }
    let p = space.coord(pi).unwrap();
    let q = space.coord(qi).unwrap();
    let l1 = (q - p).rem_euclid(1.0);
    let l2 = 1.0 - l1;
    let mesh = space.mesh();
    if l1 < 4.0 * mesh || l2 < 4.0 * mesh {
        return Err(NadsError::UnknownCatalogKey(
            "northsouth arcs are too short for this grid".into(),
        ));
    }
    let s = space.clone();
    Ok(Box::new(move |idx| {
        if idx == pi || idx == qi {
            return idx;
        }
        let x = s.coord(idx).unwrap();
        let t = (x - p).rem_euclid(1.0);
        let y = if t > 0.0 && t < l1 {
            // arc from source to sink: u grows toward 1
            let u = t / l1;
            let u2 = u + 0.75 * u * (1.0 - u);
            (p + u2 * l1).rem_euclid(1.0)
        } else {
            // remaining arc, parametrized from the sink: u shrinks toward 0
            let sarc = (x - q).rem_euclid(1.0);
            let u = sarc / l2;
            let u2 = u - 0.75 * u * (1.0 - u);
            (q + u2 * l2).rem_euclid(1.0)
        };
        s.snap(y)
    }))
}

/// Builds a map sequence from a catalog key on a prebuilt space.
pub fn build_system_on(key: &str, space: Arc<SampledSpace>) -> Result<MapSequence> {
    if key.starts_with("periodic:") {
        let members = split_periodic(key)?;
        let maps = members
            .iter()
            .map(|m| point_map(m, &space))
            .collect::<Result<Vec<_>>>()?;
        Ok(MapSequence::periodic(key, space, maps))
    } else {
        let map = point_map(key, &space)?;
        Ok(MapSequence::new(key, space, move |_, p| map(p), Some(1)))
    }
}

/// Builds both the space and the sequence for a catalog key.
pub fn build_system(key: &str, params: &SpaceParams) -> Result<MapSequence> {
    let space = build_space_for(key, params)?;
    build_system_on(key, space)
}

/// Evaluates a potential spec on every point of the space.
pub fn build_potential(spec: &str, space: &SampledSpace) -> Result<(String, Vec<f64>)> {
    let n = space.len();
    let (head, arg) = match spec.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (spec, None),
    };
    let values = match head {
        "zero" => vec![0.0; n],
        "coord" => (0..n)
            .map(|p| {
                space.coord(p).ok_or_else(|| {
                    NadsError::InvalidPotential(
                        "coord needs a space with geometric coordinates".into(),
                    )
                })
            })
            .collect::<Result<Vec<f64>>>()?,
        "first-symbol" => {
            let params = space.symbolic_params().ok_or_else(|| {
                NadsError::InvalidPotential("first-symbol needs a symbolic space".into())
            })?;
            let arg = arg
                .and_then(|a| a.strip_prefix('['))
                .and_then(|a| a.strip_suffix(']'))
                .ok_or_else(|| {
                    NadsError::InvalidPotential(format!("malformed first-symbol spec: {spec}"))
                })?;
            let vals: Vec<f64> = arg
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| NadsError::InvalidPotential(format!("bad numbers in {spec}")))?;
            if vals.len() != params.alphabet {
                return Err(NadsError::InvalidPotential(format!(
                    "first-symbol needs {} values, got {}",
                    params.alphabet,
                    vals.len()
                )));
            }
            (0..n)
                .map(|p| vals[space.word(p).unwrap()[0] as usize])
                .collect()
        }
        "lipschitz-random" => {
            let arg = arg.ok_or_else(|| {
                NadsError::InvalidPotential(format!("{spec} needs seed,L parameters"))
            })?;
            let (seed, lip) = {
                let mut it = arg.split(',');
                let seed: u64 = it
                    .next()
                    .and_then(|v| v.trim().parse().ok())
                    .ok_or_else(|| NadsError::InvalidPotential(format!("bad seed in {spec}")))?;
                let lip: f64 = it
                    .next()
                    .and_then(|v| v.trim().parse().ok())
                    .ok_or_else(|| NadsError::InvalidPotential(format!("bad L in {spec}")))?;
                (seed, lip)
            };
            lipschitz_random(space, seed, lip)
        }
        _ => return Err(NadsError::InvalidPotential(spec.to_string())),
    };
    Ok((spec.to_string(), values))
}

/// McShane extension of random anchor values: `min_j (v_j + L d(x, a_j))`
/// is L-Lipschitz for any anchor data.
fn lipschitz_random(space: &SampledSpace, seed: u64, lip: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = space.len();
    let anchors: Vec<(PointId, f64)> = (0..16.min(n))
        .map(|_| (rng.gen_range(0..n), rng.gen_range(-1.0..1.0)))
        .collect();
    (0..n)
        .map(|x| {
            anchors
                .iter()
                .map(|&(a, v)| v + lip * space.dist(x, a))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nads::composition_orbit;

    #[test]
    fn doubling_orbit_from_catalog() {
        let seq =
            build_system("doubling", &SpaceParams { size: 8, ..Default::default() }).unwrap();
        let orbit = composition_orbit(&seq, 1, 2).unwrap();
        assert_eq!(orbit.entries, vec![1, 2, 4]);
    }

    #[test]
    fn rotation_snaps_to_whole_steps() {
        let seq = build_system(
            "rotation:0.25",
            &SpaceParams { size: 8, ..Default::default() },
        )
        .unwrap();
        assert_eq!(seq.step(1, 0), 2);
        assert_eq!(seq.step(1, 7), 1);
    }

    #[test]
    fn periodic_key_cycles_members() {
        let seq = build_system(
            "periodic:[doubling,identity]",
            &SpaceParams { size: 16, ..Default::default() },
        )
        .unwrap();
        assert_eq!(seq.period(), Some(2));
        assert_eq!(seq.step(1, 1), 2);
        assert_eq!(seq.step(2, 2), 2);
        assert_eq!(seq.step(3, 2), 4);
    }

    #[test]
    fn shift_rotates_words() {
        let seq =
            build_system("shift:2", &SpaceParams { depth: 3, ..Default::default() }).unwrap();
        let s = seq.space().clone();
        let p = s.word_index(&[1, 0, 0]).unwrap();
        assert_eq!(seq.step(1, p), s.word_index(&[0, 0, 1]).unwrap());
    }

    #[test]
    fn north_south_fixed_points_are_exactly_the_pair() {
        let params = SpaceParams { size: 128, ..Default::default() };
        let seq = build_system("northsouth:0.25,0.75", &params).unwrap();
        let space = seq.space();
        let pi = space.snap(0.25);
        let qi = space.snap(0.75);
        let fixed: Vec<usize> = (0..space.len()).filter(|&p| seq.step(1, p) == p).collect();
        assert_eq!(fixed, vec![pi.min(qi), pi.max(qi)]);
        // every orbit away from the source lands on the sink
        for p in 0..space.len() {
            let orbit = composition_orbit(&seq, p, 4 * space.len()).unwrap();
            let last = *orbit.entries.last().unwrap();
            if p != pi {
                assert_eq!(last, qi, "orbit of {p} stalls at {last}");
            }
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let params = SpaceParams::default();
        assert!(build_system("horseshoe", &params).is_err());
        assert!(build_system("rotation:abc", &params).is_err());
        assert!(build_system("periodic:[doubling,tent]", &params).is_err());
        assert!(build_system("logistic:9.5", &params).is_err());
    }

    #[test]
    fn potentials_evaluate_on_their_spaces() {
        let space = SampledSpace::symbolic(2, 3).unwrap();
        let (label, vals) = build_potential("first-symbol:[0.0,0.7]", &space).unwrap();
        assert_eq!(label, "first-symbol:[0.0,0.7]");
        let one = space.word_index(&[1, 1, 0]).unwrap();
        assert_eq!(vals[one], 0.7);
        let zero = space.word_index(&[0, 1, 0]).unwrap();
        assert_eq!(vals[zero], 0.0);

        let grid = SampledSpace::interval(11).unwrap();
        let (_, coord) = build_potential("coord", &grid).unwrap();
        assert_eq!(coord[5], 0.5);
        assert!(build_potential("first-symbol:[0,1]", &grid).is_err());
        assert!(build_potential("mystery", &grid).is_err());
    }

    #[test]
    fn lipschitz_random_is_lipschitz_and_seeded() {
        let space = SampledSpace::circle(64).unwrap();
        let (_, a) = build_potential("lipschitz-random:7,2.0", &space).unwrap();
        let (_, b) = build_potential("lipschitz-random:7,2.0", &space).unwrap();
        assert_eq!(a, b);
        let (_, c) = build_potential("lipschitz-random:8,2.0", &space).unwrap();
        assert_ne!(a, c);
        for x in 0..64 {
            for y in 0..64 {
                assert!((a[x] - a[y]).abs() <= 2.0 * space.dist(x, y) + 1e-12);
            }
        }
    }
}
