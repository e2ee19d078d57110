//! Probability measures on the sampled space: integration, pushforward,
//! invariance defects and common-invariant-measure search.
//!
//! The sampled maps are deterministic point maps, so their pushforward
//! operators are 0/1 column maps and the common-invariant feasibility
//! question has an exact combinatorial answer: a common invariant measure
//! exists iff the set of points that are periodic under every step map and
//! whose forward images stay inside the set is nonempty; the uniform measure
//! on that set is then invariant under every step map exactly. When the set
//! is empty the solver reports the attained minimum of
//! `sum_n ||T_n w - w||_1` over the simplex together with its minimizer,
//! found by deterministic projected subgradient descent from the uniform
//! start. Invariance is always certified relative to a potential dictionary
//! and a step bound, never for all continuous functions.

use serde::{Deserialize, Serialize};

use crate::error::{NadsError, Result};
use crate::nads::MapSequence;
use crate::space::PointId;

/// A probability weight vector over the space's points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measure {
    pub label: String,
    pub weights: Vec<f64>,
}

impl Measure {
    /// Validates nonnegativity and unit mass (within 1e-12).
    pub fn new(label: impl Into<String>, weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(NadsError::InvalidArgument(
                "measure weights must be nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(NadsError::InvalidArgument(format!(
                "measure weights sum to {total}, not 1"
            )));
        }
        Ok(Measure {
            label: label.into(),
            weights,
        })
    }

    pub fn uniform(label: impl Into<String>, n: usize) -> Self {
        Measure {
            label: label.into(),
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn dirac(label: impl Into<String>, n: usize, at: PointId) -> Self {
        let mut weights = vec![0.0; n];
        weights[at] = 1.0;
        Measure {
            label: label.into(),
            weights,
        }
    }

    /// Uniform measure on a point subset.
    pub fn uniform_on(label: impl Into<String>, n: usize, support: &[PointId]) -> Self {
        let mut weights = vec![0.0; n];
        let mass = 1.0 / support.len() as f64;
        for &p in support {
            weights[p] = mass;
        }
        Measure {
            label: label.into(),
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Total-variation distance `(1/2) sum |w - v|`.
    pub fn tv_distance(&self, other: &Measure) -> f64 {
        0.5 * self
            .weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }
}

/// `∫ φ dμ = Σ_p μ(p) φ(p)`.
pub fn integrate(phi: &[f64], mu: &Measure) -> f64 {
    phi.iter().zip(&mu.weights).map(|(v, w)| v * w).sum()
}

/// Pushforward under the step-`n` map: `ν(q) = Σ_{p: f_n(p) = q} μ(p)`.
pub fn pushforward(seq: &MapSequence, step: usize, mu: &Measure) -> Measure {
    let n = mu.len();
    let mut weights = vec![0.0; n];
    for p in 0..n {
        weights[seq.step(step, p)] += mu.weights[p];
    }
    Measure {
        label: format!("f_{step}*({})", mu.label),
        weights,
    }
}

/// `max_{n <= bound, ψ in dict} |∫ ψ∘f_n dμ - ∫ ψ dμ|`. Zero certifies
/// invariance relative to `(dict, bound)` only.
pub fn invariance_defect(
    seq: &MapSequence,
    mu: &Measure,
    dict: &[(String, Vec<f64>)],
    bound: usize,
) -> f64 {
    let mut worst = 0.0f64;
    for n in 1..=bound {
        let nu = pushforward(seq, n, mu);
        for (_, psi) in dict {
            let defect = (integrate(psi, &nu) - integrate(psi, mu)).abs();
            worst = worst.max(defect);
        }
    }
    worst
}

/// Per-step defect rows as CSV: `n,psi_label,defect`.
pub fn defect_report_csv(
    seq: &MapSequence,
    mu: &Measure,
    dict: &[(String, Vec<f64>)],
    bound: usize,
) -> String {
    let mut out = String::from("n,psi_label,defect\n");
    for n in 1..=bound {
        let nu = pushforward(seq, n, mu);
        for (label, psi) in dict {
            let defect = (integrate(psi, &nu) - integrate(psi, mu)).abs();
            out.push_str(&format!("{n},{label},{defect}\n"));
        }
    }
    out
}

/// Outcome of the common-invariant-measure search.
#[derive(Debug, Clone, Serialize)]
pub enum InvarianceOutcome {
    /// A measure fixed by every step map up to the bound.
    Feasible(Measure),
    /// No such measure exists; carries the attained minimum of the summed
    /// pushforward residual over the simplex and its minimizer.
    Infeasible { residual: f64, minimizer: Measure },
}

impl InvarianceOutcome {
    pub fn feasible(&self) -> Option<&Measure> {
        match self {
            InvarianceOutcome::Feasible(m) => Some(m),
            InvarianceOutcome::Infeasible { .. } => None,
        }
    }
}

/// Searches for a measure fixed by every `f_n`, `n <= bound`.
///
/// Exact dichotomy: mass of an invariant measure must sit on points that are
/// periodic under each step map, on a support closed under each step map;
/// shrinking to the largest such set either leaves a nonempty core (whose
/// uniform measure is exactly invariant under every step map, since each map
/// permutes the core) or proves infeasibility.
pub fn find_common_invariant(seq: &MapSequence, bound: usize) -> Result<InvarianceOutcome> {
    if bound < 1 {
        return Err(NadsError::InvalidArgument(
            "find_common_invariant needs a step bound >= 1".into(),
        ));
    }
    let npts = seq.space().len();
    let maps: Vec<Vec<PointId>> = (1..=bound)
        .map(|n| (0..npts).map(|p| seq.step(n, p)).collect())
        .collect();

    // periodic points of each map: iteratively strip in-degree-0 points
    let mut core = vec![true; npts];
    for map in &maps {
        let periodic = periodic_set(map);
        for p in 0..npts {
            core[p] &= periodic[p];
        }
    }
    // shrink to a set closed under every map
    loop {
        let mut changed = false;
        for map in &maps {
            for p in 0..npts {
                if core[p] && !core[map[p]] {
                    core[p] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let support: Vec<PointId> = (0..npts).filter(|&p| core[p]).collect();

    if !support.is_empty() {
        return Ok(InvarianceOutcome::Feasible(Measure::uniform_on(
            "common-invariant",
            npts,
            &support,
        )));
    }

    let (residual, weights) = minimize_residual(&maps, npts);
    Ok(InvarianceOutcome::Infeasible {
        residual,
        minimizer: Measure {
            label: "residual-minimizer".into(),
            weights,
        },
    })
}

/// Points lying on cycles of a deterministic map.
fn periodic_set(map: &[PointId]) -> Vec<bool> {
    let n = map.len();
    let mut indeg = vec![0usize; n];
    for &q in map {
        indeg[q] += 1;
    }
    let mut alive = vec![true; n];
    let mut queue: Vec<PointId> = (0..n).filter(|&p| indeg[p] == 0).collect();
    while let Some(p) = queue.pop() {
        alive[p] = false;
        let q = map[p];
        indeg[q] -= 1;
        if indeg[q] == 0 && alive[q] {
            queue.push(q);
        }
    }
    alive
}

/// Deterministic projected subgradient descent for
/// `R(w) = sum_n ||T_n w - w||_1` over the simplex, uniform start.
fn minimize_residual(maps: &[Vec<PointId>], npts: usize) -> (f64, Vec<f64>) {
    let residual_and_grad = |w: &[f64]| -> (f64, Vec<f64>) {
        let mut total = 0.0;
        let mut grad = vec![0.0f64; npts];
        for map in maps {
            let mut diff = vec![0.0f64; npts];
            for p in 0..npts {
                diff[map[p]] += w[p];
                diff[p] -= w[p];
            }
            for d in &diff {
                total += d.abs();
            }
            // subgradient of ||T w - w||_1: (T - I)^T sign(T w - w)
            for p in 0..npts {
                grad[p] += sign(diff[map[p]]) - sign(diff[p]);
            }
        }
        (total, grad)
    };

    let mut w = vec![1.0 / npts as f64; npts];
    let (mut best_r, _) = residual_and_grad(&w);
    let mut best_w = w.clone();
    for t in 1..=2000usize {
        let (r, grad) = residual_and_grad(&w);
        if r < best_r {
            best_r = r;
            best_w = w.clone();
        }
        let step = 0.05 / (t as f64).sqrt();
        for p in 0..npts {
            w[p] -= step * grad[p];
        }
        project_simplex(&mut w);
    }
    (best_r, best_w)
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Euclidean projection onto the probability simplex (sort-based).
fn project_simplex(w: &mut [f64]) {
    let n = w.len();
    let mut sorted: Vec<f64> = w.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &v) in sorted.iter().enumerate() {
        cum += v;
        let candidate = (cum - 1.0) / (i + 1) as f64;
        if v - candidate > 0.0 {
            theta = candidate;
        }
    }
    let mut total = 0.0;
    for v in w.iter_mut() {
        *v = (*v - theta).max(0.0);
        total += *v;
    }
    // renormalize away the last float dust
    if total > 0.0 {
        for v in w.iter_mut() {
            *v /= total;
        }
    } else {
        for v in w.iter_mut() {
            *v = 1.0 / n as f64;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build_potential, build_system, build_system_on, SpaceParams};
    use crate::space::SampledSpace;
    use std::sync::Arc;

    fn dict_for(seq: &MapSequence) -> Vec<(String, Vec<f64>)> {
        let space = seq.space();
        let mut dict = vec![
            ("zero".to_string(), vec![0.0; space.len()]),
            ("one".to_string(), vec![1.0; space.len()]),
        ];
        if let Ok(coord) = build_potential("coord", space) {
            dict.push(coord);
        }
        dict
    }

    #[test]
    fn integrate_examples() {
        let space = SampledSpace::interval(11).unwrap();
        let n = space.len();
        let constant = vec![2.5; n];
        let mu = Measure::uniform("uniform", n);
        assert!((integrate(&constant, &mu) - 2.5).abs() < 1e-12);

        let coord: Vec<f64> = (0..n).map(|p| space.coord(p).unwrap()).collect();
        assert!((integrate(&coord, &mu) - 0.5).abs() < 1e-12);

        let sq: Vec<f64> = coord.iter().map(|v| v * v).collect();
        let dirac = Measure::dirac("d", n, 3); // at 0.3
        assert!((integrate(&sq, &dirac) - 0.09).abs() < 1e-12);
    }

    #[test]
    fn measure_validation() {
        assert!(Measure::new("bad", vec![0.5, 0.6]).is_err());
        assert!(Measure::new("bad", vec![-0.1, 1.1]).is_err());
        assert!(Measure::new("ok", vec![0.25; 4]).is_ok());
    }

    #[test]
    fn pushforward_identity_and_constant_maps() {
        let space = Arc::new(SampledSpace::interval(8).unwrap());
        let ident = MapSequence::autonomous("identity", space.clone(), |p| p);
        let mu = Measure::uniform("u", 8);
        assert_eq!(pushforward(&ident, 1, &mu).weights, mu.weights);

        let constant = MapSequence::autonomous("const", space, |_| 5);
        let nu = pushforward(&constant, 1, &mu);
        assert_eq!(nu.weights[5], 1.0);
        assert_eq!(nu.weights.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn doubling_on_odd_grid_fixes_uniform() {
        // on a grid coprime to 2 the sampled doubling map is a bijection
        let seq = build_system("doubling", &SpaceParams { size: 255, ..Default::default() })
            .unwrap();
        let mu = Measure::uniform("lebesgue", 255);
        let nu = pushforward(&seq, 1, &mu);
        assert_eq!(nu.weights, mu.weights);
        let defect = invariance_defect(&seq, &mu, &dict_for(&seq), 5);
        assert!(defect <= 1e-12, "defect {defect}");
    }

    #[test]
    fn pushforward_preserves_mass_and_positivity() {
        let seq = build_system("tent", &SpaceParams { size: 101, ..Default::default() })
            .unwrap();
        let mut state = 99u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..20 {
            let mut w: Vec<f64> = (0..101).map(|_| (next() % 1000) as f64).collect();
            let total: f64 = w.iter().sum();
            for v in &mut w {
                *v /= total;
            }
            let mu = Measure::new("random", w).unwrap();
            let nu = pushforward(&seq, 1, &mu);
            assert!((nu.weights.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            assert!(nu.weights.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn dirac_defect_is_the_coordinate_gap() {
        // doubling, Dirac at 1/8, psi = coord, one step: |1/4 - 1/8|
        let seq = build_system("doubling", &SpaceParams { size: 8, ..Default::default() })
            .unwrap();
        let mu = Measure::dirac("d", 8, 1);
        let coord = build_potential("coord", seq.space()).unwrap();
        let defect = invariance_defect(&seq, &mu, &[coord], 1);
        assert!((defect - 0.125).abs() < 1e-12);
    }

    #[test]
    fn constants_see_no_defect() {
        let seq = build_system("tent", &SpaceParams { size: 64, ..Default::default() })
            .unwrap();
        let mu = Measure::dirac("d", 64, 17);
        let dict = vec![("one".to_string(), vec![1.0; 64])];
        assert_eq!(invariance_defect(&seq, &mu, &dict, 4), 0.0);
    }

    #[test]
    fn identity_sequence_is_feasible_with_uniform() {
        let seq = build_system("identity", &SpaceParams { size: 32, ..Default::default() })
            .unwrap();
        let out = find_common_invariant(&seq, 3).unwrap();
        let mu = out.feasible().expect("identity must be feasible");
        assert_eq!(mu.weights, vec![1.0 / 32.0; 32]);
    }

    #[test]
    fn commuting_doubling_tripling_is_feasible() {
        // alternating doubling/tripling on one circle grid commute exactly
        let space = Arc::new(SampledSpace::circle(900).unwrap());
        let seq = build_system_on("periodic:[doubling,tripling]", space).unwrap();
        let out = find_common_invariant(&seq, 2).unwrap();
        let mu = out.feasible().expect("commuting pair must be feasible");
        let defect = invariance_defect(&seq, &mu, &dict_for(&seq), 2);
        assert!(defect <= 1e-9, "defect {defect}");
    }

    #[test]
    fn single_map_systems_are_feasible() {
        for key in ["tent", "logistic:3.7", "doubling"] {
            let params = SpaceParams { size: 151, ..Default::default() };
            let seq = build_system(key, &params).unwrap();
            let out = find_common_invariant(&seq, 1).unwrap();
            let mu = out.feasible().unwrap_or_else(|| panic!("{key} infeasible"));
            let defect = invariance_defect(&seq, &mu, &dict_for(&seq), 1);
            assert!(defect <= 1e-9, "{key} defect {defect}");
        }
    }

    #[test]
    fn disjoint_north_south_pair_is_infeasible() {
        let space = Arc::new(SampledSpace::circle(128).unwrap());
        let seq =
            build_system_on("periodic:[northsouth:0.0,0.5;northsouth:0.25,0.75]", space)
                .unwrap();
        let out = find_common_invariant(&seq, 2).unwrap();
        match out {
            InvarianceOutcome::Infeasible { residual, minimizer } => {
                assert!(residual > 1e-3, "residual {residual}");
                assert!((minimizer.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
            InvarianceOutcome::Feasible(m) => panic!("unexpected feasible {m:?}"),
        }
    }

    #[test]
    fn shared_fixed_point_stays_feasible() {
        // both north-south maps fix 0: the Dirac there is a common invariant
        let space = Arc::new(SampledSpace::circle(128).unwrap());
        let seq = build_system_on("periodic:[northsouth:0.0,0.5;northsouth:0.0,0.25]", space)
            .unwrap();
        let out = find_common_invariant(&seq, 2).unwrap();
        let mu = out.feasible().expect("shared fixed point");
        let defect = invariance_defect(&seq, &mu, &dict_for(&seq), 2);
        assert!(defect <= 1e-12);
    }

    #[test]
    fn defect_csv_rows_cover_the_grid() {
        let seq = build_system("doubling", &SpaceParams { size: 8, ..Default::default() })
            .unwrap();
        let mu = Measure::dirac("d", 8, 1);
        let coord = build_potential("coord", seq.space()).unwrap();
        let csv = defect_report_csv(&seq, &mu, &[coord], 3);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,psi_label,defect");
        assert_eq!(lines.len(), 1 + 3);
        assert!(lines[1].starts_with("1,coord,0.125"));
    }

    #[test]
    fn tv_distance_examples() {
        let a = Measure::dirac("a", 4, 0);
        let b = Measure::dirac("b", 4, 2);
        assert_eq!(a.tv_distance(&b), 1.0);
        let mix = Measure::new("mix", vec![0.5, 0.0, 0.5, 0.0]).unwrap();
        assert_eq!(a.tv_distance(&mix), 0.5);
    }
}
