//! The convex-duality layer: entropy maps by conjugation over a finite
//! potential dictionary, variational maximizer search, star-entropy
//! envelopes, non-invariance witnesses and the combined diagnostic report.
//!
//! Continuous potentials are approximated by a finite dictionary closed
//! under constants, signed scalings up to a bound, coboundaries
//! `psi∘f_n - psi` up to a step bound, and pairwise midpoints — exactly the
//! families the dual quantities quantify over. The entropy value
//! `min over the dictionary of (Gamma(phi) - ∫phi dmu)` is an UPPER bound on
//! the true conjugate (the true inf ranges over all continuous potentials),
//! so every conclusion is stated in the valid direction: a negative upper
//! bound refutes invariance, a nonnegative one is a necessary check, never a
//! proof. Weak duality `entropy(mu) + ∫phi dmu <= Gamma(phi)` holds exactly
//! by construction of the min.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{NadsError, Result};
use crate::measures::{integrate, invariance_defect, Measure};
use crate::nads::{composition_orbit, MapSequence, Mode, OrbitCache};
use crate::pressure::pressure_estimate_cached;

/// How a dictionary entry was produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum EntryKind {
    Zero,
    Base,
    Constant,
    /// `scaling * (psi∘f_step - psi)`.
    Coboundary {
        psi: String,
        step: usize,
        scaling: i64,
    },
    Scaled {
        base: String,
        scaling: i64,
    },
    Midpoint {
        a: String,
        b: String,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct DictionaryEntry {
    pub label: String,
    pub kind: EntryKind,
    #[serde(skip)]
    pub values: Vec<f64>,
}

/// Closure parameters: coboundaries for steps `1..=coboundary_steps`,
/// signed scalings `-1` and `±4^j` up to `scaling_max`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ClosureParams {
    pub coboundary_steps: usize,
    pub scaling_max: i64,
}

impl Default for ClosureParams {
    fn default() -> Self {
        ClosureParams {
            coboundary_steps: 2,
            scaling_max: 64,
        }
    }
}

/// Finite stand-in for the space of continuous potentials.
#[derive(Debug, Clone, Serialize)]
pub struct PotentialDictionary {
    pub entries: Vec<DictionaryEntry>,
    pub closure: ClosureParams,
}

impl PotentialDictionary {
    pub fn get(&self, label: &str) -> Option<&DictionaryEntry> {
        self.entries.iter().find(|e| e.label == label)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.label.as_str())
    }
}

fn scaling_values(max: i64) -> Vec<i64> {
    let mut ms = vec![-1];
    let mut m = 4i64;
    while m <= max {
        ms.push(m);
        ms.push(-m);
        m *= 4;
    }
    ms
}

/// Builds the closed dictionary from base potentials. The zero potential is
/// always present; labels are unique and deterministic.
pub fn build_dictionary(
    base: &[(String, Vec<f64>)],
    seq: &MapSequence,
    closure: ClosureParams,
) -> Result<PotentialDictionary> {
    let npts = seq.space().len();
    let mut entries: Vec<DictionaryEntry> = Vec::new();
    let push = |entries: &mut Vec<DictionaryEntry>,
                    label: String,
                    kind: EntryKind,
                    values: Vec<f64>|
     -> Result<()> {
        if values.len() != npts {
            return Err(NadsError::InvalidPotential(format!(
                "potential {label} is not total on the space"
            )));
        }
        if entries.iter().any(|e| e.label == label) {
            return Err(NadsError::InvalidPotential(format!(
                "duplicate dictionary label {label}"
            )));
        }
        entries.push(DictionaryEntry {
            label,
            kind,
            values,
        });
        Ok(())
    };

    push(&mut entries, "zero".into(), EntryKind::Zero, vec![0.0; npts])?;
    push(&mut entries, "const:1".into(), EntryKind::Constant, vec![1.0; npts])?;

    let interesting: Vec<&(String, Vec<f64>)> = base
        .iter()
        .filter(|(label, values)| label != "zero" && values.iter().any(|&v| v != values[0]))
        .collect();
    for (label, values) in &interesting {
        push(&mut entries, label.clone(), EntryKind::Base, values.clone())?;
    }

    // coboundaries psi∘f_n - psi of the nonconstant base entries
    let mut coboundaries: Vec<(String, usize, Vec<f64>)> = Vec::new();
    for (label, psi) in &interesting {
        for step in 1..=closure.coboundary_steps {
            let values: Vec<f64> = (0..npts).map(|x| psi[seq.step(step, x)] - psi[x]).collect();
            push(
                &mut entries,
                format!("cob({label},{step})"),
                EntryKind::Coboundary {
                    psi: label.clone(),
                    step,
                    scaling: 1,
                },
                values.clone(),
            )?;
            coboundaries.push((label.clone(), step, values));
        }
    }

    // signed scalings of base entries and coboundaries
    for m in scaling_values(closure.scaling_max) {
        for (label, values) in &interesting {
            push(
                &mut entries,
                format!("{m}*{label}"),
                EntryKind::Scaled {
                    base: label.clone(),
                    scaling: m,
                },
                values.iter().map(|v| m as f64 * v).collect(),
            )?;
        }
        for (psi, step, values) in &coboundaries {
            push(
                &mut entries,
                format!("{m}*cob({psi},{step})"),
                EntryKind::Coboundary {
                    psi: psi.clone(),
                    step: *step,
                    scaling: m,
                },
                values.iter().map(|v| m as f64 * v).collect(),
            )?;
        }
    }

    // pairwise midpoints of base entries (zero included)
    let mut with_zero: Vec<(String, Vec<f64>)> = vec![("zero".into(), vec![0.0; npts])];
    with_zero.extend(interesting.iter().map(|(l, v)| (l.clone(), v.clone())));
    for i in 0..with_zero.len() {
        for j in (i + 1)..with_zero.len() {
            let (la, va) = &with_zero[i];
            let (lb, vb) = &with_zero[j];
            push(
                &mut entries,
                format!("mid({la},{lb})"),
                EntryKind::Midpoint {
                    a: la.clone(),
                    b: lb.clone(),
                },
                va.iter().zip(vb).map(|(a, b)| 0.5 * (a + b)).collect(),
            )?;
        }
    }

    Ok(PotentialDictionary { entries, closure })
}

/// Estimated pressure per dictionary label, all produced with one
/// `(schedule, scales, mode)` triple.
#[derive(Debug, Clone, Serialize)]
pub struct GammaTable {
    pub system: String,
    pub mode: Mode,
    pub schedule: Vec<usize>,
    pub scales: Vec<f64>,
    pub entries: BTreeMap<String, f64>,
}

impl GammaTable {
    pub fn value(&self, label: &str) -> Result<f64> {
        self.entries
            .get(label)
            .copied()
            .ok_or_else(|| NadsError::UnknownLabel(label.to_string()))
    }

    /// The entropy estimate `Gamma(0)`.
    pub fn h_top(&self) -> f64 {
        self.entries["zero"]
    }
}

/// Runs one pressure estimate per dictionary entry over a shared orbit cache.
pub fn gamma_table(
    seq: &MapSequence,
    dict: &PotentialDictionary,
    schedule: &[usize],
    scales: &[f64],
    mode: Mode,
) -> Result<GammaTable> {
    let n_max = *schedule
        .last()
        .ok_or_else(|| NadsError::InvalidArgument("schedule must be nonempty".into()))?;
    let cache = OrbitCache::new(seq, n_max);
    let mut entries = BTreeMap::new();
    for entry in &dict.entries {
        let est =
            pressure_estimate_cached(&cache, &entry.values, &entry.label, schedule, scales, mode)?;
        entries.insert(entry.label.clone(), est.extrapolated);
    }
    Ok(GammaTable {
        system: seq.label().to_string(),
        mode,
        schedule: schedule.to_vec(),
        scales: scales.to_vec(),
        entries,
    })
}

/// Dictionary entropy of a measure: `min over phi of Gamma(phi) - ∫phi dmu`,
/// an upper bound on the true conjugate, together with the attaining label.
/// Never exceeds `Gamma(0)`.
pub fn entropy_dict(
    dict: &PotentialDictionary,
    gamma: &GammaTable,
    mu: &Measure,
) -> Result<(f64, String)> {
    let mut best = f64::INFINITY;
    let mut best_label = String::new();
    for entry in &dict.entries {
        let value = gamma.value(&entry.label)? - integrate(&entry.values, mu);
        if value < best {
            best = value;
            best_label = entry.label.clone();
        }
    }
    if best_label.is_empty() {
        return Err(NadsError::InvalidArgument("empty dictionary".into()));
    }
    Ok((best, best_label))
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateValue {
    pub measure: String,
    /// `entropy_dict(mu) + ∫phi dmu`.
    pub dual_value: f64,
    pub entropy: f64,
    pub attaining_potential: String,
}

/// Result of scanning candidate measures against one potential.
#[derive(Debug, Clone, Serialize)]
pub struct VariationalReport {
    pub phi_label: String,
    pub gamma_value: f64,
    pub argmax: String,
    /// `Gamma(phi) - max_mu (entropy_dict(mu) + ∫phi dmu)`; nonnegative by
    /// weak duality, small when the candidate family nearly attains the max.
    pub gap: f64,
    pub candidates: Vec<CandidateValue>,
}

/// Evaluates `g(mu) = entropy_dict(mu) + ∫phi dmu` over the candidates.
pub fn variational_check(
    dict: &PotentialDictionary,
    gamma: &GammaTable,
    candidates: &[Measure],
    phi_label: &str,
) -> Result<VariationalReport> {
    let entry = dict
        .get(phi_label)
        .ok_or_else(|| NadsError::UnknownLabel(phi_label.to_string()))?;
    let gamma_value = gamma.value(phi_label)?;
    if candidates.is_empty() {
        return Err(NadsError::InvalidArgument(
            "variational_check needs at least one candidate measure".into(),
        ));
    }
    let mut rows = Vec::new();
    for mu in candidates {
        let (entropy, attaining) = entropy_dict(dict, gamma, mu)?;
        rows.push(CandidateValue {
            measure: mu.label.clone(),
            dual_value: entropy + integrate(&entry.values, mu),
            entropy,
            attaining_potential: attaining,
        });
    }
    let best = rows
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.dual_value.partial_cmp(&b.dual_value).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    Ok(VariationalReport {
        phi_label: phi_label.to_string(),
        gamma_value,
        argmax: rows[best].measure.clone(),
        gap: gamma_value - rows[best].dual_value,
        candidates: rows,
    })
}

/// A coboundary-family certificate that a measure is not invariant
/// (relative to the pressure estimates).
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub label: String,
    pub psi: String,
    pub step: usize,
    pub scaling: i64,
    pub integral: f64,
    pub gamma_value: f64,
    /// `∫w dmu - Gamma(w)`; positive breaks the invariant-measure bound.
    pub margin: f64,
}

/// Searches the scaled-coboundary entries for one with
/// `∫w dmu > Gamma(w) + tol`. For any invariant measure every coboundary
/// integrates to zero while `Gamma(w) >= 0`, so no witness can exist.
pub fn non_invariance_witness(
    dict: &PotentialDictionary,
    gamma: &GammaTable,
    mu: &Measure,
    tol: f64,
) -> Result<Option<Witness>> {
    let mut best: Option<Witness> = None;
    for entry in &dict.entries {
        let EntryKind::Coboundary { psi, step, scaling } = &entry.kind else {
            continue;
        };
        let integral = integrate(&entry.values, mu);
        let gamma_value = gamma.value(&entry.label)?;
        let margin = integral - gamma_value;
        if margin > tol && best.as_ref().map_or(true, |w| margin > w.margin) {
            best = Some(Witness {
                label: entry.label.clone(),
                psi: psi.clone(),
                step: *step,
                scaling: *scaling,
                integral,
                gamma_value,
                margin,
            });
        }
    }
    Ok(best)
}

/// Finite surrogate of the star-entropy: the upper envelope of assigned
/// entropy values over the candidates within `eta` of `mu` in total
/// variation. Dominates `h(mu)` pointwise on the candidate set.
pub fn star_entropy_dict(h_values: &[(Measure, f64)], mu: &Measure, eta: f64) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(NadsError::InvalidArgument("star entropy needs eta > 0".into()));
    }
    let mut best = f64::NEG_INFINITY;
    let mut seen = false;
    for (nu, h) in h_values {
        if nu.len() != mu.len() {
            return Err(NadsError::InvalidArgument(
                "measure lives on a different space than the candidate set".into(),
            ));
        }
        if nu.tv_distance(mu) <= eta {
            seen = true;
            best = best.max(*h);
        }
    }
    if !seen {
        return Err(NadsError::InvalidArgument(
            "no candidate within eta of the measure".into(),
        ));
    }
    Ok(best)
}

/// Default candidate measures for variational scans: uniform, a spread of
/// Diracs, empirical orbit measures, and the solver's invariant measure
/// when one exists.
pub fn candidate_measures(seq: &MapSequence, horizon: usize, bound: usize) -> Result<Vec<Measure>> {
    let npts = seq.space().len();
    let mut out = vec![Measure::uniform("uniform", npts)];
    let picks = 8.min(npts);
    for i in 0..picks {
        let at = i * npts / picks;
        out.push(Measure::dirac(format!("dirac:{at}"), npts, at));
    }
    for i in 0..picks.min(4) {
        let at = i * npts / picks.min(4);
        let orbit = composition_orbit(seq, at, horizon)?;
        let mut weights = vec![0.0; npts];
        let mass = 1.0 / orbit.entries.len() as f64;
        for &p in &orbit.entries {
            weights[p] += mass;
        }
        out.push(Measure {
            label: format!("orbit:{at}"),
            weights,
        });
    }
    if let crate::measures::InvarianceOutcome::Feasible(mut m) =
        crate::measures::find_common_invariant(seq, bound)?
    {
        m.label = "invariant:solver".into();
        out.push(m);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct ItemA {
    pub rows: Vec<VariationalReport>,
    pub argmax_defects: Vec<(String, f64)>,
    /// None when the invariant set is empty (hypothesis fails).
    pub passed: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ItemB {
    pub invariant_values: Vec<(String, f64)>,
    pub noninvariant_values: Vec<(String, f64, Option<Witness>)>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ItemCRow {
    pub measure: String,
    pub h_assigned: f64,
    pub entropy_dict: f64,
    pub star_entropy: f64,
    pub observed_order: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ItemC {
    pub rows: Vec<ItemCRow>,
    pub violations: Vec<String>,
    pub skipped_reason: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ItemD {
    /// `(phi, gap)` where gap = Gamma(phi) - max over the invariant set of
    /// `entropy_dict + ∫phi`.
    pub gaps: Vec<(String, f64)>,
    pub zero_gap: Option<f64>,
    pub skipped_reason: Option<String>,
    pub passed: Option<bool>,
}

/// Where the gamma values came from: the shared estimation grid.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub system: String,
    pub mode: Mode,
    pub schedule: Vec<usize>,
    pub scales: Vec<f64>,
    pub dictionary_size: usize,
    pub closure: ClosureParams,
}

/// Diagnostic report for the variational-principle consequences.
#[derive(Debug, Clone, Serialize)]
pub struct TheoremBReport {
    pub provenance: Provenance,
    pub tolerances: ReportTolerances,
    pub invariant_set: Vec<String>,
    pub item_a: ItemA,
    pub item_b: ItemB,
    pub item_c: ItemC,
    pub item_d: ItemD,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportTolerances {
    pub argmax_defect: f64,
    pub invariant_floor: f64,
    pub witness_drive: f64,
    pub zero_gap: f64,
    pub witness_margin: f64,
    pub star_eta: f64,
}

impl Default for ReportTolerances {
    fn default() -> Self {
        ReportTolerances {
            argmax_defect: 0.05,
            invariant_floor: 0.05,
            witness_drive: -1.0,
            zero_gap: 0.15,
            witness_margin: 1e-6,
            star_eta: 0.25,
        }
    }
}

/// Assembles the four diagnostic items: (a) maximizers should be invariant,
/// (b) the entropy bound separates invariant from refuted measures,
/// (c) the observed ordering of the three entropy quantities,
/// (d) how closely the invariant family attains the pressure.
#[allow(clippy::too_many_arguments)]
pub fn theorem_b_report(
    seq: &MapSequence,
    dict: &PotentialDictionary,
    gamma: &GammaTable,
    invariant_set: &[Measure],
    noninvariant: &[Measure],
    candidates: &[Measure],
    h_assign: Option<&BTreeMap<String, f64>>,
    tols: &ReportTolerances,
) -> Result<TheoremBReport> {
    let base_labels: Vec<String> = dict
        .entries
        .iter()
        .filter(|e| matches!(e.kind, EntryKind::Zero | EntryKind::Base))
        .map(|e| e.label.clone())
        .collect();
    // item (a) judges the argmax against the unscaled potentials: empirical
    // orbit measures are near-invariant (their defect telescopes like
    // 1/horizon) and may legitimately attain the scan maximum, while far-
    // from-invariant Diracs must not
    let defect_dict: Vec<(String, Vec<f64>)> = dict
        .entries
        .iter()
        .filter(|e| matches!(e.kind, EntryKind::Zero | EntryKind::Base | EntryKind::Constant))
        .map(|e| (e.label.clone(), e.values.clone()))
        .collect();
    let bound = dict.closure.coboundary_steps;

    // (a) argmax of the variational scan should be (near-)invariant
    let mut rows = Vec::new();
    let mut argmax_defects = Vec::new();
    let mut a_pass = true;
    for label in &base_labels {
        let report = variational_check(dict, gamma, candidates, label)?;
        let argmax = candidates
            .iter()
            .find(|m| m.label == report.argmax)
            .expect("argmax comes from candidates");
        let defect = invariance_defect(seq, argmax, &defect_dict, bound);
        a_pass &= defect <= tols.argmax_defect;
        argmax_defects.push((report.argmax.clone(), defect));
        rows.push(report);
    }
    let item_a = ItemA {
        rows,
        argmax_defects,
        passed: if invariant_set.is_empty() {
            None
        } else {
            Some(a_pass)
        },
    };

    // (b) entropy_dict >= -tol on invariant measures; witnesses drive the
    // supplied non-invariant measures below the threshold
    let mut invariant_values = Vec::new();
    let mut b_pass = true;
    for mu in invariant_set {
        let (h, _) = entropy_dict(dict, gamma, mu)?;
        b_pass &= h >= -tols.invariant_floor;
        invariant_values.push((mu.label.clone(), h));
        if non_invariance_witness(dict, gamma, mu, tols.witness_margin)?.is_some() {
            b_pass = false;
        }
    }
    let mut noninvariant_values = Vec::new();
    for mu in noninvariant {
        let (h, _) = entropy_dict(dict, gamma, mu)?;
        let witness = non_invariance_witness(dict, gamma, mu, tols.witness_margin)?;
        b_pass &= h <= tols.witness_drive && witness.is_some();
        noninvariant_values.push((mu.label.clone(), h, witness));
    }
    let item_b = ItemB {
        invariant_values,
        noninvariant_values,
        passed: b_pass,
    };

    // (c) observed ordering of h, the dictionary entropy and the envelope
    let item_c = if invariant_set.is_empty() {
        ItemC {
            rows: Vec::new(),
            violations: Vec::new(),
            skipped_reason: Some("invariant set is empty".into()),
        }
    } else {
        let mut h_values = Vec::new();
        for mu in invariant_set {
            let assigned = match h_assign.and_then(|m| m.get(&mu.label).copied()) {
                Some(v) => v,
                None => entropy_dict(dict, gamma, mu)?.0,
            };
            h_values.push((mu.clone(), assigned));
        }
        let mut rows = Vec::new();
        let mut violations = Vec::new();
        for mu in invariant_set {
            let h_assigned = h_values
                .iter()
                .find(|(m, _)| m.label == mu.label)
                .map(|(_, h)| *h)
                .unwrap();
            let (hd, _) = entropy_dict(dict, gamma, mu)?;
            let star = star_entropy_dict(&h_values, mu, tols.star_eta)?;
            let mut quantities = [("h", h_assigned), ("entropy_dict", hd), ("star", star)];
            quantities.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
            let observed = quantities.map(|(n, _)| n).join(" <= ");
            if h_assigned < -1e-9 {
                violations.push(format!("{}: assigned entropy negative", mu.label));
            }
            if h_assigned > hd + 1e-9 {
                violations.push(format!(
                    "{}: assigned entropy above the dual bound",
                    mu.label
                ));
            }
            rows.push(ItemCRow {
                measure: mu.label.clone(),
                h_assigned,
                entropy_dict: hd,
                star_entropy: star,
                observed_order: observed,
            });
        }
        ItemC {
            rows,
            violations,
            skipped_reason: None,
        }
    };

    // (d) gap between Gamma and the invariant family, per potential
    let item_d = if invariant_set.is_empty() {
        ItemD {
            gaps: Vec::new(),
            zero_gap: None,
            skipped_reason: Some("invariant set is empty".into()),
            passed: None,
        }
    } else {
        let mut gaps = Vec::new();
        let mut zero_gap = None;
        for entry in &dict.entries {
            let mut best = f64::NEG_INFINITY;
            for mu in invariant_set {
                let (h, _) = entropy_dict(dict, gamma, mu)?;
                best = best.max(h + integrate(&entry.values, mu));
            }
            let gap = gamma.value(&entry.label)? - best;
            if entry.label == "zero" {
                zero_gap = Some(gap);
            }
            gaps.push((entry.label.clone(), gap));
        }
        let passed = zero_gap.map(|g| g.abs() <= tols.zero_gap);
        ItemD {
            gaps,
            zero_gap,
            skipped_reason: None,
            passed,
        }
    };

    let mut notes = vec![
        "entropy_dict is an upper bound on the conjugate entropy: values below the floor refute invariance; nonnegative values are a necessary check, not a proof".to_string(),
        "upper semi-continuity of the entropy map is a theoretical property of the limit objects and is not certified by these finite estimates".to_string(),
    ];
    if invariant_set.is_empty() {
        notes.push(
            "no common invariant measure: the space of invariant measures is empty for this system"
                .to_string(),
        );
    }

    Ok(TheoremBReport {
        provenance: Provenance {
            system: seq.label().to_string(),
            mode: gamma.mode,
            schedule: gamma.schedule.clone(),
            scales: gamma.scales.clone(),
            dictionary_size: dict.entries.len(),
            closure: dict.closure,
        },
        tolerances: ReportTolerances { ..*tols },
        invariant_set: invariant_set.iter().map(|m| m.label.clone()).collect(),
        item_a,
        item_b,
        item_c,
        item_d,
        notes,
    })
}
