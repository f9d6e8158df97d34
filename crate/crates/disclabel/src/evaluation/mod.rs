//! Exact-match scoring of predicted relations against gold annotations,
//! plus subset filters and error breakdowns.
//!
//! A predicted relation can only be matched to a gold relation with the
//! identical connective token set; relations are anchored on connectives,
//! so alignment follows the anchor. Within each such group the matcher
//! pairs as many relations as possible and picks the assignment that
//! maximizes, in order: pairs with both arguments exact, then arg1-exact
//! pairs, then arg2-exact pairs, preferring document order on ties. Exact
//! match means token-index-set equality; there is no partial credit.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{Document, Relation, TokenSpan};
use crate::error::{Error, Result};

/// Minimum length of the unrelated token run between arg1 and the
/// connective for a relation to count as discontinuous.
pub const DISCONTINUITY_GAP: usize = 5;

/// Groups larger than this fall back from exhaustive assignment to staged
/// greedy matching. Identical connective spans are rare, so real groups
/// hold one or two relations; the cap only guards against degenerate input.
const EXACT_SEARCH_CAP: usize = 8;

/// One matched prediction/gold pair with per-component equality flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchedPair {
    /// Index into the predicted slice given to [`match_relations`].
    pub predicted: usize,
    /// Index into the gold slice.
    pub gold: usize,
    pub connective: bool,
    pub arg1: bool,
    pub arg2: bool,
}

/// One-to-one alignment between a predicted and a gold relation set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchResult {
    pub pairs: Vec<MatchedPair>,
    pub unmatched_predicted: Vec<usize>,
    pub unmatched_gold: Vec<usize>,
    pub n_predicted: usize,
    pub n_gold: usize,
}

fn check_unique_ids(relations: &[Relation], side: &str) -> Result<()> {
    let mut seen = HashSet::new();
    for rel in relations {
        if !seen.insert(rel.relation_id.as_str()) {
            return Err(Error::Evaluation(format!(
                "duplicate relation id {} in the {side} set",
                rel.relation_id
            )));
        }
    }
    Ok(())
}

/// Per-pair equality features within one connective group.
fn features(pred: &Relation, gold: &Relation) -> (bool, bool) {
    (pred.arg1 == gold.arg1, pred.arg2 == gold.arg2)
}

type Assignment = Vec<Option<usize>>;

/// Exhaustive search for the assignment maximizing
/// `(both-exact, arg1-exact, arg2-exact)` lexicographically. Predictions
/// are processed in document order and candidate golds tried in document
/// order, so the first-found maximum realizes the document-order tie-break.
fn exact_assign(feat: &[Vec<(bool, bool)>], ng: usize) -> Assignment {
    let np = feat.len();
    let k = np.min(ng);
    let skip_quota = np - k;

    struct Search<'a> {
        feat: &'a [Vec<(bool, bool)>],
        used: Vec<bool>,
        current: Assignment,
        best: Option<((u32, u32, u32), Assignment)>,
    }

    impl Search<'_> {
        fn run(&mut self, pi: usize, skips_left: usize, counts: (u32, u32, u32)) {
            if pi == self.feat.len() {
                if self.best.as_ref().is_none_or(|(b, _)| counts > *b) {
                    self.best = Some((counts, self.current.clone()));
                }
                return;
            }
            for gj in 0..self.used.len() {
                if self.used[gj] {
                    continue;
                }
                let (a1, a2) = self.feat[pi][gj];
                let gained = (
                    counts.0 + u32::from(a1 && a2),
                    counts.1 + u32::from(a1),
                    counts.2 + u32::from(a2),
                );
                self.used[gj] = true;
                self.current[pi] = Some(gj);
                self.run(pi + 1, skips_left, gained);
                self.used[gj] = false;
                self.current[pi] = None;
            }
            if skips_left > 0 {
                self.run(pi + 1, skips_left - 1, counts);
            }
        }
    }

    let mut search = Search {
        feat,
        used: vec![false; ng],
        current: vec![None; np],
        best: None,
    };
    search.run(0, skip_quota, (0, 0, 0));
    search.best.map(|(_, a)| a).unwrap_or_else(|| vec![None; np])
}

/// Staged greedy fallback for oversized groups: pair both-exact first, then
/// arg1-exact, then arg2-exact, then whatever remains, always in document
/// order.
fn greedy_assign(feat: &[Vec<(bool, bool)>], ng: usize) -> Assignment {
    let np = feat.len();
    let mut assignment: Assignment = vec![None; np];
    let mut used = vec![false; ng];
    let mut left = np.min(ng);
    let stages: [&dyn Fn(bool, bool) -> bool; 4] = [
        &|a1, a2| a1 && a2,
        &|a1, _| a1,
        &|_, a2| a2,
        &|_, _| true,
    ];
    for stage in stages {
        for pi in 0..np {
            if assignment[pi].is_some() || left == 0 {
                continue;
            }
            for gj in 0..ng {
                if used[gj] {
                    continue;
                }
                let (a1, a2) = feat[pi][gj];
                if stage(a1, a2) {
                    assignment[pi] = Some(gj);
                    used[gj] = true;
                    left -= 1;
                    break;
                }
            }
        }
    }
    assignment
}

/// Aligns predictions to gold relations one-to-one.
///
/// Relations are first grouped by `(doc_id, connective token set)`; only
/// relations with identical connectives can pair up. Each group is solved
/// for the lexicographically best `(both, arg1, arg2)` exact-pair counts,
/// matching as many relations as the smaller side allows.
///
/// Errors on duplicate relation ids within either input.
pub fn match_relations(predicted: &[Relation], gold: &[Relation]) -> Result<MatchResult> {
    // Indices into `predicted` and `gold` sharing one connective span.
    type Group = (Vec<usize>, Vec<usize>);

    check_unique_ids(predicted, "predicted")?;
    check_unique_ids(gold, "gold")?;

    let mut groups: BTreeMap<(&str, &TokenSpan), Group> = BTreeMap::new();
    for (i, rel) in predicted.iter().enumerate() {
        groups.entry((rel.doc_id.as_str(), &rel.connective)).or_default().0.push(i);
    }
    for (j, rel) in gold.iter().enumerate() {
        groups.entry((rel.doc_id.as_str(), &rel.connective)).or_default().1.push(j);
    }

    let mut pairs = Vec::new();
    for (preds, golds) in groups.values() {
        if preds.is_empty() || golds.is_empty() {
            continue;
        }
        let feat: Vec<Vec<(bool, bool)>> = preds
            .iter()
            .map(|&pi| golds.iter().map(|&gj| features(&predicted[pi], &gold[gj])).collect())
            .collect();
        let assignment = if preds.len().max(golds.len()) <= EXACT_SEARCH_CAP {
            exact_assign(&feat, golds.len())
        } else {
            log::warn!(
                "{} predictions share one connective span in {}; using staged greedy matching",
                preds.len().max(golds.len()),
                predicted.get(preds[0]).map_or("?", |r| r.doc_id.as_str())
            );
            greedy_assign(&feat, golds.len())
        };
        for (slot, &pi) in assignment.iter().zip(preds) {
            let Some(gj_local) = slot else { continue };
            let gj = golds[*gj_local];
            let (a1, a2) = features(&predicted[pi], &gold[gj]);
            pairs.push(MatchedPair {
                predicted: pi,
                gold: gj,
                connective: true,
                arg1: a1,
                arg2: a2,
            });
        }
    }
    pairs.sort_by_key(|p| p.predicted);

    let matched_p: HashSet<usize> = pairs.iter().map(|p| p.predicted).collect();
    let matched_g: HashSet<usize> = pairs.iter().map(|p| p.gold).collect();
    Ok(MatchResult {
        pairs,
        unmatched_predicted: (0..predicted.len()).filter(|i| !matched_p.contains(i)).collect(),
        unmatched_gold: (0..gold.len()).filter(|j| !matched_g.contains(j)).collect(),
        n_predicted: predicted.len(),
        n_gold: gold.len(),
    })
}

/// Counts and rates for one scored component. Rates live in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentScore {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl ComponentScore {
    fn new(tp: usize, n_predicted: usize, n_gold: usize) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(tp, n_predicted);
        let recall = ratio(tp, n_gold);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        ComponentScore {
            true_positives: tp,
            false_positives: n_predicted - tp,
            false_negatives: n_gold - tp,
            precision,
            recall,
            f1,
        }
    }
}

/// Exact-match precision/recall/F1 for the connective, each argument, and
/// both arguments jointly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub connective: ComponentScore,
    pub arg1: ComponentScore,
    pub arg2: ComponentScore,
    pub arg1_arg2: ComponentScore,
    pub n_predicted: usize,
    pub n_gold: usize,
}

impl ScoreReport {
    pub fn components(&self) -> [(&'static str, &ComponentScore); 4] {
        [
            ("connective", &self.connective),
            ("arg1", &self.arg1),
            ("arg2", &self.arg2),
            ("arg1+arg2", &self.arg1_arg2),
        ]
    }
}

/// Turns an alignment into the four component scores.
///
/// A pair contributes a true positive to a component only when the token
/// sets are exactly equal; arg1+arg2 needs both inside the same pair.
/// Unmatched predictions are false positives everywhere, unmatched gold
/// relations false negatives everywhere.
pub fn score(result: &MatchResult) -> ScoreReport {
    let tp = |f: fn(&MatchedPair) -> bool| result.pairs.iter().filter(|p| f(p)).count();
    let make = |tp: usize| ComponentScore::new(tp, result.n_predicted, result.n_gold);
    ScoreReport {
        connective: make(tp(|p| p.connective)),
        arg1: make(tp(|p| p.arg1)),
        arg2: make(tp(|p| p.arg2)),
        arg1_arg2: make(tp(|p| p.arg1 && p.arg2)),
        n_predicted: result.n_predicted,
        n_gold: result.n_gold,
    }
}

/// Matches and scores in one step.
pub fn evaluate(predicted: &[Relation], gold: &[Relation]) -> Result<ScoreReport> {
    Ok(score(&match_relations(predicted, gold)?))
}

fn pct(x: f64) -> f64 {
    x * 100.0
}

impl fmt::Display for ScoreReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} predicted vs {} gold relations", self.n_predicted, self.n_gold)?;
        writeln!(
            f,
            "{:<12} {:>8} {:>8} {:>8} {:>6} {:>6} {:>6}",
            "component", "P", "R", "F1", "TP", "FP", "FN"
        )?;
        for (name, c) in self.components() {
            writeln!(
                f,
                "{:<12} {:>8.2} {:>8.2} {:>8.2} {:>6} {:>6} {:>6}",
                name,
                pct(c.precision),
                pct(c.recall),
                pct(c.f1),
                c.true_positives,
                c.false_positives,
                c.false_negatives
            )?;
        }
        Ok(())
    }
}

/// Mean and spread of one component across runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateComponent {
    pub mean_precision: f64,
    pub mean_recall: f64,
    pub mean_f1: f64,
    /// Sample standard deviation of F1; zero for a single run.
    pub std_f1: f64,
}

/// Scores averaged over several runs (typically one per seed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub n_runs: usize,
    pub connective: AggregateComponent,
    pub arg1: AggregateComponent,
    pub arg2: AggregateComponent,
    pub arg1_arg2: AggregateComponent,
    pub runs: Vec<ScoreReport>,
}

/// Averages per-run reports. Errors on an empty slice.
pub fn aggregate(reports: &[ScoreReport]) -> Result<AggregateReport> {
    if reports.is_empty() {
        return Err(Error::Evaluation("cannot aggregate zero score reports".into()));
    }
    let n = reports.len() as f64;
    let agg = |pick: fn(&ScoreReport) -> &ComponentScore| {
        let mean = |get: fn(&ComponentScore) -> f64| {
            reports.iter().map(|r| get(pick(r))).sum::<f64>() / n
        };
        let mean_f1 = mean(|c| c.f1);
        let var = if reports.len() > 1 {
            reports.iter().map(|r| (pick(r).f1 - mean_f1).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        AggregateComponent {
            mean_precision: mean(|c| c.precision),
            mean_recall: mean(|c| c.recall),
            mean_f1,
            std_f1: var.sqrt(),
        }
    };
    Ok(AggregateReport {
        n_runs: reports.len(),
        connective: agg(|r| &r.connective),
        arg1: agg(|r| &r.arg1),
        arg2: agg(|r| &r.arg2),
        arg1_arg2: agg(|r| &r.arg1_arg2),
        runs: reports.to_vec(),
    })
}

impl fmt::Display for AggregateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mean over {} runs", self.n_runs)?;
        writeln!(f, "{:<12} {:>8} {:>8} {:>8} {:>8}", "component", "P", "R", "F1", "F1 sd")?;
        for (name, c) in [
            ("connective", &self.connective),
            ("arg1", &self.arg1),
            ("arg2", &self.arg2),
            ("arg1+arg2", &self.arg1_arg2),
        ] {
            writeln!(
                f,
                "{:<12} {:>8.2} {:>8.2} {:>8.2} {:>8.2}",
                name,
                pct(c.mean_precision),
                pct(c.mean_recall),
                pct(c.mean_f1),
                pct(c.std_f1)
            )?;
        }
        Ok(())
    }
}

/// Relations whose whole second argument precedes the first.
pub fn filter_arg2_first(relations: &[Relation]) -> Vec<Relation> {
    relations
        .iter()
        .filter(|r| match (r.arg2.last(), r.arg1.first()) {
            (Some(a2_last), Some(a1_first)) => a2_last < a1_first,
            _ => false,
        })
        .cloned()
        .collect()
}

/// Whether at least [`DISCONTINUITY_GAP`] consecutive tokens between the
/// arg1 extent and the connective belong to no part of the relation.
fn is_discontinuous(rel: &Relation) -> bool {
    let (Some((a_lo, a_hi)), Some((c_lo, c_hi))) = (rel.arg1.extent(), rel.connective.extent())
    else {
        return false;
    };
    let between = if a_hi < c_lo {
        a_hi + 1..c_lo
    } else if c_hi < a_lo {
        c_hi + 1..a_lo
    } else {
        return false;
    };
    let mut run = 0;
    let mut best = 0;
    for i in between {
        if rel.arg1.contains(i) || rel.arg2.contains(i) || rel.connective.contains(i) {
            run = 0;
        } else {
            run += 1;
            best = best.max(run);
        }
    }
    best >= DISCONTINUITY_GAP
}

/// Relations separated from their first argument by a long unrelated gap.
pub fn filter_discontinuous(relations: &[Relation]) -> Vec<Relation> {
    relations.iter().filter(|r| is_discontinuous(r)).cloned().collect()
}

/// One matched pair whose arg1 was close but not exact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NearMiss {
    pub predicted_id: String,
    pub gold_id: String,
    pub symmetric_difference: usize,
    /// Predicted start minus gold start, in tokens.
    pub start_delta: i64,
    /// Predicted end minus gold end, in tokens.
    pub end_delta: i64,
}

/// Boundary-error histogram over matched pairs failing arg1 equality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearMissReport {
    pub misses: Vec<NearMiss>,
    /// Misses whose symmetric difference is at most two tokens.
    pub n_within_two: usize,
    pub fraction_within_two: f64,
}

/// Summarizes how far off the arg1 spans of matched-but-wrong pairs were.
/// Pairs with an empty arg1 on either side are skipped, since a boundary
/// delta means nothing there.
pub fn near_miss_report(
    result: &MatchResult,
    predicted: &[Relation],
    gold: &[Relation],
) -> Result<NearMissReport> {
    check_sides(result, predicted, gold)?;
    let mut misses = Vec::new();
    for pair in result.pairs.iter().filter(|p| !p.arg1) {
        let p = &predicted[pair.predicted].arg1;
        let g = &gold[pair.gold].arg1;
        let (Some(pf), Some(pl), Some(gf), Some(gl)) = (p.first(), p.last(), g.first(), g.last())
        else {
            continue;
        };
        misses.push(NearMiss {
            predicted_id: predicted[pair.predicted].relation_id.clone(),
            gold_id: gold[pair.gold].relation_id.clone(),
            symmetric_difference: p.symmetric_difference_len(g),
            start_delta: pf as i64 - gf as i64,
            end_delta: pl as i64 - gl as i64,
        });
    }
    let n_within_two = misses.iter().filter(|m| m.symmetric_difference <= 2).count();
    let fraction_within_two = if misses.is_empty() {
        0.0
    } else {
        n_within_two as f64 / misses.len() as f64
    };
    Ok(NearMissReport { misses, n_within_two, fraction_within_two })
}

/// Connective errors sharing one lowercased surface form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceCount {
    pub surface: String,
    pub count: usize,
    /// Share of all errors on this side.
    pub fraction: f64,
    /// One `doc_id: …snippet…` line per occurrence.
    pub contexts: Vec<String>,
}

/// False-positive and false-negative connectives grouped by surface form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectiveErrorReport {
    pub false_positives: Vec<SurfaceCount>,
    pub false_negatives: Vec<SurfaceCount>,
    pub n_false_positives: usize,
    pub n_false_negatives: usize,
}

fn check_sides(result: &MatchResult, predicted: &[Relation], gold: &[Relation]) -> Result<()> {
    if result.n_predicted != predicted.len() || result.n_gold != gold.len() {
        return Err(Error::Evaluation(format!(
            "match result covers {} predicted / {} gold relations, got slices of {} / {}",
            result.n_predicted,
            result.n_gold,
            predicted.len(),
            gold.len()
        )));
    }
    Ok(())
}

fn surface_groups(
    indices: &[usize],
    relations: &[Relation],
    documents: &HashMap<&str, &Document>,
) -> Result<Vec<SurfaceCount>> {
    let total = indices.len();
    let mut groups: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for &i in indices {
        let rel = &relations[i];
        let doc = documents.get(rel.doc_id.as_str()).ok_or_else(|| {
            Error::Evaluation(format!(
                "relation {} refers to unknown document {}",
                rel.relation_id, rel.doc_id
            ))
        })?;
        let surface = rel
            .connective
            .iter()
            .filter(|&t| t < doc.len())
            .map(|t| doc.tokens[t].text.to_lowercase())
            .collect::<Vec<_>>()
            .join(" ");
        let (Some(first), Some(last)) = (rel.connective.first(), rel.connective.last()) else {
            continue;
        };
        let lo = first.saturating_sub(3);
        let hi = (last + 4).min(doc.len());
        let context = format!("{}: {}", rel.doc_id, doc.words(lo, hi).join(" "));
        groups.entry(surface).or_default().push(context);
    }
    let mut out: Vec<SurfaceCount> = groups
        .into_iter()
        .map(|(surface, contexts)| SurfaceCount {
            surface,
            count: contexts.len(),
            fraction: if total == 0 { 0.0 } else { contexts.len() as f64 / total as f64 },
            contexts,
        })
        .collect();
    out.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.surface.cmp(&b.surface)));
    Ok(out)
}

/// Groups unmatched predictions (false positives) and unmatched gold
/// relations (false negatives) by connective surface form.
pub fn connective_error_report(
    result: &MatchResult,
    predicted: &[Relation],
    gold: &[Relation],
    documents: &[Document],
) -> Result<ConnectiveErrorReport> {
    check_sides(result, predicted, gold)?;
    let by_id: HashMap<&str, &Document> =
        documents.iter().map(|d| (d.doc_id.as_str(), d)).collect();
    Ok(ConnectiveErrorReport {
        n_false_positives: result.unmatched_predicted.len(),
        n_false_negatives: result.unmatched_gold.len(),
        false_positives: surface_groups(&result.unmatched_predicted, predicted, &by_id)?,
        false_negatives: surface_groups(&result.unmatched_gold, gold, &by_id)?,
    })
}
