use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Document, Relation};
use crate::error::{Error, Result};

/// One cumulative histogram row: relations spanning fewer than `threshold`
/// words.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanStatsRow {
    pub threshold: usize,
    pub n_relations: usize,
    pub percentage: f64,
}

/// Span-length distribution over a relation set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanStats {
    pub rows: Vec<SpanStatsRow>,
    pub total_relations: usize,
    pub mean_span_length: f64,
}

impl fmt::Display for SpanStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<12} {:>10} {:>8}", "span length", "relations", "%")?;
        for row in &self.rows {
            writeln!(
                f,
                "{:<12} {:>10} {:>8.2}",
                format!("< {}", row.threshold),
                row.n_relations,
                row.percentage
            )?;
        }
        writeln!(f, "{:<12} {:>10}", "total", self.total_relations)?;
        write!(f, "{:<12} {:>10.2}", "mean length", self.mean_span_length)
    }
}

fn doc_index(documents: &[Document]) -> HashMap<&str, &Document> {
    documents.iter().map(|d| (d.doc_id.as_str(), d)).collect()
}

fn doc_for<'a>(
    by_id: &HashMap<&'a str, &'a Document>,
    relation: &Relation,
) -> Result<&'a Document> {
    by_id.get(relation.doc_id.as_str()).copied().ok_or_else(|| {
        Error::validation(
            relation.relation_id.clone(),
            format!("references unknown document {}", relation.doc_id),
        )
    })
}

/// Cumulative span-length histogram and mean.
///
/// Span length is the extent of a relation: word count from its first to its
/// last token inclusive, over the union of connective and both arguments.
/// Thresholds are sorted and deduplicated; a row counts relations with
/// length strictly below the threshold.
pub fn compute_span_stats(
    relations: &[Relation],
    documents: &[Document],
    thresholds: &[usize],
) -> Result<SpanStats> {
    if relations.is_empty() {
        return Err(Error::Evaluation(
            "span statistics need at least one relation (mean undefined)".into(),
        ));
    }
    let by_id = doc_index(documents);
    let mut lengths = Vec::with_capacity(relations.len());
    for rel in relations {
        rel.validate(doc_for(&by_id, rel)?)?;
        lengths.push(rel.span_length());
    }

    let mut cutoffs: Vec<usize> = thresholds.to_vec();
    cutoffs.sort_unstable();
    cutoffs.dedup();

    let total = lengths.len();
    let rows = cutoffs
        .into_iter()
        .map(|threshold| {
            let n = lengths.iter().filter(|&&len| len < threshold).count();
            SpanStatsRow {
                threshold,
                n_relations: n,
                percentage: n as f64 / total as f64 * 100.0,
            }
        })
        .collect();

    Ok(SpanStats {
        rows,
        total_relations: total,
        mean_span_length: lengths.iter().sum::<usize>() as f64 / total as f64,
    })
}

/// Fraction of relations whose three components all fall inside one
/// paragraph of their document.
pub fn same_paragraph_fraction(relations: &[Relation], documents: &[Document]) -> Result<f64> {
    if relations.is_empty() {
        return Err(Error::Evaluation(
            "same-paragraph fraction needs at least one relation".into(),
        ));
    }
    let by_id = doc_index(documents);
    let mut same = 0usize;
    for rel in relations {
        let doc = doc_for(&by_id, rel)?;
        rel.validate(doc)?;
        let (min, max) = rel.extent().expect("validated relation is nonempty");
        if doc.paragraph_index(min) == doc.paragraph_index(max) {
            same += 1;
        }
    }
    Ok(same as f64 / relations.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TokenSpan;

    fn doc(doc_id: &str, text: &str) -> Document {
        Document::from_raw_text(doc_id, text).unwrap()
    }

    fn rel(id: &str, doc_id: &str, conn: &[usize], a1: &[usize], a2: &[usize]) -> Relation {
        Relation {
            relation_id: id.into(),
            doc_id: doc_id.into(),
            connective: conn.iter().copied().collect::<TokenSpan>(),
            arg1: a1.iter().copied().collect(),
            arg2: a2.iter().copied().collect(),
            sense: None,
        }
    }

    #[test]
    fn single_relation_counts_under_larger_thresholds() {
        let docs = vec![doc("d", "a b c")];
        let rels = vec![rel("r", "d", &[1], &[0], &[2])];
        let stats = compute_span_stats(&rels, &docs, &[2, 3, 4, 25]).unwrap();
        let counts: Vec<usize> = stats.rows.iter().map(|r| r.n_relations).collect();
        assert_eq!(counts, vec![0, 0, 1, 1]);
        assert_eq!(stats.mean_span_length, 3.0);
        assert_eq!(stats.total_relations, 1);
    }

    #[test]
    fn histogram_matches_hand_count() {
        // Ten relations over one long document with extents
        // 3, 5, 5, 10, 24, 25, 30, 49, 50, 80.
        let text = (0..100).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ");
        let docs = vec![doc("d", &text)];
        let extents = [3usize, 5, 5, 10, 24, 25, 30, 49, 50, 80];
        let rels: Vec<Relation> = extents
            .iter()
            .enumerate()
            .map(|(i, &ext)| {
                rel(&format!("r{i}"), "d", &[1], &[0], &[ext - 1])
            })
            .collect();
        let stats = compute_span_stats(&rels, &docs, &[25, 50, 75, 100]).unwrap();
        let counts: Vec<usize> = stats.rows.iter().map(|r| r.n_relations).collect();
        // strict <: below 25 is {3,5,5,10,24}; below 50 adds {25,30,49};
        // below 75 adds {50}; below 100 adds {80}.
        assert_eq!(counts, vec![5, 8, 9, 10]);
        let mean = extents.iter().sum::<usize>() as f64 / 10.0;
        assert!((stats.mean_span_length - mean).abs() < 1e-12);
        assert!(stats
            .rows
            .windows(2)
            .all(|w| w[0].n_relations <= w[1].n_relations));
    }

    #[test]
    fn empty_relations_is_an_error() {
        assert!(compute_span_stats(&[], &[], &[25]).is_err());
        assert!(same_paragraph_fraction(&[], &[]).is_err());
    }

    #[test]
    fn unknown_document_names_relation() {
        let docs = vec![doc("d", "a b c")];
        let rels = vec![rel("r9", "missing", &[1], &[0], &[2])];
        let err = compute_span_stats(&rels, &docs, &[25]).unwrap_err();
        assert!(err.to_string().contains("r9"));
    }

    #[test]
    fn same_paragraph_fraction_counts_cross_paragraph_relations() {
        let docs = vec![doc("d", "a b c\n\nd e f")];
        let rels = vec![
            rel("in", "d", &[1], &[0], &[2]),
            rel("across", "d", &[1], &[0], &[4]),
        ];
        let frac = same_paragraph_fraction(&rels, &docs).unwrap();
        assert_eq!(frac, 0.5);
    }

    #[test]
    fn display_uses_two_decimal_percentages() {
        let docs = vec![doc("d", "a b c")];
        let rels = vec![rel("r", "d", &[1], &[0], &[2])];
        let stats = compute_span_stats(&rels, &docs, &[2, 25]).unwrap();
        let rendered = stats.to_string();
        assert!(rendered.contains("0.00"), "{rendered}");
        assert!(rendered.contains("100.00"), "{rendered}");
    }
}
