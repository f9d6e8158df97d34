use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Document, Relation, Token};
use crate::error::{Error, Result};

/// On-disk document record. Paragraph breaks are derived on load, so they
/// are never written.
#[derive(Debug, Serialize, Deserialize)]
struct DocumentRecord {
    doc_id: String,
    source_text: String,
    tokens: Vec<Token>,
}

pub(crate) fn read_jsonl<T, F>(path: &Path, mut each: F) -> Result<()>
where
    T: for<'de> Deserialize<'de>,
    F: FnMut(T) -> Result<()>,
{
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: T = serde_json::from_str(&line)
            .map_err(|e| Error::parse(path, lineno + 1, e.to_string()))?;
        each(record)?;
    }
    Ok(())
}

pub(crate) fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut out, item)
            .map_err(|e| Error::parse(path, 0, format!("serialization failed: {e}")))?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Reads documents from JSON Lines, one object per document, rebuilding
/// paragraph breaks from the source text.
pub fn load_documents(path: impl AsRef<Path>) -> Result<Vec<Document>> {
    let path = path.as_ref();
    let mut docs = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    read_jsonl(path, |rec: DocumentRecord| {
        if let Some(prev) = seen.insert(rec.doc_id.clone(), docs.len()) {
            return Err(Error::validation(
                format!("<document {}>", rec.doc_id),
                format!("doc_id also used by document record {prev}"),
            ));
        }
        docs.push(Document::new(rec.doc_id, rec.source_text, rec.tokens)?);
        Ok(())
    })?;
    Ok(docs)
}

/// Reads relations from JSON Lines without validating them against any
/// document set.
pub fn load_relations(path: impl AsRef<Path>) -> Result<Vec<Relation>> {
    let mut rels = Vec::new();
    read_jsonl(path.as_ref(), |rel: Relation| {
        rels.push(rel);
        Ok(())
    })?;
    Ok(rels)
}

pub fn save_documents(path: impl AsRef<Path>, documents: &[Document]) -> Result<()> {
    let records: Vec<DocumentRecord> = documents
        .iter()
        .map(|d| DocumentRecord {
            doc_id: d.doc_id.clone(),
            source_text: d.source_text.clone(),
            tokens: d.tokens.clone(),
        })
        .collect();
    write_jsonl(path.as_ref(), &records)
}

pub fn save_relations(path: impl AsRef<Path>, relations: &[Relation]) -> Result<()> {
    write_jsonl(path.as_ref(), relations)
}

/// Loads a gold corpus from a documents file and a relations file.
///
/// Every returned relation is bounds-checked against its document; a
/// relation naming an unknown document or an out-of-range token index is an
/// error. Relations whose components overlap each other are rejected with a
/// warning and dropped rather than repaired.
pub fn load_conll_corpus(
    documents_file: impl AsRef<Path>,
    relations_file: impl AsRef<Path>,
) -> Result<(Vec<Document>, Vec<Relation>)> {
    let documents = load_documents(documents_file)?;
    let by_id: HashMap<&str, &Document> =
        documents.iter().map(|d| (d.doc_id.as_str(), d)).collect();

    let mut relations = Vec::new();
    for rel in load_relations(relations_file)? {
        let doc = by_id.get(rel.doc_id.as_str()).copied().ok_or_else(|| {
            Error::validation(
                rel.relation_id.clone(),
                format!("references unknown document {}", rel.doc_id),
            )
        })?;
        rel.check_bounds(doc)?;
        if !rel.components_disjoint() {
            log::warn!(
                "relation {}: connective/arg1/arg2 overlap; relation dropped",
                rel.relation_id
            );
            continue;
        }
        relations.push(rel);
    }
    Ok((documents, relations))
}
