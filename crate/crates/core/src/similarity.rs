//! TF-IDF vectorization and cosine scoring of a message against candidate
//! templates.
//!
//! The document set is built per comparison from the message (document 0)
//! and its candidates. Bare `<*>` tokens are dropped before counting; masked
//! tokens are ordinary terms.
//!
//! * `tf(t, d)  = count(t, d) / |d|`
//! * `idf(t, D) = ln(|D| / df(t)) + 1`
//! * `w(t, d)   = tf(t, d) * idf(t, D)`

use std::collections::HashMap;

use crate::model::{TemplateId, Token, WILDCARD};

/// Documents over a dense vocabulary.
#[derive(Debug, Clone)]
pub struct DocumentSet {
    docs: Vec<Vec<usize>>,
    vocabulary: HashMap<String, usize>,
    doc_freq: Vec<usize>,
}

impl DocumentSet {
    /// Builds the set, skipping bare wildcard terms. Vocabulary dimensions
    /// are assigned in first-seen order.
    pub fn new<D, T>(docs: impl IntoIterator<Item = D>) -> DocumentSet
    where
        D: IntoIterator<Item = T>,
        T: AsRef<str>,
    {
        let mut vocabulary: HashMap<String, usize> = HashMap::new();
        let mut doc_freq: Vec<usize> = Vec::new();
        let mut out = Vec::new();
        for doc in docs {
            let mut ids = Vec::new();
            for term in doc {
                let term = term.as_ref();
                if term == WILDCARD {
                    continue;
                }
                let next = vocabulary.len();
                let id = *vocabulary.entry(term.to_string()).or_insert(next);
                if id == doc_freq.len() {
                    doc_freq.push(0);
                }
                ids.push(id);
            }
            let mut seen = ids.clone();
            seen.sort_unstable();
            seen.dedup();
            for id in seen {
                doc_freq[id] += 1;
            }
            out.push(ids);
        }
        DocumentSet {
            docs: out,
            vocabulary,
            doc_freq,
        }
    }

    pub fn from_tokens<'a>(docs: impl IntoIterator<Item = &'a [Token]>) -> DocumentSet {
        DocumentSet::new(docs.into_iter().map(|d| d.iter().map(Token::text)))
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn dimensions(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn vocabulary(&self) -> &HashMap<String, usize> {
        &self.vocabulary
    }

    pub fn document_frequency(&self, term: &str) -> usize {
        self.vocabulary.get(term).map_or(0, |&i| self.doc_freq[i])
    }

    /// IDF of `term` within this set; `None` if the term is absent.
    pub fn idf(&self, term: &str) -> Option<f64> {
        match self.document_frequency(term) {
            0 => None,
            df => Some(inverse_document_frequency(self.len(), df)),
        }
    }
}

/// Share of `doc` taken by `term`. `doc` must be non-empty.
pub fn term_frequency<T: AsRef<str>>(term: &str, doc: &[T]) -> f64 {
    assert!(!doc.is_empty(), "term frequency of an empty document");
    let count = doc.iter().filter(|t| t.as_ref() == term).count();
    count as f64 / doc.len() as f64
}

/// `ln(n_docs / df) + 1`. `df` must be at least 1.
pub fn inverse_document_frequency(n_docs: usize, df: usize) -> f64 {
    assert!(df >= 1 && df <= n_docs, "document frequency {df} out of range for {n_docs} docs");
    (n_docs as f64 / df as f64).ln() + 1.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct TfidfVector(pub Vec<f64>);

impl TfidfVector {
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &TfidfVector) -> f64 {
        assert_eq!(self.0.len(), other.0.len(), "vector dimension mismatch");
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }
}

pub fn vectorize(docs: &DocumentSet) -> Vec<TfidfVector> {
    vectorize_with(docs, inverse_document_frequency)
}

/// Vectorizes with a caller-supplied IDF of `(n_docs, df)`.
pub fn vectorize_with(docs: &DocumentSet, idf: impl Fn(usize, usize) -> f64) -> Vec<TfidfVector> {
    let n = docs.len();
    let idf: Vec<f64> = docs.doc_freq.iter().map(|&df| idf(n, df)).collect();
    docs.docs
        .iter()
        .map(|doc| {
            let mut w = vec![0.0; idf.len()];
            if doc.is_empty() {
                return TfidfVector(w);
            }
            for &term in doc {
                w[term] += 1.0;
            }
            let len = doc.len() as f64;
            for (weight, idf) in w.iter_mut().zip(&idf) {
                *weight = *weight / len * idf;
            }
            TfidfVector(w)
        })
        .collect()
}

/// Normalized dot product; 0 when either vector is zero.
pub fn cosine(a: &TfidfVector, b: &TfidfVector) -> f64 {
    let dot = a.dot(b);
    let norms = a.norm() * b.norm();
    if norms == 0.0 {
        0.0
    } else {
        dot / norms
    }
}

/// Highest-scoring candidate against `query`, ties going to the smaller ID.
pub fn best_candidate(query: &[Token], candidates: &[(TemplateId, &[Token])]) -> Option<(TemplateId, f64)> {
    let docs = DocumentSet::from_tokens(std::iter::once(query).chain(candidates.iter().map(|(_, t)| *t)));
    let vectors = vectorize(&docs);
    let (q, rest) = vectors.split_first()?;
    let mut best: Option<(TemplateId, f64)> = None;
    for ((id, _), v) in candidates.iter().zip(rest) {
        let score = cosine(q, v);
        best = match best {
            Some((bid, bscore)) if bscore > score || (bscore == score && bid < *id) => Some((bid, bscore)),
            _ => Some((*id, score)),
        };
    }
    best
}
