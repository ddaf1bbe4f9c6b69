//! Dynamic inverted index over template terms.
//!
//! Every non-wildcard token text of a template (constant or masked) is a
//! term. Posting lists hold template IDs in ascending order, which is also
//! creation order. A template appears at most once per posting list even if
//! it contains the term at several positions.

use std::collections::{BTreeMap, HashMap};
use std::io;

use crate::error::{Error, Result};
use crate::model::{Template, TemplateId, Token};

#[derive(Debug, Default, Clone)]
pub struct InvertedIndex {
    postings: HashMap<String, Vec<TemplateId>>,
    templates: Vec<Template>,
}

impl InvertedIndex {
    pub fn new() -> InvertedIndex {
        InvertedIndex::default()
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.postings.len()
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn template(&self, id: TemplateId) -> Option<&Template> {
        self.templates.get(id)
    }

    pub fn posting_list(&self, term: &str) -> Option<&[TemplateId]> {
        self.postings.get(term).map(Vec::as_slice)
    }

    /// Union of the posting lists of the query terms, ascending.
    pub fn search(&self, query: &[Token]) -> Vec<TemplateId> {
        let mut hits: Vec<TemplateId> = query
            .iter()
            .filter_map(|t| self.postings.get(t.text()))
            .flatten()
            .copied()
            .collect();
        hits.sort_unstable();
        hits.dedup();
        hits
    }

    /// Stores a new template and indexes its non-wildcard tokens.
    pub fn insert_template(&mut self, tokens: Vec<Token>) -> TemplateId {
        let id = self.templates.len();
        for tok in tokens.iter().filter(|t| !t.is_wildcard()) {
            let list = self.postings.entry(tok.text().to_string()).or_default();
            if list.last() != Some(&id) {
                list.push(id);
            }
        }
        self.templates.push(Template::new(id, tokens));
        id
    }

    /// Removes `id` from the posting list of `term`, dropping the term when
    /// its list becomes empty.
    pub fn retract_term(&mut self, term: &str, id: TemplateId) -> Result<()> {
        let violation = || Error::Consistency {
            term: term.to_string(),
            id,
        };
        let list = self.postings.get_mut(term).ok_or_else(violation)?;
        let pos = list.binary_search(&id).map_err(|_| violation())?;
        list.remove(pos);
        if list.is_empty() {
            self.postings.remove(term);
        }
        Ok(())
    }

    /// Makes position `pos` of template `id` a wildcard, retracting the old
    /// term once no other position of the template still carries it.
    /// Returns whether the template changed.
    pub fn generalize(&mut self, id: TemplateId, pos: usize) -> Result<bool> {
        let template = self.templates.get_mut(id).ok_or(Error::UnknownTemplate(id))?;
        let Some(old) = template.generalize(pos) else {
            return Ok(false);
        };
        let still_present = template
            .tokens()
            .iter()
            .any(|t| !t.is_wildcard() && t.text() == old.text());
        if !still_present {
            self.retract_term(old.text(), id)?;
        }
        Ok(true)
    }

    pub(crate) fn record_occurrence(&mut self, id: TemplateId) -> Result<()> {
        self.templates
            .get_mut(id)
            .ok_or(Error::UnknownTemplate(id))?
            .record_occurrence();
        Ok(())
    }

    /// Sorted copy of the live postings.
    pub fn snapshot(&self) -> BTreeMap<String, Vec<TemplateId>> {
        self.postings
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }

    /// Postings recomputed from the stored templates alone.
    pub fn rebuild(&self) -> BTreeMap<String, Vec<TemplateId>> {
        let mut out: BTreeMap<String, Vec<TemplateId>> = BTreeMap::new();
        for t in &self.templates {
            for tok in t.tokens().iter().filter(|t| !t.is_wildcard()) {
                let list = out.entry(tok.text().to_string()).or_default();
                if list.last() != Some(&t.id()) {
                    list.push(t.id());
                }
            }
        }
        out
    }

    /// Writes `term,posting_list` rows sorted by term, with 1-based IDs
    /// rendered as `[1,2]`.
    pub fn dump_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["Term", "PostingList"])?;
        for (term, ids) in self.snapshot() {
            let rendered = ids
                .iter()
                .map(|id| (id + 1).to_string())
                .collect::<Vec<_>>()
                .join(",");
            w.write_record([term, format!("[{rendered}]")])?;
        }
        w.flush().map_err(|e| Error::io("<index dump>", e))?;
        Ok(())
    }
}
