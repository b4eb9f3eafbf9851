//! Bilingual document collections, queries and comparable-document pairs.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Language tag such as `"en"` or `"ja"`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lang(String);

impl Lang {
    pub fn new(tag: impl Into<String>) -> Self {
        Lang(tag.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Lang {
    fn from(s: &str) -> Self {
        Lang::new(s)
    }
}

/// One entry of a bilingual collection.
///
/// Only `title`, `keywords` and `abstract_text` are indexable; everything
/// else is carried along as metadata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub lang: Lang,
    pub title: String,
    pub keywords: Vec<String>,
    pub abstract_text: String,
    /// Id of the comparable document in the other language, if any.
    pub pair_id: Option<String>,
}

impl Document {
    pub fn new(doc_id: impl Into<String>, lang: impl Into<Lang>) -> Self {
        Document {
            doc_id: doc_id.into(),
            lang: lang.into(),
            title: String::new(),
            keywords: Vec::new(),
            abstract_text: String::new(),
            pair_id: None,
        }
    }

    pub fn with_title(mut self, title: impl Into<String>) -> Self {
        self.title = title.into();
        self
    }

    pub fn with_keywords<I, S>(mut self, keywords: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.keywords = keywords.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_abstract(mut self, text: impl Into<String>) -> Self {
        self.abstract_text = text.into();
        self
    }

    pub fn with_pair(mut self, pair_id: impl Into<String>) -> Self {
        self.pair_id = Some(pair_id.into());
        self
    }

    /// Title, keywords and abstract joined by single spaces, empty fields skipped.
    pub fn indexable_text(&self) -> String {
        let mut out = String::new();
        let fields = core::iter::once(self.title.as_str())
            .chain(self.keywords.iter().map(String::as_str))
            .chain(core::iter::once(self.abstract_text.as_str()));
        for field in fields.filter(|f| !f.is_empty()) {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(field);
        }
        out
    }
}

impl From<String> for Lang {
    fn from(s: String) -> Self {
        Lang(s)
    }
}

/// A search topic. Only the description is used as retrieval input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub query_id: String,
    pub lang: Lang,
    pub description: String,
}

impl Query {
    /// Builds a query, rejecting an empty id or a blank description.
    pub fn new(
        query_id: impl Into<String>,
        lang: impl Into<Lang>,
        description: impl Into<String>,
    ) -> Result<Self, CorpusError> {
        let query_id = query_id.into();
        let description = description.into();
        if query_id.is_empty() {
            return Err(CorpusError::EmptyId);
        }
        if description.trim().is_empty() {
            return Err(CorpusError::EmptyDescription(query_id));
        }
        Ok(Query {
            query_id,
            lang: lang.into(),
            description,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorpusError {
    EmptyId,
    DuplicateId(String),
    UndeclaredLang { doc_id: String, lang: Lang },
    NotFound(String),
    NoPair(String),
    EmptyDescription(String),
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorpusError::EmptyId => f.write_str("empty document or query id"),
            CorpusError::DuplicateId(id) => write!(f, "duplicate doc_id {id:?}"),
            CorpusError::UndeclaredLang { doc_id, lang } => {
                write!(f, "document {doc_id:?} has undeclared language {lang:?}")
            }
            CorpusError::NotFound(id) => write!(f, "document {id:?} not found"),
            CorpusError::NoPair(id) => write!(f, "document {id:?} has no comparable pair"),
            CorpusError::EmptyDescription(id) => write!(f, "query {id:?} has an empty description"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CorpusError {}

/// A pair link that does not resolve to a document in another language.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DanglingPair {
    pub doc_id: String,
    pub pair_id: String,
}

/// Documents keyed by id, in insertion order.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    langs: Vec<Lang>,
    docs: Vec<Document>,
    by_id: BTreeMap<String, usize>,
}

impl Corpus {
    pub fn new(declared_langs: impl IntoIterator<Item = Lang>) -> Self {
        Corpus {
            langs: declared_langs.into_iter().collect(),
            docs: Vec::new(),
            by_id: BTreeMap::new(),
        }
    }

    pub fn from_documents(
        declared_langs: impl IntoIterator<Item = Lang>,
        docs: impl IntoIterator<Item = Document>,
    ) -> Result<Self, CorpusError> {
        let mut corpus = Corpus::new(declared_langs);
        for doc in docs {
            corpus.insert(doc)?;
        }
        Ok(corpus)
    }

    pub fn insert(&mut self, doc: Document) -> Result<(), CorpusError> {
        if doc.doc_id.is_empty() {
            return Err(CorpusError::EmptyId);
        }
        if !self.langs.contains(&doc.lang) {
            return Err(CorpusError::UndeclaredLang {
                doc_id: doc.doc_id,
                lang: doc.lang,
            });
        }
        if self.by_id.contains_key(&doc.doc_id) {
            return Err(CorpusError::DuplicateId(doc.doc_id));
        }
        self.by_id.insert(doc.doc_id.clone(), self.docs.len());
        self.docs.push(doc);
        Ok(())
    }

    pub fn langs(&self) -> &[Lang] {
        &self.langs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn get(&self, doc_id: &str) -> Option<&Document> {
        self.by_id.get(doc_id).map(|&i| &self.docs[i])
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Document> {
        self.docs.iter()
    }

    pub fn in_lang<'a>(&'a self, lang: &'a Lang) -> impl Iterator<Item = &'a Document> + 'a {
        self.docs.iter().filter(move |d| &d.lang == lang)
    }

    /// Pair links that are missing from the corpus or point at a document
    /// in the same language.
    pub fn dangling_pairs(&self) -> Vec<DanglingPair> {
        self.docs
            .iter()
            .filter_map(|d| {
                let pair_id = d.pair_id.as_ref()?;
                match self.get(pair_id) {
                    Some(p) if p.lang != d.lang => None,
                    _ => Some(DanglingPair {
                        doc_id: d.doc_id.clone(),
                        pair_id: pair_id.clone(),
                    }),
                }
            })
            .collect()
    }

    /// The comparable document named by `doc_id`'s pair link.
    pub fn pair_lookup(&self, doc_id: &str) -> Result<&Document, CorpusError> {
        let doc = self
            .get(doc_id)
            .ok_or_else(|| CorpusError::NotFound(doc_id.into()))?;
        let pair_id = doc
            .pair_id
            .as_ref()
            .ok_or_else(|| CorpusError::NoPair(doc_id.into()))?;
        match self.get(pair_id) {
            Some(p) if p.lang != doc.lang => Ok(p),
            _ => Err(CorpusError::NoPair(doc_id.into())),
        }
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a Document;
    type IntoIter = core::slice::Iter<'a, Document>;

    fn into_iter(self) -> Self::IntoIter {
        self.docs.iter()
    }
}
