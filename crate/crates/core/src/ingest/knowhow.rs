use std::io::BufRead;

use super::{normalize_text, prefix_pairs, PairCorpus, TextCorpus};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct KnowHowCorpora {
    pub corpus: TextCorpus,
    pub pairs: PairCorpus,
    pub skipped: usize,
}

/// Reads `subject<TAB>predicate<TAB>object` task triples.
///
/// Subjects and objects both enter the text corpus. Each triple yields the
/// pair `(subject, object)` followed by the prefix pairs of the subject and
/// of the object. Lines without three fields, or with an empty subject or
/// object, are skipped and counted.
pub fn load_knowhow<R: BufRead>(reader: R) -> Result<KnowHowCorpora> {
    let mut out = KnowHowCorpora {
        corpus: TextCorpus::new(),
        pairs: PairCorpus::new(),
        skipped: 0,
    };
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 3 {
            out.skipped += 1;
            continue;
        }
        let subject = normalize_text(fields[0]);
        let object = normalize_text(fields[2]);
        if subject.is_empty() || object.is_empty() {
            out.skipped += 1;
            continue;
        }
        out.corpus.push(&subject);
        out.corpus.push(&object);
        out.pairs.push(&subject, &object);
        for (p, q) in prefix_pairs(&subject).into_iter().chain(prefix_pairs(&object)) {
            out.pairs.push(&p, &q);
        }
    }
    Ok(out)
}
