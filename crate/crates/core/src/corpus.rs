//! Canonical corpus representation and on-disk formats.
//!
//! A corpus is a set of topics; each topic is a chronologically ordered list
//! of sentence records. Two line-oriented encodings are supported and
//! auto-detected per line: a delimited form (six fields, text last) and a
//! JSON-object-per-line form for text that may contain the delimiter. Lines
//! starting with `#` are comments.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default field delimiter for the delimited corpus form.
pub const DEFAULT_DELIMITER: char = '\t';

/// One sentence in a topic.
///
/// `seq` is the chronological position (0-based). `gold_novel` and `gold_po`
/// are optional human assessments: the novelty verdict and the list of
/// earlier sentences sharing meaning with this one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub topic_id: String,
    pub sentence_id: String,
    pub seq: u32,
    pub text: String,
    pub gold_novel: Option<bool>,
    pub gold_po: Option<Vec<String>>,
}

/// A topic: non-empty sentence list ordered by `seq`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topic {
    pub topic_id: String,
    pub sentences: Vec<SentenceRecord>,
}

impl Topic {
    /// Builds a topic from records, sorting them by `seq` (stable).
    pub fn from_records(topic_id: impl Into<String>, mut sentences: Vec<SentenceRecord>) -> Self {
        sentences.sort_by_key(|s| s.seq);
        Topic {
            topic_id: topic_id.into(),
            sentences,
        }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// Looks up the `seq` of a sentence id within this topic.
    pub fn seq_of(&self, sentence_id: &str) -> Option<u32> {
        self.sentences
            .iter()
            .find(|s| s.sentence_id == sentence_id)
            .map(|s| s.seq)
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: malformed record: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: duplicate sentence '{sentence}' in topic '{topic}'")]
    DuplicateSentence {
        line: usize,
        topic: String,
        sentence: String,
    },
    #[error("topic '{topic}': seq values are not a contiguous 0-based range (position {index} has seq {seq})")]
    NonContiguousSeq {
        topic: String,
        index: usize,
        seq: u32,
    },
    #[error("topic '{topic}': sentence '{sentence}' gold_po references unknown sentence '{referenced}'")]
    UnknownPoReference {
        topic: String,
        sentence: String,
        referenced: String,
    },
    #[error("topic '{topic}': sentence '{sentence}' (seq {seq}) has forward PO reference '{referenced}' (seq {referenced_seq})")]
    ForwardPoReference {
        topic: String,
        sentence: String,
        seq: u32,
        referenced: String,
        referenced_seq: u32,
    },
    #[error("topic '{topic}': sentence '{sentence}' is marked redundant but its gold_po list is empty")]
    EmptyPoOnRedundant { topic: String, sentence: String },
    #[error("cannot serialize record for '{sentence}': {reason}")]
    Unserializable { sentence: String, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Reads and groups a corpus file. See [`parse_corpus_reader`].
pub fn parse_corpus(path: &Path, strict: bool) -> Result<Vec<Topic>, CorpusError> {
    parse_corpus_with(path, strict, DEFAULT_DELIMITER)
}

/// Reads a corpus file with an explicit field delimiter.
pub fn parse_corpus_with(
    path: &Path,
    strict: bool,
    delimiter: char,
) -> Result<Vec<Topic>, CorpusError> {
    let file = File::open(path)?;
    parse_corpus_reader(BufReader::new(file), strict, delimiter)
}

/// Parses line-delimited records into topics.
///
/// Topics keep their first-appearance order; sentences are sorted by `seq`.
/// Structural problems (unparseable line, missing seq, duplicate sentence id)
/// are errors in both modes; the gold/ordering invariants (contiguous seq,
/// backward-only PO references, non-empty PO on redundant sentences) are
/// enforced only when `strict` is set.
pub fn parse_corpus_reader<R: BufRead>(
    reader: R,
    strict: bool,
    delimiter: char,
) -> Result<Vec<Topic>, CorpusError> {
    let mut topics: Vec<Topic> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut seen_ids: HashMap<(String, String), ()> = HashMap::new();

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let record = parse_record(trimmed, lineno, delimiter)?;
        let key = (record.topic_id.clone(), record.sentence_id.clone());
        if seen_ids.insert(key, ()).is_some() {
            return Err(CorpusError::DuplicateSentence {
                line: lineno,
                topic: record.topic_id,
                sentence: record.sentence_id,
            });
        }
        let idx = match index.get(&record.topic_id) {
            Some(&i) => i,
            None => {
                index.insert(record.topic_id.clone(), topics.len());
                topics.push(Topic {
                    topic_id: record.topic_id.clone(),
                    sentences: Vec::new(),
                });
                topics.len() - 1
            }
        };
        topics[idx].sentences.push(record);
    }

    for topic in &mut topics {
        topic.sentences.sort_by_key(|s| s.seq);
    }
    if strict {
        for topic in &topics {
            check_topic_invariants(topic)?;
        }
    }
    Ok(topics)
}

/// Verifies the per-topic ordering and gold invariants.
pub fn check_topic_invariants(topic: &Topic) -> Result<(), CorpusError> {
    let mut seq_of: HashMap<&str, u32> = HashMap::new();
    for (i, s) in topic.sentences.iter().enumerate() {
        if s.seq != i as u32 {
            return Err(CorpusError::NonContiguousSeq {
                topic: topic.topic_id.clone(),
                index: i,
                seq: s.seq,
            });
        }
        seq_of.insert(&s.sentence_id, s.seq);
    }
    for s in &topic.sentences {
        if let Some(po) = &s.gold_po {
            if s.gold_novel == Some(false) && po.is_empty() {
                return Err(CorpusError::EmptyPoOnRedundant {
                    topic: topic.topic_id.clone(),
                    sentence: s.sentence_id.clone(),
                });
            }
            for r in po {
                match seq_of.get(r.as_str()) {
                    None => {
                        return Err(CorpusError::UnknownPoReference {
                            topic: topic.topic_id.clone(),
                            sentence: s.sentence_id.clone(),
                            referenced: r.clone(),
                        })
                    }
                    Some(&rseq) if rseq >= s.seq => {
                        return Err(CorpusError::ForwardPoReference {
                            topic: topic.topic_id.clone(),
                            sentence: s.sentence_id.clone(),
                            seq: s.seq,
                            referenced: r.clone(),
                            referenced_seq: rseq,
                        })
                    }
                    Some(_) => {}
                }
            }
        }
    }
    Ok(())
}

fn parse_record(line: &str, lineno: usize, delimiter: char) -> Result<SentenceRecord, CorpusError> {
    if line.starts_with('{') {
        return serde_json::from_str(line).map_err(|e| CorpusError::Malformed {
            line: lineno,
            reason: format!("invalid JSON record: {e}"),
        });
    }
    let fields: Vec<&str> = line.splitn(6, delimiter).collect();
    if fields.len() != 6 {
        return Err(CorpusError::Malformed {
            line: lineno,
            reason: format!("expected 6 fields, found {}", fields.len()),
        });
    }
    let seq: u32 = fields[2].parse().map_err(|_| CorpusError::Malformed {
        line: lineno,
        reason: format!("missing or invalid seq '{}'", fields[2]),
    })?;
    let gold_novel = match fields[3] {
        "1" => Some(true),
        "0" => Some(false),
        "-" => None,
        other => {
            return Err(CorpusError::Malformed {
                line: lineno,
                reason: format!("gold_novel must be 1, 0 or -, found '{other}'"),
            })
        }
    };
    let gold_po = match fields[4] {
        "-" => None,
        "" => {
            return Err(CorpusError::Malformed {
                line: lineno,
                reason: "gold_po field is empty (use '-' for absent)".into(),
            })
        }
        ids => {
            let parts: Vec<String> = ids.split(',').map(str::to_string).collect();
            if parts.iter().any(String::is_empty) {
                return Err(CorpusError::Malformed {
                    line: lineno,
                    reason: "gold_po contains an empty id".into(),
                });
            }
            Some(parts)
        }
    };
    Ok(SentenceRecord {
        topic_id: fields[0].to_string(),
        sentence_id: fields[1].to_string(),
        seq,
        gold_novel,
        gold_po,
        text: fields[5].to_string(),
    })
}

/// On-disk encoding for [`write_corpus`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Delimited(char),
    Jsonl,
}

impl Default for CorpusFormat {
    fn default() -> Self {
        CorpusFormat::Delimited(DEFAULT_DELIMITER)
    }
}

/// Serializes topics in the canonical line format.
///
/// In the delimited form the text must not contain the delimiter or a
/// newline; switch to [`CorpusFormat::Jsonl`] for such text.
pub fn write_corpus<W: Write>(
    w: &mut W,
    topics: &[Topic],
    format: CorpusFormat,
) -> Result<(), CorpusError> {
    for topic in topics {
        for s in &topic.sentences {
            match format {
                CorpusFormat::Jsonl => {
                    let json = serde_json::to_string(s).map_err(|e| CorpusError::Unserializable {
                        sentence: s.sentence_id.clone(),
                        reason: e.to_string(),
                    })?;
                    writeln!(w, "{json}")?;
                }
                CorpusFormat::Delimited(d) => {
                    check_field(&s.topic_id, s, d)?;
                    check_field(&s.sentence_id, s, d)?;
                    if s.text.contains(d) || s.text.contains('\n') {
                        return Err(CorpusError::Unserializable {
                            sentence: s.sentence_id.clone(),
                            reason: "text contains the delimiter or a newline; use the JSONL form"
                                .into(),
                        });
                    }
                    let novel = match s.gold_novel {
                        Some(true) => "1",
                        Some(false) => "0",
                        None => "-",
                    };
                    let po = match &s.gold_po {
                        None => "-".to_string(),
                        Some(ids) => {
                            for id in ids {
                                check_field(id, s, d)?;
                            }
                            if ids.is_empty() {
                                "-".to_string()
                            } else {
                                ids.join(",")
                            }
                        }
                    };
                    writeln!(
                        w,
                        "{}{d}{}{d}{}{d}{}{d}{}{d}{}",
                        s.topic_id, s.sentence_id, s.seq, novel, po, s.text
                    )?;
                }
            }
        }
    }
    Ok(())
}

fn check_field(field: &str, s: &SentenceRecord, d: char) -> Result<(), CorpusError> {
    if field.is_empty() || field.contains(d) || field.contains('\n') || field.contains(',') {
        return Err(CorpusError::Unserializable {
            sentence: s.sentence_id.clone(),
            reason: format!("identifier '{field}' is empty or contains a reserved character"),
        });
    }
    Ok(())
}

/// Serializes topics to a string in the default delimited form.
pub fn corpus_to_string(topics: &[Topic]) -> Result<String, CorpusError> {
    let mut buf = Vec::new();
    write_corpus(&mut buf, topics, CorpusFormat::default())?;
    Ok(String::from_utf8(buf).expect("corpus output is UTF-8"))
}

/// Which gold fields a topic carries, and hence which measures apply.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldReport {
    pub topic_id: String,
    pub n_sentences: usize,
    pub n_with_gold_novel: usize,
    pub n_gold_redundant: usize,
    pub n_redundant_with_po: usize,
    pub violations: Vec<String>,
}

impl GoldReport {
    /// SNM, SPSM and the mistake rate need a novelty verdict on every sentence.
    pub fn snm_computable(&self) -> bool {
        self.n_sentences > 0 && self.n_with_gold_novel == self.n_sentences
    }

    /// PSM additionally needs PO relatives for every gold-redundant sentence.
    pub fn psm_computable(&self) -> bool {
        self.snm_computable() && self.n_redundant_with_po == self.n_gold_redundant
    }

    pub fn summary(&self) -> String {
        match (self.snm_computable(), self.psm_computable()) {
            (true, true) => "SNM/SPSM computable, PSM computable".into(),
            (true, false) => "SNM/SPSM computable, PSM not".into(),
            _ => "gold novelty incomplete; no measures computable".into(),
        }
    }
}

/// Reports which optional gold fields are present in a topic (report-only).
pub fn validate_gold(topic: &Topic) -> GoldReport {
    let mut report = GoldReport {
        topic_id: topic.topic_id.clone(),
        n_sentences: topic.sentences.len(),
        n_with_gold_novel: 0,
        n_gold_redundant: 0,
        n_redundant_with_po: 0,
        violations: Vec::new(),
    };
    for s in &topic.sentences {
        if s.gold_novel.is_some() {
            report.n_with_gold_novel += 1;
        }
        if s.gold_novel == Some(false) {
            report.n_gold_redundant += 1;
            match &s.gold_po {
                Some(po) if !po.is_empty() => report.n_redundant_with_po += 1,
                Some(_) => report.violations.push(format!(
                    "sentence '{}' is redundant but its gold_po list is empty",
                    s.sentence_id
                )),
                None => {}
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(topic: &str, id: &str, seq: u32, text: &str) -> SentenceRecord {
        SentenceRecord {
            topic_id: topic.into(),
            sentence_id: id.into(),
            seq,
            text: text.into(),
            gold_novel: None,
            gold_po: None,
        }
    }

    #[test]
    fn parses_two_topics_of_three() {
        let data = "\
# a comment
t1\ts0\t0\t1\t-\tfirst sentence
t1\ts1\t1\t1\t-\tsecond sentence
t1\ts2\t2\t0\ts0,s1\tthird sentence

t2\ts0\t0\t1\t-\tother topic
t2\ts1\t1\t-\t-\tno gold here
t2\ts2\t2\t1\t-\tlast
";
        let topics = parse_corpus_reader(data.as_bytes(), true, '\t').unwrap();
        assert_eq!(topics.len(), 2);
        assert_eq!(topics[0].len(), 3);
        assert_eq!(topics[1].len(), 3);
        assert_eq!(topics[0].sentences[2].gold_po, Some(vec!["s0".into(), "s1".into()]));
        assert_eq!(topics[1].sentences[1].gold_novel, None);
    }

    #[test]
    fn forward_po_reference_is_rejected_in_strict_mode() {
        let data = "\
t1\ts0\t0\t0\ts1\tpoints forward
t1\ts1\t1\t1\t-\tlater sentence
";
        let err = parse_corpus_reader(data.as_bytes(), true, '\t').unwrap_err();
        assert!(matches!(err, CorpusError::ForwardPoReference { .. }), "{err}");
        // Lenient mode lets it through.
        assert!(parse_corpus_reader(data.as_bytes(), false, '\t').is_ok());
    }

    #[test]
    fn unknown_po_reference_is_rejected_in_strict_mode() {
        let data = "t1\ts0\t0\t1\t-\tx\nt1\ts1\t1\t0\tnope\ty\n";
        let err = parse_corpus_reader(data.as_bytes(), true, '\t').unwrap_err();
        assert!(matches!(err, CorpusError::UnknownPoReference { .. }), "{err}");
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let data = "t1\ts0\t0\t1\t-\tok\nt1\ts1\tnot_a_seq\t1\t-\tbad\n";
        match parse_corpus_reader(data.as_bytes(), false, '\t').unwrap_err() {
            CorpusError::Malformed { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other}"),
        }
        let short = "t1\ts0\t0\n";
        assert!(matches!(
            parse_corpus_reader(short.as_bytes(), false, '\t').unwrap_err(),
            CorpusError::Malformed { line: 1, .. }
        ));
    }

    #[test]
    fn duplicate_sentence_id_is_always_rejected() {
        let data = "t1\ts0\t0\t1\t-\ta\nt1\ts0\t1\t1\t-\tb\n";
        assert!(matches!(
            parse_corpus_reader(data.as_bytes(), false, '\t').unwrap_err(),
            CorpusError::DuplicateSentence { .. }
        ));
    }

    #[test]
    fn non_contiguous_seq_is_strict_only() {
        let data = "t1\ts0\t0\t1\t-\ta\nt1\ts2\t2\t1\t-\tb\n";
        assert!(matches!(
            parse_corpus_reader(data.as_bytes(), true, '\t').unwrap_err(),
            CorpusError::NonContiguousSeq { .. }
        ));
        let topics = parse_corpus_reader(data.as_bytes(), false, '\t').unwrap();
        assert_eq!(topics[0].sentences[1].seq, 2);
    }

    #[test]
    fn jsonl_lines_are_autodetected() {
        let data = concat!(
            r#"{"topic_id":"t1","sentence_id":"s0","seq":0,"text":"tab\there","gold_novel":true,"gold_po":null}"#,
            "\n",
            "t1\ts1\t1\t0\ts0\tplain line\n",
        );
        let topics = parse_corpus_reader(data.as_bytes(), false, '\t').unwrap();
        assert_eq!(topics[0].sentences[0].text, "tab\there");
        assert_eq!(topics[0].sentences[1].gold_po, Some(vec!["s0".into()]));
    }

    #[test]
    fn jsonl_roundtrip_preserves_awkward_text() {
        let mut topic = Topic::from_records(
            "t1",
            vec![rec("t1", "s0", 0, "text with\ttab"), rec("t1", "s1", 1, "plain")],
        );
        topic.sentences[0].gold_novel = Some(true);
        let mut buf = Vec::new();
        write_corpus(&mut buf, &[topic.clone()], CorpusFormat::Jsonl).unwrap();
        let parsed = parse_corpus_reader(buf.as_slice(), true, '\t').unwrap();
        assert_eq!(parsed, vec![topic]);
    }

    #[test]
    fn delimited_writer_rejects_text_containing_delimiter() {
        let topic = Topic::from_records("t1", vec![rec("t1", "s0", 0, "has\ttab")]);
        assert!(matches!(
            corpus_to_string(&[topic]).unwrap_err(),
            CorpusError::Unserializable { .. }
        ));
    }

    #[test]
    fn empty_po_on_redundant_is_flagged() {
        let mut topic = Topic::from_records("t1", vec![rec("t1", "s0", 0, "a")]);
        topic.sentences[0].gold_novel = Some(false);
        topic.sentences[0].gold_po = Some(vec![]);
        assert!(matches!(
            check_topic_invariants(&topic).unwrap_err(),
            CorpusError::EmptyPoOnRedundant { .. }
        ));
        let report = validate_gold(&topic);
        assert_eq!(report.violations.len(), 1);
    }

    #[test]
    fn validate_gold_reports_metric_availability() {
        // All novelty set, no PO: SNM/SPSM yes, PSM no.
        let mut t = Topic::from_records("t1", vec![rec("t1", "s0", 0, "a"), rec("t1", "s1", 1, "b")]);
        t.sentences[0].gold_novel = Some(true);
        t.sentences[1].gold_novel = Some(false);
        t.sentences[1].gold_po = None;
        let r = validate_gold(&t);
        assert!(r.snm_computable() && !r.psm_computable());
        assert_eq!(r.summary(), "SNM/SPSM computable, PSM not");

        // PO on every redundant sentence: PSM yes.
        t.sentences[1].gold_po = Some(vec!["s0".into()]);
        let r = validate_gold(&t);
        assert!(r.psm_computable());
        assert_eq!(r.summary(), "SNM/SPSM computable, PSM computable");

        // Missing novelty: nothing computable.
        t.sentences[0].gold_novel = None;
        assert!(!validate_gold(&t).snm_computable());
    }

    fn arb_topics() -> impl Strategy<Value = Vec<Topic>> {
        // Valid corpora: contiguous seq, backward PO refs, redundant => non-empty PO.
        proptest::collection::vec(
            proptest::collection::vec(
                (any::<bool>(), proptest::option::of(any::<bool>()), "[a-z ]{0,12}"),
                1..8,
            ),
            1..4,
        )
        .prop_map(|topic_rows| {
            topic_rows
                .into_iter()
                .enumerate()
                .map(|(t, rows)| {
                    let topic_id = format!("t{t}");
                    let mut sentences = Vec::new();
                    for (i, (wants_po, mut gold_novel, text)) in rows.into_iter().enumerate() {
                        if i == 0 && gold_novel == Some(false) {
                            gold_novel = Some(true);
                        }
                        let gold_po = if i > 0 && (wants_po || gold_novel == Some(false)) {
                            Some((0..i).map(|j| format!("s{j}")).collect())
                        } else {
                            None
                        };
                        sentences.push(SentenceRecord {
                            topic_id: topic_id.clone(),
                            sentence_id: format!("s{i}"),
                            seq: i as u32,
                            text: text.trim().to_string(),
                            gold_novel,
                            gold_po,
                        });
                    }
                    Topic::from_records(topic_id, sentences)
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn roundtrip_parse_of_serialized_topics(topics in arb_topics()) {
            let text = corpus_to_string(&topics).unwrap();
            let reparsed = parse_corpus_reader(text.as_bytes(), true, '\t').unwrap();
            prop_assert_eq!(&reparsed, &topics);
            // Parsing is stable: a second parse is identical.
            let again = parse_corpus_reader(text.as_bytes(), true, '\t').unwrap();
            prop_assert_eq!(again, reparsed);
        }
    }
}
