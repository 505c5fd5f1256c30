//! Tab-separated record files.
//!
//! QC header: `query\tlanguage\tcategory_path\tlabel[\torigin]`
//! QI header: `query\tlanguage\titem_id\titem_title\tlabel[\torigin]`
//!
//! Columns are matched by name. QI files without an `item_id` column get
//! sequential ids per distinct title. Writers always emit the canonical
//! column order including `origin`, LF-terminated.

use std::collections::HashMap;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    CategoryPath, CorpusError, Label, LanguageTag, Origin, PathSeparator, QCRecord, QIRecord,
    Record,
};

/// A rejected input line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    /// 1-based line number in the source file (the header is line 1).
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    pub path_separator: PathSeparator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<R> {
    pub records: Vec<R>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Record kinds with a TSV representation.
pub trait TsvRecord: Record + Sized {
    const HEADER: &'static str;

    fn parse_table(text: &str, options: ParseOptions) -> Result<Parsed<Self>, CorpusError>;

    fn write_line(&self, out: &mut String);
}

struct Columns {
    index: HashMap<&'static str, usize>,
    width: usize,
}

impl Columns {
    fn from_header(
        header: &str,
        required: &[&'static str],
        optional: &[&'static str],
    ) -> Result<Self, CorpusError> {
        let mut index = HashMap::new();
        let names: Vec<&str> = header.split('\t').collect();
        for (i, name) in names.iter().enumerate() {
            let known = required
                .iter()
                .chain(optional)
                .find(|k| *k == name)
                .ok_or_else(|| CorpusError::UnknownColumn(name.to_string()))?;
            if index.insert(*known, i).is_some() {
                return Err(CorpusError::DuplicateColumn(name.to_string()));
            }
        }
        if let Some(missing) = required.iter().find(|c| !index.contains_key(*c)) {
            return Err(CorpusError::MissingColumn(missing.to_string()));
        }
        Ok(Columns {
            index,
            width: names.len(),
        })
    }

    fn get<'a>(&self, fields: &[&'a str], name: &str) -> Option<&'a str> {
        self.index.get(name).map(|&i| fields[i])
    }
}

fn split_lines(text: &str) -> Result<(&str, Vec<&str>), CorpusError> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    let mut lines = body.split('\n');
    let header = lines
        .next()
        .filter(|h| !h.is_empty())
        .ok_or(CorpusError::MissingHeader)?;
    Ok((header, lines.collect()))
}

fn common_fields(
    columns: &Columns,
    fields: &[&str],
) -> Result<(String, LanguageTag, Label, Origin), String> {
    if fields.len() != columns.width {
        return Err(format!(
            "expected {} fields, found {}",
            columns.width,
            fields.len()
        ));
    }
    let query = columns.get(fields, "query").unwrap_or_default();
    if query.trim().is_empty() {
        return Err("empty query".into());
    }
    let language_code = columns.get(fields, "language").unwrap_or_default();
    let language: LanguageTag = language_code
        .parse()
        .map_err(|_| format!("unknown language code {language_code:?}"))?;
    let label: Label = columns
        .get(fields, "label")
        .unwrap_or_default()
        .parse()
        .map_err(|_| "label out of range".to_string())?;
    let origin = match columns.get(fields, "origin") {
        Some(o) => o.parse().map_err(|_| format!("unknown origin {o:?}"))?,
        None => Origin::Original,
    };
    Ok((query.to_string(), language, label, origin))
}

impl TsvRecord for QCRecord {
    const HEADER: &'static str = "query\tlanguage\tcategory_path\tlabel\torigin";

    fn parse_table(text: &str, options: ParseOptions) -> Result<Parsed<Self>, CorpusError> {
        let (header, lines) = split_lines(text)?;
        let columns = Columns::from_header(
            header,
            &["query", "language", "category_path", "label"],
            &["origin"],
        )?;
        let mut parsed = Parsed {
            records: Vec::with_capacity(lines.len()),
            diagnostics: Vec::new(),
        };
        for (i, line) in lines.into_iter().enumerate() {
            let line_no = i + 2;
            let result = if line.is_empty() {
                Err("empty line".to_string())
            } else {
                let fields: Vec<&str> = line.split('\t').collect();
                common_fields(&columns, &fields).and_then(|(query, language, label, origin)| {
                    let path = CategoryPath::parse(
                        columns.get(&fields, "category_path").unwrap_or_default(),
                        options.path_separator,
                    )
                    .map_err(|e| format!("invalid category path: {e}"))?;
                    Ok(QCRecord {
                        query,
                        language,
                        path,
                        label,
                        origin,
                    })
                })
            };
            match result {
                Ok(r) => parsed.records.push(r),
                Err(reason) => parsed.diagnostics.push(Diagnostic {
                    line: line_no,
                    reason,
                }),
            }
        }
        Ok(parsed)
    }

    fn write_line(&self, out: &mut String) {
        out.push_str(&self.query);
        out.push('\t');
        out.push_str(self.language.code());
        out.push('\t');
        out.push_str(&self.path.render());
        out.push('\t');
        out.push_str(&self.label.to_string());
        out.push('\t');
        out.push_str(self.origin.as_str());
        out.push('\n');
    }
}

impl TsvRecord for QIRecord {
    const HEADER: &'static str = "query\tlanguage\titem_id\titem_title\tlabel\torigin";

    fn parse_table(text: &str, _options: ParseOptions) -> Result<Parsed<Self>, CorpusError> {
        let (header, lines) = split_lines(text)?;
        let columns = Columns::from_header(
            header,
            &["query", "language", "item_title", "label"],
            &["item_id", "origin"],
        )?;
        let has_ids = columns.index.contains_key("item_id");
        let mut titles_by_id: HashMap<String, String> = HashMap::new();
        let mut assigned: HashMap<String, String> = HashMap::new();
        let mut parsed = Parsed {
            records: Vec::with_capacity(lines.len()),
            diagnostics: Vec::new(),
        };
        for (i, line) in lines.into_iter().enumerate() {
            let line_no = i + 2;
            let result = if line.is_empty() {
                Err("empty line".to_string())
            } else {
                let fields: Vec<&str> = line.split('\t').collect();
                common_fields(&columns, &fields).and_then(|(query, language, label, origin)| {
                    let title = columns.get(&fields, "item_title").unwrap_or_default();
                    if title.trim().is_empty() {
                        return Err("empty item_title".to_string());
                    }
                    let item_id = if has_ids {
                        let id = columns.get(&fields, "item_id").unwrap_or_default();
                        if id.trim().is_empty() {
                            return Err("empty item_id".to_string());
                        }
                        match titles_by_id.get(id) {
                            Some(seen) if seen != title => {
                                return Err(format!("item_id {id:?} reused with a different title"))
                            }
                            Some(_) => {}
                            None => {
                                titles_by_id.insert(id.to_string(), title.to_string());
                            }
                        }
                        id.to_string()
                    } else {
                        let next = assigned.len() + 1;
                        assigned
                            .entry(title.to_string())
                            .or_insert_with(|| format!("item-{next}"))
                            .clone()
                    };
                    Ok(QIRecord {
                        query,
                        language,
                        item_id,
                        item_title: title.to_string(),
                        label,
                        origin,
                    })
                })
            };
            match result {
                Ok(r) => parsed.records.push(r),
                Err(reason) => parsed.diagnostics.push(Diagnostic {
                    line: line_no,
                    reason,
                }),
            }
        }
        Ok(parsed)
    }

    fn write_line(&self, out: &mut String) {
        out.push_str(&self.query);
        out.push('\t');
        out.push_str(self.language.code());
        out.push('\t');
        out.push_str(&self.item_id);
        out.push('\t');
        out.push_str(&self.item_title);
        out.push('\t');
        out.push_str(&self.label.to_string());
        out.push('\t');
        out.push_str(self.origin.as_str());
        out.push('\n');
    }
}

pub fn parse_records<R: TsvRecord>(
    text: &str,
    options: ParseOptions,
) -> Result<Parsed<R>, CorpusError> {
    R::parse_table(text, options)
}

pub fn parse_record_file<R: TsvRecord>(
    path: impl AsRef<Path>,
    options: ParseOptions,
) -> Result<Parsed<R>, CorpusError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let text =
        String::from_utf8(bytes).map_err(|_| CorpusError::NotUtf8(path.display().to_string()))?;
    R::parse_table(&text, options)
}

pub fn to_tsv_string<R: TsvRecord>(records: &[R]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(R::HEADER);
    out.push('\n');
    for r in records {
        r.write_line(&mut out);
    }
    out
}

pub fn write_records<R: TsvRecord, W: Write>(mut writer: W, records: &[R]) -> io::Result<()> {
    writer.write_all(to_tsv_string(records).as_bytes())
}

pub fn write_record_file<R: TsvRecord>(
    path: impl AsRef<Path>,
    records: &[R],
) -> Result<(), CorpusError> {
    let path = path.as_ref();
    fs::write(path, to_tsv_string(records)).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const QC_HEADER: &str = "query\tlanguage\tcategory_path\tlabel\n";

    #[test]
    fn parses_qc_line() {
        let text =
            format!("{QC_HEADER}wireless headphones\ten\tElectronics > Audio > Headphones\t1\n");
        let parsed: Parsed<QCRecord> = parse_records(&text, ParseOptions::default()).unwrap();
        assert!(parsed.diagnostics.is_empty());
        let r = &parsed.records[0];
        assert_eq!(r.query, "wireless headphones");
        assert_eq!(r.language, LanguageTag::En);
        assert_eq!(r.path.levels(), ["Electronics", "Audio", "Headphones"]);
        assert_eq!(r.label, Label::Positive);
        assert_eq!(r.origin, Origin::Original);
    }

    #[test]
    fn header_only_is_empty() {
        let parsed: Parsed<QCRecord> = parse_records(QC_HEADER, ParseOptions::default()).unwrap();
        assert!(parsed.records.is_empty());
        assert!(parsed.diagnostics.is_empty());
    }

    #[test]
    fn bad_label_becomes_diagnostic() {
        let text = format!("{QC_HEADER}shoes\ten\tA > B\t2\n");
        let parsed: Parsed<QCRecord> = parse_records(&text, ParseOptions::default()).unwrap();
        assert!(parsed.records.is_empty());
        assert_eq!(
            parsed.diagnostics,
            vec![Diagnostic {
                line: 2,
                reason: "label out of range".into()
            }]
        );
    }

    #[test]
    fn unknown_language_and_bad_width() {
        let text = format!("{QC_HEADER}a\txx\tA\t1\nb\ten\tA\n\nc\ten\tA\t0\n");
        let parsed: Parsed<QCRecord> = parse_records(&text, ParseOptions::default()).unwrap();
        assert_eq!(parsed.records.len(), 1);
        let lines: Vec<_> = parsed.diagnostics.iter().map(|d| d.line).collect();
        assert_eq!(lines, vec![2, 3, 4]);
        assert!(parsed.diagnostics[0].reason.contains("unknown language"));
    }

    #[test]
    fn header_errors() {
        assert!(matches!(
            parse_records::<QCRecord>("query\tlanguage\tlabel\n", ParseOptions::default()),
            Err(CorpusError::MissingColumn(c)) if c == "category_path"
        ));
        assert!(matches!(
            parse_records::<QCRecord>("query\tlanguage\tcategory_path\tlabel\tscore\n", ParseOptions::default()),
            Err(CorpusError::UnknownColumn(c)) if c == "score"
        ));
        assert!(matches!(
            parse_records::<QCRecord>("", ParseOptions::default()),
            Err(CorpusError::MissingHeader)
        ));
    }

    #[test]
    fn comma_paths() {
        let text =
            format!("{QC_HEADER}wireless headphones\ten\tElectronics, Audio, Headphones\t1\n");
        let parsed: Parsed<QCRecord> = parse_records(
            &text,
            ParseOptions {
                path_separator: PathSeparator::Comma,
            },
        )
        .unwrap();
        assert_eq!(parsed.records[0].path.depth(), 3);
    }

    #[test]
    fn qi_assigns_ids_per_distinct_title() {
        let text = "query\tlanguage\titem_title\tlabel\na\ten\tRed Shoe\t1\nb\tes\tBlue Shoe\t0\nc\tfr\tRed Shoe\t1\n";
        let parsed: Parsed<QIRecord> = parse_records(text, ParseOptions::default()).unwrap();
        let ids: Vec<_> = parsed.records.iter().map(|r| r.item_id.as_str()).collect();
        assert_eq!(ids, ["item-1", "item-2", "item-1"]);
    }

    #[test]
    fn qi_id_reuse_with_other_title_is_diagnosed() {
        let text = "query\tlanguage\titem_id\titem_title\tlabel\na\ten\t7\tRed\t1\nb\ten\t7\tBlue\t1\nc\ten\t8\tRed\t0\n";
        let parsed: Parsed<QIRecord> = parse_records(text, ParseOptions::default()).unwrap();
        assert_eq!(parsed.records.len(), 2);
        assert_eq!(parsed.diagnostics.len(), 1);
        assert_eq!(parsed.diagnostics[0].line, 3);
    }

    #[test]
    fn writer_emits_canonical_header() {
        let text = format!("{QC_HEADER}q\ten\tA > B\t0\n");
        let parsed: Parsed<QCRecord> = parse_records(&text, ParseOptions::default()).unwrap();
        assert_eq!(
            to_tsv_string(&parsed.records),
            "query\tlanguage\tcategory_path\tlabel\torigin\nq\ten\tA > B\t0\toriginal\n"
        );
    }

    fn arb_text() -> impl Strategy<Value = String> {
        "[^\t\n\r]{0,12}".prop_filter("non-blank", |s| !s.trim().is_empty())
    }

    fn arb_level() -> impl Strategy<Value = String> {
        "[A-Za-z0-9&,' ]{1,10}"
            .prop_map(|s| s.trim().to_string())
            .prop_filter("non-empty", |s| !s.is_empty())
    }

    fn arb_qc() -> impl Strategy<Value = QCRecord> {
        (
            arb_text(),
            0usize..13,
            proptest::collection::vec(arb_level(), 1..5),
            any::<bool>(),
            0u8..3,
        )
            .prop_map(|(query, lang, levels, positive, origin)| QCRecord {
                query,
                language: LanguageTag::ALL[lang],
                path: CategoryPath::new(levels).unwrap(),
                label: if positive {
                    Label::Positive
                } else {
                    Label::Negative
                },
                origin: [
                    Origin::Original,
                    Origin::Translated,
                    Origin::GeneratedNegative,
                ][origin as usize],
            })
    }

    proptest! {
        #[test]
        fn qc_round_trip(records in proptest::collection::vec(arb_qc(), 0..20)) {
            let text = to_tsv_string(&records);
            let parsed: Parsed<QCRecord> = parse_records(&text, ParseOptions::default()).unwrap();
            prop_assert!(parsed.diagnostics.is_empty());
            prop_assert_eq!(&parsed.records, &records);
            prop_assert_eq!(to_tsv_string(&parsed.records), text);
        }

        #[test]
        fn qi_round_trip(rows in proptest::collection::vec((arb_text(), 0usize..13, 0u32..5, any::<bool>()), 0..20)) {
            let records: Vec<QIRecord> = rows
                .into_iter()
                .map(|(q, lang, item, positive)| QIRecord {
                    query: q,
                    language: LanguageTag::ALL[lang],
                    item_id: format!("sku{item}"),
                    item_title: format!("Title {item}"),
                    label: if positive { Label::Positive } else { Label::Negative },
                    origin: Origin::Original,
                })
                .collect();
            let text = to_tsv_string(&records);
            let parsed: Parsed<QIRecord> = parse_records(&text, ParseOptions::default()).unwrap();
            prop_assert!(parsed.diagnostics.is_empty());
            prop_assert_eq!(parsed.records, records);
        }

        #[test]
        fn no_line_silently_dropped(lines in proptest::collection::vec("[a-z\t0-9 >]{0,20}", 0..30)) {
            let mut text = String::from(QC_HEADER);
            for l in &lines {
                text.push_str(l);
                text.push('\n');
            }
            let parsed: Parsed<QCRecord> = parse_records(&text, ParseOptions::default()).unwrap();
            prop_assert_eq!(parsed.records.len() + parsed.diagnostics.len(), lines.len());
        }
    }
}
