//! Scoring tagger output against a gold standard.
//!
//! Both sides use the same six-field record lines the tagger emits. A
//! prediction is scored only where the gold file has a labeled row at the
//! same (sentence, token) position; rows are required to agree on surface
//! and stem so silent corpus drift cannot inflate scores.
//!
//! Two accuracies are reported, each over the tokens where the decision
//! is non-trivial: homograph accuracy counts only tokens whose entry has
//! more than one homograph, and sense accuracy (both numbers must match)
//! counts only tokens whose entry has more than one sense overall. An
//! `UNKNOWN` prediction against a labeled gold token is wrong wherever it
//! qualifies, and is additionally reported as a coverage loss.

use std::collections::HashMap;
use std::path::Path;
use thiserror::Error;

use crate::lexicon::{parse_label, Lexicon};
use crate::tagger::{tag_text, PosSource, TagError, TagOptions, TaggedToken};
use crate::textprep::StopList;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("failed to read records: {0}")]
    Io(#[from] std::io::Error),
    #[error("record line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("gold line {line}: {message}")]
    Gold { line: usize, message: String },
    #[error("prediction/gold mismatch: {0}")]
    Alignment(String),
    #[error(transparent)]
    Tag(#[from] TagError),
}

/// One parsed record line. `label` keeps the display form — the
/// homograph number may be 0 — and is `None` for `UNKNOWN` rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub sentence_index: usize,
    pub token_index: usize,
    pub surface: String,
    pub stem: String,
    pub label: Option<(usize, usize)>,
    pub gloss: Vec<String>,
}

/// Parse record lines. Blank lines and `#` comments are skipped.
pub fn parse_records(text: &str) -> Result<Vec<Record>, EvalError> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 6 {
            return Err(EvalError::Parse {
                line: line_no,
                message: format!("expected 6 tab-separated fields, found {}", fields.len()),
            });
        }
        let index = |field: &str, name: &str| {
            field.parse::<usize>().map_err(|_| EvalError::Parse {
                line: line_no,
                message: format!("{name} '{field}' is not a number"),
            })
        };
        let label = if fields[4] == "UNKNOWN" {
            None
        } else {
            Some(parse_label(fields[4]).ok_or_else(|| EvalError::Parse {
                line: line_no,
                message: format!("bad sense label '{}'", fields[4]),
            })?)
        };
        records.push(Record {
            sentence_index: index(fields[0], "sentence index")?,
            token_index: index(fields[1], "token index")?,
            surface: fields[2].to_string(),
            stem: fields[3].to_string(),
            label,
            gloss: fields[5].split_whitespace().map(str::to_string).collect(),
        });
    }
    Ok(records)
}

pub fn load_records(path: &Path) -> Result<Vec<Record>, EvalError> {
    parse_records(&std::fs::read_to_string(path)?)
}

/// Counts from one scoring run. Accuracy getters return `None` when their
/// denominator is empty.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvalReport {
    /// Gold-labeled tokens that were aligned and scored.
    pub scored_tokens: usize,
    /// Scored tokens whose entry has more than one homograph.
    pub homograph_candidates: usize,
    pub homograph_correct: usize,
    /// Scored tokens whose entry has more than one sense in total.
    pub sense_candidates: usize,
    pub sense_correct: usize,
    /// Among sense candidates: predictions whose homograph was right.
    pub conditional_candidates: usize,
    pub conditional_correct: usize,
    /// Labeled gold tokens the tagger left `UNKNOWN`.
    pub unknown_predictions: usize,
    /// Gold rows marked `UNKNOWN`, skipped entirely.
    pub gold_unlabeled: usize,
}

fn ratio(correct: usize, total: usize) -> Option<f64> {
    (total > 0).then(|| correct as f64 / total as f64)
}

impl EvalReport {
    pub fn homograph_accuracy(&self) -> Option<f64> {
        ratio(self.homograph_correct, self.homograph_candidates)
    }

    pub fn sense_accuracy(&self) -> Option<f64> {
        ratio(self.sense_correct, self.sense_candidates)
    }

    /// Sense accuracy restricted to predictions that already picked the
    /// right homograph — how well sense selection does on its own.
    pub fn conditional_sense_accuracy(&self) -> Option<f64> {
        ratio(self.conditional_correct, self.conditional_candidates)
    }

    /// Single `key=value` line for scripts; absent accuracies print `na`.
    pub fn machine_line(&self) -> String {
        let acc = |v: Option<f64>| v.map_or("na".to_string(), |x| format!("{x:.4}"));
        format!(
            "scored={} homograph_candidates={} homograph_correct={} homograph_accuracy={} \
             sense_candidates={} sense_correct={} sense_accuracy={} \
             conditional_candidates={} conditional_correct={} conditional_sense_accuracy={} \
             unknown_predictions={} gold_unlabeled={}",
            self.scored_tokens,
            self.homograph_candidates,
            self.homograph_correct,
            acc(self.homograph_accuracy()),
            self.sense_candidates,
            self.sense_correct,
            acc(self.sense_accuracy()),
            self.conditional_candidates,
            self.conditional_correct,
            acc(self.conditional_sense_accuracy()),
            self.unknown_predictions,
            self.gold_unlabeled,
        )
    }

    /// Multi-line human-readable summary.
    pub fn human_table(&self) -> String {
        let pct = |v: Option<f64>| v.map_or("   n/a".to_string(), |x| format!("{:5.1}%", x * 100.0));
        format!(
            "scored tokens            {:>6}\n\
             homograph accuracy       {} ({}/{})\n\
             sense accuracy           {} ({}/{})\n\
             sense | homograph right  {} ({}/{})\n\
             unknown predictions      {:>6}\n\
             unlabeled gold rows      {:>6}",
            self.scored_tokens,
            pct(self.homograph_accuracy()),
            self.homograph_correct,
            self.homograph_candidates,
            pct(self.sense_accuracy()),
            self.sense_correct,
            self.sense_candidates,
            pct(self.conditional_sense_accuracy()),
            self.conditional_correct,
            self.conditional_candidates,
            self.unknown_predictions,
            self.gold_unlabeled,
        )
    }
}

/// A prediction reduced to what scoring needs; the label stays in display
/// form and is resolved against the entry at scoring time.
struct Aligned {
    surface: String,
    stem: String,
    label: Option<(usize, usize)>,
}

fn index_predictions<I>(rows: I) -> Result<HashMap<(usize, usize), Aligned>, EvalError>
where
    I: IntoIterator<Item = ((usize, usize), Aligned)>,
{
    let mut map = HashMap::new();
    for (key, row) in rows {
        if map.insert(key, row).is_some() {
            return Err(EvalError::Alignment(format!(
                "duplicate prediction for sentence {} token {}",
                key.0, key.1
            )));
        }
    }
    Ok(map)
}

fn score_aligned(
    predictions: HashMap<(usize, usize), Aligned>,
    gold: &[Record],
    lexicon: &Lexicon,
) -> Result<EvalReport, EvalError> {
    let mut report = EvalReport::default();
    let mut seen = HashMap::new();
    for (line, row) in gold.iter().enumerate() {
        if seen.insert((row.sentence_index, row.token_index), ()).is_some() {
            return Err(EvalError::Alignment(format!(
                "duplicate gold row for sentence {} token {}",
                row.sentence_index, row.token_index
            )));
        }
        let Some(gold_label) = row.label else {
            report.gold_unlabeled += 1;
            continue;
        };
        let entry = lexicon.lookup(&row.stem).ok_or_else(|| EvalError::Gold {
            line: line + 1,
            message: format!("labeled stem '{}' is not in the lexicon", row.stem),
        })?;
        let (gold_h, gold_s) =
            entry
                .resolve_label(gold_label.0, gold_label.1)
                .ok_or_else(|| EvalError::Gold {
                    line: line + 1,
                    message: format!(
                        "label h{}.s{} does not exist for '{}'",
                        gold_label.0, gold_label.1, row.stem
                    ),
                })?;

        let key = (row.sentence_index, row.token_index);
        let pred = predictions.get(&key).ok_or_else(|| {
            EvalError::Alignment(format!(
                "no prediction for sentence {} token {} ('{}')",
                key.0, key.1, row.surface
            ))
        })?;
        if pred.surface != row.surface || pred.stem != row.stem {
            return Err(EvalError::Alignment(format!(
                "sentence {} token {}: prediction has '{}'/'{}' but gold has '{}'/'{}'",
                key.0, key.1, pred.surface, pred.stem, row.surface, row.stem
            )));
        }
        let pred_label = match pred.label {
            Some((h, s)) => Some(entry.resolve_label(h, s).ok_or_else(|| {
                EvalError::Alignment(format!(
                    "sentence {} token {}: predicted label h{h}.s{s} does not exist for '{}'",
                    key.0, key.1, row.stem
                ))
            })?),
            None => None,
        };

        report.scored_tokens += 1;
        if pred_label.is_none() {
            report.unknown_predictions += 1;
        }
        let homograph_right = pred_label.is_some_and(|(h, _)| h == gold_h);
        if entry.homograph_count() > 1 {
            report.homograph_candidates += 1;
            if homograph_right {
                report.homograph_correct += 1;
            }
        }
        if entry.sense_count() > 1 {
            report.sense_candidates += 1;
            let exact = pred_label == Some((gold_h, gold_s));
            if exact {
                report.sense_correct += 1;
            }
            if homograph_right {
                report.conditional_candidates += 1;
                if exact {
                    report.conditional_correct += 1;
                }
            }
        }
    }
    Ok(report)
}

/// Score record-file predictions against gold records.
pub fn score_records(
    predictions: &[Record],
    gold: &[Record],
    lexicon: &Lexicon,
) -> Result<EvalReport, EvalError> {
    let rows = predictions.iter().map(|r| {
        (
            (r.sentence_index, r.token_index),
            Aligned {
                surface: r.surface.clone(),
                stem: r.stem.clone(),
                label: r.label,
            },
        )
    });
    score_aligned(index_predictions(rows)?, gold, lexicon)
}

/// Score in-process tagger output against gold records.
pub fn score_tokens(
    predictions: &[TaggedToken],
    gold: &[Record],
    lexicon: &Lexicon,
) -> Result<EvalReport, EvalError> {
    let rows = predictions.iter().map(|t| {
        (
            (t.sentence_index, t.token_index),
            Aligned {
                surface: t.surface.clone(),
                stem: t.stem.clone(),
                label: t.tag.as_ref().map(|tag| {
                    parse_label(&tag.display).expect("tagger emits well-formed labels")
                }),
            },
        )
    });
    score_aligned(index_predictions(rows)?, gold, lexicon)
}

/// Results of one part-of-speech mode across several seeds.
#[derive(Debug, Clone)]
pub struct ModeRun {
    pub pos: PosSource,
    pub per_seed: Vec<(u64, EvalReport)>,
}

fn mean(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        sum += v?;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

impl ModeRun {
    pub fn mean_homograph_accuracy(&self) -> Option<f64> {
        mean(self.per_seed.iter().map(|(_, r)| r.homograph_accuracy()))
    }

    pub fn mean_sense_accuracy(&self) -> Option<f64> {
        mean(self.per_seed.iter().map(|(_, r)| r.sense_accuracy()))
    }
}

/// Tag the same text under several part-of-speech modes, scoring each run
/// against the gold records. Every mode sees the same seeds, so the
/// comparison is paired: differences come from the mode, not the draws.
#[allow(clippy::too_many_arguments)]
pub fn compare_modes(
    text: &str,
    pos_tags: Option<&[String]>,
    gold: &[Record],
    lexicon: &Lexicon,
    stops: &StopList,
    base: &TagOptions,
    modes: &[PosSource],
    seeds: &[u64],
) -> Result<Vec<ModeRun>, EvalError> {
    let mut runs = Vec::with_capacity(modes.len());
    for &pos in modes {
        let mut per_seed = Vec::with_capacity(seeds.len());
        for &seed in seeds {
            let mut options = base.clone();
            options.pos = pos;
            options.seed = seed;
            let tagged = tag_text(text, lexicon, stops, pos_tags, &options)?;
            per_seed.push((seed, score_tokens(&tagged, gold, lexicon)?));
        }
        runs.push(ModeRun { pos, per_seed });
    }
    Ok(runs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::Lexicon;
    use crate::textprep::StopList;

    // bank: two homographs (3 senses total); mint: one homograph, two
    // senses; dawn: monosemous.
    const LEXICON: &str = "\
@bank
h1.s1 noun :: money deposit institution
h1.s2 noun :: river side slope
h2.s1 verb :: tilt aircraft turn

@mint
h0.s1 noun :: herb leaf flavor
h0.s2 noun :: coin factory

@dawn
h0.s1 noun :: first light day
";

    fn lexicon() -> Lexicon {
        Lexicon::parse(LEXICON, &StopList::empty()).unwrap()
    }

    fn record(line: &str) -> Record {
        parse_records(line).unwrap().remove(0)
    }

    #[test]
    fn records_roundtrip_through_the_tagger_format() {
        let text = "0\t1\tbanks\tbank\th1.s2\triver side slope\n\
                    0\t2\tdawn\tdawn\th0.s1\tfirst light day\n\
                    1\t0\tzzz\tzzz\tUNKNOWN\t\n";
        let records = parse_records(text).unwrap();
        assert_eq!(records.len(), 3);
        assert_eq!(records[0].label, Some((1, 2)));
        assert_eq!(records[0].gloss, vec!["river", "side", "slope"]);
        assert_eq!(records[2].label, None);
        assert!(records[2].gloss.is_empty());
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let text = "# header\n\n0\t0\tdawn\tdawn\th0.s1\tfirst light day\n";
        assert_eq!(parse_records(text).unwrap().len(), 1);
    }

    #[test]
    fn parse_rejects_malformed_rows() {
        for (bad, why) in [
            ("0\t0\tdawn\tdawn\th0.s1", "five fields"),
            ("x\t0\tdawn\tdawn\th0.s1\t", "bad sentence index"),
            ("0\t0\tdawn\tdawn\tnonsense\t", "bad label"),
            ("0\t0\tdawn\tdawn\th1.s0\t", "sense zero"),
        ] {
            assert!(
                matches!(parse_records(bad), Err(EvalError::Parse { .. })),
                "accepted row with {why}"
            );
        }
    }

    #[test]
    fn perfect_predictions_score_one() {
        let gold = parse_records(
            "0\t0\tbank\tbank\th1.s1\t\n\
             0\t1\tmint\tmint\th0.s2\t\n\
             0\t2\tdawn\tdawn\th0.s1\t\n",
        )
        .unwrap();
        let report = score_records(&gold, &gold, &lexicon()).unwrap();
        assert_eq!(report.scored_tokens, 3);
        // Only bank has multiple homographs; dawn is monosemous and
        // qualifies for neither accuracy.
        assert_eq!(report.homograph_candidates, 1);
        assert_eq!(report.sense_candidates, 2);
        assert_eq!(report.homograph_accuracy(), Some(1.0));
        assert_eq!(report.sense_accuracy(), Some(1.0));
        assert_eq!(report.conditional_sense_accuracy(), Some(1.0));
        assert_eq!(report.unknown_predictions, 0);
    }

    #[test]
    fn right_homograph_wrong_sense_splits_the_scores() {
        let gold = parse_records("0\t0\tbank\tbank\th1.s1\t\n").unwrap();
        let pred = vec![record("0\t0\tbank\tbank\th1.s2\t")];
        let report = score_records(&pred, &gold, &lexicon()).unwrap();
        assert_eq!(report.homograph_accuracy(), Some(1.0));
        assert_eq!(report.sense_accuracy(), Some(0.0));
        assert_eq!(report.conditional_candidates, 1);
        assert_eq!(report.conditional_sense_accuracy(), Some(0.0));
    }

    #[test]
    fn wrong_homograph_misses_both_and_the_conditional_pool() {
        let gold = parse_records("0\t0\tbank\tbank\th1.s1\t\n").unwrap();
        let pred = vec![record("0\t0\tbank\tbank\th2.s1\t")];
        let report = score_records(&pred, &gold, &lexicon()).unwrap();
        assert_eq!(report.homograph_accuracy(), Some(0.0));
        assert_eq!(report.sense_accuracy(), Some(0.0));
        assert_eq!(report.conditional_candidates, 0);
        assert_eq!(report.conditional_sense_accuracy(), None);
    }

    #[test]
    fn unknown_prediction_on_labeled_gold_counts_against() {
        let gold = parse_records("0\t0\tmint\tmint\th0.s1\t\n").unwrap();
        let pred = vec![record("0\t0\tmint\tmint\tUNKNOWN\t")];
        let report = score_records(&pred, &gold, &lexicon()).unwrap();
        assert_eq!(report.sense_accuracy(), Some(0.0));
        assert_eq!(report.unknown_predictions, 1);
        assert_eq!(report.conditional_candidates, 0);
    }

    #[test]
    fn unlabeled_gold_rows_are_skipped() {
        let gold = parse_records(
            "0\t0\tzzz\tzzz\tUNKNOWN\t\n0\t1\tdawn\tdawn\th0.s1\t\n",
        )
        .unwrap();
        let pred = vec![
            record("0\t0\tzzz\tzzz\tUNKNOWN\t"),
            record("0\t1\tdawn\tdawn\th0.s1\t"),
        ];
        let report = score_records(&pred, &gold, &lexicon()).unwrap();
        assert_eq!(report.gold_unlabeled, 1);
        assert_eq!(report.scored_tokens, 1);
        assert_eq!(report.unknown_predictions, 0);
    }

    #[test]
    fn single_homograph_labels_resolve_across_display_forms() {
        // Gold says h0, the prediction says h1; both name mint's only
        // homograph and must compare equal.
        let gold = parse_records("0\t0\tmint\tmint\th0.s2\t\n").unwrap();
        let pred = vec![record("0\t0\tmint\tmint\th1.s2\t")];
        let report = score_records(&pred, &gold, &lexicon()).unwrap();
        assert_eq!(report.sense_accuracy(), Some(1.0));
    }

    #[test]
    fn all_monosemous_gold_has_no_accuracies() {
        let gold = parse_records("0\t0\tdawn\tdawn\th0.s1\t\n").unwrap();
        let report = score_records(&gold, &gold, &lexicon()).unwrap();
        assert_eq!(report.scored_tokens, 1);
        assert_eq!(report.homograph_accuracy(), None);
        assert_eq!(report.sense_accuracy(), None);
        assert!(report.machine_line().contains("sense_accuracy=na"));
    }

    #[test]
    fn missing_prediction_is_an_alignment_error() {
        let gold = parse_records("0\t5\tdawn\tdawn\th0.s1\t\n").unwrap();
        let err = score_records(&[], &gold, &lexicon()).unwrap_err();
        assert!(matches!(err, EvalError::Alignment(_)));
    }

    #[test]
    fn surface_mismatch_is_an_alignment_error() {
        let gold = parse_records("0\t0\tdawn\tdawn\th0.s1\t\n").unwrap();
        let pred = vec![record("0\t0\tdusk\tdawn\th0.s1\t")];
        let err = score_records(&pred, &gold, &lexicon()).unwrap_err();
        assert!(matches!(err, EvalError::Alignment(_)));
    }

    #[test]
    fn extra_predictions_are_ignored() {
        let gold = parse_records("0\t0\tdawn\tdawn\th0.s1\t\n").unwrap();
        let pred = vec![
            record("0\t0\tdawn\tdawn\th0.s1\t"),
            record("7\t7\tbank\tbank\th1.s1\t"),
        ];
        let report = score_records(&pred, &gold, &lexicon()).unwrap();
        assert_eq!(report.scored_tokens, 1);
    }

    #[test]
    fn gold_stem_outside_the_lexicon_is_an_error() {
        let gold = parse_records("0\t0\tzzz\tzzz\th0.s1\t\n").unwrap();
        let pred = vec![record("0\t0\tzzz\tzzz\th0.s1\t")];
        let err = score_records(&pred, &gold, &lexicon()).unwrap_err();
        assert!(matches!(err, EvalError::Gold { .. }));
    }

    #[test]
    fn unresolvable_gold_label_is_an_error() {
        let gold = parse_records("0\t0\tmint\tmint\th2.s1\t\n").unwrap();
        let pred = vec![record("0\t0\tmint\tmint\th0.s1\t")];
        let err = score_records(&pred, &gold, &lexicon()).unwrap_err();
        assert!(matches!(err, EvalError::Gold { .. }));
    }

    #[test]
    fn duplicate_gold_rows_are_rejected() {
        let gold = parse_records(
            "0\t0\tdawn\tdawn\th0.s1\t\n0\t0\tdawn\tdawn\th0.s1\t\n",
        )
        .unwrap();
        let pred = vec![record("0\t0\tdawn\tdawn\th0.s1\t")];
        let err = score_records(&pred, &gold, &lexicon()).unwrap_err();
        assert!(matches!(err, EvalError::Alignment(_)));
    }

    #[test]
    fn score_tokens_matches_score_records_on_tagger_output() {
        use crate::tagger::{tag_text, TagOptions};
        let lex = lexicon();
        let gold = parse_records(
            "0\t0\tbank\tbank\th1.s1\t\n0\t1\tmint\tmint\th0.s2\t\n",
        )
        .unwrap();
        let tagged = tag_text(
            "bank mint",
            &lex,
            &StopList::empty(),
            None,
            &TagOptions::default(),
        )
        .unwrap();
        let direct = score_tokens(&tagged, &gold, &lex).unwrap();
        let via_records: Vec<Record> = tagged
            .iter()
            .map(|t| record(&t.to_record()))
            .collect();
        let roundtrip = score_records(&via_records, &gold, &lex).unwrap();
        assert_eq!(direct, roundtrip);
    }

    #[test]
    fn compare_modes_pairs_seeds_across_modes() {
        let lex = lexicon();
        let gold = parse_records(
            "0\t0\tbank\tbank\th1.s1\t\n0\t1\tmint\tmint\th0.s2\t\n",
        )
        .unwrap();
        let runs = compare_modes(
            "bank mint",
            None,
            &gold,
            &lex,
            &StopList::empty(),
            &TagOptions::default(),
            &[PosSource::Off, PosSource::Naive],
            &[3, 4, 5],
        )
        .unwrap();
        assert_eq!(runs.len(), 2);
        for run in &runs {
            assert_eq!(run.per_seed.len(), 3);
            assert_eq!(
                run.per_seed.iter().map(|(s, _)| *s).collect::<Vec<_>>(),
                vec![3, 4, 5]
            );
            assert!(run.mean_sense_accuracy().is_some());
        }
        // Same text, same seed, same mode: scoring is deterministic.
        let again = compare_modes(
            "bank mint",
            None,
            &gold,
            &lex,
            &StopList::empty(),
            &TagOptions::default(),
            &[PosSource::Off],
            &[3],
        )
        .unwrap();
        assert_eq!(again[0].per_seed[0].1, runs[0].per_seed[0].1);
    }

    #[test]
    fn mean_accuracy_averages_per_seed_values() {
        let a = EvalReport {
            sense_candidates: 2,
            sense_correct: 2,
            ..EvalReport::default()
        };
        let b = EvalReport {
            sense_candidates: 2,
            sense_correct: 1,
            ..EvalReport::default()
        };
        let run = ModeRun {
            pos: PosSource::Off,
            per_seed: vec![(0, a), (1, b)],
        };
        assert_eq!(run.mean_sense_accuracy(), Some(0.75));
        assert_eq!(run.mean_homograph_accuracy(), None);
    }
}
