//! Release gate: one test per shipping criterion, each printing a PASS or
//! FAIL line (run with `--nocapture` to see them all). These overlap with
//! the unit and property suites on purpose — this file is the single place
//! that answers "is the build good?".

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sensetag::annealer::{
    anneal, brute_force_optimum, CandidateSense, CandidateSpace, SlotCandidates,
};
use sensetag::domaincodes::DomainTree;
use sensetag::eval::{compare_modes, load_records};
use sensetag::overlap::EnergyParams;
use sensetag::pos::filter_senses;
use sensetag::tagger::PosSource;
use sensetag::textprep::StopList;
use sensetag::{
    normalized_overlap, raw_overlap, CoarsePos, Lexicon, OverlapMode, Schedule, Score, Sense,
    TagOptions,
};

fn check(number: u32, name: &str, body: impl FnOnce() + std::panic::UnwindSafe) {
    let result = std::panic::catch_unwind(body);
    let verdict = if result.is_ok() { "PASS" } else { "FAIL" };
    println!("acceptance criterion {number} ({name}): {verdict}");
    if let Err(cause) = result {
        std::panic::resume_unwind(cause);
    }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn fixture_lexicon() -> Lexicon {
    Lexicon::load_with_stops(fixture("lexicon.txt"), StopList::default_list()).unwrap()
}

fn corpus_text() -> String {
    std::fs::read_to_string(fixture("corpus.txt")).unwrap()
}

const VOCAB: [&str; 12] = [
    "river", "money", "water", "grain", "trade", "stone", "field", "wheel", "crowd", "light",
    "sound", "earth",
];

fn random_space(rng: &mut ChaCha8Rng, max_slots: usize, max_cands: usize) -> CandidateSpace {
    let slots = (0..rng.gen_range(1..=max_slots))
        .map(|i| SlotCandidates {
            token_index: i,
            lemma: format!("word{i}"),
            candidates: (0..rng.gen_range(1..=max_cands))
                .map(|c| CandidateSense {
                    homograph: 1,
                    sense: c + 1,
                    gloss: (0..rng.gen_range(1..=8))
                        .map(|_| VOCAB[rng.gen_range(0..VOCAB.len())].to_string())
                        .collect(),
                    domain: None,
                })
                .collect(),
        })
        .collect();
    CandidateSpace::new(slots)
}

#[test]
fn criterion_1_annealing_reaches_the_exhaustive_optimum() {
    check(1, "annealing reaches the exhaustive optimum", || {
        let start = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(0x00ac_ce55);
        let total = 120u32;
        let mut hits = 0u32;
        for case in 0..total {
            let space = random_space(&mut rng, 6, 4);
            let mode = if case % 2 == 0 { OverlapMode::Raw } else { OverlapMode::Normalized };
            let params = EnergyParams {
                mode,
                domain_weight: Score::from_integer(0),
                domains: None,
            };
            let (_, optimum) = brute_force_optimum(&space, &params, None).unwrap();
            let run = anneal(&space, &params, &Schedule::default(), 1_000 + case as u64).unwrap();
            assert!(run.energy <= run.initial_energy, "worse than its own start");
            assert!(run.energy >= optimum, "below the exhaustive optimum");
            if run.energy == optimum {
                hits += 1;
            }
        }
        assert!(
            hits * 100 >= total * 95,
            "only {hits}/{total} seeded runs reached the optimum"
        );
        assert!(start.elapsed() < Duration::from_secs(30), "took {:?}", start.elapsed());
    });
}

#[test]
fn criterion_2_overlap_worked_cases_are_exact() {
    check(2, "overlap worked cases are exact", || {
        let words = |s: &str| -> Vec<String> { s.split_whitespace().map(str::to_string).collect() };

        // One word pooled three times scores 3 - 1 = 2; nothing else repeats.
        let a = words("alpha beta");
        let b = words("alpha gamma");
        let c = words("alpha delta");
        assert_eq!(raw_overlap(&[&a, &b, &c]), Score::from_integer(2));

        // A word shared by two three-word glosses: 1/3 + 1/3 minus the
        // smallest contribution 1/3 leaves exactly one third.
        let x = words("share one two");
        let y = words("share three four");
        assert_eq!(normalized_overlap(&[&x, &y]), Score::new(1, 3));
    });
}

#[test]
fn criterion_3_equal_length_glosses_tie_the_two_modes() {
    check(3, "equal gloss length ties normalized to raw", || {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..1_000 {
            let len = rng.gen_range(1..=6usize);
            let glosses: Vec<Vec<String>> = (0..rng.gen_range(1..=6))
                .map(|_| {
                    (0..len)
                        .map(|_| VOCAB[rng.gen_range(0..VOCAB.len())].to_string())
                        .collect()
                })
                .collect();
            let refs: Vec<&[String]> = glosses.iter().map(|g| g.as_slice()).collect();
            let raw = raw_overlap(&refs);
            let normalized = normalized_overlap(&refs);
            assert_eq!(normalized * Score::from_integer(len as i128), raw);
        }
    });
}

#[test]
fn criterion_4_example_sentence_reproduces_its_labels() {
    check(4, "example sentence reproduces its labels", || {
        let lexicon = fixture_lexicon();
        let tagged = sensetag::tag_text(
            "A rapid rise in prices soon eventuated unemployment.",
            &lexicon,
            StopList::default_list(),
            None,
            &TagOptions::default(),
        )
        .unwrap();
        let label = |surface: &str| {
            tagged
                .iter()
                .find(|t| t.surface == surface)
                .unwrap_or_else(|| panic!("no token '{surface}'"))
                .tag
                .as_ref()
                .unwrap_or_else(|| panic!("'{surface}' untagged"))
                .display
                .clone()
        };
        assert_eq!(label("rapid"), "h1.s2");
        assert_eq!(label("rise"), "h2.s1");
        assert_eq!(label("prices"), "h1.s1");
        assert_eq!(label("soon"), "h0.s1");
        assert_eq!(label("unemployment"), "h0.s1");
    });
}

#[test]
fn criterion_5_pos_filtering_does_not_hurt_mean_homograph_accuracy() {
    check(5, "pos filtering does not hurt mean homograph accuracy", || {
        let lexicon = fixture_lexicon();
        let gold = load_records(&fixture("gold.tsv")).unwrap();
        let seeds: Vec<u64> = (1..=10).collect();
        let runs = compare_modes(
            &corpus_text(),
            None,
            &gold,
            &lexicon,
            StopList::default_list(),
            &TagOptions::default(),
            &[PosSource::Off, PosSource::Naive],
            &seeds,
        )
        .unwrap();
        let sa_only = runs[0].mean_homograph_accuracy().unwrap();
        let pos_sa = runs[1].mean_homograph_accuracy().unwrap();
        assert!(
            pos_sa >= sa_only,
            "pos+sa mean {pos_sa:.4} fell below sa-only mean {sa_only:.4}"
        );
    });
}

#[test]
fn criterion_6_pos_filter_contract_holds_on_random_sense_lists() {
    check(6, "pos filter keeps a nonempty faithful subset", || {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let all = [
            CoarsePos::Noun,
            CoarsePos::Verb,
            CoarsePos::Adjective,
            CoarsePos::Adverb,
            CoarsePos::Other,
            CoarsePos::Wildcard,
        ];
        for _ in 0..1_000 {
            let senses: Vec<Sense> = (0..rng.gen_range(1..=8))
                .map(|i| Sense {
                    homograph: 1,
                    sense: i + 1,
                    pos: all[rng.gen_range(0..all.len())],
                    domain: None,
                    gloss: vec![format!("g{i}")],
                })
                .collect();
            for want in all {
                let kept = filter_senses(&senses, want);

                assert!(!kept.is_empty(), "filter must never empty a sense list");
                for sense in &kept {
                    assert!(
                        senses.iter().any(|s| std::ptr::eq(s, *sense)),
                        "filter invented a sense"
                    );
                }

                let matching: Vec<&Sense> =
                    senses.iter().filter(|s| s.pos.matches(want)).collect();
                if matching.is_empty() {
                    assert_eq!(kept.len(), senses.len(), "fallback must keep everything");
                } else {
                    assert_eq!(kept, matching, "filter must keep exactly the matches");
                }

                let surviving: Vec<Sense> = kept.iter().map(|s| (*s).clone()).collect();
                let again = filter_senses(&surviving, want);
                assert_eq!(again.len(), surviving.len(), "second pass must be a no-op");
            }
        }
    });
}

#[test]
fn criterion_7_records_are_identical_across_runs_and_thread_counts() {
    check(7, "records are identical across runs and thread counts", || {
        let corpus = fixture("corpus.txt");
        let lexicon = fixture("lexicon.txt");
        let tag = |jobs: &str| {
            let output = Command::new(env!("CARGO_BIN_EXE_sensetag"))
                .args(["tag", "--lexicon"])
                .arg(&lexicon)
                .args(["--seed", "123", "--jobs", jobs])
                .arg(&corpus)
                .env_remove("SENSETAG_LEXICON")
                .output()
                .unwrap();
            assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
            output.stdout
        };
        let first = tag("1");
        let again = tag("1");
        let wide = tag("4");
        assert!(!first.is_empty());
        assert_eq!(first, again, "same seed, same thread count, different bytes");
        assert_eq!(first, wide, "thread count changed the output bytes");
    });
}

#[test]
fn criterion_8_fixture_corpus_tags_quickly() {
    check(8, "fixture corpus tags in under five seconds", || {
        let lexicon = fixture_lexicon();
        let text = corpus_text();
        let start = Instant::now();
        let tagged = sensetag::tag_text(
            &text,
            &lexicon,
            StopList::default_list(),
            None,
            &TagOptions::default(),
        )
        .unwrap();
        let elapsed = start.elapsed();
        assert!(tagged.len() > 100, "corpus shrank?");
        assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    });
}

#[test]
fn criterion_9_domain_distance_is_a_metric_and_zero_weight_is_neutral() {
    check(9, "domain distance is a metric and zero weight is neutral", || {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let nodes = 100usize;
        let mut text = String::from("N0\t-\n");
        for i in 1..nodes {
            let parent = rng.gen_range(0..i);
            text.push_str(&format!("N{i}\tN{parent}\n"));
        }
        let tree = DomainTree::parse(&text).unwrap();
        let name = |i: usize| format!("N{i}");
        for _ in 0..1_000 {
            let a = name(rng.gen_range(0..nodes));
            let b = name(rng.gen_range(0..nodes));
            let c = name(rng.gen_range(0..nodes));
            let ab = tree.node_distance(&a, &b).unwrap();
            let ba = tree.node_distance(&b, &a).unwrap();
            let ac = tree.node_distance(&a, &c).unwrap();
            let cb = tree.node_distance(&c, &b).unwrap();
            assert_eq!(tree.node_distance(&a, &a).unwrap(), 0, "identity");
            assert_eq!(ab, ba, "symmetry");
            assert!(ab <= ac + cb, "triangle inequality");
            if a != b {
                assert!(ab > 0, "separation");
            }
        }

        let lexicon = fixture_lexicon();
        let stops = StopList::default_list();
        let text = corpus_text();
        let fixture_tree = DomainTree::load(fixture("domains.tsv")).unwrap();
        let weighted_zero = TagOptions {
            domain_tree: Some(&fixture_tree),
            domain_weight: Score::from_integer(0),
            ..TagOptions::default()
        };
        let with_tree =
            sensetag::tag_text(&text, &lexicon, stops, None, &weighted_zero).unwrap();
        let without =
            sensetag::tag_text(&text, &lexicon, stops, None, &TagOptions::default()).unwrap();
        assert_eq!(with_tree.len(), without.len());
        for (a, b) in with_tree.iter().zip(&without) {
            assert_eq!(a.to_record(), b.to_record(), "zero weight changed a record");
        }
    });
}
