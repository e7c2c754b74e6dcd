//! Shared fixture-building machinery for the integration and acceptance
//! suites.
//!
//! The 40-idiom replay fixture is generated from the design table below:
//! per idiom, one pattern per chain over `+` (positive judgment), `-`
//! (negative), `0` (neutral), `?` (judgment without a keyword, hence
//! unparseable) and `x` (the generation ran short, leaving an empty
//! slot; only valid at the tail). Finals are hand-computed from the
//! patterns; 34 of 40 match the gold label, so the fixture accuracy is
//! pinned at 85.0.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use idiomlex::backend::replay::ReplayRecord;
use idiomlex::templates::PromptTemplateSet;
use idiomlex_core::calo::{EmotionAnnotation, FineEmotion};
use idiomlex_core::{IdiomEntry, Language, SentimentLabel, StrategyKind};

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn templates_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../templates")
}

pub fn load_templates() -> PromptTemplateSet {
    PromptTemplateSet::load(templates_dir()).unwrap()
}

/// One designed idiom of the 40-idiom replay fixture.
pub struct DesignedIdiom {
    pub surface: &'static str,
    pub language: Language,
    pub gold: char,
    /// Ship the gold label as CALO emotion annotations instead of an
    /// explicit sentiment field.
    pub via_emotions: bool,
    pub literal: &'static str,
    pub etym: &'static str,
    /// Hand-computed plurality winner over both patterns.
    pub final_label: char,
}

const D: bool = false;
const E: bool = true;

#[rustfmt::skip]
pub const DESIGN: &[DesignedIdiom] = &[
    DesignedIdiom { surface: "得心应手", language: Language::Zh, gold: '+', via_emotions: D, literal: "+++++", etym: "+++++", final_label: '+' },
    DesignedIdiom { surface: "如花似玉", language: Language::Zh, gold: '+', via_emotions: E, literal: "++++0", etym: "+++++", final_label: '+' },
    DesignedIdiom { surface: "愁眉苦脸", language: Language::Zh, gold: '-', via_emotions: E, literal: "-----", etym: "-----", final_label: '-' },
    DesignedIdiom { surface: "心旷神怡", language: Language::Zh, gold: '+', via_emotions: D, literal: "+++++", etym: "++++?", final_label: '+' },
    DesignedIdiom { surface: "一丝不苟", language: Language::Zh, gold: '+', via_emotions: D, literal: "+++++", etym: "+++++", final_label: '+' },
    DesignedIdiom { surface: "损人利己", language: Language::Zh, gold: '-', via_emotions: D, literal: "-----", etym: "----0", final_label: '-' },
    DesignedIdiom { surface: "雪中送炭", language: Language::Zh, gold: '+', via_emotions: D, literal: "+++++", etym: "+++++", final_label: '+' },
    DesignedIdiom { surface: "落井下石", language: Language::Zh, gold: '-', via_emotions: D, literal: "-----", etym: "-----", final_label: '-' },
    DesignedIdiom { surface: "画蛇添足", language: Language::Zh, gold: '-', via_emotions: D, literal: "--0--", etym: "-----", final_label: '-' },
    DesignedIdiom { surface: "守株待兔", language: Language::Zh, gold: '-', via_emotions: D, literal: "000-0", etym: "0-000", final_label: '0' },
    DesignedIdiom { surface: "南辕北辙", language: Language::Zh, gold: '-', via_emotions: D, literal: "-----", etym: "--?--", final_label: '-' },
    DesignedIdiom { surface: "琳琅满目", language: Language::Zh, gold: '+', via_emotions: E, literal: "+++++", etym: "+++++", final_label: '+' },
    DesignedIdiom { surface: "百折不挠", language: Language::Zh, gold: '+', via_emotions: D, literal: "+0+++", etym: "+++++", final_label: '+' },
    DesignedIdiom { surface: "见异思迁", language: Language::Zh, gold: '-', via_emotions: D, literal: "-----", etym: "---0-", final_label: '-' },
    DesignedIdiom { surface: "井底之蛙", language: Language::Zh, gold: '-', via_emotions: D, literal: "-----", etym: "-----", final_label: '-' },
    DesignedIdiom { surface: "欣欣向荣", language: Language::Zh, gold: '+', via_emotions: D, literal: "+++++", etym: "+++++", final_label: '+' },
    DesignedIdiom { surface: "铁面无私", language: Language::Zh, gold: '+', via_emotions: D, literal: "00+00", etym: "0+000", final_label: '0' },
    DesignedIdiom { surface: "偷工减料", language: Language::Zh, gold: '-', via_emotions: D, literal: "-----", etym: "-----", final_label: '-' },
    DesignedIdiom { surface: "不偏不倚", language: Language::Zh, gold: '0', via_emotions: D, literal: "00000", etym: "00+00", final_label: '0' },
    DesignedIdiom { surface: "按部就班", language: Language::Zh, gold: '0', via_emotions: D, literal: "+++++", etym: "+++++", final_label: '+' },
    DesignedIdiom { surface: "spill the beans", language: Language::En, gold: '-', via_emotions: D, literal: "-----", etym: "-----", final_label: '-' },
    DesignedIdiom { surface: "a blessing in disguise", language: Language::En, gold: '+', via_emotions: D, literal: "+++++", etym: "+++++", final_label: '+' },
    DesignedIdiom { surface: "hit the nail on the head", language: Language::En, gold: '+', via_emotions: D, literal: "++++0", etym: "+++++", final_label: '+' },
    DesignedIdiom { surface: "add insult to injury", language: Language::En, gold: '-', via_emotions: D, literal: "-----", etym: "-----", final_label: '-' },
    DesignedIdiom { surface: "a piece of cake", language: Language::En, gold: '+', via_emotions: D, literal: "+++++", etym: "+++0+", final_label: '+' },
    DesignedIdiom { surface: "bite the bullet", language: Language::En, gold: '0', via_emotions: D, literal: "++0++", etym: "+++++", final_label: '+' },
    DesignedIdiom { surface: "break the ice", language: Language::En, gold: '+', via_emotions: D, literal: "+++++", etym: "+++++", final_label: '+' },
    DesignedIdiom { surface: "cost an arm and a leg", language: Language::En, gold: '-', via_emotions: D, literal: "-----", etym: "--0--", final_label: '-' },
    DesignedIdiom { surface: "under the weather", language: Language::En, gold: '-', via_emotions: D, literal: "-0---", etym: "-----", final_label: '-' },
    DesignedIdiom { surface: "once in a blue moon", language: Language::En, gold: '0', via_emotions: D, literal: "00000", etym: "000-0", final_label: '0' },
    DesignedIdiom { surface: "the icing on the cake", language: Language::En, gold: '+', via_emotions: D, literal: "+++++", etym: "+++++", final_label: '+' },
    DesignedIdiom { surface: "throw in the towel", language: Language::En, gold: '-', via_emotions: D, literal: "-----", etym: "---??", final_label: '-' },
    DesignedIdiom { surface: "a double-edged sword", language: Language::En, gold: '0', via_emotions: D, literal: "0+0-0", etym: "00000", final_label: '0' },
    DesignedIdiom { surface: "salt of the earth", language: Language::En, gold: '+', via_emotions: D, literal: "+++++", etym: "+++++", final_label: '+' },
    DesignedIdiom { surface: "leave someone in the lurch", language: Language::En, gold: '-', via_emotions: D, literal: "-----", etym: "-----", final_label: '-' },
    DesignedIdiom { surface: "one's cup of tea", language: Language::En, gold: '+', via_emotions: D, literal: "++?xx", etym: "+++++", final_label: '+' },
    DesignedIdiom { surface: "burn the midnight oil", language: Language::En, gold: '0', via_emotions: D, literal: "+++0+", etym: "++++?", final_label: '+' },
    DesignedIdiom { surface: "get cold feet", language: Language::En, gold: '-', via_emotions: D, literal: "-----", etym: "-0---", final_label: '-' },
    DesignedIdiom { surface: "on cloud nine", language: Language::En, gold: '+', via_emotions: D, literal: "+++++", etym: "+++++", final_label: '+' },
    DesignedIdiom { surface: "pull someone's leg", language: Language::En, gold: '0', via_emotions: D, literal: "++++0", etym: "++0++", final_label: '+' },
];

pub fn label_of(c: char) -> SentimentLabel {
    match c {
        '+' => SentimentLabel::Positive,
        '-' => SentimentLabel::Negative,
        '0' => SentimentLabel::Neutral,
        other => panic!("not a label char: {other}"),
    }
}

/// Canned judgment wording per label, cycled for a little variety. None
/// of the `?` variants contains a keyword in either language.
fn judgment_text(language: Language, c: char, variant: usize) -> &'static str {
    let table: &[&str] = match (language, c) {
        (Language::En, '+') => {
            &["The sentiment is positive.", "Positive.", "Overall, this is positive."]
        }
        (Language::En, '-') => {
            &["The sentiment is negative.", "Negative.", "Clearly negative in tone."]
        }
        (Language::En, '0') => &["The sentiment is neutral.", "Neutral.", "It reads as neutral."],
        (Language::En, '?') => {
            &["Hard to say without more context.", "It depends entirely on the situation."]
        }
        (Language::Zh, '+') => &["这个短语表达积极情感。", "积极。", "整体上是积极的。"],
        (Language::Zh, '-') => &["这个短语表达消极情感。", "消极。", "带有明显的贬义。"],
        (Language::Zh, '0') => &["这个短语表达中性情感。", "中性。", "总体来看是中性的。"],
        (Language::Zh, '?') => &["这要看具体语境。", "很难判断。"],
        other => panic!("no judgment text for {other:?}"),
    };
    table[variant % table.len()]
}

fn sentence_text(language: Language, surface: &str, slot: usize) -> String {
    match language {
        Language::En => {
            format!("Usage {}: the phrase \"{surface}\" fits this situation.", slot + 1)
        }
        Language::Zh => format!("例句{}：这件事让人觉得{surface}。", slot + 1),
    }
}

fn example_text(language: Language, surface: &str, slot: usize) -> String {
    match language {
        Language::En => {
            format!("Example {}: true to its origin, \"{surface}\" applies here.", slot + 1)
        }
        Language::Zh => format!("出处例{}：正如典故所言，{surface}。", slot + 1),
    }
}

fn origin_text(language: Language, surface: &str) -> String {
    match language {
        Language::En => format!(
            "The idiom \"{surface}\" comes from an old story and has long been used figuratively."
        ),
        Language::Zh => format!("成语“{surface}”出自古代典籍，后来被广泛使用。"),
    }
}

fn canned(
    templates: &PromptTemplateSet,
    language: Language,
    step: &str,
    vars: &[(&str, &str)],
    response: &str,
) -> ReplayRecord {
    ReplayRecord {
        prompt: templates.render(language, StrategyKind::DualCoTs, step, vars).unwrap(),
        sample_index: 0,
        response: response.into(),
    }
}

/// Replay records driving one dual-chain run of a designed idiom.
pub fn dualcots_records(
    templates: &PromptTemplateSet,
    surface: &str,
    language: Language,
    literal: &str,
    etym: &str,
) -> Vec<ReplayRecord> {
    assert_eq!(literal.chars().count(), 5);
    assert_eq!(etym.chars().count(), 5);
    let mut records = Vec::new();

    // literal generation lists a sentence for every non-missing slot
    let mut generated = Vec::new();
    for (slot, c) in literal.chars().enumerate() {
        if c == 'x' {
            continue;
        }
        assert!(
            literal[..literal.char_indices().nth(slot).unwrap().0].chars().all(|p| p != 'x'),
            "missing slots must be a tail: {literal}"
        );
        generated.push(sentence_text(language, surface, slot));
    }
    let listing = generated
        .iter()
        .enumerate()
        .map(|(i, s)| format!("{}. {s}", i + 1))
        .collect::<Vec<_>>()
        .join("\n");
    records.push(canned(
        templates,
        language,
        "literal_generate",
        &[("idiom", surface), ("count", "5")],
        &listing,
    ));
    for (slot, c) in literal.chars().enumerate().filter(|(_, c)| *c != 'x') {
        let sentence = sentence_text(language, surface, slot);
        records.push(canned(
            templates,
            language,
            "literal_judge",
            &[("idiom", surface), ("sentence", &sentence)],
            judgment_text(language, c, slot),
        ));
    }

    // etymological chain: origin, examples, judgments
    let origin = origin_text(language, surface);
    records.push(canned(templates, language, "etym_origin", &[("idiom", surface)], &origin));
    let examples: Vec<String> = (0..5).map(|slot| example_text(language, surface, slot)).collect();
    let listing = examples
        .iter()
        .enumerate()
        .map(|(i, s)| format!("{}. {s}", i + 1))
        .collect::<Vec<_>>()
        .join("\n");
    records.push(canned(
        templates,
        language,
        "etym_examples",
        &[("idiom", surface), ("origin", &origin), ("count", "5")],
        &listing,
    ));
    for (slot, c) in etym.chars().enumerate() {
        assert_ne!(c, 'x', "etym patterns in the design table have no missing slots");
        records.push(canned(
            templates,
            language,
            "etym_judge",
            &[("idiom", surface), ("origin", &origin), ("sentence", &examples[slot])],
            judgment_text(language, c, slot + 1),
        ));
    }
    records
}

/// The lexicon rows for the designed idioms. A few Chinese rows carry
/// CALO emotion annotations instead of an explicit sentiment field.
pub fn design_lexicon() -> Vec<IdiomEntry> {
    DESIGN
        .iter()
        .map(|d| {
            let mut entry = IdiomEntry::new(d.surface, d.language).with_source("fixture");
            if d.via_emotions {
                entry.emotions = match d.gold {
                    '+' => vec![
                        EmotionAnnotation::new(FineEmotion::PH, 5),
                        EmotionAnnotation::new(FineEmotion::PA, 3),
                    ],
                    '-' => vec![EmotionAnnotation::new(FineEmotion::NB, 7)],
                    _ => vec![EmotionAnnotation::new(FineEmotion::PC, 5)],
                };
            } else {
                entry.gold_sentiment = Some(label_of(d.gold));
            }
            entry
        })
        .collect()
}

/// Full replay fixture for the 40-idiom dual-chain run.
pub fn design_fixture(templates: &PromptTemplateSet) -> Vec<ReplayRecord> {
    let mut records = Vec::new();
    for d in DESIGN {
        records.extend(dualcots_records(templates, d.surface, d.language, d.literal, d.etym));
    }
    records
}

/// Accuracy implied by the design table, as a percentage.
pub fn design_accuracy() -> f64 {
    let correct = DESIGN.iter().filter(|d| d.final_label == d.gold).count();
    100.0 * correct as f64 / DESIGN.len() as f64
}

pub const FIG2_IDIOM: &str = "a ray of sunshine";

/// Figure-style scenario: literal judgments mostly neutral, etymological
/// judgments positive, so the dual vote shifts neutral -> positive.
pub fn fig2_fixture(templates: &PromptTemplateSet) -> Vec<ReplayRecord> {
    dualcots_records(templates, FIG2_IDIOM, Language::En, "00+00", "+++++")
}
