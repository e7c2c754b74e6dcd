//! CALO emotion annotations and their collapse to sentiment polarity.
//!
//! The Chinese Affective Lexicon Ontology tags idioms with one of seven
//! coarse emotion categories, a fine subcategory (21 in total) and an
//! odd intensity grade in `{1, 3, 5, 7, 9}`. Idiom lexicons built on
//! CALO carry no polarity of their own, so a coarse-category-to-polarity
//! table is used to derive gold sentiment labels. The table shipped here
//! is a documented default and can be swapped via [`CaloPolarityMap`].

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::label::SentimentLabel;

/// The seven coarse CALO emotion categories.
///
/// `Joy` is 乐, `Good` is 好 (respect/praise/belief and similar positive
/// stances that 乐 does not cover), `Anger` 怒, `Sadness` 哀, `Fear` 惧,
/// `Disgust` 恶, `Surprise` 惊.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoarseEmotion {
    Joy,
    Good,
    Anger,
    Sadness,
    Fear,
    Disgust,
    Surprise,
}

impl CoarseEmotion {
    pub const ALL: [CoarseEmotion; 7] = [
        Self::Joy,
        Self::Good,
        Self::Anger,
        Self::Sadness,
        Self::Fear,
        Self::Disgust,
        Self::Surprise,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Joy => "joy",
            Self::Good => "good",
            Self::Anger => "anger",
            Self::Sadness => "sadness",
            Self::Fear => "fear",
            Self::Disgust => "disgust",
            Self::Surprise => "surprise",
        }
    }
}

impl fmt::Display for CoarseEmotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The 21 fine CALO emotion codes, named by their standard two-letter tags.
///
/// Note that PF (思, longing) sits under 哀/Sadness and PC (惊奇, amazement)
/// under 惊/Surprise despite their P prefixes; the prefixes come from the
/// original ontology and do not encode polarity here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[allow(clippy::upper_case_acronyms)]
pub enum FineEmotion {
    PA,
    PE,
    PD,
    PH,
    PG,
    PB,
    PK,
    NA,
    NB,
    NJ,
    NH,
    PF,
    NI,
    NC,
    NG,
    NE,
    ND,
    NN,
    NK,
    NL,
    PC,
}

impl FineEmotion {
    pub const ALL: [FineEmotion; 21] = [
        Self::PA,
        Self::PE,
        Self::PD,
        Self::PH,
        Self::PG,
        Self::PB,
        Self::PK,
        Self::NA,
        Self::NB,
        Self::NJ,
        Self::NH,
        Self::PF,
        Self::NI,
        Self::NC,
        Self::NG,
        Self::NE,
        Self::ND,
        Self::NN,
        Self::NK,
        Self::NL,
        Self::PC,
    ];

    /// The coarse category this fine code belongs to, per the static
    /// CALO mapping table.
    pub fn coarse(self) -> CoarseEmotion {
        match self {
            Self::PA | Self::PE => CoarseEmotion::Joy,
            Self::PD | Self::PH | Self::PG | Self::PB | Self::PK => CoarseEmotion::Good,
            Self::NA => CoarseEmotion::Anger,
            Self::NB | Self::NJ | Self::NH | Self::PF => CoarseEmotion::Sadness,
            Self::NI | Self::NC | Self::NG => CoarseEmotion::Fear,
            Self::NE | Self::ND | Self::NN | Self::NK | Self::NL => CoarseEmotion::Disgust,
            Self::PC => CoarseEmotion::Surprise,
        }
    }
}

/// One CALO annotation: coarse category, fine code, intensity grade.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EmotionAnnotation {
    pub coarse: CoarseEmotion,
    pub fine: FineEmotion,
    pub intensity: u8,
}

impl EmotionAnnotation {
    pub fn new(fine: FineEmotion, intensity: u8) -> Self {
        Self { coarse: fine.coarse(), fine, intensity }
    }

    /// Checks the intensity grade and the fine/coarse consistency.
    pub fn validate(&self) -> Result<(), AnnotationInvalid> {
        if !matches!(self.intensity, 1 | 3 | 5 | 7 | 9) {
            return Err(AnnotationInvalid::BadIntensity(self.intensity));
        }
        if self.fine.coarse() != self.coarse {
            return Err(AnnotationInvalid::CoarseMismatch {
                fine: self.fine,
                declared: self.coarse,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnnotationInvalid {
    #[error("intensity {0} is not one of 1, 3, 5, 7, 9")]
    BadIntensity(u8),
    #[error("fine emotion {fine:?} does not belong to coarse category {declared}")]
    CoarseMismatch { fine: FineEmotion, declared: CoarseEmotion },
}

/// Raised when a polarity is requested for an empty annotation list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("emotion annotation list is empty")]
pub struct EmptyAnnotation;

/// Coarse-category-to-polarity table.
///
/// The default sends joy and good to positive, anger/sadness/fear/disgust
/// to negative, and surprise to neutral (surprise carries no polarity of
/// its own).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaloPolarityMap {
    pub joy: SentimentLabel,
    pub good: SentimentLabel,
    pub anger: SentimentLabel,
    pub sadness: SentimentLabel,
    pub fear: SentimentLabel,
    pub disgust: SentimentLabel,
    pub surprise: SentimentLabel,
}

impl Default for CaloPolarityMap {
    fn default() -> Self {
        Self {
            joy: SentimentLabel::Positive,
            good: SentimentLabel::Positive,
            anger: SentimentLabel::Negative,
            sadness: SentimentLabel::Negative,
            fear: SentimentLabel::Negative,
            disgust: SentimentLabel::Negative,
            surprise: SentimentLabel::Neutral,
        }
    }
}

impl CaloPolarityMap {
    pub fn polarity_of(&self, coarse: CoarseEmotion) -> SentimentLabel {
        match coarse {
            CoarseEmotion::Joy => self.joy,
            CoarseEmotion::Good => self.good,
            CoarseEmotion::Anger => self.anger,
            CoarseEmotion::Sadness => self.sadness,
            CoarseEmotion::Fear => self.fear,
            CoarseEmotion::Disgust => self.disgust,
            CoarseEmotion::Surprise => self.surprise,
        }
    }

    /// Intensity-weighted majority polarity over a non-empty annotation
    /// list: intensities are summed per polarity and the strict maximum
    /// wins; any tie at the top collapses to neutral.
    pub fn sentiment_of(
        &self,
        emotions: &[EmotionAnnotation],
    ) -> Result<SentimentLabel, EmptyAnnotation> {
        if emotions.is_empty() {
            return Err(EmptyAnnotation);
        }
        let mut weights = [0u64; 3];
        for annotation in emotions {
            let polarity = self.polarity_of(annotation.coarse);
            let slot = SentimentLabel::ALL.iter().position(|l| *l == polarity).unwrap();
            weights[slot] += u64::from(annotation.intensity);
        }
        let max = *weights.iter().max().unwrap();
        let leaders: Vec<SentimentLabel> = SentimentLabel::ALL
            .iter()
            .zip(weights.iter())
            .filter(|(_, w)| **w == max)
            .map(|(l, _)| *l)
            .collect();
        if leaders.len() == 1 {
            Ok(leaders[0])
        } else {
            Ok(SentimentLabel::Neutral)
        }
    }
}

/// [`CaloPolarityMap::sentiment_of`] with the default table.
pub fn calo_to_sentiment(
    emotions: &[EmotionAnnotation],
) -> Result<SentimentLabel, EmptyAnnotation> {
    CaloPolarityMap::default().sentiment_of(emotions)
}
