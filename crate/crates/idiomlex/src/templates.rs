//! Prompt templates, loaded from files.
//!
//! Wording is an experimental variable, so no prompt text is hardcoded:
//! templates live under `<root>/<lang>/<strategy>/<step>.txt` and use
//! `{placeholder}` syntax (`{{` and `}}` escape literal braces). Each
//! step declares the placeholders its template must reference; loading
//! fails if one is missing, and rendering fails on unknown placeholders.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use idiomlex_core::{Language, StrategyKind};

/// Step identifiers within a strategy's template directory.
pub mod step {
    pub const ASK: &str = "ask";
    pub const GENERATE: &str = "generate";
    pub const JUDGE: &str = "judge";
    pub const ORIGIN: &str = "origin";
    pub const LITERAL_GENERATE: &str = "literal_generate";
    pub const LITERAL_JUDGE: &str = "literal_judge";
    pub const ETYM_ORIGIN: &str = "etym_origin";
    pub const ETYM_EXAMPLES: &str = "etym_examples";
    pub const ETYM_JUDGE: &str = "etym_judge";
}

/// (step file name, placeholders the template must reference)
fn required_steps(strategy: StrategyKind) -> &'static [(&'static str, &'static [&'static str])] {
    match strategy {
        StrategyKind::Direct => &[(step::ASK, &["idiom"])],
        StrategyKind::Idiom => &[(step::ASK, &["idiom"])],
        StrategyKind::Usage => {
            &[(step::GENERATE, &["idiom"]), (step::JUDGE, &["idiom", "sentence"])]
        }
        StrategyKind::Origin => &[(step::ORIGIN, &["idiom"]), (step::JUDGE, &["idiom", "origin"])],
        StrategyKind::OriginUsage => &[
            (step::ORIGIN, &["idiom"]),
            (step::GENERATE, &["idiom", "origin"]),
            (step::JUDGE, &["idiom", "origin", "sentence"]),
        ],
        StrategyKind::DualCoTs => &[
            (step::LITERAL_GENERATE, &["idiom", "count"]),
            (step::LITERAL_JUDGE, &["idiom", "sentence"]),
            (step::ETYM_ORIGIN, &["idiom"]),
            (step::ETYM_EXAMPLES, &["idiom", "origin", "count"]),
            (step::ETYM_JUDGE, &["idiom", "origin", "sentence"]),
        ],
    }
}

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("missing template file: {0}")]
    Missing(PathBuf),
    #[error("cannot read template {path}: {source}")]
    Unreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("template {path} never references {{{placeholder}}}")]
    MissingPlaceholder { path: PathBuf, placeholder: String },
    #[error("unknown placeholder {{{0}}}")]
    UnknownPlaceholder(String),
    #[error("unbalanced brace in template text")]
    UnbalancedBrace,
    #[error("no template loaded for {language}/{strategy}/{step}")]
    NoSuchStep { language: Language, strategy: StrategyKind, step: String },
}

/// All templates for the languages and strategies found under a root
/// directory.
#[derive(Debug, Clone)]
pub struct PromptTemplateSet {
    templates: BTreeMap<(Language, StrategyKind, String), String>,
}

impl PromptTemplateSet {
    /// Loads and validates every template under `root`. Both languages
    /// and all six strategies must be present.
    pub fn load(root: impl AsRef<Path>) -> Result<Self, TemplateError> {
        let root = root.as_ref();
        let mut templates = BTreeMap::new();
        for language in Language::ALL {
            for strategy in StrategyKind::ALL {
                for (step_name, placeholders) in required_steps(strategy) {
                    let path = root
                        .join(language.as_str())
                        .join(strategy.template_dir())
                        .join(format!("{step_name}.txt"));
                    if !path.exists() {
                        return Err(TemplateError::Missing(path));
                    }
                    let text = fs::read_to_string(&path).map_err(|source| {
                        TemplateError::Unreadable { path: path.clone(), source }
                    })?;
                    let text = text.trim_end().to_string();
                    for placeholder in *placeholders {
                        if !references(&text, placeholder) {
                            return Err(TemplateError::MissingPlaceholder {
                                path,
                                placeholder: (*placeholder).into(),
                            });
                        }
                    }
                    templates.insert((language, strategy, (*step_name).to_string()), text);
                }
            }
        }
        Ok(Self { templates })
    }

    pub fn get(
        &self,
        language: Language,
        strategy: StrategyKind,
        step: &str,
    ) -> Result<&str, TemplateError> {
        self.templates
            .get(&(language, strategy, step.to_string()))
            .map(String::as_str)
            .ok_or_else(|| TemplateError::NoSuchStep { language, strategy, step: step.into() })
    }

    /// Renders one step with the given placeholder values.
    pub fn render(
        &self,
        language: Language,
        strategy: StrategyKind,
        step: &str,
        vars: &[(&str, &str)],
    ) -> Result<String, TemplateError> {
        render_str(self.get(language, strategy, step)?, vars)
    }
}

fn references(template: &str, placeholder: &str) -> bool {
    template.contains(&format!("{{{placeholder}}}"))
}

/// Substitutes `{name}` placeholders; `{{`/`}}` produce literal braces.
pub fn render_str(template: &str, vars: &[(&str, &str)]) -> Result<String, TemplateError> {
    let mut out = String::with_capacity(template.len());
    let mut chars = template.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '{' => {
                if chars.peek() == Some(&'{') {
                    chars.next();
                    out.push('{');
                    continue;
                }
                let mut name = String::new();
                loop {
                    match chars.next() {
                        Some('}') => break,
                        Some(c) => name.push(c),
                        None => return Err(TemplateError::UnbalancedBrace),
                    }
                }
                let value = vars
                    .iter()
                    .find(|(k, _)| *k == name)
                    .map(|(_, v)| *v)
                    .ok_or(TemplateError::UnknownPlaceholder(name))?;
                out.push_str(value);
            }
            '}' => {
                if chars.peek() == Some(&'}') {
                    chars.next();
                    out.push('}');
                } else {
                    return Err(TemplateError::UnbalancedBrace);
                }
            }
            c => out.push(c),
        }
    }
    Ok(out)
}
