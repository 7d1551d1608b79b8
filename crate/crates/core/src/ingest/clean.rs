//! Text cleaning and normalization.

use serde::{Deserialize, Serialize};

/// Cleaning knobs. `lowercase` defaults to off: the retrieval embedder is
/// case-normalized internally, and preserving case keeps citations and
/// snippets readable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanConfig {
    pub lowercase: bool,
    pub strip_repeated_lines: bool,
    /// A line is treated as a header/footer when its exact trimmed content
    /// appears on at least this many distinct pages. Must be >= 2.
    pub min_repeat_pages: usize,
    pub collapse_whitespace: bool,
}

impl Default for CleanConfig {
    fn default() -> Self {
        Self {
            lowercase: false,
            strip_repeated_lines: true,
            min_repeat_pages: 3,
            collapse_whitespace: true,
        }
    }
}

/// Normalize a single text: optional case-fold, optional whitespace
/// collapse (every maximal whitespace run becomes one space, ends
/// trimmed). Total and idempotent under a fixed config.
///
/// Repeated-line stripping needs page boundaries; use [`clean_pages`] when
/// they are available.
pub fn clean_text(text: &str, cfg: &CleanConfig) -> String {
    let lowered;
    let mut current = text;
    if cfg.lowercase {
        lowered = current.to_lowercase();
        current = &lowered;
    }
    if cfg.collapse_whitespace {
        current.split_whitespace().collect::<Vec<_>>().join(" ")
    } else {
        current.to_string()
    }
}

/// Clean per-page texts into one normalized text.
///
/// When `strip_repeated_lines` is set, any line whose exact trimmed
/// content appears on at least `min_repeat_pages` distinct pages is
/// deleted from all pages first — the header/footer heuristic. Blank
/// lines never count as repeats. Pages are then joined with newlines and
/// normalized as in [`clean_text`].
pub fn clean_pages(pages: &[String], cfg: &CleanConfig) -> String {
    let joined = if cfg.strip_repeated_lines && cfg.min_repeat_pages >= 2 {
        let mut page_sets: Vec<std::collections::HashSet<&str>> = Vec::with_capacity(pages.len());
        for page in pages {
            page_sets.push(
                page.lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty())
                    .collect(),
            );
        }
        let repeated = |line: &str| -> bool {
            let trimmed = line.trim();
            if trimmed.is_empty() {
                return false;
            }
            page_sets.iter().filter(|set| set.contains(trimmed)).count() >= cfg.min_repeat_pages
        };
        pages
            .iter()
            .map(|page| {
                page.lines()
                    .filter(|line| !repeated(line))
                    .collect::<Vec<_>>()
                    .join("\n")
            })
            .collect::<Vec<_>>()
            .join("\n")
    } else {
        pages.join("\n")
    };
    clean_text(&joined, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collapses_whitespace() {
        assert_eq!(clean_text("A \t B\n", &CleanConfig::default()), "A B");
    }

    #[test]
    fn lowercase_fold() {
        let cfg = CleanConfig {
            lowercase: true,
            ..CleanConfig::default()
        };
        assert_eq!(clean_text("MiXeD", &cfg), "mixed");
    }

    #[test]
    fn strips_lines_repeated_across_pages() {
        let pages: Vec<String> = (1..=3)
            .map(|i| format!("CONFIDENTIAL\npage {i} body text"))
            .collect();
        let out = clean_pages(&pages, &CleanConfig::default());
        assert!(!out.contains("CONFIDENTIAL"));
        assert!(out.contains("page 1 body text"));
        assert!(out.contains("page 3 body text"));
    }

    #[test]
    fn two_page_repeat_survives_default_threshold() {
        let pages: Vec<String> = (1..=2).map(|i| format!("HEADER\nbody {i}")).collect();
        let out = clean_pages(&pages, &CleanConfig::default());
        assert!(out.contains("HEADER"));
    }

    #[test]
    fn repeat_counts_distinct_pages_not_occurrences() {
        // Three occurrences on a single page are not a header.
        let pages = vec![
            "NOTE\nNOTE\nNOTE\nbody".to_string(),
            "other page".to_string(),
            "third page".to_string(),
        ];
        let out = clean_pages(&pages, &CleanConfig::default());
        assert!(out.contains("NOTE"));
    }

    #[test]
    fn repeated_line_matching_is_trim_exact() {
        let pages = vec![
            "  Page Header  \nalpha".to_string(),
            "Page Header\nbeta".to_string(),
            "\tPage Header\ngamma".to_string(),
        ];
        let out = clean_pages(&pages, &CleanConfig::default());
        assert!(!out.contains("Page Header"));
        assert_eq!(out, "alpha beta gamma");
    }

    #[test]
    fn no_collapse_preserves_line_structure() {
        let cfg = CleanConfig {
            collapse_whitespace: false,
            ..CleanConfig::default()
        };
        let pages = vec!["one\n\ntwo".to_string()];
        assert_eq!(clean_pages(&pages, &cfg), "one\n\ntwo");
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn any_config() -> impl Strategy<Value = CleanConfig> {
            (any::<bool>(), any::<bool>(), 2usize..5, any::<bool>()).prop_map(
                |(lowercase, strip, min_repeat, collapse)| CleanConfig {
                    lowercase,
                    strip_repeated_lines: strip,
                    min_repeat_pages: min_repeat,
                    collapse_whitespace: collapse,
                },
            )
        }

        proptest! {
            #[test]
            fn clean_text_is_idempotent(text in "\\PC{0,200}", cfg in any_config()) {
                let once = clean_text(&text, &cfg);
                let twice = clean_text(&once, &cfg);
                prop_assert_eq!(once, twice);
            }

            #[test]
            fn clean_pages_then_clean_text_is_noop(
                pages in proptest::collection::vec("[a-zA-Z0-9 \\n]{0,60}", 1..5),
                cfg in any_config(),
            ) {
                let once = clean_pages(&pages, &cfg);
                let twice = clean_text(&once, &cfg);
                prop_assert_eq!(once, twice);
            }

            #[test]
            fn collapsed_output_has_single_spaces(text in "\\PC{0,200}") {
                let out = clean_text(&text, &CleanConfig::default());
                prop_assert!(!out.contains("  "));
                prop_assert_eq!(out.trim(), &out);
            }
        }
    }
}
