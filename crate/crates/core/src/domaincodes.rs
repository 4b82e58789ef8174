//! Hierarchical subject-domain codes.
//!
//! Senses may carry a domain code (e.g. `COMMERCE`, `MONEY`) drawn from a
//! single-rooted tree. The distance between two codes is the length of the
//! path between them through their lowest common ancestor; summed over all
//! pairs of chosen coded senses it yields a cohesion score — smaller means
//! the choices sit in closer subject areas — which the energy function can
//! weight alongside definition overlap.
//!
//! # File format
//!
//! One edge per line, `child<TAB>parent`; the root names `-` as its
//! parent; `#` starts a comment:
//!
//! ```text
//! GENERAL\t-
//! COMMERCE\tGENERAL
//! MONEY\tCOMMERCE
//! ```

use std::collections::HashMap;
use std::path::Path;

use thiserror::Error;

use crate::overlap::Score;

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("domain tree parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid domain tree: {0}")]
    Validation(String),
    #[error("unknown domain code '{0}'")]
    UnknownCode(String),
}

/// A single-rooted tree of domain codes with precomputed depths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainTree {
    /// Parent of each node; the root maps to `None`.
    parent: HashMap<String, Option<String>>,
    depth: HashMap<String, usize>,
    root: String,
}

impl DomainTree {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, DomainError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| DomainError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, DomainError> {
        let mut parent: HashMap<String, Option<String>> = HashMap::new();
        let mut root: Option<String> = None;
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (child, par) = line.split_once('\t').ok_or_else(|| DomainError::Parse {
                line: line_no,
                message: "expected 'child<TAB>parent'".to_string(),
            })?;
            let child = child.trim().to_string();
            let par = par.trim().to_string();
            if child.is_empty() || par.is_empty() {
                return Err(DomainError::Parse {
                    line: line_no,
                    message: "empty code name".to_string(),
                });
            }
            if parent.contains_key(&child) {
                return Err(DomainError::Parse {
                    line: line_no,
                    message: format!("code '{child}' defined twice"),
                });
            }
            if par == "-" {
                if let Some(existing) = &root {
                    return Err(DomainError::Parse {
                        line: line_no,
                        message: format!(
                            "second root '{child}' (root '{existing}' already declared)"
                        ),
                    });
                }
                root = Some(child.clone());
                parent.insert(child, None);
            } else {
                parent.insert(child, Some(par));
            }
        }
        let root = root.ok_or_else(|| {
            DomainError::Validation("no root (a line 'NAME<TAB>-') declared".to_string())
        })?;

        // Every parent must itself be a defined node.
        for (child, par) in &parent {
            if let Some(p) = par {
                if !parent.contains_key(p) {
                    return Err(DomainError::Validation(format!(
                        "code '{child}' names undefined parent '{p}'"
                    )));
                }
            }
        }

        // Depths via chain walking; a chain longer than the node count
        // can only mean a parent cycle.
        let mut depth: HashMap<String, usize> = HashMap::new();
        depth.insert(root.clone(), 0);
        for node in parent.keys() {
            let mut chain = Vec::new();
            let mut cursor = node.clone();
            while !depth.contains_key(&cursor) {
                chain.push(cursor.clone());
                if chain.len() > parent.len() {
                    return Err(DomainError::Validation(format!(
                        "cycle in parent chain involving '{node}'"
                    )));
                }
                cursor = parent[&cursor]
                    .clone()
                    .expect("non-root nodes have parents");
            }
            let mut d = depth[&cursor];
            for code in chain.into_iter().rev() {
                d += 1;
                depth.insert(code, d);
            }
        }

        Ok(DomainTree {
            parent,
            depth,
            root,
        })
    }

    pub fn contains(&self, code: &str) -> bool {
        self.parent.contains_key(code)
    }

    pub fn root(&self) -> &str {
        &self.root
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn depth(&self, code: &str) -> Option<usize> {
        self.depth.get(code).copied()
    }

    /// Path length between two codes through their lowest common ancestor:
    /// `depth(a) + depth(b) - 2 * depth(lca)`.
    pub fn node_distance(&self, a: &str, b: &str) -> Result<usize, DomainError> {
        let mut da = *self
            .depth
            .get(a)
            .ok_or_else(|| DomainError::UnknownCode(a.to_string()))?;
        let mut db = *self
            .depth
            .get(b)
            .ok_or_else(|| DomainError::UnknownCode(b.to_string()))?;
        let (orig_a, orig_b) = (da, db);
        let mut na = a;
        let mut nb = b;
        while da > db {
            na = self.parent[na].as_deref().expect("depth > 0 implies parent");
            da -= 1;
        }
        while db > da {
            nb = self.parent[nb].as_deref().expect("depth > 0 implies parent");
            db -= 1;
        }
        while na != nb {
            na = self.parent[na].as_deref().expect("nodes above root");
            nb = self.parent[nb].as_deref().expect("nodes above root");
            da -= 1;
        }
        Ok(orig_a + orig_b - 2 * da)
    }
}

/// Sum of pairwise distances over the given codes. Codes not present in
/// the tree are skipped; callers that need strictness validate up front.
pub fn domain_score<'a>(tree: &DomainTree, codes: impl IntoIterator<Item = &'a str>) -> Score {
    let known: Vec<&str> = codes.into_iter().filter(|c| tree.contains(c)).collect();
    let mut total: i128 = 0;
    for i in 0..known.len() {
        for j in (i + 1)..known.len() {
            total += tree
                .node_distance(known[i], known[j])
                .expect("codes were checked against the tree") as i128;
        }
    }
    Score::from_integer(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
GENERAL\t-
COMMERCE\tGENERAL
MONEY\tCOMMERCE
FINANCE\tMONEY
TRADE\tCOMMERCE
GOODS\tTRADE
NATURE\tGENERAL
WATER\tNATURE
";

    fn tree() -> DomainTree {
        DomainTree::parse(SAMPLE).unwrap()
    }

    #[test]
    fn parses_and_computes_depths() {
        let t = tree();
        assert_eq!(t.root(), "GENERAL");
        assert_eq!(t.len(), 8);
        assert_eq!(t.depth("GENERAL"), Some(0));
        assert_eq!(t.depth("COMMERCE"), Some(1));
        assert_eq!(t.depth("FINANCE"), Some(3));
        assert_eq!(t.depth("ABSENT"), None);
    }

    #[test]
    fn distance_to_self_is_zero() {
        let t = tree();
        for code in ["GENERAL", "COMMERCE", "FINANCE", "GOODS"] {
            assert_eq!(t.node_distance(code, code).unwrap(), 0);
        }
    }

    #[test]
    fn distance_along_a_chain_counts_edges() {
        let t = tree();
        assert_eq!(t.node_distance("GENERAL", "FINANCE").unwrap(), 3);
        assert_eq!(t.node_distance("COMMERCE", "MONEY").unwrap(), 1);
        assert_eq!(t.node_distance("MONEY", "FINANCE").unwrap(), 1);
    }

    #[test]
    fn distance_crosses_the_lowest_common_ancestor() {
        let t = tree();
        // FINANCE (depth 3) and GOODS (depth 3) meet at COMMERCE (depth 1).
        assert_eq!(t.node_distance("FINANCE", "GOODS").unwrap(), 4);
        // WATER (depth 2) and MONEY (depth 2) meet at GENERAL (depth 0).
        assert_eq!(t.node_distance("WATER", "MONEY").unwrap(), 4);
        assert_eq!(t.node_distance("FINANCE", "WATER").unwrap(), 5);
    }

    #[test]
    fn distance_is_symmetric() {
        let t = tree();
        let codes = ["GENERAL", "COMMERCE", "MONEY", "FINANCE", "GOODS", "WATER"];
        for a in codes {
            for b in codes {
                assert_eq!(
                    t.node_distance(a, b).unwrap(),
                    t.node_distance(b, a).unwrap()
                );
            }
        }
    }

    #[test]
    fn unknown_codes_error() {
        let t = tree();
        assert!(matches!(
            t.node_distance("GENERAL", "ABSENT"),
            Err(DomainError::UnknownCode(code)) if code == "ABSENT"
        ));
    }

    #[test]
    fn score_sums_all_pairs() {
        let t = tree();
        // Pairs: (FINANCE,GOODS)=4, (FINANCE,MONEY)=1, (GOODS,MONEY)=3.
        let score = domain_score(&t, ["FINANCE", "GOODS", "MONEY"]);
        assert_eq!(score, Score::from_integer(8));
    }

    #[test]
    fn score_skips_unknown_codes() {
        let t = tree();
        let score = domain_score(&t, ["FINANCE", "ABSENT", "MONEY"]);
        assert_eq!(score, Score::from_integer(1));
        assert_eq!(domain_score(&t, ["ABSENT"]), Score::from_integer(0));
        assert_eq!(domain_score(&t, []), Score::from_integer(0));
    }

    #[test]
    fn rejects_missing_root() {
        let err = DomainTree::parse("A\tB\nB\tA\n").unwrap_err();
        assert!(err.to_string().contains("root"), "{err}");
    }

    #[test]
    fn rejects_two_roots() {
        let err = DomainTree::parse("A\t-\nB\t-\n").unwrap_err();
        assert!(err.to_string().contains("second root"), "{err}");
    }

    #[test]
    fn rejects_duplicate_definition() {
        let err = DomainTree::parse("A\t-\nB\tA\nB\tA\n").unwrap_err();
        assert!(err.to_string().contains("twice"), "{err}");
    }

    #[test]
    fn rejects_undefined_parent() {
        let err = DomainTree::parse("A\t-\nB\tC\n").unwrap_err();
        assert!(err.to_string().contains("undefined parent"), "{err}");
    }

    #[test]
    fn rejects_cycles() {
        let err = DomainTree::parse("R\t-\nA\tB\nB\tA\n").unwrap_err();
        assert!(err.to_string().contains("cycle"), "{err}");
    }

    #[test]
    fn rejects_missing_tab() {
        let err = DomainTree::parse("A -\n").unwrap_err();
        assert!(matches!(err, DomainError::Parse { line: 1, .. }), "{err}");
    }
}
