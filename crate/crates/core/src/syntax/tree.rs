use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Penn-Treebank style constituency tree.
///
/// Interior nodes carry a label and at least one child; leaves carry the
/// word. A leaf is always the only child of its parent (the preterminal).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParseTree {
    Node {
        label: String,
        children: Vec<ParseTree>,
    },
    Leaf(String),
}

impl ParseTree {
    pub fn node(label: impl Into<String>, children: Vec<ParseTree>) -> Self {
        ParseTree::Node {
            label: label.into(),
            children,
        }
    }

    /// A preterminal dominating a single word.
    pub fn pre(tag: impl Into<String>, word: impl Into<String>) -> Self {
        ParseTree::node(tag, vec![ParseTree::Leaf(word.into())])
    }

    pub fn label(&self) -> Option<&str> {
        match self {
            ParseTree::Node { label, .. } => Some(label),
            ParseTree::Leaf(_) => None,
        }
    }

    pub fn children(&self) -> &[ParseTree] {
        match self {
            ParseTree::Node { children, .. } => children,
            ParseTree::Leaf(_) => &[],
        }
    }

    pub fn is_preterminal(&self) -> bool {
        matches!(self.children(), [ParseTree::Leaf(_)])
    }

    /// Words in left-to-right order.
    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            ParseTree::Leaf(w) => out.push(w),
            ParseTree::Node { children, .. } => {
                for c in children {
                    c.collect_leaves(out);
                }
            }
        }
    }

    /// `(tag, word)` pairs in word order.
    pub fn tagged_words(&self) -> Vec<(&str, &str)> {
        let mut out = Vec::new();
        self.collect_tagged(&mut out);
        out
    }

    fn collect_tagged<'a>(&'a self, out: &mut Vec<(&'a str, &'a str)>) {
        if let ParseTree::Node { label, children } = self {
            if let [ParseTree::Leaf(w)] = children.as_slice() {
                out.push((label, w));
            } else {
                for c in children {
                    c.collect_tagged(out);
                }
            }
        }
    }

    /// Checks the structural invariants: the root is an interior node, every
    /// interior node has children, and leaves are only children.
    pub fn validate(&self) -> Result<()> {
        match self {
            ParseTree::Leaf(w) => Err(Error::MalformedTree(format!("bare leaf `{w}` at root"))),
            ParseTree::Node { .. } => self.validate_node(),
        }
    }

    fn validate_node(&self) -> Result<()> {
        let ParseTree::Node { label, children } = self else {
            return Ok(());
        };
        if children.is_empty() {
            return Err(Error::MalformedTree(format!("node `{label}` has no children")));
        }
        if children.len() > 1 && children.iter().any(|c| matches!(c, ParseTree::Leaf(_))) {
            return Err(Error::MalformedTree(format!(
                "node `{label}` mixes a word with other children"
            )));
        }
        children.iter().try_for_each(ParseTree::validate_node)
    }

    /// Removes every preterminal for which `drop(tag, word)` holds and prunes
    /// constituents left without children. Returns `None` if nothing remains.
    pub fn prune(self, drop: &impl Fn(&str, &str) -> bool) -> Option<ParseTree> {
        match self {
            ParseTree::Leaf(w) => Some(ParseTree::Leaf(w)),
            ParseTree::Node { label, children } => {
                if let [ParseTree::Leaf(w)] = children.as_slice() {
                    if drop(&label, w) {
                        return None;
                    }
                    return Some(ParseTree::Node { label, children });
                }
                let children: Vec<_> = children.into_iter().filter_map(|c| c.prune(drop)).collect();
                (!children.is_empty()).then_some(ParseTree::Node { label, children })
            }
        }
    }

    /// Strips `(ROOT …)` and label-less `( … )` wrappers around a single child.
    pub fn unwrap_root(mut self) -> ParseTree {
        loop {
            match self {
                ParseTree::Node { ref label, ref mut children }
                    if (label.is_empty() || label == "ROOT")
                        && children.len() == 1
                        && matches!(children[0], ParseTree::Node { .. }) =>
                {
                    self = children.pop().expect("one child");
                }
                other => return other,
            }
        }
    }
}

impl fmt::Display for ParseTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseTree::Leaf(w) => f.write_str(w),
            ParseTree::Node { label, children } => {
                write!(f, "({label}")?;
                for c in children {
                    write!(f, " {c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Lexeme<'a> {
    Open,
    Close,
    Atom(&'a str),
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    /// Returns the next lexeme with its 1-based character column.
    fn next(&mut self) -> Option<(Lexeme<'a>, usize)> {
        let rest = &self.src[self.pos..];
        let skipped = rest.len() - rest.trim_start().len();
        self.pos += skipped;
        let rest = &self.src[self.pos..];
        let column = self.src[..self.pos].chars().count() + 1;
        let c = rest.chars().next()?;
        let lexeme = match c {
            '(' => {
                self.pos += 1;
                Lexeme::Open
            }
            ')' => {
                self.pos += 1;
                Lexeme::Close
            }
            _ => {
                let end = rest
                    .find(|c: char| c.is_whitespace() || c == '(' || c == ')')
                    .unwrap_or(rest.len());
                self.pos += end;
                Lexeme::Atom(&rest[..end])
            }
        };
        Some((lexeme, column))
    }
}

/// Parses one bracketed tree. `line` is only used for error positions.
///
/// A label-less outer node is accepted when it wraps exactly one subtree,
/// which covers the `( (S …) )` convention of treebank files.
pub fn parse_tree(src: &str, line: usize) -> Result<ParseTree> {
    let err = |column: usize, message: &str| Error::TreeParse {
        line,
        column,
        message: message.to_string(),
    };
    let mut lexer = Lexer { src, pos: 0 };
    let Some((first, col)) = lexer.next() else {
        return Err(err(1, "empty input"));
    };
    if first != Lexeme::Open {
        return Err(err(col, "expected `(`"));
    }
    let tree = parse_node(&mut lexer, line, col)?;
    if let Some((_, col)) = lexer.next() {
        return Err(err(col, "unbalanced parentheses: trailing input after tree"));
    }
    Ok(tree)
}

// Called after the opening paren has been consumed.
fn parse_node(lexer: &mut Lexer<'_>, line: usize, open_col: usize) -> Result<ParseTree> {
    let err = |column: usize, message: String| Error::TreeParse {
        line,
        column,
        message,
    };
    let eof = |col| err(col, "unbalanced parentheses: missing `)`".to_string());
    let end_col = lexer.src.chars().count() + 1;

    let (label, mut next) = match lexer.next() {
        None => return Err(eof(end_col)),
        Some((Lexeme::Close, col)) => return Err(err(col, "empty node `()`".to_string())),
        Some((Lexeme::Atom(a), _)) => (a.to_string(), lexer.next()),
        Some(other) => (String::new(), Some(other)),
    };

    match next {
        None => Err(eof(end_col)),
        Some((Lexeme::Close, _)) if label.is_empty() => Err(err(open_col, "empty node".into())),
        Some((Lexeme::Close, col)) => Err(err(col, format!("node `{label}` has no word or children"))),
        Some((Lexeme::Atom(word), col)) => {
            if label.is_empty() {
                return Err(err(col, format!("leaf `{word}` has no label")));
            }
            match lexer.next() {
                Some((Lexeme::Close, _)) => Ok(ParseTree::pre(label, word)),
                None => Err(eof(end_col)),
                Some((_, col)) => Err(err(col, format!("preterminal `{label}` must hold exactly one word"))),
            }
        }
        Some((Lexeme::Open, _)) => {
            let mut children = Vec::new();
            loop {
                match next {
                    Some((Lexeme::Open, col)) => children.push(parse_node(lexer, line, col)?),
                    Some((Lexeme::Close, _)) => break,
                    Some((Lexeme::Atom(a), col)) => {
                        return Err(err(col, format!("word `{a}` mixed with subtrees")));
                    }
                    None => return Err(eof(end_col)),
                }
                next = lexer.next();
            }
            if label.is_empty() && children.len() != 1 {
                return Err(err(open_col, "label-less node must wrap exactly one tree".into()));
            }
            Ok(ParseTree::Node { label, children })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_renders() {
        let src = "(S (NP (DT the) (NN dog)) (VP (VBZ runs)))";
        let t = parse_tree(src, 1).unwrap();
        assert_eq!(t.to_string(), src);
        assert_eq!(t.leaves(), ["the", "dog", "runs"]);
        assert_eq!(
            t.tagged_words(),
            [("DT", "the"), ("NN", "dog"), ("VBZ", "runs")]
        );
    }

    #[test]
    fn root_wrappers_are_stripped() {
        let t = parse_tree("(ROOT (S (NN dog)))", 1).unwrap().unwrap_root();
        assert_eq!(t.to_string(), "(S (NN dog))");
        let t = parse_tree("( (S (NN dog)) )", 1).unwrap().unwrap_root();
        assert_eq!(t.to_string(), "(S (NN dog))");
    }

    #[test]
    fn unbalanced_reports_position() {
        match parse_tree("(S (NP (DT the)", 3) {
            Err(Error::TreeParse { line: 3, column, .. }) => assert_eq!(column, 16),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_tree("(S (NN dog)))", 1), Err(Error::TreeParse { column: 13, .. })));
    }

    #[test]
    fn rejects_bad_shapes() {
        for bad in ["()", "(S)", "( dog)", "(NN dog cat)", "(NP (DT the) dog)", "dog", "", "( (A a) (B b) )"] {
            assert!(
                matches!(parse_tree(bad, 1), Err(Error::TreeParse { .. })),
                "accepted {bad:?}"
            );
        }
    }

    #[test]
    fn escaped_brackets_are_plain_words() {
        let t = parse_tree("(S (-LRB- -LRB-) (NN x) (-RRB- -RRB-))", 1).unwrap();
        assert_eq!(t.leaves(), ["-LRB-", "x", "-RRB-"]);
    }

    #[test]
    fn validate_catches_malformed() {
        assert!(ParseTree::Leaf("x".into()).validate().is_err());
        assert!(ParseTree::node("S", vec![]).validate().is_err());
        let mixed = ParseTree::node("S", vec![ParseTree::Leaf("a".into()), ParseTree::pre("NN", "b")]);
        assert!(mixed.validate().is_err());
        assert!(ParseTree::pre("NN", "dog").validate().is_ok());
    }

    #[test]
    fn prune_removes_empty_constituents() {
        let t = parse_tree("(S (NP (-NONE- *T*)) (VP (VBZ runs) (. .)))", 1).unwrap();
        let t = t.prune(&|tag, _| tag == "-NONE-").unwrap();
        assert_eq!(t.to_string(), "(S (VP (VBZ runs) (. .)))");
        let all = parse_tree("(S (-NONE- *))", 1).unwrap();
        assert!(all.prune(&|tag, _| tag == "-NONE-").is_none());
    }
}
