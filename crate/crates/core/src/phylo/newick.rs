//! Newick reader and writer.
//!
//! Supports quoted labels (`'it''s'`), internal node labels, branch lengths,
//! bracketed comments (skipped) and files holding several `;`-terminated trees.

use super::{PNode, PhyloTree};
use crate::error::{Error, Result};

struct Parser {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
}

impl Parser {
    fn new(src: &str) -> Self {
        Self {
            chars: src.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            column: self.col,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    /// Skip whitespace and `[...]` comments.
    fn skip(&mut self) -> Result<()> {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('[') => {
                    let (line, column) = (self.line, self.col);
                    self.bump();
                    loop {
                        match self.bump() {
                            Some(']') => break,
                            Some(_) => {}
                            None => {
                                return Err(Error::Parse {
                                    line,
                                    column,
                                    message: "unterminated comment".into(),
                                })
                            }
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn at_end(&mut self) -> Result<bool> {
        self.skip()?;
        Ok(self.peek().is_none())
    }

    fn tree(&mut self) -> Result<PhyloTree> {
        let mut nodes = Vec::new();
        self.skip()?;
        let root = self.subtree(&mut nodes)?;
        self.skip()?;
        match self.peek() {
            Some(';') => {
                self.bump();
            }
            Some(')') => return Err(self.err("unbalanced ')'")),
            Some(c) => return Err(self.err(format!("unexpected '{c}' after tree"))),
            None => return Err(self.err("missing ';' at end of tree")),
        }
        Ok(PhyloTree { nodes, root })
    }

    fn subtree(&mut self, nodes: &mut Vec<PNode>) -> Result<usize> {
        self.skip()?;
        let mut children = Vec::new();
        if self.peek() == Some('(') {
            let (open_line, open_col) = (self.line, self.col);
            self.bump();
            loop {
                children.push(self.subtree(nodes)?);
                self.skip()?;
                match self.peek() {
                    Some(',') => {
                        self.bump();
                    }
                    Some(')') => {
                        self.bump();
                        break;
                    }
                    None | Some(';') => {
                        return Err(Error::Parse {
                            line: open_line,
                            column: open_col,
                            message: "unbalanced '(': no matching ')'".into(),
                        })
                    }
                    Some(c) => return Err(self.err(format!("expected ',' or ')', found '{c}'"))),
                }
            }
        }
        self.skip()?;
        let label = self.label()?;
        self.skip()?;
        let length = if self.peek() == Some(':') {
            self.bump();
            self.skip()?;
            Some(self.length()?)
        } else {
            None
        };
        nodes.push(PNode {
            label,
            length,
            children,
        });
        Ok(nodes.len() - 1)
    }

    fn label(&mut self) -> Result<Option<String>> {
        if self.peek() == Some('\'') {
            let (line, column) = (self.line, self.col);
            self.bump();
            let mut s = String::new();
            loop {
                match self.bump() {
                    Some('\'') if self.peek() == Some('\'') => {
                        self.bump();
                        s.push('\'');
                    }
                    Some('\'') => return Ok(Some(s)),
                    Some(c) => s.push(c),
                    None => {
                        return Err(Error::Parse {
                            line,
                            column,
                            message: "unterminated quoted label".into(),
                        })
                    }
                }
            }
        }
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if is_special(c) || c.is_whitespace() {
                break;
            }
            s.push(c);
            self.bump();
        }
        Ok((!s.is_empty()).then_some(s))
    }

    fn length(&mut self) -> Result<f64> {
        let (line, column) = (self.line, self.col);
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '+') {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        let bad = |message: String| Error::Parse {
            line,
            column,
            message,
        };
        let v: f64 = s
            .parse()
            .map_err(|_| bad(format!("malformed branch length '{s}'")))?;
        if !v.is_finite() {
            return Err(bad(format!("malformed branch length '{s}'")));
        }
        Ok(v)
    }
}

fn is_special(c: char) -> bool {
    matches!(c, '(' | ')' | '[' | ']' | '\'' | ':' | ';' | ',')
}

/// Parse exactly one tree; anything after its `;` other than whitespace and
/// comments is an error.
pub fn parse_newick(text: &str) -> Result<PhyloTree> {
    let mut p = Parser::new(text);
    let tree = p.tree()?;
    if !p.at_end()? {
        return Err(p.err("trailing characters after ';'"));
    }
    Ok(tree)
}

/// Parse every `;`-terminated tree in `text`.
pub fn parse_newick_all(text: &str) -> Result<Vec<PhyloTree>> {
    let mut p = Parser::new(text);
    let mut out = Vec::new();
    while !p.at_end()? {
        out.push(p.tree()?);
    }
    Ok(out)
}

fn write_label(s: &str, out: &mut String) {
    if !s.is_empty() && !s.chars().any(|c| is_special(c) || c.is_whitespace()) {
        out.push_str(s);
    } else {
        out.push('\'');
        out.push_str(&s.replace('\'', "''"));
        out.push('\'');
    }
}

/// Serialise with shortest round-trip branch lengths and no whitespace.
pub fn write_newick(tree: &PhyloTree) -> String {
    let mut out = String::new();
    write_node(tree, tree.root, &mut out);
    out.push(';');
    out
}

fn write_node(tree: &PhyloTree, v: usize, out: &mut String) {
    let node = &tree.nodes[v];
    if !node.children.is_empty() {
        out.push('(');
        for (k, &c) in node.children.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            write_node(tree, c, out);
        }
        out.push(')');
    }
    if let Some(l) = &node.label {
        write_label(l, out);
    }
    if let Some(len) = node.length {
        out.push(':');
        out.push_str(&len.to_string());
    }
}
