//! Existential sentences over `{≤, ∧, A}`:
//!
//! ```text
//! sentence := EXISTS var (, var)* : lit (AND lit)*
//! lit      := var <= var | NOT var <= var
//!           | A(var, ...) | NOT A(var, ...)
//!           | var = var MEET var
//! ```
//!
//! Keywords are case-sensitive; `EXISTS`, `AND`, `NOT`, `MEET` and `A` are reserved.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const KEYWORDS: [&str; 5] = ["EXISTS", "AND", "NOT", "MEET", "A"];

/// Variables are referred to by their position in [`Sentence::variables`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Literal {
    Leq { left: usize, right: usize },
    NotLeq { left: usize, right: usize },
    Amalgamable { vars: Vec<usize> },
    NotAmalgamable { vars: Vec<usize> },
    /// `target = left ∧ right`.
    Meet { target: usize, left: usize, right: usize },
}

impl Literal {
    fn mentioned(&self) -> Vec<usize> {
        match self {
            Literal::Leq { left, right } | Literal::NotLeq { left, right } => vec![*left, *right],
            Literal::Amalgamable { vars } | Literal::NotAmalgamable { vars } => vars.clone(),
            Literal::Meet { target, left, right } => vec![*target, *left, *right],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sentence {
    pub variables: Vec<String>,
    pub literals: Vec<Literal>,
}

impl Sentence {
    /// Variables `x0..x{n-1}` and the given literals.
    pub fn with_numbered_variables(n: usize, literals: Vec<Literal>) -> Result<Self> {
        let s = Sentence {
            variables: (0..n).map(|i| format!("x{i}")).collect(),
            literals,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for lit in &self.literals {
            if let Some(&bad) = lit.mentioned().iter().find(|&&v| v >= self.variables.len()) {
                return Err(Error::UndeclaredVariable {
                    name: format!("#{bad}"),
                    position: 0,
                });
            }
            if let Literal::Amalgamable { vars } | Literal::NotAmalgamable { vars } = lit {
                if vars.is_empty() {
                    return Err(Error::Validation("A() needs at least one variable".into()));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = |i: usize| self.variables[i].as_str();
        let list = |vars: &[usize]| vars.iter().map(|&i| v(i)).collect::<Vec<_>>().join(",");
        write!(f, "EXISTS {} :", self.variables.join(","))?;
        for (n, lit) in self.literals.iter().enumerate() {
            if n > 0 {
                write!(f, " AND")?;
            }
            match lit {
                Literal::Leq { left, right } => write!(f, " {} <= {}", v(*left), v(*right))?,
                Literal::NotLeq { left, right } => write!(f, " NOT {} <= {}", v(*left), v(*right))?,
                Literal::Amalgamable { vars } => write!(f, " A({})", list(vars))?,
                Literal::NotAmalgamable { vars } => write!(f, " NOT A({})", list(vars))?,
                Literal::Meet { target, left, right } => {
                    write!(f, " {} = {} MEET {}", v(*target), v(*left), v(*right))?
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Sym(&'static str),
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::End => write!(f, "end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut ident = String::new();
            while let Some(&(_, c)) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    ident.push(c);
                    chars.next();
                } else {
                    break;
                }
            }
            out.push((pos, Tok::Ident(ident)));
        } else {
            chars.next();
            let sym = match c {
                ',' => ",",
                ':' => ":",
                '(' => "(",
                ')' => ")",
                '=' => "=",
                '<' if chars.peek().map(|p| p.1) == Some('=') => {
                    chars.next();
                    "<="
                }
                other => {
                    return Err(Error::Syntax {
                        position: pos,
                        expected: "a variable, keyword or one of , : ( ) = <=".into(),
                        found: format!("`{other}`"),
                    })
                }
            };
            out.push((pos, Tok::Sym(sym)));
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    vars: Vec<String>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn fail<T>(&self, expected: &str) -> Result<T> {
        Err(Error::Syntax {
            position: self.pos(),
            expected: expected.into(),
            found: self.peek().to_string(),
        })
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        if matches!(self.peek(), Tok::Ident(s) if s == kw) {
            self.at += 1;
            Ok(())
        } else {
            self.fail(&format!("`{kw}`"))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn sym(&mut self, s: &'static str) -> Result<()> {
        if self.peek() == &Tok::Sym(s) {
            self.at += 1;
            Ok(())
        } else {
            self.fail(&format!("`{s}`"))
        }
    }

    fn name(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.at += 1;
                Ok(s)
            }
            _ => self.fail("a variable"),
        }
    }

    fn var(&mut self) -> Result<usize> {
        let pos = self.pos();
        let name = self.name()?;
        self.vars
            .iter()
            .position(|v| *v == name)
            .ok_or(Error::UndeclaredVariable { name, position: pos })
    }

    fn var_list(&mut self) -> Result<Vec<usize>> {
        self.sym("(")?;
        let mut vars = vec![self.var()?];
        while self.peek() == &Tok::Sym(",") {
            self.at += 1;
            vars.push(self.var()?);
        }
        self.sym(")")?;
        Ok(vars)
    }

    fn literal(&mut self) -> Result<Literal> {
        if self.is_keyword("NOT") {
            self.at += 1;
            if self.is_keyword("A") {
                self.at += 1;
                return Ok(Literal::NotAmalgamable { vars: self.var_list()? });
            }
            let left = self.var()?;
            self.sym("<=")?;
            let right = self.var()?;
            return Ok(Literal::NotLeq { left, right });
        }
        if self.is_keyword("A") && self.peek2() == &Tok::Sym("(") {
            self.at += 1;
            return Ok(Literal::Amalgamable { vars: self.var_list()? });
        }
        let first = self.var()?;
        match self.peek() {
            Tok::Sym("<=") => {
                self.at += 1;
                Ok(Literal::Leq { left: first, right: self.var()? })
            }
            Tok::Sym("=") => {
                self.at += 1;
                let left = self.var()?;
                self.keyword("MEET")?;
                let right = self.var()?;
                Ok(Literal::Meet { target: first, left, right })
            }
            _ => self.fail("`<=` or `=`"),
        }
    }

    fn sentence(&mut self) -> Result<Sentence> {
        self.keyword("EXISTS")?;
        loop {
            let pos = self.pos();
            let name = self.name()?;
            if self.vars.contains(&name) {
                return Err(Error::Syntax {
                    position: pos,
                    expected: "a variable not declared before".into(),
                    found: format!("`{name}`"),
                });
            }
            self.vars.push(name);
            if self.peek() == &Tok::Sym(",") {
                self.at += 1;
            } else {
                break;
            }
        }
        self.sym(":")?;
        let mut literals = vec![self.literal()?];
        while self.is_keyword("AND") {
            self.at += 1;
            literals.push(self.literal()?);
        }
        if self.peek() != &Tok::End {
            return self.fail("`AND` or end of input");
        }
        Ok(Sentence {
            variables: std::mem::take(&mut self.vars),
            literals,
        })
    }
}

pub fn parse_sentence(text: &str) -> Result<Sentence> {
    Parser {
        toks: lex(text)?,
        at: 0,
        vars: Vec::new(),
    }
    .sentence()
}
