use thiserror::Error;

use super::{Expr, Formula, MAX_VARIABLES};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: missing `p cnf <vars> <clauses>` header")]
    MissingHeader { line: usize },
    #[error("line {line}: malformed header `{text}`")]
    MalformedHeader { line: usize, text: String },
    #[error("line {line}: literal {literal} out of range for {num_vars} variables")]
    LiteralOutOfRange { line: usize, literal: i64, num_vars: usize },
    #[error("line {line}: clause is not terminated by 0")]
    UnterminatedClause { line: usize },
    #[error("line {line}: empty clause")]
    EmptyClause { line: usize },
    #[error("line {line}: invalid token `{token}`")]
    InvalidToken { line: usize, token: String },
    #[error("header declares {declared} clauses but {found} were read")]
    ClauseCountMismatch { declared: usize, found: usize },

    #[error("empty expression")]
    EmptyInput,
    #[error("unknown token `{token}` at offset {offset}")]
    UnknownToken { offset: usize, token: String },
    #[error("unbalanced parenthesis at offset {offset}")]
    UnbalancedParens { offset: usize },
    #[error("unexpected {found} at offset {offset}")]
    UnexpectedToken { offset: usize, found: String },
    #[error("expression ends unexpectedly")]
    UnexpectedEnd,
    #[error("variable index {index} at offset {offset} outside [1, {MAX_VARIABLES}]")]
    VariableOutOfRange { offset: usize, index: u64 },
}

/// Parses DIMACS CNF. Comment lines start with `c`; a line starting with
/// `%` ends the clause section.
pub fn parse_dimacs(text: &str) -> Result<Formula, ParseError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Vec<i64>> = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    let mut current_line = 0;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        last_line = line_no;
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(ParseError::MalformedHeader { line: line_no, text: line.into() });
            }
            header = Some(parse_header(line, line_no)?);
            continue;
        }
        let Some((num_vars, _)) = header else {
            return Err(ParseError::MissingHeader { line: line_no });
        };
        for token in line.split_whitespace() {
            let literal: i64 =
                token.parse().map_err(|_| ParseError::InvalidToken { line: line_no, token: token.into() })?;
            if literal == 0 {
                if current.is_empty() {
                    return Err(ParseError::EmptyClause { line: line_no });
                }
                clauses.push(std::mem::take(&mut current));
                continue;
            }
            if literal.unsigned_abs() as usize > num_vars {
                return Err(ParseError::LiteralOutOfRange { line: line_no, literal, num_vars });
            }
            if current.is_empty() {
                current_line = line_no;
            }
            current.push(literal);
        }
    }

    let Some((num_vars, declared)) = header else {
        return Err(ParseError::MissingHeader { line: last_line.max(1) });
    };
    if !current.is_empty() {
        return Err(ParseError::UnterminatedClause { line: current_line });
    }
    if clauses.len() != declared {
        return Err(ParseError::ClauseCountMismatch { declared, found: clauses.len() });
    }

    let literal = |l: i64| {
        let v = Expr::Var(l.unsigned_abs() as u32);
        if l < 0 {
            Expr::not(v)
        } else {
            v
        }
    };
    let root = clauses
        .into_iter()
        .map(|c| c.into_iter().map(literal).reduce(Expr::or).expect("non-empty clause"))
        .reduce(Expr::and)
        .expect("at least one clause");
    Ok(Formula::new(num_vars, root).expect("header and literals validated").with_source(text))
}

fn parse_header(line: &str, line_no: usize) -> Result<(usize, usize), ParseError> {
    let malformed = || ParseError::MalformedHeader { line: line_no, text: line.into() };
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != "p" || fields[1] != "cnf" {
        return Err(malformed());
    }
    let num_vars: usize = fields[2].parse().map_err(|_| malformed())?;
    let num_clauses: usize = fields[3].parse().map_err(|_| malformed())?;
    if num_vars == 0 || num_vars > MAX_VARIABLES || num_clauses == 0 {
        return Err(malformed());
    }
    Ok((num_vars, num_clauses))
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Var(u32),
    Not,
    And,
    Or,
    Implies,
    Iff,
    LParen,
    RParen,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Var(i) => format!("`x{i}`"),
            Token::Not => "`!`".into(),
            Token::And => "`&`".into(),
            Token::Or => "`|`".into(),
            Token::Implies => "`->`".into(),
            Token::Iff => "`<->`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let mut tokens = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (offset, c) = chars[i];
        let next = chars.get(i + 1).map(|&(_, c)| c);
        let next2 = chars.get(i + 2).map(|&(_, c)| c);
        let (token, width) = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '(' => (Token::LParen, 1),
            ')' => (Token::RParen, 1),
            '!' | '~' | '¬' => (Token::Not, 1),
            '&' | '∧' => (Token::And, if next == Some('&') { 2 } else { 1 }),
            '|' | '∨' => (Token::Or, if next == Some('|') { 2 } else { 1 }),
            '→' => (Token::Implies, 1),
            '↔' => (Token::Iff, 1),
            '-' if next == Some('>') => (Token::Implies, 2),
            '<' if next == Some('-') && next2 == Some('>') => (Token::Iff, 3),
            'x' | 'X' => {
                let digits: String = chars[i + 1..].iter().map(|&(_, c)| c).take_while(char::is_ascii_digit).collect();
                if digits.is_empty() {
                    return Err(ParseError::UnknownToken { offset, token: c.to_string() });
                }
                let index: u64 = digits.parse().unwrap_or(u64::MAX);
                if index == 0 || index > MAX_VARIABLES as u64 {
                    return Err(ParseError::VariableOutOfRange { offset, index });
                }
                (Token::Var(index as u32), 1 + digits.len())
            }
            _ => {
                let token: String = chars[i..]
                    .iter()
                    .map(|&(_, c)| c)
                    .take_while(|c| !c.is_whitespace() && !"()".contains(*c))
                    .collect();
                return Err(ParseError::UnknownToken { offset, token });
            }
        };
        tokens.push((offset, token));
        i += width;
    }
    Ok(tokens)
}

/// Recursive descent over
///
/// ```text
/// iff     := implies ("<->" implies)*
/// implies := or ("->" implies)?
/// or      := and ("|" and)*
/// and     := unary ("&" unary)*
/// unary   := "!" unary | "(" iff ")" | var
/// ```
struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    open: Vec<usize>,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn eat(&mut self, token: &Token) -> bool {
        if self.peek() == Some(token) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn iff(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.implies()?;
        while self.eat(&Token::Iff) {
            lhs = Expr::iff(lhs, self.implies()?);
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.or()?;
        if self.eat(&Token::Implies) {
            return Ok(Expr::implies(lhs, self.implies()?));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.and()?;
        while self.eat(&Token::Or) {
            lhs = Expr::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while self.eat(&Token::And) {
            lhs = Expr::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        let Some((offset, token)) = self.tokens.get(self.pos).cloned() else {
            return Err(match self.open.last() {
                Some(&offset) => ParseError::UnbalancedParens { offset },
                None => ParseError::UnexpectedEnd,
            });
        };
        self.pos += 1;
        match token {
            Token::Not => Ok(Expr::not(self.unary()?)),
            Token::Var(i) => Ok(Expr::Var(i)),
            Token::LParen => {
                self.open.push(offset);
                let inner = self.iff()?;
                match self.tokens.get(self.pos) {
                    Some((_, Token::RParen)) => {
                        self.pos += 1;
                        self.open.pop();
                        Ok(inner)
                    }
                    Some((offset, t)) => Err(ParseError::UnexpectedToken { offset: *offset, found: t.describe() }),
                    None => Err(ParseError::UnbalancedParens { offset }),
                }
            }
            Token::RParen if self.open.is_empty() => Err(ParseError::UnbalancedParens { offset }),
            other => Err(ParseError::UnexpectedToken { offset, found: other.describe() }),
        }
    }
}

/// Parses an infix expression over `x1 … xn` with tokens `!`, `&`, `|`,
/// `->`, `<->` and parentheses. Precedence runs `!` > `&` > `|` > `->` >
/// `<->`; `->` associates to the right. `n` is the largest variable index
/// mentioned.
pub fn parse_expr(text: &str) -> Result<Formula, ParseError> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(ParseError::EmptyInput);
    }
    let mut parser = Parser { tokens, pos: 0, open: Vec::new() };
    let root = parser.iff()?;
    if let Some((offset, token)) = parser.tokens.get(parser.pos) {
        return Err(match token {
            Token::RParen => ParseError::UnbalancedParens { offset: *offset },
            t => ParseError::UnexpectedToken { offset: *offset, found: t.describe() },
        });
    }
    let num_vars = root.max_var() as usize;
    Ok(Formula::new(num_vars, root).expect("tokenizer bounds variable indices").with_source(text))
}
