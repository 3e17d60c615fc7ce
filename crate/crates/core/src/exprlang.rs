//! Scalar field expressions `f(x, y)` for configuration files.
//!
//! Grammar: numeric literals, variables `x`/`y`, constants `pi`/`e`, binary
//! `+ - * / ^` (with `^` right-associative and binding tightest), unary minus,
//! and the functions `sin cos exp log sqrt abs`. Parsed with a small Pratt
//! parser; evaluation is total on finite inputs and reports domain errors and
//! non-finite intermediates instead of propagating them.

use std::fmt;

const ALLOWED_NAMES: &str = "x, y, pi, e, sin, cos, exp, log, sqrt, abs";

#[derive(Debug, Clone, thiserror::Error)]
#[error("syntax error at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum EvalError {
    #[error("domain error in `{expr}`: {reason}")]
    Domain { expr: String, reason: String },
    #[error("non-finite result in `{expr}`")]
    NonFinite { expr: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// An immutable, thread-safe parsed field expression.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldExpr {
    ast: Expr,
}

impl FieldExpr {
    pub fn parse(src: &str) -> Result<Self, ParseError> {
        parse_field(src)
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64, EvalError> {
        eval_node(&self.ast, x, y)
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }
}

impl fmt::Display for FieldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, &self.ast, 0, false)
    }
}

pub fn parse_field(src: &str) -> Result<FieldExpr, ParseError> {
    if src.trim().is_empty() {
        return Err(ParseError {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let tokens = lex(src)?;
    let mut parser = Parser { tokens, pos: 0, src_len: src.len() };
    let ast = parser.parse_expr(0)?;
    if parser.pos < parser.tokens.len() {
        let (_, off) = parser.tokens[parser.pos];
        return Err(ParseError {
            offset: off,
            message: "expected end of input or an operator".into(),
        });
    }
    Ok(FieldExpr { ast })
}

pub fn eval_field(expr: &FieldExpr, x: f64, y: f64) -> Result<f64, EvalError> {
    expr.eval(x, y)
}

// ---------- lexer ----------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push((Tok::Plus, i));
                i += 1;
            }
            '-' => {
                out.push((Tok::Minus, i));
                i += 1;
            }
            '*' => {
                out.push((Tok::Star, i));
                i += 1;
            }
            '/' => {
                out.push((Tok::Slash, i));
                i += 1;
            }
            '^' => {
                out.push((Tok::Caret, i));
                i += 1;
            }
            '(' => {
                out.push((Tok::LParen, i));
                i += 1;
            }
            ')' => {
                out.push((Tok::RParen, i));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && matches!(bytes[i] as char, '0'..='9' | '.') {
                    i += 1;
                }
                // exponent part: 1e-3, 2.5E+10
                if i < bytes.len() && matches!(bytes[i] as char, 'e' | 'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && matches!(bytes[j] as char, '+' | '-') {
                        j += 1;
                    }
                    if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| ParseError {
                    offset: start,
                    message: format!("malformed number `{text}`"),
                })?;
                out.push((Tok::Num(value), start));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && matches!(bytes[i] as char, 'a'..='z' | 'A'..='Z' | '0'..='9' | '_')
                {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
            }
            _ => {
                return Err(ParseError {
                    offset: i,
                    message: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    Ok(out)
}

// ---------- Pratt parser ----------

struct Parser {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    src_len: usize,
}

// Binding powers: +,- (1,2); *,/ (3,4); unary minus 5; ^ (8,7) right-assoc.
// Unary minus binds tighter than *,/ but looser than ^, so -x^2 = -(x^2).
const NEG_BP: u8 = 5;

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(_, o)| *o)
            .unwrap_or(self.src_len)
    }

    fn parse_expr(&mut self, min_bp: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_prefix()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                Some(Tok::Caret) => BinOp::Pow,
                _ => break,
            };
            let (l_bp, r_bp) = match op {
                BinOp::Add | BinOp::Sub => (1, 2),
                BinOp::Mul | BinOp::Div => (3, 4),
                BinOp::Pow => (8, 7),
            };
            if l_bp < min_bp {
                break;
            }
            self.pos += 1;
            let rhs = self.parse_expr(r_bp)?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_prefix(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        let tok = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| ParseError {
                offset,
                message: "expected a number, name, `(`, or `-`".into(),
            })?;
        match tok.0 {
            Tok::Num(v) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Tok::Minus => {
                self.pos += 1;
                let inner = self.parse_expr(NEG_BP)?;
                Ok(Expr::Neg(Box::new(inner)))
            }
            Tok::LParen => {
                self.pos += 1;
                let inner = self.parse_expr(0)?;
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => Err(ParseError {
                        offset: self.offset(),
                        message: "expected `)`".into(),
                    }),
                }
            }
            Tok::Ident(name) => {
                self.pos += 1;
                match name.as_str() {
                    "x" => Ok(Expr::Var(Var::X)),
                    "y" => Ok(Expr::Var(Var::Y)),
                    "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                    "e" => Ok(Expr::Num(std::f64::consts::E)),
                    "sin" | "cos" | "exp" | "log" | "sqrt" | "abs" => {
                        let func = match name.as_str() {
                            "sin" => Func::Sin,
                            "cos" => Func::Cos,
                            "exp" => Func::Exp,
                            "log" => Func::Log,
                            "sqrt" => Func::Sqrt,
                            _ => Func::Abs,
                        };
                        match self.peek() {
                            Some(Tok::LParen) => {
                                self.pos += 1;
                                let arg = self.parse_expr(0)?;
                                match self.peek() {
                                    Some(Tok::RParen) => {
                                        self.pos += 1;
                                        Ok(Expr::Call(func, Box::new(arg)))
                                    }
                                    _ => Err(ParseError {
                                        offset: self.offset(),
                                        message: "expected `)` closing function argument".into(),
                                    }),
                                }
                            }
                            _ => Err(ParseError {
                                offset: self.offset(),
                                message: format!("expected `(` after function `{name}`"),
                            }),
                        }
                    }
                    _ => Err(ParseError {
                        offset,
                        message: format!(
                            "unknown identifier `{name}`; allowed names: {ALLOWED_NAMES}"
                        ),
                    }),
                }
            }
            _ => Err(ParseError {
                offset,
                message: "expected a number, name, `(`, or `-`".into(),
            }),
        }
    }
}

// ---------- evaluation ----------

fn subexpr_string(e: &Expr) -> String {
    let mut s = String::new();
    let _ = write_expr(&mut WriteAdapter(&mut s), e, 0, false);
    s
}

struct WriteAdapter<'a>(&'a mut String);

impl fmt::Write for WriteAdapter<'_> {
    fn write_str(&mut self, s: &str) -> fmt::Result {
        self.0.push_str(s);
        Ok(())
    }
}

fn check_finite(v: f64, e: &Expr) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite {
            expr: subexpr_string(e),
        })
    }
}

fn eval_node(e: &Expr, x: f64, y: f64) -> Result<f64, EvalError> {
    match e {
        Expr::Num(v) => Ok(*v),
        Expr::Var(Var::X) => Ok(x),
        Expr::Var(Var::Y) => Ok(y),
        Expr::Neg(inner) => Ok(-eval_node(inner, x, y)?),
        Expr::Bin(op, a, b) => {
            let va = eval_node(a, x, y)?;
            let vb = eval_node(b, x, y)?;
            let v = match op {
                BinOp::Add => va + vb,
                BinOp::Sub => va - vb,
                BinOp::Mul => va * vb,
                BinOp::Div => va / vb,
                BinOp::Pow => {
                    if va < 0.0 && vb.fract() != 0.0 {
                        return Err(EvalError::Domain {
                            expr: subexpr_string(e),
                            reason: format!(
                                "negative base {va} with non-integer exponent {vb}"
                            ),
                        });
                    }
                    va.powf(vb)
                }
            };
            check_finite(v, e)
        }
        Expr::Call(func, arg) => {
            let va = eval_node(arg, x, y)?;
            let v = match func {
                Func::Sin => va.sin(),
                Func::Cos => va.cos(),
                Func::Exp => va.exp(),
                Func::Log => {
                    if va <= 0.0 {
                        return Err(EvalError::Domain {
                            expr: subexpr_string(e),
                            reason: format!("log of non-positive argument {va}"),
                        });
                    }
                    va.ln()
                }
                Func::Sqrt => {
                    if va < 0.0 {
                        return Err(EvalError::Domain {
                            expr: subexpr_string(e),
                            reason: format!("sqrt of negative argument {va}"),
                        });
                    }
                    va.sqrt()
                }
                Func::Abs => va.abs(),
            };
            check_finite(v, e)
        }
    }
}

// ---------- pretty printer ----------

fn node_precedence(e: &Expr) -> u8 {
    match e {
        Expr::Num(_) | Expr::Var(_) | Expr::Call(..) => 10,
        Expr::Neg(_) => 3,
        Expr::Bin(op, ..) => op.precedence(),
    }
}

/// Minimal-parenthesis printer; re-parsing the output reconstructs the AST.
fn write_expr<W: fmt::Write>(
    w: &mut W,
    e: &Expr,
    parent_prec: u8,
    is_right_operand: bool,
) -> fmt::Result {
    let prec = node_precedence(e);
    let needs_parens = match e {
        Expr::Bin(..) | Expr::Neg(_) => {
            prec < parent_prec || (prec == parent_prec && is_right_operand && prec != 4)
        }
        _ => false,
    };
    if needs_parens {
        w.write_char('(')?;
    }
    match e {
        Expr::Num(v) => {
            if *v == v.trunc() && v.abs() < 1e15 {
                write!(w, "{}", *v as i64)?;
            } else {
                write!(w, "{v:?}")?;
            }
        }
        Expr::Var(Var::X) => w.write_char('x')?,
        Expr::Var(Var::Y) => w.write_char('y')?,
        Expr::Neg(inner) => {
            w.write_char('-')?;
            write_expr(w, inner, NEG_BP + 1, false)?;
        }
        Expr::Bin(op, a, b) => {
            match op {
                BinOp::Pow => {
                    // right-associative: left operand must bind strictly tighter
                    write_expr(w, a, 5, false)?;
                    w.write_char('^')?;
                    write_expr(w, b, 4, false)?;
                }
                _ => {
                    write_expr(w, a, prec, false)?;
                    w.write_char(op.symbol())?;
                    write_expr(w, b, prec, true)?;
                }
            }
        }
        Expr::Call(func, arg) => {
            w.write_str(func.name())?;
            w.write_char('(')?;
            write_expr(w, arg, 0, false)?;
            w.write_char(')')?;
        }
    }
    if needs_parens {
        w.write_char(')')?;
    }
    Ok(())
}
