//! Arithmetic expressions for prescribed right-hand sides.
//!
//! A small recursive-descent grammar over `f64`:
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! `^` is right associative and binds tighter than unary minus, so
//! `-x^2` reads `-(x^2)` while `2^-3` still parses. Names resolve to the
//! evaluation variables, the constants `pi` and `e`, or a fixed function
//! table; an unknown name is a parse error, so a typo fails loudly
//! instead of evaluating to something arbitrary.

use crate::{Error, Result};

/// Values an expression can read at one surface node. `psi` and `nu_psi`
/// are zero on axisymmetric graphs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarCtx {
    /// Radial coordinate of the node.
    pub r: f64,
    /// Polar angle.
    pub theta: f64,
    /// Longitude.
    pub psi: f64,
    /// Radial component of the outer unit normal.
    pub nu_r: f64,
    /// Meridian component of the outer unit normal.
    pub nu_theta: f64,
    /// Longitudinal component of the outer unit normal.
    pub nu_psi: f64,
    /// Support function of the graph at the node.
    pub u: f64,
}

/// Variable names in slot order; `VarCtx::get` follows the same order.
const VAR_NAMES: [&str; 7] = ["r", "theta", "psi", "nu_r", "nu_theta", "nu_psi", "u"];

impl VarCtx {
    fn get(&self, slot: usize) -> f64 {
        match slot {
            0 => self.r,
            1 => self.theta,
            2 => self.psi,
            3 => self.nu_r,
            4 => self.nu_theta,
            5 => self.nu_psi,
            6 => self.u,
            _ => unreachable!("variable slot {slot}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Pow,
}

const FUNCS: [(&str, Func, usize); 11] = [
    ("sin", Func::Sin, 1),
    ("cos", Func::Cos, 1),
    ("tan", Func::Tan, 1),
    ("sinh", Func::Sinh, 1),
    ("cosh", Func::Cosh, 1),
    ("tanh", Func::Tanh, 1),
    ("exp", Func::Exp, 1),
    ("ln", Func::Ln, 1),
    ("sqrt", Func::Sqrt, 1),
    ("abs", Func::Abs, 1),
    ("pow", Func::Pow, 2),
];

#[derive(Debug, Clone, PartialEq)]
enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

fn eval_node(node: &Node, ctx: &VarCtx) -> f64 {
    match node {
        Node::Num(v) => *v,
        Node::Var(slot) => ctx.get(*slot),
        Node::Neg(a) => -eval_node(a, ctx),
        Node::Bin(op, a, b) => {
            let (x, y) = (eval_node(a, ctx), eval_node(b, ctx));
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => x / y,
                BinOp::Pow => x.powf(y),
            }
        }
        Node::Call(f, args) => {
            let x = eval_node(&args[0], ctx);
            match f {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Tan => x.tan(),
                Func::Sinh => x.sinh(),
                Func::Cosh => x.cosh(),
                Func::Tanh => x.tanh(),
                Func::Exp => x.exp(),
                Func::Ln => x.ln(),
                Func::Sqrt => x.sqrt(),
                Func::Abs => x.abs(),
                Func::Pow => x.powf(eval_node(&args[1], ctx)),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Name(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = single {
            out.push((tok, i));
            i += 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            // An exponent suffix belongs to the literal only when digits
            // follow; otherwise a trailing `e` is the Euler constant.
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let value: f64 = text
                .parse()
                .map_err(|_| Error::Parse(format!("bad numeric literal {text:?} at byte {start}")))?;
            out.push((Tok::Num(value), start));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len()
                && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
            {
                i += 1;
            }
            out.push((Tok::Name(src[start..i].to_string()), start));
            continue;
        }
        return Err(Error::Parse(format!("unexpected character {c:?} at byte {i}")));
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    used: [bool; 7],
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> String {
        match self.toks.get(self.pos) {
            Some((t, at)) => format!("{t:?} at byte {at}"),
            None => "end of input".to_string(),
        }
    }

    fn eat(&mut self, want: &Tok) -> bool {
        if self.peek() == Some(want) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat(&Tok::Plus) {
                BinOp::Add
            } else if self.eat(&Tok::Minus) {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat(&Tok::Star) {
                BinOp::Mul
            } else if self.eat(&Tok::Slash) {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat(&Tok::Minus) {
            Ok(Node::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.eat(&Tok::Caret) {
            let exponent = self.unary()?;
            Ok(Node::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Node> {
        match self.toks.get(self.pos) {
            Some((Tok::Num(v), _)) => {
                self.pos += 1;
                Ok(Node::Num(*v))
            }
            Some((Tok::LParen, _)) => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(&Tok::RParen) {
                    return Err(Error::Parse(format!("expected ')', found {}", self.here())));
                }
                Ok(inner)
            }
            Some((Tok::Name(name), at)) => {
                let (name, at) = (name.clone(), *at);
                self.pos += 1;
                if self.eat(&Tok::LParen) {
                    return self.call(&name, at);
                }
                match name.as_str() {
                    "pi" => Ok(Node::Num(std::f64::consts::PI)),
                    "e" => Ok(Node::Num(std::f64::consts::E)),
                    _ => {
                        if let Some(slot) = VAR_NAMES.iter().position(|v| *v == name) {
                            self.used[slot] = true;
                            Ok(Node::Var(slot))
                        } else {
                            Err(Error::Parse(format!(
                                "unknown name {name:?} at byte {at}; variables are {}",
                                VAR_NAMES.join(", ")
                            )))
                        }
                    }
                }
            }
            _ => Err(Error::Parse(format!("expected a value, found {}", self.here()))),
        }
    }

    fn call(&mut self, name: &str, at: usize) -> Result<Node> {
        let Some((_, func, arity)) = FUNCS.iter().find(|(n, _, _)| *n == name) else {
            return Err(Error::Parse(format!("unknown function {name:?} at byte {at}")));
        };
        let mut args = vec![self.expr()?];
        while self.eat(&Tok::Comma) {
            args.push(self.expr()?);
        }
        if !self.eat(&Tok::RParen) {
            return Err(Error::Parse(format!("expected ')', found {}", self.here())));
        }
        if args.len() != *arity {
            return Err(Error::Parse(format!(
                "{name} takes {arity} argument(s), got {} at byte {at}",
                args.len()
            )));
        }
        Ok(Node::Call(*func, args))
    }
}

/// A parsed expression over the node variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    used: [bool; 7],
    src: String,
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self> {
        let toks = lex(src)?;
        let mut parser = Parser { toks: &toks, pos: 0, used: [false; 7] };
        let root = parser.expr()?;
        if parser.pos != toks.len() {
            return Err(Error::Parse(format!("trailing input: {}", parser.here())));
        }
        Ok(Self { root, used: parser.used, src: src.to_string() })
    }

    pub fn eval(&self, ctx: &VarCtx) -> f64 {
        eval_node(&self.root, ctx)
    }

    /// Whether the expression reads the named variable. Unknown names
    /// come back `false`; they could not have parsed.
    pub fn uses(&self, name: &str) -> bool {
        VAR_NAMES
            .iter()
            .position(|v| *v == name)
            .is_some_and(|slot| self.used[slot])
    }

    pub fn source(&self) -> &str {
        &self.src
    }
}
