//! A small arithmetic language for map and integrand formulas, plus the
//! parity-driven index rules used on the sequence space.
//!
//! Grammar (`^` is right-associative and binds tighter than unary minus):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := base ('^' unary)?
//! base   := number | var | '(' expr ')' | func '(' expr (',' expr)? ')'
//! func   := ln | log | exp | sqrt | abs | min | max
//! ```

mod index_rule;
mod parser;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use index_rule::{AffineIndex, IndexRuleMap, ZeroRule};
pub use parser::ParseError;

/// The single free variable of an expression context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FreeVar {
    /// Maps are written in `x`.
    X,
    /// Integrands are written in `t`.
    T,
}

impl FreeVar {
    pub fn name(self) -> &'static str {
        match self {
            FreeVar::X => "x",
            FreeVar::T => "t",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Ln,
    Exp,
    Sqrt,
    Abs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func2 {
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Number(f64),
    Variable,
    Unary(UnaryOp, Box<Node>),
    Binary(BinaryOp, Box<Node>, Box<Node>),
    Call(Func2, Box<Node>, Box<Node>),
}

/// A parsed expression together with its free variable.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprAst {
    root: Node,
    var: FreeVar,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("domain error in `{node}`: {reason}")]
pub struct EvalError {
    pub node: String,
    pub reason: String,
}

impl ExprAst {
    pub fn new(root: Node, var: FreeVar) -> Self {
        ExprAst { root, var }
    }

    pub fn parse(text: &str, var: FreeVar) -> Result<ExprAst, ParseError> {
        parser::parse(text, var)
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn free_var(&self) -> FreeVar {
        self.var
    }

    pub fn evaluate(&self, value: f64) -> Result<f64, EvalError> {
        eval_node(&self.root, value, self.var)
    }
}

fn eval_node(node: &Node, value: f64, var: FreeVar) -> Result<f64, EvalError> {
    let fail = |reason: String| EvalError { node: Printer { node, var }.to_string(), reason };
    let out = match node {
        Node::Number(v) => *v,
        Node::Variable => value,
        Node::Unary(op, arg) => {
            let a = eval_node(arg, value, var)?;
            match op {
                UnaryOp::Neg => -a,
                UnaryOp::Ln if a <= 0.0 => return Err(fail(format!("ln of non-positive value {a}"))),
                UnaryOp::Ln => a.ln(),
                UnaryOp::Exp => a.exp(),
                UnaryOp::Sqrt if a < 0.0 => return Err(fail(format!("sqrt of negative value {a}"))),
                UnaryOp::Sqrt => a.sqrt(),
                UnaryOp::Abs => a.abs(),
            }
        }
        Node::Binary(op, lhs, rhs) => {
            let a = eval_node(lhs, value, var)?;
            let b = eval_node(rhs, value, var)?;
            match op {
                BinaryOp::Add => a + b,
                BinaryOp::Sub => a - b,
                BinaryOp::Mul => a * b,
                BinaryOp::Div if b == 0.0 => return Err(fail("division by zero".into())),
                BinaryOp::Div => a / b,
                BinaryOp::Pow => a.powf(b),
            }
        }
        Node::Call(func, lhs, rhs) => {
            let a = eval_node(lhs, value, var)?;
            let b = eval_node(rhs, value, var)?;
            match func {
                Func2::Min => a.min(b),
                Func2::Max => a.max(b),
            }
        }
    };
    if out.is_finite() {
        Ok(out)
    } else {
        Err(fail(format!("non-finite result {out} at {}={value}", var.name())))
    }
}

// Binding strength used by the printer; larger binds tighter.
fn precedence(node: &Node) -> u8 {
    match node {
        Node::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => 1,
        Node::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => 2,
        Node::Unary(UnaryOp::Neg, _) => 3,
        Node::Binary(BinaryOp::Pow, ..) => 4,
        _ => 5,
    }
}

struct Printer<'a> {
    node: &'a Node,
    var: FreeVar,
}

impl Printer<'_> {
    fn child(&self, f: &mut fmt::Formatter<'_>, node: &Node, min_prec: u8) -> fmt::Result {
        let inner = Printer { node, var: self.var };
        if precedence(node) < min_prec {
            write!(f, "({inner})")
        } else {
            write!(f, "{inner}")
        }
    }
}

impl fmt::Display for Printer<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node {
            Node::Number(v) if *v < 0.0 || v.is_sign_negative() => write!(f, "({v})"),
            Node::Number(v) => write!(f, "{v}"),
            Node::Variable => f.write_str(self.var.name()),
            Node::Unary(UnaryOp::Neg, arg) => {
                f.write_str("-")?;
                self.child(f, arg, 3)
            }
            Node::Unary(op, arg) => {
                let name = match op {
                    UnaryOp::Ln => "ln",
                    UnaryOp::Exp => "exp",
                    UnaryOp::Sqrt => "sqrt",
                    UnaryOp::Abs => "abs",
                    UnaryOp::Neg => unreachable!(),
                };
                write!(f, "{name}({})", Printer { node: arg, var: self.var })
            }
            Node::Binary(BinaryOp::Pow, lhs, rhs) => {
                self.child(f, lhs, 5)?;
                f.write_str("^")?;
                self.child(f, rhs, 3)
            }
            Node::Binary(op, lhs, rhs) => {
                let (sym, prec) = match op {
                    BinaryOp::Add => (" + ", 1),
                    BinaryOp::Sub => (" - ", 1),
                    BinaryOp::Mul => ("*", 2),
                    BinaryOp::Div => ("/", 2),
                    BinaryOp::Pow => unreachable!(),
                };
                self.child(f, lhs, prec)?;
                f.write_str(sym)?;
                self.child(f, rhs, prec + 1)
            }
            Node::Call(func, lhs, rhs) => {
                let name = match func {
                    Func2::Min => "min",
                    Func2::Max => "max",
                };
                write!(
                    f,
                    "{name}({}, {})",
                    Printer { node: lhs, var: self.var },
                    Printer { node: rhs, var: self.var }
                )
            }
        }
    }
}

impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Printer { node: &self.root, var: self.var }.fmt(f)
    }
}
