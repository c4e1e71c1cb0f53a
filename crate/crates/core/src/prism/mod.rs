//! A subset of the PRISM modelling language: DTMCs with constants, bounded
//! integer variables and (optionally synchronising) guarded commands.

use std::fmt;

use thiserror::Error;

use crate::expr::Expr;

mod elaborate;
mod export;
mod lexer;
mod parser;

pub use elaborate::{elaborate, ElaborateOptions};
pub use export::export_prism;
pub use parser::{parse_expr, parse_prism, parse_query};

#[derive(Debug, Clone, PartialEq, Error)]
pub struct PrismError {
    pub location: Option<(usize, usize)>,
    pub message: String,
}

impl PrismError {
    pub(crate) fn at(line: usize, column: usize, message: impl Into<String>) -> Self {
        PrismError { location: Some((line, column)), message: message.into() }
    }

    pub(crate) fn plain(message: impl Into<String>) -> Self {
        PrismError { location: None, message: message.into() }
    }
}

impl fmt::Display for PrismError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.location {
            Some((l, c)) => write!(f, "{l}:{c}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstType {
    Int,
    Double,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstDecl {
    pub name: String,
    pub ty: ConstType,
    /// `None` for constants that must be supplied at elaboration time.
    pub value: Option<Expr>,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarDecl {
    pub name: String,
    pub lo: Expr,
    pub hi: Expr,
    pub init: Option<Expr>,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Update {
    pub probability: Expr,
    pub assignments: Vec<(String, Expr)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Command {
    pub label: Option<String>,
    pub guard: Expr,
    pub updates: Vec<Update>,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Module {
    pub name: String,
    pub vars: Vec<VarDecl>,
    pub commands: Vec<Command>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PrismAst {
    pub constants: Vec<ConstDecl>,
    pub modules: Vec<Module>,
}
