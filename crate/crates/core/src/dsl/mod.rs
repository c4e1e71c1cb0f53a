//! The `.lisa` agent language.
//!
//! ```text
//! program   = { item } ;
//! item      = belief | percept | opstate | action | init | rule | plan | outcomes ;
//! belief    = "belief" pred "." ;
//! percept   = "percept" pred "." ;
//! opstate   = "opstate" pred "." ;
//! action    = "action" ident kind [ "feedback" dist ] "." ;
//! kind      = "internal_add" | "internal_remove" | "run_once" | "run_repeated" ;
//! init      = "init" call "." ;
//! rule      = "rule" pred ":-" literal { "&" literal } "." ;
//! plan      = "plan" ident ":" "+" pred ":" context "<-" call { ";" call } "." ;
//! outcomes  = "outcomes" ident dist "." ;
//! dist      = "{" { number ":" [ pred { "," pred } ] ";" } "}" ;
//! context   = "true" | literal { "&" literal } ;
//! literal   = [ "not" ] pred ;
//! call      = ident [ "(" pred ")" ] ;
//! pred      = ident [ "(" atom { "," atom } ")" ] ;
//! atom      = ident | integer ;
//! ident     = [a-z][a-zA-Z0-9_]* ;
//! ```
//!
//! `//` starts a comment that runs to the end of the line. `note`, `forget`
//! and `stop` are builtin internal actions.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::agent::AgentProgram;

mod lexer;
mod parser;
mod printer;
mod validate;

pub use parser::{parse_program, parse_source};
pub use printer::print_program;
pub use validate::validate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub location: Location,
    pub message: String,
}

impl Diagnostic {
    pub fn error(location: Location, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, location, message: message.into() }
    }

    pub fn warning(location: Location, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, location, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}: {sev}: {}", self.location, self.message)
    }
}

/// A parsed program together with where its items were declared.
#[derive(Debug, Clone)]
pub struct SourceProgram {
    pub text: String,
    pub program: AgentProgram,
    pub plan_locations: Vec<Location>,
    pub action_locations: BTreeMap<String, Location>,
}
