//! Expressions shared by PRISM commands and reachability queries.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Int(i64),
    Double(f64),
    Bool(bool),
}

impl Value {
    pub fn as_f64(self) -> Result<f64, EvalError> {
        match self {
            Value::Int(i) => Ok(i as f64),
            Value::Double(d) => Ok(d),
            Value::Bool(_) => Err(EvalError::Type("expected a number, found a boolean".into())),
        }
    }

    pub fn as_int(self) -> Result<i64, EvalError> {
        match self {
            Value::Int(i) => Ok(i),
            Value::Double(d) if d.fract() == 0.0 => Ok(d as i64),
            other => Err(EvalError::Type(format!("expected an integer, found {other}"))),
        }
    }

    pub fn as_bool(self) -> Result<bool, EvalError> {
        match self {
            Value::Bool(b) => Ok(b),
            other => Err(EvalError::Type(format!("expected a boolean, found {other}"))),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Double(d) => write!(f, "{d}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Or => "|",
            BinOp::And => "&",
            BinOp::Eq => "=",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Div => 5,
        }
    }
}

/// An expression over integer variables, constants and state labels.
///
/// Parsers produce `Ident` and `Label` leaves; [`Expr::resolve`] rewrites
/// identifiers into variable slots or literal constants before evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Lit(Value),
    Ident(String),
    /// Quoted label, e.g. `"goal"`.
    Label(String),
    /// Resolved variable slot.
    Var(usize),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unknown identifier `{0}`")]
    Unknown(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("unresolved identifier `{0}`")]
    Unresolved(String),
}

/// Evaluation context: variable slots and label membership.
pub trait Scope {
    fn var(&self, slot: usize) -> i64;
    fn has_label(&self, label: &str) -> bool;
}

impl Scope for [i64] {
    fn var(&self, slot: usize) -> i64 {
        self[slot]
    }
    fn has_label(&self, _label: &str) -> bool {
        false
    }
}

impl Expr {
    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// Identifiers referenced anywhere in the expression.
    pub fn identifiers(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let Expr::Ident(name) = e {
                out.push(name.as_str());
            }
        });
        out
    }

    pub fn labels(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let Expr::Label(name) = e {
                out.push(name.as_str());
            }
        });
        out
    }

    fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Unary(_, e) => e.walk(f),
            Expr::Binary(_, l, r) => {
                l.walk(f);
                r.walk(f);
            }
            _ => {}
        }
    }

    /// Replaces identifiers by variable slots (`vars`) or constant values
    /// (`consts`). Unknown identifiers are an error.
    pub fn resolve(
        &self,
        vars: &dyn Fn(&str) -> Option<usize>,
        consts: &BTreeMap<String, Value>,
    ) -> Result<Expr, EvalError> {
        Ok(match self {
            Expr::Ident(name) => {
                if let Some(slot) = vars(name) {
                    Expr::Var(slot)
                } else if let Some(v) = consts.get(name) {
                    Expr::Lit(*v)
                } else if name == "true" {
                    Expr::Lit(Value::Bool(true))
                } else if name == "false" {
                    Expr::Lit(Value::Bool(false))
                } else {
                    return Err(EvalError::Unknown(name.clone()));
                }
            }
            Expr::Unary(op, e) => Expr::Unary(*op, Box::new(e.resolve(vars, consts)?)),
            Expr::Binary(op, l, r) => Expr::binary(*op, l.resolve(vars, consts)?, r.resolve(vars, consts)?),
            other => other.clone(),
        })
    }

    pub fn eval<S: Scope + ?Sized>(&self, scope: &S) -> Result<Value, EvalError> {
        match self {
            Expr::Lit(v) => Ok(*v),
            Expr::Var(slot) => Ok(Value::Int(scope.var(*slot))),
            Expr::Label(l) => Ok(Value::Bool(scope.has_label(l))),
            Expr::Ident(name) => Err(EvalError::Unresolved(name.clone())),
            Expr::Unary(UnOp::Not, e) => Ok(Value::Bool(!e.eval(scope)?.as_bool()?)),
            Expr::Unary(UnOp::Neg, e) => Ok(match e.eval(scope)? {
                Value::Int(i) => Value::Int(-i),
                Value::Double(d) => Value::Double(-d),
                Value::Bool(_) => return Err(EvalError::Type("cannot negate a boolean".into())),
            }),
            Expr::Binary(op, l, r) => {
                let lv = l.eval(scope)?;
                // Short-circuit so guards like `s > 0 & x / s > 1` stay total.
                match op {
                    BinOp::And if !lv.as_bool()? => return Ok(Value::Bool(false)),
                    BinOp::Or if lv.as_bool()? => return Ok(Value::Bool(true)),
                    _ => {}
                }
                let rv = r.eval(scope)?;
                apply(*op, lv, rv)
            }
        }
    }

    pub fn eval_bool<S: Scope + ?Sized>(&self, scope: &S) -> Result<bool, EvalError> {
        self.eval(scope)?.as_bool()
    }

    /// Evaluates an expression that may only mention constants.
    pub fn eval_const(&self, consts: &BTreeMap<String, Value>) -> Result<Value, EvalError> {
        let resolved = self.resolve(&|_| None, consts)?;
        resolved.eval(&[][..])
    }
}

fn apply(op: BinOp, l: Value, r: Value) -> Result<Value, EvalError> {
    use BinOp::*;
    Ok(match op {
        And | Or => {
            // Left side already decided the short-circuit cases.
            Value::Bool(r.as_bool()?)
        }
        Eq | Ne => {
            let equal = match (l, r) {
                (Value::Bool(a), Value::Bool(b)) => a == b,
                (Value::Int(a), Value::Int(b)) => a == b,
                (a, b) => a.as_f64()? == b.as_f64()?,
            };
            Value::Bool(if op == Eq { equal } else { !equal })
        }
        Lt | Le | Gt | Ge => {
            let ord = match (l, r) {
                (Value::Int(a), Value::Int(b)) => a.cmp(&b),
                (a, b) => a
                    .as_f64()?
                    .partial_cmp(&b.as_f64()?)
                    .ok_or_else(|| EvalError::Type("comparison with NaN".into()))?,
            };
            Value::Bool(match op {
                Lt => ord.is_lt(),
                Le => ord.is_le(),
                Gt => ord.is_gt(),
                _ => ord.is_ge(),
            })
        }
        Add | Sub | Mul => match (l, r) {
            (Value::Int(a), Value::Int(b)) => Value::Int(match op {
                Add => a.checked_add(b),
                Sub => a.checked_sub(b),
                _ => a.checked_mul(b),
            }
            .ok_or_else(|| EvalError::Type("integer overflow".into()))?),
            (a, b) => {
                let (a, b) = (a.as_f64()?, b.as_f64()?);
                Value::Double(match op {
                    Add => a + b,
                    Sub => a - b,
                    _ => a * b,
                })
            }
        },
        Div => {
            let (a, b) = (l.as_f64()?, r.as_f64()?);
            if b == 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            Value::Double(a / b)
        }
    })
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(e: &Expr, parent: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match e {
                Expr::Lit(v) => write!(f, "{v}"),
                Expr::Ident(n) => write!(f, "{n}"),
                Expr::Label(l) => write!(f, "\"{l}\""),
                Expr::Var(slot) => write!(f, "${slot}"),
                Expr::Unary(UnOp::Not, inner) => {
                    write!(f, "!")?;
                    go(inner, 6, f)
                }
                Expr::Unary(UnOp::Neg, inner) => {
                    write!(f, "-")?;
                    go(inner, 6, f)
                }
                Expr::Binary(op, l, r) => {
                    let p = op.precedence();
                    if p < parent {
                        write!(f, "(")?;
                    }
                    go(l, p, f)?;
                    write!(f, " {} ", op.symbol())?;
                    go(r, p + 1, f)?;
                    if p < parent {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
            }
        }
        go(self, 0, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(i: i64) -> Expr {
        Expr::Lit(Value::Int(i))
    }

    #[test]
    fn integer_arithmetic_stays_integral() {
        let e = Expr::binary(BinOp::Sub, lit(15), lit(1));
        assert_eq!(e.eval(&[][..]).unwrap(), Value::Int(14));
        let d = Expr::binary(BinOp::Div, lit(1), lit(2));
        assert_eq!(d.eval(&[][..]).unwrap(), Value::Double(0.5));
    }

    #[test]
    fn resolve_substitutes_constants_and_slots() {
        let consts = BTreeMap::from([("Na".to_string(), Value::Int(5))]);
        let e = Expr::binary(BinOp::Eq, Expr::Ident("a1".into()), Expr::Ident("Na".into()));
        let r = e.resolve(&|n| (n == "a1").then_some(0), &consts).unwrap();
        assert!(r.eval_bool(&[5i64][..]).unwrap());
        assert!(!r.eval_bool(&[4i64][..]).unwrap());
        let err = Expr::Ident("zz".into()).resolve(&|_| None, &consts).unwrap_err();
        assert_eq!(err, EvalError::Unknown("zz".into()));
    }

    #[test]
    fn and_short_circuits_past_division_by_zero() {
        let guard = Expr::binary(
            BinOp::And,
            Expr::Lit(Value::Bool(false)),
            Expr::binary(BinOp::Gt, Expr::binary(BinOp::Div, lit(1), lit(0)), lit(0)),
        );
        assert_eq!(guard.eval(&[][..]).unwrap(), Value::Bool(false));
    }

    #[test]
    fn display_parenthesises_by_precedence() {
        let e = Expr::binary(
            BinOp::And,
            Expr::binary(BinOp::Or, Expr::Ident("a".into()), Expr::Ident("b".into())),
            Expr::Ident("c".into()),
        );
        assert_eq!(e.to_string(), "(a | b) & c");
    }
}
