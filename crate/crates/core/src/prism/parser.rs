use super::lexer::{lex, Tok, Token};
use super::{Command, ConstDecl, ConstType, Module, PrismAst, PrismError, Update, VarDecl};
use crate::dtmc::ReachQuery;
use crate::expr::{BinOp, Expr, UnOp, Value};

const MODEL_TYPES: &[&str] = &["mdp", "ctmc", "ctmdp", "pta", "pomdp", "smg", "probabilistic", "nondeterministic", "stochastic"];
const UNSUPPORTED: &[&str] = &["formula", "label", "rewards", "global", "init", "system", "endinit", "endsystem"];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, PrismError>;

impl Parser {
    fn new(text: &str) -> PResult<Self> {
        Ok(Parser { toks: lex(text)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn line(&self) -> usize {
        self.toks[self.pos].line
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> PrismError {
        let t = &self.toks[self.pos];
        PrismError::at(t.line, t.column, msg)
    }

    fn unexpected(&self, wanted: &str) -> PrismError {
        self.err(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{s}`")))
        }
    }

    fn expect_kw(&mut self, s: &str) -> PResult<()> {
        if self.is_kw(s) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{s}`")))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn unsupported(&self, what: &str) -> PrismError {
        self.err(format!("unsupported construct `{what}`"))
    }

    fn model(&mut self) -> PResult<PrismAst> {
        let mut ast = PrismAst::default();
        match self.peek().clone() {
            Tok::Ident(k) if k == "dtmc" => {
                self.bump();
            }
            Tok::Ident(k) if MODEL_TYPES.contains(&k.as_str()) => {
                return Err(self.err(format!("only dtmc supported, found `{k}`")));
            }
            _ => return Err(self.unexpected("`dtmc`")),
        }
        loop {
            match self.peek().clone() {
                Tok::Eof => return Ok(ast),
                Tok::Ident(k) if k == "const" => ast.constants.push(self.constant()?),
                Tok::Ident(k) if k == "module" => ast.modules.push(self.module()?),
                Tok::Ident(k) if MODEL_TYPES.contains(&k.as_str()) || k == "dtmc" => {
                    return Err(self.err(format!("only dtmc supported, found `{k}`")))
                }
                Tok::Ident(k) if UNSUPPORTED.contains(&k.as_str()) => return Err(self.unsupported(&k)),
                _ => return Err(self.unexpected("`const` or `module`")),
            }
        }
    }

    fn constant(&mut self) -> PResult<ConstDecl> {
        let line = self.line();
        self.expect_kw("const")?;
        let ty = if self.is_kw("int") {
            self.bump();
            ConstType::Int
        } else if self.is_kw("double") {
            self.bump();
            ConstType::Double
        } else if self.is_kw("bool") {
            return Err(self.unsupported("const bool"));
        } else {
            ConstType::Int
        };
        let name = self.ident()?;
        let value = if self.eat_sym("=") { Some(self.expr()?) } else { None };
        self.expect_sym(";")?;
        Ok(ConstDecl { name, ty, value, line })
    }

    fn module(&mut self) -> PResult<Module> {
        self.expect_kw("module")?;
        let name = self.ident()?;
        if self.is_sym("=") {
            return Err(self.unsupported("module renaming"));
        }
        let mut m = Module { name, vars: Vec::new(), commands: Vec::new() };
        loop {
            match self.peek().clone() {
                Tok::Ident(k) if k == "endmodule" => {
                    self.bump();
                    return Ok(m);
                }
                Tok::Ident(_) if self.peek_at(1) == &Tok::Sym(":") => m.vars.push(self.var()?),
                Tok::Ident(k) if UNSUPPORTED.contains(&k.as_str()) => return Err(self.unsupported(&k)),
                Tok::Sym("[") => m.commands.push(self.command()?),
                _ => return Err(self.unexpected("variable, command or `endmodule`")),
            }
        }
    }

    fn var(&mut self) -> PResult<VarDecl> {
        let line = self.line();
        let name = self.ident()?;
        self.expect_sym(":")?;
        if self.is_kw("bool") || self.is_kw("clock") {
            return Err(self.unsupported("non-integer variable"));
        }
        self.expect_sym("[")?;
        let lo = self.expr()?;
        self.expect_sym("..")?;
        let hi = self.expr()?;
        self.expect_sym("]")?;
        let init = if self.is_kw("init") {
            self.bump();
            Some(self.expr()?)
        } else {
            None
        };
        self.expect_sym(";")?;
        Ok(VarDecl { name, lo, hi, init, line })
    }

    fn command(&mut self) -> PResult<Command> {
        let line = self.line();
        self.expect_sym("[")?;
        let label = if self.is_sym("]") { None } else { Some(self.ident()?) };
        self.expect_sym("]")?;
        let guard = self.expr()?;
        self.expect_sym("->")?;
        let mut updates = Vec::new();
        loop {
            updates.push(self.update()?);
            if !self.eat_sym("+") {
                break;
            }
        }
        self.expect_sym(";")?;
        Ok(Command { label, guard, updates, line })
    }

    fn starts_assignment(&self) -> bool {
        self.is_sym("(") && matches!(self.peek_at(1), Tok::Ident(_)) && self.peek_at(2) == &Tok::Sym("'")
    }

    fn update(&mut self) -> PResult<Update> {
        let probability = if self.starts_assignment() || (self.is_kw("true") && !matches!(self.peek_at(1), Tok::Sym(":"))) {
            Expr::Lit(Value::Double(1.0))
        } else {
            let p = self.expr()?;
            self.expect_sym(":")?;
            p
        };
        let mut assignments = Vec::new();
        if self.is_kw("true") {
            self.bump();
            return Ok(Update { probability, assignments });
        }
        loop {
            self.expect_sym("(")?;
            let var = self.ident()?;
            self.expect_sym("'")?;
            self.expect_sym("=")?;
            let e = self.expr()?;
            self.expect_sym(")")?;
            assignments.push((var, e));
            if !self.eat_sym("&") {
                break;
            }
        }
        Ok(Update { probability, assignments })
    }

    pub(crate) fn expr(&mut self) -> PResult<Expr> {
        if self.is_sym("?") || self.is_sym("=>") || self.is_sym("<=>") {
            return Err(self.unsupported(&self.peek().describe()));
        }
        let e = self.or()?;
        match self.peek() {
            Tok::Sym(s @ ("?" | "=>" | "<=>")) => Err(self.unsupported(s)),
            _ => Ok(e),
        }
    }

    fn or(&mut self) -> PResult<Expr> {
        let mut e = self.and()?;
        while self.eat_sym("|") {
            e = Expr::binary(BinOp::Or, e, self.and()?);
        }
        Ok(e)
    }

    fn and(&mut self) -> PResult<Expr> {
        let mut e = self.not()?;
        while self.eat_sym("&") {
            e = Expr::binary(BinOp::And, e, self.not()?);
        }
        Ok(e)
    }

    fn not(&mut self) -> PResult<Expr> {
        if self.eat_sym("!") {
            return Ok(Expr::Unary(UnOp::Not, Box::new(self.not()?)));
        }
        self.relation()
    }

    fn relation(&mut self) -> PResult<Expr> {
        let lhs = self.sum()?;
        let op = match self.peek() {
            Tok::Sym("=") => BinOp::Eq,
            Tok::Sym("!=") => BinOp::Ne,
            Tok::Sym("<") => BinOp::Lt,
            Tok::Sym("<=") => BinOp::Le,
            Tok::Sym(">") => BinOp::Gt,
            Tok::Sym(">=") => BinOp::Ge,
            _ => return Ok(lhs),
        };
        self.bump();
        Ok(Expr::binary(op, lhs, self.sum()?))
    }

    fn sum(&mut self) -> PResult<Expr> {
        let mut e = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("+") => BinOp::Add,
                Tok::Sym("-") => BinOp::Sub,
                _ => return Ok(e),
            };
            self.bump();
            e = Expr::binary(op, e, self.product()?);
        }
    }

    fn product(&mut self) -> PResult<Expr> {
        let mut e = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("*") => BinOp::Mul,
                Tok::Sym("/") => BinOp::Div,
                _ => return Ok(e),
            };
            self.bump();
            e = Expr::binary(op, e, self.unary()?);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat_sym("-") {
            return Ok(Expr::Unary(UnOp::Neg, Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(Expr::Lit(Value::Int(i)))
            }
            Tok::Double(d) => {
                self.bump();
                Ok(Expr::Lit(Value::Double(d)))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::Label(s))
            }
            Tok::Ident(s) => {
                if self.peek_at(1) == &Tok::Sym("(") {
                    return Err(self.unsupported(&format!("function `{s}`")));
                }
                self.bump();
                Ok(Expr::Ident(s))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            _ => Err(self.unexpected("expression")),
        }
    }

    fn finish(&self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }
}

/// Parses a PRISM model in the supported subset.
pub fn parse_prism(text: &str) -> Result<PrismAst, PrismError> {
    Parser::new(text)?.model()
}

/// Parses a standalone expression.
pub fn parse_expr(text: &str) -> Result<Expr, PrismError> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

/// Parses `P=? [ F e ]` or `P=? [ F<=k e ]`.
pub fn parse_query(text: &str) -> Result<ReachQuery, PrismError> {
    let mut p = Parser::new(text)?;
    p.expect_kw("P")?;
    p.expect_sym("=?")?;
    p.expect_sym("[")?;
    match p.peek().clone() {
        Tok::Ident(op) if op == "F" => {
            p.bump();
        }
        Tok::Ident(op) if ["G", "U", "X", "W", "R"].contains(&op.as_str()) => {
            return Err(p.err(format!("only F supported, found `{op}`")));
        }
        _ => return Err(p.unexpected("`F`")),
    }
    let bound = if p.eat_sym("<=") {
        match p.bump() {
            Tok::Int(k) if k >= 0 => Some(k as u64),
            _ => return Err(p.err("expected a non-negative integer bound")),
        }
    } else {
        None
    };
    let target = p.expr()?;
    if p.is_kw("U") {
        return Err(p.err("only F supported, found `U`"));
    }
    p.expect_sym("]")?;
    p.finish()?;
    Ok(ReachQuery { target, bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_commands_and_updates() {
        let ast = parse_prism(
            "dtmc const double p = 0.3; const int N;
             module m x : [0..N] init 1; y : [0..2];
               [] x<N & y=0 -> p:(x'=x+1)&(y'=1) + 1-p:(x'=0);
               [go] x=N -> true;
             endmodule",
        )
        .unwrap();
        assert_eq!(ast.constants.len(), 2);
        assert_eq!(ast.constants[1].value, None);
        let m = &ast.modules[0];
        assert_eq!(m.vars[1].init, None);
        assert_eq!(m.commands[0].updates.len(), 2);
        assert_eq!(m.commands[0].updates[0].assignments.len(), 2);
        assert_eq!(m.commands[1].label.as_deref(), Some("go"));
        assert!(m.commands[1].updates[0].assignments.is_empty());
    }

    #[test]
    fn rejects_unsupported_constructs_with_location() {
        let err = parse_prism("dtmc\nformula f = 1;").unwrap_err();
        assert_eq!(err.location, Some((2, 1)));
        assert!(err.message.contains("unsupported construct"));
        let err = parse_prism("mdp module m endmodule").unwrap_err();
        assert!(err.message.contains("only dtmc supported"));
        for src in ["dtmc label \"a\" = true;", "dtmc rewards endrewards", "dtmc global g : [0..1];", "dtmc module b = a [x=y] endmodule"] {
            assert!(parse_prism(src).unwrap_err().message.contains("unsupported construct"), "{src}");
        }
    }

    #[test]
    fn queries() {
        let q = parse_query("P=? [ F \"blocks(a,5)\" & \"blocks(b,5)\" ]").unwrap();
        assert_eq!(q.bound, None);
        assert_eq!(q.target.labels(), vec!["blocks(a,5)", "blocks(b,5)"]);
        let q = parse_query("P=? [ F<=7 s=3 ]").unwrap();
        assert_eq!(q.bound, Some(7));
        assert!(parse_query("P=? [ G s=3 ]").unwrap_err().message.contains("only F supported"));
    }

    #[test]
    fn precedence() {
        let e = parse_expr("a=1 | b=2 & !c<3+4*2").unwrap();
        assert_eq!(e.to_string(), "a = 1 | b = 2 & !(c < 3 + 4 * 2)");
    }
}
