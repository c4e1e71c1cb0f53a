use std::collections::{BTreeMap, BTreeSet};

use super::lexer::{lex, Tok, Token};
use super::{Diagnostic, Location, SourceProgram};
use crate::agent::{
    ActionDef, ActionKind, ActionRef, AgentProgram, Literal, LogicRule, Outcome, Plan, Predicate,
    ProgramParts,
};

/// Parses a program, returning every error found.
pub fn parse_program(text: &str) -> Result<AgentProgram, Vec<Diagnostic>> {
    parse_source(text).map(|s| s.program)
}

/// Like [`parse_program`] but keeps declaration locations for diagnostics.
pub fn parse_source(text: &str) -> Result<SourceProgram, Vec<Diagnostic>> {
    let (tokens, mut diags) = lex(text);
    let mut p = Parser { tokens, pos: 0, diags: Vec::new(), items: Items::default() };
    p.program();
    diags.append(&mut p.diags);
    if !diags.is_empty() {
        diags.sort_by_key(|d| d.location);
        return Err(diags);
    }
    p.items.assemble(text)
}

#[derive(Default)]
struct Items {
    beliefs: BTreeSet<Predicate>,
    percepts: BTreeSet<Predicate>,
    opstates: BTreeSet<Predicate>,
    actions: Vec<(Location, ActionDef, Option<Location>)>,
    inits: Vec<(Location, ActionRef)>,
    rules: Vec<(Location, LogicRule)>,
    plans: Vec<(Location, Plan, Vec<Location>)>,
    outcomes: Vec<(Location, String, Vec<Outcome>)>,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    diags: Vec<Diagnostic>,
    items: Items,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn at(&self, tok: &Tok) -> bool {
        &self.peek().tok == tok
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.at(tok) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn unexpected(&self, wanted: &str) -> Diagnostic {
        let t = self.peek();
        Diagnostic::error(t.loc, format!("expected {wanted}, found {}", t.tok.describe()))
    }

    fn expect(&mut self, tok: Tok) -> PResult<Location> {
        if self.at(&tok) {
            Ok(self.bump().loc)
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn ident(&mut self) -> PResult<(Location, String)> {
        match &self.peek().tok {
            Tok::Ident(s) if s.starts_with(|c: char| c.is_ascii_lowercase()) => {
                let s = s.clone();
                Ok((self.bump().loc, s))
            }
            Tok::Ident(s) => Err(Diagnostic::error(
                self.peek().loc,
                format!("identifier `{s}` must start with a lowercase letter"),
            )),
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn keyword(&self) -> Option<&str> {
        match &self.peek().tok {
            Tok::Ident(s) => Some(s.as_str()),
            _ => None,
        }
    }

    fn program(&mut self) {
        while !self.at(&Tok::Eof) {
            if let Err(d) = self.item() {
                self.diags.push(d);
                self.recover();
            }
        }
    }

    /// Skips past the next `.` so parsing can resume at the following item.
    fn recover(&mut self) {
        while !self.at(&Tok::Eof) {
            if self.bump().tok == Tok::Dot {
                return;
            }
        }
    }

    fn item(&mut self) -> PResult<()> {
        let loc = self.peek().loc;
        let kw = self.keyword().map(str::to_string);
        match kw.as_deref() {
            Some("belief") => {
                self.bump();
                let p = self.pred()?;
                self.items.beliefs.insert(p);
            }
            Some("percept") => {
                self.bump();
                let p = self.pred()?;
                self.items.percepts.insert(p);
            }
            Some("opstate") => {
                self.bump();
                let p = self.pred()?;
                self.items.opstates.insert(p);
            }
            Some("action") => {
                self.bump();
                let (_, name) = self.ident()?;
                let kind = self.kind()?;
                let (feedback, floc) = if self.keyword() == Some("feedback") {
                    self.bump();
                    let floc = self.peek().loc;
                    (self.dist()?, Some(floc))
                } else {
                    (Vec::new(), None)
                };
                self.items.actions.push((loc, ActionDef { name, kind, feedback }, floc));
            }
            Some("init") => {
                self.bump();
                let (cloc, call) = self.call()?;
                self.items.inits.push((cloc, call));
            }
            Some("rule") => {
                self.bump();
                let head = self.pred()?;
                self.expect(Tok::If)?;
                let body = self.literals()?;
                self.items.rules.push((loc, LogicRule { head, body }));
            }
            Some("plan") => {
                self.bump();
                let (_, name) = self.ident()?;
                self.expect(Tok::Colon)?;
                self.expect(Tok::Plus)?;
                let trigger = self.pred()?;
                self.expect(Tok::Colon)?;
                let context = if self.keyword() == Some("true") {
                    self.bump();
                    Vec::new()
                } else {
                    self.literals()?
                };
                self.expect(Tok::Arrow)?;
                let mut body = Vec::new();
                let mut locs = Vec::new();
                loop {
                    let (cloc, call) = self.call()?;
                    body.push(call);
                    locs.push(cloc);
                    if !self.eat(&Tok::Semi) {
                        break;
                    }
                }
                let id = self.items.plans.len();
                self.items.plans.push((loc, Plan { id, name, trigger, context, body }, locs));
            }
            Some("outcomes") => {
                self.bump();
                let (_, name) = self.ident()?;
                let dist = self.dist()?;
                self.items.outcomes.push((loc, name, dist));
            }
            _ => return Err(self.unexpected("a declaration")),
        }
        self.expect(Tok::Dot)?;
        Ok(())
    }

    fn kind(&mut self) -> PResult<ActionKind> {
        let kind = match self.keyword() {
            Some("internal_add") => ActionKind::InternalAdd,
            Some("internal_remove") => ActionKind::InternalRemove,
            Some("run_once") => ActionKind::RunOnce,
            Some("run_repeated") => ActionKind::RunRepeated,
            _ => return Err(self.unexpected("action kind")),
        };
        self.bump();
        Ok(kind)
    }

    fn atom(&mut self) -> PResult<String> {
        match &self.peek().tok {
            Tok::Number(n) if !n.contains('.') => {
                let n = n.clone();
                self.bump();
                Ok(n)
            }
            _ => self.ident().map(|(_, s)| s),
        }
    }

    fn pred(&mut self) -> PResult<Predicate> {
        let (_, name) = self.ident()?;
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) {
            loop {
                args.push(self.atom()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RParen)?;
        }
        Ok(Predicate::new(name, args))
    }

    fn literals(&mut self) -> PResult<Vec<Literal>> {
        let mut out = Vec::new();
        loop {
            let positive = if self.keyword() == Some("not") {
                self.bump();
                false
            } else {
                true
            };
            out.push(Literal { predicate: self.pred()?, positive });
            if !self.eat(&Tok::Amp) {
                return Ok(out);
            }
        }
    }

    fn call(&mut self) -> PResult<(Location, ActionRef)> {
        let (loc, name) = self.ident()?;
        let arg = if self.eat(&Tok::LParen) {
            let p = self.pred()?;
            self.expect(Tok::RParen)?;
            Some(p)
        } else {
            None
        };
        Ok((loc, ActionRef { name, arg }))
    }

    fn dist(&mut self) -> PResult<Vec<Outcome>> {
        self.expect(Tok::LBrace)?;
        let mut out = Vec::new();
        while !self.eat(&Tok::RBrace) {
            let probability = match &self.peek().tok {
                Tok::Number(n) => {
                    let v: f64 = n.parse().map_err(|_| self.unexpected("probability"))?;
                    self.bump();
                    v
                }
                _ => return Err(self.unexpected("probability or `}`")),
            };
            self.expect(Tok::Colon)?;
            let mut preds = BTreeSet::new();
            if !self.at(&Tok::Semi) {
                loop {
                    preds.insert(self.pred()?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            self.expect(Tok::Semi)?;
            out.push(Outcome { predicates: preds, probability });
        }
        Ok(out)
    }
}

fn check_dist(loc: Location, what: &str, dist: &[Outcome], diags: &mut Vec<Diagnostic>) {
    if dist.iter().any(|o| !(0.0..=1.0).contains(&o.probability)) {
        diags.push(Diagnostic::error(loc, format!("{what}: probability outside [0,1]")));
        return;
    }
    let sum: f64 = dist.iter().map(|o| o.probability).sum();
    if (sum - 1.0).abs() > crate::PROB_TOLERANCE {
        diags.push(Diagnostic::error(
            loc,
            format!("{what}: probabilities sum {}", crate::agent::fmt_sum(sum)),
        ));
    }
}

impl Items {
    fn assemble(self, text: &str) -> Result<SourceProgram, Vec<Diagnostic>> {
        let mut diags = Vec::new();
        let mut action_locations = BTreeMap::new();
        let mut actions = Vec::new();
        for (loc, def, floc) in self.actions {
            if action_locations.contains_key(&def.name)
                || crate::agent::BUILTIN_ACTIONS.iter().any(|(b, _)| *b == def.name)
            {
                diags.push(Diagnostic::error(loc, format!("action `{}` declared twice", def.name)));
                continue;
            }
            if def.kind.is_external() {
                check_dist(floc.unwrap_or(loc), &format!("feedback of `{}`", def.name), &def.feedback, &mut diags);
            } else if floc.is_some() {
                diags.push(Diagnostic::error(
                    loc,
                    format!("internal action `{}` cannot declare feedback", def.name),
                ));
            }
            action_locations.insert(def.name.clone(), loc);
            actions.push(def);
        }

        let mut plan_names = BTreeMap::new();
        for (loc, plan, _) in &self.plans {
            if plan_names.insert(plan.name.clone(), plan.id).is_some() {
                diags.push(Diagnostic::error(*loc, format!("duplicate plan id `{}`", plan.name)));
            }
        }
        for (loc, rule) in &self.rules {
            if action_locations.contains_key(rule.head.name()) {
                diags.push(Diagnostic::error(*loc, format!("rule head `{}` is an action", rule.head)));
            }
        }
        for b in &self.beliefs {
            if action_locations.contains_key(b.name()) {
                diags.push(Diagnostic::error(
                    Location { line: 1, column: 1 },
                    format!("initial belief `{b}` names an action"),
                ));
            }
        }
        let mut outcomes: BTreeMap<usize, Vec<Outcome>> = BTreeMap::new();
        for (loc, name, dist) in self.outcomes {
            match plan_names.get(&name) {
                None => diags.push(Diagnostic::error(loc, format!("outcomes for unknown plan `{name}`"))),
                Some(id) if outcomes.contains_key(id) => {
                    diags.push(Diagnostic::error(loc, format!("outcomes for `{name}` declared twice")))
                }
                Some(id) => {
                    check_dist(loc, &format!("outcomes of `{name}`"), &dist, &mut diags);
                    outcomes.insert(*id, dist);
                }
            }
        }

        // Calls are checked against the declared actions alone.
        let scratch = AgentProgram::new(ProgramParts { actions: actions.clone(), ..Default::default() });
        if let Ok(scratch) = &scratch {
            let calls = self
                .inits
                .iter()
                .map(|(l, c)| (*l, c))
                .chain(self.plans.iter().flat_map(|(_, p, locs)| locs.iter().copied().zip(&p.body)));
            for (loc, call) in calls {
                if let Err(e) = scratch.resolve_call(call) {
                    diags.push(Diagnostic::error(loc, e.to_string()));
                }
            }
        }
        if !diags.is_empty() {
            diags.sort_by_key(|d| d.location);
            return Err(diags);
        }

        let plan_locations = self.plans.iter().map(|(l, _, _)| *l).collect();
        let parts = ProgramParts {
            initial_beliefs: self.beliefs,
            initial_actions: self.inits.into_iter().map(|(_, c)| c).collect(),
            rules: self.rules.into_iter().map(|(_, r)| r).collect(),
            plans: self.plans.into_iter().map(|(_, p, _)| p).collect(),
            actions,
            percepts: self.percepts,
            operational_states: self.opstates,
            outcomes,
        };
        let program = AgentProgram::new(parts)
            .map_err(|e| vec![Diagnostic::error(Location { line: 1, column: 1 }, e.to_string())])?;
        Ok(SourceProgram { text: text.to_string(), program, plan_locations, action_locations })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "
        // probe example
        belief start.
        action probe run_once feedback { 0.9: ok; 0.1: fail; }.
        rule ready :- start & not fail.
        plan p1: +start : true <- probe.
        plan p2: +ok : ready <- note(done); forget(start).
        outcomes p1 { 0.9: ok; 0.1: fail; }.
    ";

    #[test]
    fn parses_sample() {
        let prog = parse_program(SAMPLE).unwrap();
        assert_eq!(prog.plans.len(), 2);
        assert_eq!(prog.plans[1].body.len(), 2);
        assert_eq!(prog.rules[0].body[1], Literal::neg(Predicate::atom("fail")));
        assert!(prog.is_declared(&Predicate::atom("done")));
        assert_eq!(prog.outcomes[&0].len(), 2);
    }

    #[test]
    fn bad_feedback_sum_is_located() {
        let src = "action go run_once feedback { 0.6: a; 0.3: b; }.";
        let err = parse_program(src).unwrap_err();
        assert_eq!(err.len(), 1);
        assert!(err[0].message.contains("probabilities sum 0.9"), "{}", err[0]);
        assert_eq!(err[0].location, Location { line: 1, column: 29 });
    }

    #[test]
    fn duplicate_plan_is_located() {
        let src = "belief a.\nplan p: +a : true <- note(b).\nplan p: +a : true <- note(c).";
        let err = parse_program(src).unwrap_err();
        assert!(err[0].message.contains("duplicate plan id `p`"));
        assert_eq!(err[0].location.line, 3);
    }

    #[test]
    fn undeclared_action_is_located() {
        let err = parse_program("plan p: +a : true <- fly.").unwrap_err();
        assert_eq!(err[0].location, Location { line: 1, column: 22 });
    }

    #[test]
    fn recovers_after_syntax_error() {
        let err = parse_program("belief (.\nbelief ok.\nrule x y.").unwrap_err();
        assert_eq!(err.len(), 2);
        assert_eq!(err[1].location.line, 3);
    }

    #[test]
    fn rejects_uppercase_identifiers() {
        assert!(parse_program("belief Foo.").is_err());
    }
}
