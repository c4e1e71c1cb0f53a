use std::collections::BTreeSet;

use super::{Diagnostic, Location, SourceProgram};
use crate::agent::{AgentProgram, Predicate};

/// Predicates that can ever enter the belief base.
fn obtainable(program: &AgentProgram) -> BTreeSet<&Predicate> {
    let mut out: BTreeSet<&Predicate> = BTreeSet::new();
    out.extend(&program.initial_beliefs);
    out.extend(&program.percepts);
    out.extend(program.rules.iter().map(|r| &r.head));
    out.extend(program.actions.iter().flat_map(|a| a.feedback.iter().flat_map(|o| &o.predicates)));
    out.extend(program.outcomes.values().flat_map(|d| d.iter().flat_map(|o| &o.predicates)));
    let calls = program.initial_actions.iter().chain(program.plans.iter().flat_map(|p| &p.body));
    out.extend(calls.filter(|c| c.name == "note").filter_map(|c| c.arg.as_ref()));
    out
}

/// Static warnings: dead triggers, unsatisfiable contexts and unused actions.
pub fn validate(source: &SourceProgram) -> Vec<Diagnostic> {
    let program = &source.program;
    let reachable = obtainable(program);
    let mut out = Vec::new();

    for (plan, loc) in program.plans.iter().zip(&source.plan_locations) {
        if !reachable.contains(&plan.trigger) {
            out.push(Diagnostic::warning(
                *loc,
                format!("plan `{}`: trigger `+{}` is never raised", plan.name, plan.trigger),
            ));
        }
        let contradictory = plan
            .context
            .iter()
            .any(|l| plan.context.iter().any(|m| m.predicate == l.predicate && m.positive != l.positive));
        let missing = plan.context.iter().find(|l| l.positive && !reachable.contains(&l.predicate));
        if contradictory {
            out.push(Diagnostic::warning(*loc, format!("plan `{}`: unsatisfiable context", plan.name)));
        } else if let Some(l) = missing {
            out.push(Diagnostic::warning(
                *loc,
                format!("plan `{}`: unsatisfiable context, `{}` never holds", plan.name, l.predicate),
            ));
        }
    }

    let mut used: BTreeSet<&str> = BTreeSet::new();
    for call in program.initial_actions.iter().chain(program.plans.iter().flat_map(|p| &p.body)) {
        used.insert(&call.name);
        if call.name == "stop" {
            if let Some(arg) = &call.arg {
                used.insert(arg.name());
            }
        }
    }
    for a in &program.actions {
        if !used.contains(a.name.as_str()) {
            let loc = source.action_locations.get(&a.name).copied().unwrap_or(Location { line: 1, column: 1 });
            out.push(Diagnostic::warning(loc, format!("action `{}` is never used", a.name)));
        }
    }
    out.sort_by_key(|d| d.location);
    out
}
