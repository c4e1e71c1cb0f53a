use std::fmt::Write;

use crate::agent::{AgentProgram, Literal, Outcome};

fn dist(out: &mut String, dist: &[Outcome]) {
    out.push('{');
    for o in dist {
        let preds: Vec<String> = o.predicates.iter().map(ToString::to_string).collect();
        if preds.is_empty() {
            let _ = write!(out, " {}: ;", o.probability);
        } else {
            let _ = write!(out, " {}: {};", o.probability, preds.join(", "));
        }
    }
    out.push_str(" }");
}

fn literals(lits: &[Literal]) -> String {
    lits.iter().map(ToString::to_string).collect::<Vec<_>>().join(" & ")
}

/// Prints a program in canonical form. Parsing the output yields an equal program.
pub fn print_program(program: &AgentProgram) -> String {
    let mut sections: Vec<String> = Vec::new();
    let mut push = |lines: Vec<String>| {
        if !lines.is_empty() {
            sections.push(lines.join("\n"));
        }
    };

    push(program.initial_beliefs.iter().map(|p| format!("belief {p}.")).collect());
    push(program.percepts.iter().map(|p| format!("percept {p}.")).collect());
    push(program.operational_states.iter().map(|p| format!("opstate {p}.")).collect());
    push(
        program
            .actions
            .iter()
            .map(|a| {
                let mut s = format!("action {} {}", a.name, a.kind.keyword());
                if a.kind.is_external() {
                    s.push_str(" feedback ");
                    dist(&mut s, &a.feedback);
                }
                s.push('.');
                s
            })
            .collect(),
    );
    push(program.initial_actions.iter().map(|c| format!("init {c}.")).collect());
    push(
        program
            .rules
            .iter()
            .map(|r| format!("rule {} :- {}.", r.head, literals(&r.body)))
            .collect(),
    );
    push(
        program
            .plans
            .iter()
            .map(|p| {
                let ctx = if p.context.is_empty() { "true".to_string() } else { literals(&p.context) };
                let body: Vec<String> = p.body.iter().map(ToString::to_string).collect();
                format!("plan {}: +{} : {} <- {}.", p.name, p.trigger, ctx, body.join("; "))
            })
            .collect(),
    );
    push(
        program
            .outcomes
            .iter()
            .map(|(id, d)| {
                let mut s = format!("outcomes {} ", program.plans[*id].name);
                dist(&mut s, d);
                s.push('.');
                s
            })
            .collect(),
    );

    let mut text = sections.join("\n\n");
    text.push('\n');
    text
}
