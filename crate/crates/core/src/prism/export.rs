use std::fmt::Write;

use crate::dtmc::DtmcModel;
use crate::expr::Value;

const KEYWORDS: [&str; 12] =
    ["dtmc", "module", "endmodule", "const", "int", "double", "bool", "init", "true", "false", "label", "formula"];

fn exportable(name: &str) -> bool {
    let mut chars = name.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !KEYWORDS.contains(&name)
}

/// Writes a model as a single-module PRISM DTMC driven by a state index.
/// Model variables and constants are kept, so queries over them still
/// work after re-import; variables whose names are not PRISM identifiers
/// are dropped. Labels are not exported.
pub fn export_prism(model: &DtmcModel) -> String {
    let n = model.num_states();
    let mut index = "st".to_string();
    while model.vars.contains(&index) || model.constants.contains_key(&index) {
        index.insert(0, '_');
    }
    let kept: Vec<usize> = (0..model.vars.len()).filter(|&v| exportable(&model.vars[v])).collect();

    let mut out = String::from("dtmc\n\n");
    for (name, v) in model.constants.iter().filter(|(k, _)| exportable(k)) {
        let _ = match v {
            Value::Int(i) => writeln!(out, "const int {name} = {i};"),
            Value::Double(d) => writeln!(out, "const double {name} = {d:?};"),
            Value::Bool(b) => writeln!(out, "const bool {name} = {b};"),
        };
    }
    if !model.constants.is_empty() {
        out.push('\n');
    }
    let _ = writeln!(out, "module {index}\n  {index} : [0..{}] init {};", n.saturating_sub(1), model.initial);
    for &v in &kept {
        let vals = model.states.iter().map(|s| s.valuation[v]);
        let (lo, hi) = vals.fold((i64::MAX, i64::MIN), |(lo, hi), x| (lo.min(x), hi.max(x)));
        let init = model.states[model.initial].valuation[v];
        let _ = writeln!(out, "  {} : [{lo}..{hi}] init {init};", model.vars[v]);
    }
    for (s, row) in model.rows.iter().enumerate() {
        let from = &model.states[s].valuation;
        let updates: Vec<String> = row
            .iter()
            .map(|&(t, p)| {
                let mut u = format!("{p:?}:({index}'={t})");
                for &v in &kept {
                    let x = model.states[t].valuation[v];
                    if x != from[v] {
                        let _ = write!(u, "&({}'={x})", model.vars[v]);
                    }
                }
                u
            })
            .collect();
        let _ = writeln!(out, "  [] {index}={s} -> {};", updates.join(" + "));
    }
    out.push_str("endmodule\n");
    out
}
