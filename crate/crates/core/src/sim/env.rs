use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::agent::{fmt_sum, AgentProgram, Alternative, Environment, Predicate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeSpec {
    pub probability: f64,
    #[serde(default)]
    pub predicates: Vec<Predicate>,
}

/// An independent percept source, optionally active only in one chain state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerceptSource {
    #[serde(default)]
    pub when: Option<usize>,
    pub alternatives: Vec<OutcomeSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainEdge {
    pub to: usize,
    pub probability: f64,
    /// Percepts observed when taking this edge.
    #[serde(default)]
    pub percepts: Vec<Predicate>,
}

/// Internal environment state machine; row `i` lists the edges out of state `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvChain {
    #[serde(default)]
    pub initial: usize,
    pub states: Vec<Vec<ChainEdge>>,
}

/// Replaces an action's declared feedback by the product of independent
/// components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionHook {
    pub action: String,
    pub components: Vec<Vec<OutcomeSpec>>,
}

/// Percept distributions, an optional environment chain and action hooks.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EnvModel {
    #[serde(default)]
    pub chain: Option<EnvChain>,
    #[serde(default)]
    pub percepts: Vec<PerceptSource>,
    #[serde(default)]
    pub hooks: Vec<ActionHook>,
}

fn check(what: &str, probs: impl Iterator<Item = f64>) -> Result<(), SimError> {
    let mut sum = 0.0;
    for p in probs {
        if !(0.0..=1.0).contains(&p) {
            return Err(SimError::Env(format!("{what}: probability {p} outside [0,1]")));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > crate::PROB_TOLERANCE {
        return Err(SimError::Env(format!("{what}: probabilities sum {}", fmt_sum(sum))));
    }
    Ok(())
}

fn alt(predicates: impl IntoIterator<Item = Predicate>, env_state: Option<usize>, probability: f64) -> Alternative {
    Alternative { predicates: predicates.into_iter().collect(), env_state, probability }
}

/// Joint distribution of independent components, enumerated with the last
/// component varying fastest.
pub fn product(components: &[Vec<Alternative>]) -> Vec<Alternative> {
    let mut out = vec![alt(BTreeSet::new(), None, 1.0)];
    for comp in components {
        let mut next = Vec::with_capacity(out.len() * comp.len());
        for a in &out {
            for b in comp {
                let mut preds = a.predicates.clone();
                preds.extend(b.predicates.iter().cloned());
                next.push(alt(preds, b.env_state.or(a.env_state), a.probability * b.probability));
            }
        }
        out = next;
    }
    out
}

impl EnvModel {
    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        let env: EnvModel = toml::from_str(text).map_err(|e| SimError::Env(e.to_string()))?;
        env.validate()?;
        Ok(env)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("env models serialise")
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if let Some(chain) = &self.chain {
            if chain.initial >= chain.states.len() {
                return Err(SimError::Env(format!("chain initial state {} out of range", chain.initial)));
            }
            for (i, row) in chain.states.iter().enumerate() {
                if let Some(e) = row.iter().find(|e| e.to >= chain.states.len()) {
                    return Err(SimError::Env(format!("chain state {i}: target {} out of range", e.to)));
                }
                check(&format!("chain state {i}"), row.iter().map(|e| e.probability))?;
            }
        }
        for (i, p) in self.percepts.iter().enumerate() {
            check(&format!("percept source {i}"), p.alternatives.iter().map(|a| a.probability))?;
        }
        for h in &self.hooks {
            for (i, c) in h.components.iter().enumerate() {
                check(&format!("hook `{}` component {i}", h.action), c.iter().map(|a| a.probability))?;
            }
        }
        Ok(())
    }

    /// Checks that hooks name external actions of `program`.
    pub fn check_against(&self, program: &AgentProgram) -> Result<(), SimError> {
        for h in &self.hooks {
            match program.action(&h.action) {
                Some(a) if a.kind.is_external() => {}
                _ => return Err(SimError::Env(format!("hook for unknown external action `{}`", h.action))),
            }
        }
        Ok(())
    }
}

fn specs(list: &[OutcomeSpec]) -> Vec<Alternative> {
    list.iter().map(|o| alt(o.predicates.iter().cloned(), None, o.probability)).collect()
}

impl Environment for EnvModel {
    fn initial_state(&self) -> Option<usize> {
        self.chain.as_ref().map(|c| c.initial)
    }

    fn percepts(&self, env_state: Option<usize>) -> Vec<Alternative> {
        let mut components = Vec::new();
        if let (Some(chain), Some(s)) = (&self.chain, env_state) {
            components.push(
                chain.states[s].iter().map(|e| alt(e.percepts.iter().cloned(), Some(e.to), e.probability)).collect(),
            );
        }
        for p in &self.percepts {
            if p.when.is_none() || p.when == env_state {
                components.push(specs(&p.alternatives));
            }
        }
        if components.is_empty() {
            Vec::new()
        } else {
            product(&components)
        }
    }

    fn feedback(&self, program: &AgentProgram, action: &str) -> Vec<Alternative> {
        match self.hooks.iter().find(|h| h.action == action) {
            Some(h) => product(&h.components.iter().map(|c| specs(c)).collect::<Vec<_>>()),
            None => program
                .action(action)
                .map(|a| a.feedback.iter().map(Alternative::from).collect())
                .unwrap_or_default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOML: &str = r#"
        [chain]
        initial = 0
        states = [
          [ { to = 0, probability = 0.5 }, { to = 1, probability = 0.5, percepts = ["storm"] } ],
          [ { to = 0, probability = 1.0 } ],
        ]

        [[percepts]]
        alternatives = [ { probability = 0.25, predicates = ["seen(buoy,1)"] }, { probability = 0.75 } ]

        [[hooks]]
        action = "scan"
        components = [ [ { probability = 1.0, predicates = ["report"] } ],
                       [ { probability = 0.1, predicates = ["bad(a)"] }, { probability = 0.9 } ] ]
    "#;

    #[test]
    fn parses_and_combines_sources() {
        let env = EnvModel::from_toml(TOML).unwrap();
        let alts = env.percepts(Some(0));
        assert_eq!(alts.len(), 4);
        let total: f64 = alts.iter().map(|a| a.probability).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(alts[2].env_state, Some(1));
        assert!(alts[2].predicates.contains(&"storm".parse().unwrap()));
        assert_eq!(env.percepts(Some(1)).len(), 2);
    }

    #[test]
    fn hooks_override_feedback() {
        let env = EnvModel::from_toml(TOML).unwrap();
        let prog = crate::dsl::parse_program("action scan run_once feedback { 1: ; }.").unwrap();
        let fb = env.feedback(&prog, "scan");
        assert_eq!(fb.len(), 2);
        assert!((fb[0].probability - 0.1).abs() < 1e-15);
        assert_eq!(fb[0].predicates.len(), 2);
        env.check_against(&prog).unwrap();
    }

    #[test]
    fn rejects_bad_sums() {
        let bad = "[[percepts]]\nalternatives = [ { probability = 0.6 }, { probability = 0.3 } ]";
        let err = EnvModel::from_toml(bad).unwrap_err();
        assert!(err.to_string().contains("probabilities sum 0.9"), "{err}");
    }

    #[test]
    fn toml_round_trip() {
        let env = EnvModel::from_toml(TOML).unwrap();
        assert_eq!(EnvModel::from_toml(&env.to_toml()).unwrap(), env);
    }
}
