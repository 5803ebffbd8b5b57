//! Line-oriented text format.
//!
//! ```text
//! alphabet 0 1
//! arity 2
//! states q0 q1
//! initial q0
//! leafaccept q1 0|1
//! trans q0 1|~ q1 q1
//! ```
//!
//! `arity` defaults to 1 and is written only when larger. Symbols of arity
//! above 1 are convolution symbols. `#` starts a comment.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use super::{AutomatonError, LetterSpace, State, Transition, TreeAutomaton};

impl fmt::Display for TreeAutomaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let space = self.space();
        writeln!(f, "alphabet {}", space.base().join(" "))?;
        if space.arity() > 1 {
            writeln!(f, "arity {}", space.arity())?;
        }
        let names: Vec<String> = (0..self.n_states()).map(|q| format!("q{q}")).collect();
        writeln!(f, "states {}", names.join(" ").trim_end())?;
        let init: Vec<&str> = self.initial().iter().map(|&q| names[q as usize].as_str()).collect();
        writeln!(f, "initial {}", init.join(" ").trim_end())?;
        for &(q, l) in self.leaf_rules() {
            writeln!(f, "leafaccept {} {}", names[q as usize], space.render(l))?;
        }
        for t in self.transitions() {
            writeln!(
                f,
                "trans {} {} {} {}",
                names[t.src as usize],
                space.render(t.letter),
                names[t.left as usize],
                names[t.right as usize]
            )?;
        }
        Ok(())
    }
}

impl FromStr for TreeAutomaton {
    type Err = AutomatonError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let err = |line: usize, msg: String| AutomatonError::Format { line, msg };
        let mut alphabet: Option<Vec<String>> = None;
        let mut arity = 1usize;
        let mut names: Vec<String> = Vec::new();
        let mut body: Vec<(usize, Vec<&str>)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("");
            let words: Vec<&str> = content.split_whitespace().collect();
            let Some((&head, rest)) = words.split_first() else {
                continue;
            };
            match head {
                "alphabet" => {
                    if alphabet.is_some() {
                        return Err(err(line, "duplicate alphabet directive".into()));
                    }
                    alphabet = Some(rest.iter().map(|s| s.to_string()).collect());
                }
                "arity" => {
                    arity = match rest {
                        [k] => k.parse().map_err(|_| err(line, format!("bad arity '{k}'")))?,
                        _ => return Err(err(line, "arity takes one number".into())),
                    }
                }
                "states" => names.extend(rest.iter().map(|s| s.to_string())),
                "initial" | "leafaccept" | "trans" => body.push((line, words)),
                other => return Err(err(line, format!("unknown directive '{other}'"))),
            }
        }
        let alphabet = alphabet.ok_or_else(|| err(0, "missing alphabet directive".into()))?;
        let space = LetterSpace::new(alphabet, arity).map_err(|e| err(0, e.to_string()))?;
        let mut ids: HashMap<&str, State> = HashMap::new();
        for name in &names {
            let len = ids.len() as State;
            ids.entry(name.as_str()).or_insert(len);
        }
        let state = |line: usize, name: &str| {
            ids.get(name)
                .copied()
                .ok_or_else(|| err(line, format!("undeclared state '{name}'")))
        };
        let letter = |line: usize, sym: &str| space.parse_letter(sym).map_err(|e| err(line, e.to_string()));
        let mut initial = Vec::new();
        let mut leaf = Vec::new();
        let mut trans = Vec::new();
        for (line, words) in body {
            match words.as_slice() {
                ["initial", qs @ ..] => {
                    for q in qs {
                        initial.push(state(line, q)?);
                    }
                }
                ["leafaccept", q, a] => leaf.push((state(line, q)?, letter(line, a)?)),
                ["trans", q, a, l, r] => trans.push(Transition {
                    src: state(line, q)?,
                    letter: letter(line, a)?,
                    left: state(line, l)?,
                    right: state(line, r)?,
                }),
                [head, ..] => return Err(err(line, format!("wrong number of fields for '{head}'"))),
                [] => unreachable!("blank lines are skipped"),
            }
        }
        TreeAutomaton::new(space, ids.len() as u32, initial, leaf, trans)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::equivalent;

    const SAMPLE: &str = "\
# two leaves under a 0 root
alphabet 0 1
states q0 q1 q2
initial q0
leafaccept q1 0
leafaccept q2 1
trans q0 0 q1 q2
trans q0 0 q1 q2
";

    #[test]
    fn parses_and_prints() {
        let a: TreeAutomaton = SAMPLE.parse().unwrap();
        assert_eq!(a.n_states(), 3);
        assert_eq!(a.transitions().len(), 1);
        assert!(a.accepts(&"0(0,1)".parse().unwrap()).unwrap());
        assert!(!a.accepts(&"0(1,0)".parse().unwrap()).unwrap());
        let text = a.to_string();
        let b: TreeAutomaton = text.parse().unwrap();
        assert_eq!(b.to_string(), text);
        assert!(equivalent(&a, &b).unwrap());
    }

    #[test]
    fn convolution_symbols() {
        let text = "alphabet 0 1\narity 2\nstates p\ninitial p\nleafaccept p 1|~\nleafaccept p 0|0\n";
        let a: TreeAutomaton = text.parse().unwrap();
        assert_eq!(a.arity(), 2);
        assert_eq!(a.to_string().parse::<TreeAutomaton>().unwrap().to_string(), a.to_string());
    }

    #[test]
    fn rejects_malformed_input() {
        for bad in [
            "states q0\ninitial q0\n",
            "alphabet 0 1\nstates q0\ninitial q1\n",
            "alphabet 0 1\nstates q0\nfrobnicate q0\n",
            "alphabet 0 1\nstates q0\nleafaccept q0 2\n",
            "alphabet 0 1\nstates q0\ntrans q0 0 q0\n",
        ] {
            assert!(matches!(bad.parse::<TreeAutomaton>(), Err(AutomatonError::Format { .. })), "{bad}");
        }
    }
}
