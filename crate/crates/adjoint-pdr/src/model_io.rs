//! Plain-text model files: parsing and serialization for both model
//! kinds, with exact round-tripping.
//!
//! The format is line-oriented and whitespace-insensitive; `#` starts a
//! comment. A transition-system file:
//!
//! ```text
//! ts
//! states 7
//! initial 0
//! safe 0 1 2 3 4 5
//! edge 0 1
//! ```
//!
//! and an MDP file:
//!
//! ```text
//! mdp
//! states 4
//! initial 0
//! bad 3
//! lambda 1/4
//! action 0 a 1:1/2 2:1/2
//! ```

use std::fmt::Write as _;

use crate::mdp::{Mdp, MdpError};
use crate::rational::{format_rational, parse_rational, Rational};
use crate::ts::TransitionSystem;

/// A model of either kind, as found in a file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Model {
    Ts(TransitionSystem),
    Mdp(Mdp),
}

/// A parse failure at a 1-based line; problems not attributable to a
/// single line (missing sections, cross-line validation) report line 0.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub reason: String,
}

fn err(line: usize, reason: impl Into<String>) -> ParseError {
    ParseError {
        line,
        reason: reason.into(),
    }
}

/// Comment-stripped, non-blank lines with their 1-based numbers.
fn significant_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(idx, raw)| {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            None
        } else {
            Some((idx + 1, content))
        }
    })
}

fn parse_index(token: &str, line: usize) -> Result<usize, ParseError> {
    token
        .parse::<usize>()
        .map_err(|_| err(line, format!("expected a state index, found '{token}'")))
}

fn check_range(index: usize, num_states: usize, line: usize) -> Result<(), ParseError> {
    if index < num_states {
        Ok(())
    } else {
        Err(err(
            line,
            format!("state index {index} out of range (model has {num_states} states)"),
        ))
    }
}

/// Tracks a once-only section line, rejecting duplicates.
struct Section<T> {
    keyword: &'static str,
    value: Option<(usize, T)>,
}

impl<T> Section<T> {
    fn new(keyword: &'static str) -> Self {
        Section {
            keyword,
            value: None,
        }
    }

    fn set(&mut self, line: usize, value: T) -> Result<(), ParseError> {
        if self.value.is_some() {
            return Err(err(line, format!("duplicate '{}' line", self.keyword)));
        }
        self.value = Some((line, value));
        Ok(())
    }

    fn line(&self) -> usize {
        self.value.as_ref().map_or(0, |(line, _)| *line)
    }

    fn take(self) -> Result<T, ParseError> {
        match self.value {
            Some((_, value)) => Ok(value),
            None => Err(err(0, format!("missing '{}' line", self.keyword))),
        }
    }
}

/// The number of states must be declared before any line that mentions
/// state indices; this extracts it or rejects the line.
fn states_first(states: &Section<usize>, keyword: &str, line: usize) -> Result<usize, ParseError> {
    match &states.value {
        Some((_, n)) => Ok(*n),
        None => Err(err(
            line,
            format!("'{keyword}' before 'states'; declare the state count first"),
        )),
    }
}

fn expect_header<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    kind: &str,
) -> Result<(), ParseError> {
    match lines.next() {
        Some((_, header)) if header == kind => Ok(()),
        Some((line, header)) => Err(err(
            line,
            format!("expected '{kind}' header, found '{header}'"),
        )),
        None => Err(err(0, "empty model file")),
    }
}

/// Parses the transition-system format.
pub fn parse_ts(text: &str) -> Result<TransitionSystem, ParseError> {
    let mut lines = significant_lines(text);
    expect_header(&mut lines, "ts")?;

    let mut states = Section::new("states");
    let mut initial = Section::new("initial");
    let mut safe = Section::new("safe");
    let mut edges: Vec<(usize, usize)> = Vec::new();

    for (line, content) in lines {
        let mut tokens = content.split_whitespace();
        let keyword = tokens.next().expect("significant lines are nonempty");
        match keyword {
            "states" => {
                let rest: Vec<&str> = tokens.collect();
                if rest.len() != 1 {
                    return Err(err(line, "'states' takes exactly one count"));
                }
                states.set(line, parse_index(rest[0], line)?)?;
            }
            "initial" | "safe" => {
                let n = states_first(&states, keyword, line)?;
                let mut indices = Vec::new();
                for token in tokens {
                    let index = parse_index(token, line)?;
                    check_range(index, n, line)?;
                    indices.push(index);
                }
                if keyword == "initial" {
                    initial.set(line, indices)?;
                } else {
                    safe.set(line, indices)?;
                }
            }
            "edge" => {
                let n = states_first(&states, keyword, line)?;
                let rest: Vec<&str> = tokens.collect();
                if rest.len() != 2 {
                    return Err(err(line, "'edge' takes a source and a target"));
                }
                let src = parse_index(rest[0], line)?;
                let dst = parse_index(rest[1], line)?;
                check_range(src, n, line)?;
                check_range(dst, n, line)?;
                edges.push((src, dst));
            }
            other => return Err(err(line, format!("unknown directive '{other}'"))),
        }
    }

    let states_line = states.line();
    let num_states = states.take()?;
    let initial = initial.take()?;
    let safe = safe.take()?;
    TransitionSystem::new(num_states, &edges, &initial, &safe)
        .map_err(|e| err(states_line, e.to_string()))
}

/// Parses the MDP format.
pub fn parse_mdp(text: &str) -> Result<Mdp, ParseError> {
    let mut lines = significant_lines(text);
    expect_header(&mut lines, "mdp")?;

    let mut states = Section::new("states");
    let mut initial = Section::new("initial");
    let mut bad = Section::new("bad");
    let mut lambda = Section::new("lambda");
    // Actions per state in declaration order, with their source lines for
    // error attribution.
    let mut actions: Vec<Vec<(String, Vec<(usize, Rational)>)>> = Vec::new();
    let mut action_lines: Vec<(usize, String, usize)> = Vec::new();

    for (line, content) in lines {
        let mut tokens = content.split_whitespace();
        let keyword = tokens.next().expect("significant lines are nonempty");
        match keyword {
            "states" => {
                let rest: Vec<&str> = tokens.collect();
                if rest.len() != 1 {
                    return Err(err(line, "'states' takes exactly one count"));
                }
                let n = parse_index(rest[0], line)?;
                states.set(line, n)?;
                actions = vec![Vec::new(); n];
            }
            "initial" => {
                let n = states_first(&states, keyword, line)?;
                let rest: Vec<&str> = tokens.collect();
                if rest.len() != 1 {
                    return Err(err(line, "'initial' takes exactly one state"));
                }
                let index = parse_index(rest[0], line)?;
                check_range(index, n, line)?;
                initial.set(line, index)?;
            }
            "bad" => {
                let n = states_first(&states, keyword, line)?;
                let mut indices = Vec::new();
                for token in tokens {
                    let index = parse_index(token, line)?;
                    check_range(index, n, line)?;
                    indices.push(index);
                }
                bad.set(line, indices)?;
            }
            "lambda" => {
                let rest: Vec<&str> = tokens.collect();
                if rest.len() != 1 {
                    return Err(err(line, "'lambda' takes exactly one rational"));
                }
                let value = parse_rational(rest[0])
                    .map_err(|e| err(line, format!("bad threshold: {e}")))?;
                lambda.set(line, value)?;
            }
            "action" => {
                let n = states_first(&states, keyword, line)?;
                let state = parse_index(
                    tokens
                        .next()
                        .ok_or_else(|| err(line, "'action' needs a state"))?,
                    line,
                )?;
                check_range(state, n, line)?;
                let label = tokens
                    .next()
                    .ok_or_else(|| err(line, "'action' needs a label"))?
                    .to_string();
                let mut dist = Vec::new();
                for pair in tokens {
                    let (target, prob) = pair.split_once(':').ok_or_else(|| {
                        err(line, format!("expected '<target>:<prob>', found '{pair}'"))
                    })?;
                    let target = parse_index(target, line)?;
                    check_range(target, n, line)?;
                    let prob = parse_rational(prob)
                        .map_err(|e| err(line, format!("bad probability: {e}")))?;
                    dist.push((target, prob));
                }
                if dist.is_empty() {
                    return Err(err(line, "'action' needs at least one target:prob pair"));
                }
                action_lines.push((state, label.clone(), line));
                actions[state].push((label, dist));
            }
            other => return Err(err(line, format!("unknown directive '{other}'"))),
        }
    }

    let states_line = states.line();
    let lambda_line = lambda.line();
    let num_states = states.take()?;
    let initial = initial.take()?;
    let bad = bad.take()?;
    let lambda = lambda.take()?;
    Mdp::new(num_states, actions, initial, &bad, lambda).map_err(|e| {
        let line = match &e {
            MdpError::NoStates => states_line,
            MdpError::LambdaOutOfRange { .. } => lambda_line,
            MdpError::NonPositiveProbability { state, label, .. }
            | MdpError::DuplicateTarget { state, label, .. }
            | MdpError::ProbabilitySumMismatch { state, label, .. } => action_lines
                .iter()
                .find(|(s, l, _)| s == state && l == label)
                .map_or(0, |(_, _, line)| *line),
            _ => 0,
        };
        err(line, e.to_string())
    })
}

/// Parses either format, dispatching on the header line.
pub fn parse_model(text: &str) -> Result<Model, ParseError> {
    match significant_lines(text).next() {
        Some((_, "ts")) => parse_ts(text).map(Model::Ts),
        Some((_, "mdp")) => parse_mdp(text).map(Model::Mdp),
        Some((line, header)) => Err(err(
            line,
            format!("expected 'ts' or 'mdp' header, found '{header}'"),
        )),
        None => Err(err(0, "empty model file")),
    }
}

fn push_indices(out: &mut String, indices: impl Iterator<Item = usize>) {
    for index in indices {
        let _ = write!(out, " {index}");
    }
    out.push('\n');
}

/// Renders a transition system in the file format.
pub fn serialize_ts(ts: &TransitionSystem) -> String {
    let mut out = String::from("ts\n");
    let _ = writeln!(out, "states {}", ts.num_states());
    out.push_str("initial");
    push_indices(&mut out, ts.initial().iter());
    out.push_str("safe");
    push_indices(&mut out, ts.safe().iter());
    for (src, dst) in ts.edges() {
        let _ = writeln!(out, "edge {src} {dst}");
    }
    out
}

/// Renders an MDP in the file format.
pub fn serialize_mdp(mdp: &Mdp) -> String {
    let mut out = String::from("mdp\n");
    let _ = writeln!(out, "states {}", mdp.num_states());
    let _ = writeln!(out, "initial {}", mdp.initial());
    out.push_str("bad");
    push_indices(&mut out, mdp.bad().iter());
    let _ = writeln!(out, "lambda {}", format_rational(mdp.lambda()));
    for state in 0..mdp.num_states() {
        for action in mdp.actions(state) {
            let _ = write!(out, "action {state} {}", action.label());
            for (target, prob) in action.dist() {
                let _ = write!(out, " {target}:{}", format_rational(prob));
            }
            out.push('\n');
        }
    }
    out
}

/// Renders either model kind.
pub fn serialize_model(model: &Model) -> String {
    match model {
        Model::Ts(ts) => serialize_ts(ts),
        Model::Mdp(mdp) => serialize_mdp(mdp),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::tests::example3;
    use crate::oracle::ts_reach;
    use crate::rational::rat;
    use crate::ts::tests::fig1;
    use crate::ts::StateSet;

    const FIG1_TEXT: &str = "\
ts
states 7
initial 0
safe 0 1 2 3 4 5
edge 0 1
edge 0 2
edge 1 0
edge 1 3
edge 2 2
edge 2 3
edge 3 4
edge 4 4
edge 5 5
edge 5 6
edge 6 6
";

    const EXAMPLE3_TEXT: &str = "\
mdp
states 4
initial 0
bad 3
lambda 1/4
action 0 a 1:1/2 2:1/2
action 0 b 0:1/3 2:2/3
action 1 a 0:1/2 3:1/2
action 2 b 0:1
action 3 a 3:1
";

    #[test]
    fn parses_the_bundled_transition_system() {
        let ts = parse_ts(FIG1_TEXT).unwrap();
        assert_eq!(ts, fig1());
        assert_eq!(
            ts_reach(&ts),
            StateSet::from_indices(7, [0, 1, 2, 3, 4])
        );
    }

    #[test]
    fn parses_the_bundled_mdp() {
        let mdp = parse_mdp(EXAMPLE3_TEXT).unwrap();
        assert_eq!(mdp, example3());
    }

    #[test]
    fn a_system_without_edges_is_a_valid_deadlock() {
        let ts = parse_ts("ts\nstates 1\ninitial 0\nsafe 0\n").unwrap();
        assert_eq!(ts.num_states(), 1);
        assert_eq!(ts.edges().count(), 0);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# a model\nts\n\nstates 2  # two of them\ninitial 0\nsafe 0 1\nedge 0 1\n";
        let ts = parse_ts(text).unwrap();
        assert_eq!(ts.num_states(), 2);
        assert_eq!(ts.edges().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn out_of_range_edges_are_rejected_with_their_line() {
        let text = "ts\nstates 7\ninitial 0\nsafe 0\nedge 0 9\n";
        let e = parse_ts(text).unwrap_err();
        assert_eq!(e.line, 5);
        assert!(e.reason.contains("9 out of range"), "{e}");
    }

    #[test]
    fn sections_must_follow_the_state_count() {
        let e = parse_ts("ts\ninitial 0\nstates 2\nsafe 0\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.reason.contains("before 'states'"), "{e}");
    }

    #[test]
    fn missing_sections_are_file_level_errors() {
        let e = parse_ts("ts\nstates 2\ninitial 0\n").unwrap_err();
        assert_eq!(e.line, 0);
        assert!(e.reason.contains("missing 'safe'"), "{e}");
        let e = parse_mdp("mdp\nstates 1\ninitial 0\nbad 0\naction 0 a 0:1\n").unwrap_err();
        assert_eq!(e.line, 0);
        assert!(e.reason.contains("missing 'lambda'"), "{e}");
    }

    #[test]
    fn duplicate_sections_are_rejected() {
        let e = parse_ts("ts\nstates 2\nstates 3\ninitial 0\nsafe 0\n").unwrap_err();
        assert_eq!(e.line, 3);
        assert!(e.reason.contains("duplicate 'states'"), "{e}");
    }

    #[test]
    fn probability_sums_are_verified_exactly() {
        let text = "mdp\nstates 3\ninitial 0\nbad 2\nlambda 1/2\n\
action 0 a 1:1/2 2:1/3\naction 1 a 1:1\naction 2 a 2:1\n";
        let e = parse_mdp(text).unwrap_err();
        assert_eq!(e.line, 6);
        assert!(e.reason.contains("5/6"), "{e}");
    }

    #[test]
    fn a_state_without_actions_is_rejected() {
        let text = "mdp\nstates 2\ninitial 0\nbad 1\nlambda 1/2\naction 0 a 1:1\n";
        let e = parse_mdp(text).unwrap_err();
        assert_eq!(e.line, 0);
        assert!(e.reason.contains("no action"), "{e}");
    }

    #[test]
    fn lambda_is_confined_to_the_unit_interval() {
        let text = "mdp\nstates 1\ninitial 0\nbad 0\nlambda 3/2\naction 0 a 0:1\n";
        let e = parse_mdp(text).unwrap_err();
        assert_eq!(e.line, 5);
        assert!(e.reason.contains("3/2"), "{e}");
    }

    #[test]
    fn malformed_pairs_and_tokens_are_diagnosed() {
        let e = parse_mdp("mdp\nstates 1\ninitial 0\nbad 0\nlambda 1\naction 0 a 0;1\n")
            .unwrap_err();
        assert_eq!(e.line, 6);
        assert!(e.reason.contains("target>:<prob"), "{e}");
        let e = parse_ts("ts\nstates x\n").unwrap_err();
        assert_eq!(e.line, 2);
        let e = parse_model("pomdp\nstates 1\n").unwrap_err();
        assert!(e.reason.contains("expected 'ts' or 'mdp'"), "{e}");
        let e = parse_model("# nothing\n").unwrap_err();
        assert_eq!(e.line, 0);
    }

    #[test]
    fn round_trips_are_exact() {
        let ts = fig1();
        assert_eq!(parse_ts(&serialize_ts(&ts)).unwrap(), ts);
        let mdp = example3();
        assert_eq!(parse_mdp(&serialize_mdp(&mdp)).unwrap(), mdp);
        let model = Model::Mdp(mdp.with_lambda(rat(7, 8)).unwrap());
        assert_eq!(parse_model(&serialize_model(&model)).unwrap(), model);
    }
}
