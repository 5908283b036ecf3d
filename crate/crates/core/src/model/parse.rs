//! Hand-rolled lexer and recursive-descent parser for the model format.

use std::collections::BTreeSet;

use super::{DeclKind, DeclPosition, Diagnostic, DiagnosticCode, ModelFile};
use crate::automaton::{ActionKind, ActionLabel, IoAutomaton, StateId, Transition, TransitionName};
use crate::meta::{CompletionPolicy, MetaAutomaton, MetaTransition};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LBrace,
    RBrace,
    Colon,
    Semi,
    Comma,
    Minus,
    Arrow,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '.'
}

struct Scanner {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
}

impl Scanner {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> char {
        let c = self.chars[self.pos];
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        c
    }
}

fn lex(text: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut tokens = Vec::new();
    let mut s = Scanner {
        chars: text.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
    };
    while let Some(c) = s.peek() {
        let (tline, tcol) = (s.line, s.col);
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                s.bump();
            }
            '#' => {
                while let Some(c) = s.peek() {
                    if c == '\n' {
                        break;
                    }
                    s.bump();
                }
            }
            '{' => {
                s.bump();
                tokens.push(Token {
                    tok: Tok::LBrace,
                    line: tline,
                    col: tcol,
                });
            }
            '}' => {
                s.bump();
                tokens.push(Token {
                    tok: Tok::RBrace,
                    line: tline,
                    col: tcol,
                });
            }
            ':' => {
                s.bump();
                tokens.push(Token {
                    tok: Tok::Colon,
                    line: tline,
                    col: tcol,
                });
            }
            ';' => {
                s.bump();
                tokens.push(Token {
                    tok: Tok::Semi,
                    line: tline,
                    col: tcol,
                });
            }
            ',' => {
                s.bump();
                tokens.push(Token {
                    tok: Tok::Comma,
                    line: tline,
                    col: tcol,
                });
            }
            '-' => {
                s.bump();
                if s.peek() == Some('>') {
                    s.bump();
                    tokens.push(Token {
                        tok: Tok::Arrow,
                        line: tline,
                        col: tcol,
                    });
                } else {
                    tokens.push(Token {
                        tok: Tok::Minus,
                        line: tline,
                        col: tcol,
                    });
                }
            }
            c if is_ident_char(c) => {
                let mut ident = String::new();
                while let Some(c) = s.peek() {
                    if !is_ident_char(c) {
                        break;
                    }
                    ident.push(s.bump());
                }
                tokens.push(Token {
                    tok: Tok::Ident(ident),
                    line: tline,
                    col: tcol,
                });
            }
            other => {
                return Err(Diagnostic {
                    code: DiagnosticCode::ParseError,
                    message: format!("unexpected character `{other}`"),
                    line: tline,
                    col: tcol,
                });
            }
        }
    }
    tokens.push(Token {
        tok: Tok::Eof,
        line: s.line,
        col: s.col,
    });
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

type ParseResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek2(&self) -> &Token {
        &self.tokens[(self.pos + 1).min(self.tokens.len() - 1)]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> Diagnostic {
        let t = self.peek();
        Diagnostic {
            code: DiagnosticCode::ParseError,
            message: message.into(),
            line: t.line,
            col: t.col,
        }
    }

    fn expect(&mut self, tok: Tok) -> ParseResult<Token> {
        if self.peek().tok == tok {
            Ok(self.next())
        } else {
            Err(self.error(format!(
                "expected {}, found {}",
                tok.describe(),
                self.peek().tok.describe()
            )))
        }
    }

    fn expect_ident(&mut self, what: &str) -> ParseResult<(String, usize, usize)> {
        match &self.peek().tok {
            Tok::Ident(_) => {
                let t = self.next();
                if let Tok::Ident(name) = t.tok {
                    Ok((name, t.line, t.col))
                } else {
                    unreachable!()
                }
            }
            other => Err(self.error(format!("expected {what}, found {}", other.describe()))),
        }
    }

    /// Comma-separated identifiers, possibly empty, terminated by `;`.
    fn ident_list(&mut self) -> ParseResult<Vec<(String, usize, usize)>> {
        let mut items = Vec::new();
        if self.peek().tok == Tok::Semi {
            self.next();
            return Ok(items);
        }
        loop {
            items.push(self.expect_ident("an identifier")?);
            match &self.peek().tok {
                Tok::Comma => {
                    self.next();
                }
                Tok::Semi => {
                    self.next();
                    break;
                }
                other => {
                    return Err(
                        self.error(format!("expected `,` or `;`, found {}", other.describe()))
                    )
                }
            }
        }
        Ok(items)
    }
}

#[derive(Default)]
struct RawAutomaton {
    id: String,
    line: usize,
    col: usize,
    inputs: Vec<(String, usize, usize)>,
    outputs: Vec<(String, usize, usize)>,
    internals: Vec<(String, usize, usize)>,
    states: Vec<(String, usize, usize)>,
    starts: Vec<(String, usize, usize)>,
    transitions: Vec<RawTransition>,
}

struct RawTransition {
    labels: Vec<String>,
    source: String,
    action: String,
    target: String,
    line: usize,
    col: usize,
}

#[derive(Default)]
struct RawMeta {
    id: String,
    line: usize,
    col: usize,
    subject: String,
    subject_line: usize,
    subject_col: usize,
    states: Vec<(String, usize, usize)>,
    starts: Vec<(String, usize, usize)>,
    transitions: Vec<RawMetaTransition>,
    policy: Option<CompletionPolicy>,
}

struct RawMetaTransition {
    source: String,
    label: String,
    target: String,
    line: usize,
    col: usize,
}

fn parse_automaton_body(p: &mut Parser, raw: &mut RawAutomaton) -> ParseResult<()> {
    let mut seen_sections: BTreeSet<String> = BTreeSet::new();
    loop {
        if p.peek().tok == Tok::RBrace {
            p.next();
            return Ok(());
        }
        let (keyword, kline, kcol) = p.expect_ident("a section keyword")?;
        if !seen_sections.insert(keyword.clone()) {
            return Err(Diagnostic {
                code: DiagnosticCode::ParseError,
                message: format!("section `{keyword}` given twice"),
                line: kline,
                col: kcol,
            });
        }
        p.expect(Tok::Colon)?;
        match keyword.as_str() {
            "inputs" => raw.inputs = p.ident_list()?,
            "outputs" => raw.outputs = p.ident_list()?,
            "internals" => raw.internals = p.ident_list()?,
            "states" => raw.states = p.ident_list()?,
            "start" => raw.starts = p.ident_list()?,
            "trans" => {
                parse_transition_list(p, raw)?;
                p.expect(Tok::RBrace)?;
                return Ok(());
            }
            other => {
                return Err(Diagnostic {
                    code: DiagnosticCode::ParseError,
                    message: format!(
                        "unknown section `{other}` (expected inputs, outputs, internals, states, start or trans)"
                    ),
                    line: kline,
                    col: kcol,
                })
            }
        }
    }
}

fn parse_transition_list(p: &mut Parser, raw: &mut RawAutomaton) -> ParseResult<()> {
    loop {
        if p.peek().tok == Tok::RBrace {
            return Ok(());
        }
        let (labels, line, col) = match p.peek().tok {
            Tok::LBrace => {
                let t = p.next();
                let mut labels = vec![p.expect_ident("an atomic label")?.0];
                while p.peek().tok == Tok::Comma {
                    p.next();
                    labels.push(p.expect_ident("an atomic label")?.0);
                }
                p.expect(Tok::RBrace)?;
                (labels, t.line, t.col)
            }
            _ => {
                let (name, line, col) = p.expect_ident("a transition name")?;
                (vec![name], line, col)
            }
        };
        p.expect(Tok::Colon)?;
        let (source, ..) = p.expect_ident("a source state")?;
        p.expect(Tok::Minus)?;
        let (action, ..) = p.expect_ident("an action name")?;
        p.expect(Tok::Arrow)?;
        let (target, ..) = p.expect_ident("a target state")?;
        p.expect(Tok::Semi)?;
        raw.transitions.push(RawTransition {
            labels,
            source,
            action,
            target,
            line,
            col,
        });
    }
}

fn parse_meta_body(p: &mut Parser, raw: &mut RawMeta) -> ParseResult<()> {
    let mut seen_sections: BTreeSet<String> = BTreeSet::new();
    loop {
        if p.peek().tok == Tok::RBrace {
            p.next();
            return Ok(());
        }
        let (keyword, kline, kcol) = p.expect_ident("a section keyword")?;
        if !seen_sections.insert(keyword.clone()) {
            return Err(Diagnostic {
                code: DiagnosticCode::ParseError,
                message: format!("section `{keyword}` given twice"),
                line: kline,
                col: kcol,
            });
        }
        p.expect(Tok::Colon)?;
        match keyword.as_str() {
            "states" => raw.states = p.ident_list()?,
            "start" => raw.starts = p.ident_list()?,
            "policy" => {
                raw.policy = Some(parse_policy(p)?);
                p.expect(Tok::Semi)?;
            }
            "trans" => {
                parse_meta_transition_list(p, raw)?;
            }
            other => {
                return Err(Diagnostic {
                    code: DiagnosticCode::ParseError,
                    message: format!(
                        "unknown section `{other}` (expected states, start, trans or policy)"
                    ),
                    line: kline,
                    col: kcol,
                })
            }
        }
    }
}

fn parse_policy(p: &mut Parser) -> ParseResult<CompletionPolicy> {
    let (word, line, col) = p.expect_ident("a policy")?;
    match word.as_str() {
        "strict" => Ok(CompletionPolicy::Strict),
        "implicit" => {
            p.expect(Tok::Minus)?;
            let (rest, ..) = p.expect_ident("`allow`")?;
            if rest == "allow" {
                Ok(CompletionPolicy::ImplicitAllow)
            } else {
                Err(Diagnostic {
                    code: DiagnosticCode::ParseError,
                    message: format!("unknown policy `implicit-{rest}`"),
                    line,
                    col,
                })
            }
        }
        other => Err(Diagnostic {
            code: DiagnosticCode::ParseError,
            message: format!("unknown policy `{other}` (expected strict or implicit-allow)"),
            line,
            col,
        }),
    }
}

fn parse_meta_transition_list(p: &mut Parser, raw: &mut RawMeta) -> ParseResult<()> {
    loop {
        match (&p.peek().tok, &p.peek2().tok) {
            (Tok::RBrace, _) => return Ok(()),
            (Tok::Ident(word), Tok::Colon) if word == "policy" => return Ok(()),
            _ => {}
        }
        let (source, line, col) = p.expect_ident("a source state")?;
        p.expect(Tok::Minus)?;
        let (label, ..) = p.expect_ident("a transition label")?;
        p.expect(Tok::Arrow)?;
        let (target, ..) = p.expect_ident("a target state")?;
        p.expect(Tok::Semi)?;
        raw.transitions.push(RawMetaTransition {
            source,
            label,
            target,
            line,
            col,
        });
    }
}

/// Parses a model file, returning either a fully resolved [`ModelFile`] or
/// every diagnostic found, each with a position. Empty input is an empty
/// model.
pub fn parse_model(text: &str) -> Result<ModelFile, Vec<Diagnostic>> {
    let tokens = lex(text).map_err(|d| vec![d])?;
    let mut p = Parser { tokens, pos: 0 };
    let mut raw_automata: Vec<RawAutomaton> = Vec::new();
    let mut raw_metas: Vec<RawMeta> = Vec::new();

    loop {
        match &p.peek().tok {
            Tok::Eof => break,
            Tok::Ident(word) if word == "automaton" => {
                p.next();
                let (id, line, col) = p.expect_ident("an automaton id").map_err(|d| vec![d])?;
                p.expect(Tok::LBrace).map_err(|d| vec![d])?;
                let mut raw = RawAutomaton {
                    id,
                    line,
                    col,
                    ..RawAutomaton::default()
                };
                parse_automaton_body(&mut p, &mut raw).map_err(|d| vec![d])?;
                raw_automata.push(raw);
            }
            Tok::Ident(word) if word == "constraint" => {
                p.next();
                let (id, line, col) = p.expect_ident("a constraint id").map_err(|d| vec![d])?;
                let (over, oline, ocol) = p.expect_ident("`over`").map_err(|d| vec![d])?;
                if over != "over" {
                    return Err(vec![Diagnostic {
                        code: DiagnosticCode::ParseError,
                        message: format!("expected `over`, found `{over}`"),
                        line: oline,
                        col: ocol,
                    }]);
                }
                let (subject, subject_line, subject_col) = p
                    .expect_ident("a subject automaton id")
                    .map_err(|d| vec![d])?;
                p.expect(Tok::LBrace).map_err(|d| vec![d])?;
                let mut raw = RawMeta {
                    id,
                    line,
                    col,
                    subject,
                    subject_line,
                    subject_col,
                    ..RawMeta::default()
                };
                parse_meta_body(&mut p, &mut raw).map_err(|d| vec![d])?;
                raw_metas.push(raw);
            }
            other => {
                return Err(vec![p.error(format!(
                    "expected `automaton` or `constraint`, found {}",
                    other.describe()
                ))]);
            }
        }
    }

    resolve(raw_automata, raw_metas)
}

fn resolve(
    raw_automata: Vec<RawAutomaton>,
    raw_metas: Vec<RawMeta>,
) -> Result<ModelFile, Vec<Diagnostic>> {
    let mut diags: Vec<Diagnostic> = Vec::new();
    let mut file = ModelFile::default();

    let mut automaton_ids = BTreeSet::new();
    for raw in &raw_automata {
        if !automaton_ids.insert(raw.id.clone()) {
            diags.push(Diagnostic {
                code: DiagnosticCode::DuplicateId,
                message: format!("automaton `{}` declared twice", raw.id),
                line: raw.line,
                col: raw.col,
            });
        }
    }
    let mut meta_ids = BTreeSet::new();
    for raw in &raw_metas {
        if !meta_ids.insert(raw.id.clone()) {
            diags.push(Diagnostic {
                code: DiagnosticCode::DuplicateId,
                message: format!("constraint `{}` declared twice", raw.id),
                line: raw.line,
                col: raw.col,
            });
        }
    }

    for raw in &raw_automata {
        file.positions.push(DeclPosition {
            kind: DeclKind::Automaton,
            id: raw.id.clone(),
            line: raw.line,
            col: raw.col,
        });

        let mut actions: Vec<ActionLabel> = Vec::new();
        let mut action_names: BTreeSet<String> = BTreeSet::new();
        for (list, kind) in [
            (&raw.inputs, ActionKind::Input),
            (&raw.outputs, ActionKind::Output),
            (&raw.internals, ActionKind::Internal),
        ] {
            for (name, line, col) in list {
                if !action_names.insert(name.clone()) {
                    diags.push(Diagnostic {
                        code: DiagnosticCode::DuplicateId,
                        message: format!("action `{name}` declared twice in `{}`", raw.id),
                        line: *line,
                        col: *col,
                    });
                    continue;
                }
                actions.push(ActionLabel::new(name.clone(), kind));
            }
        }

        let mut states: Vec<StateId> = Vec::new();
        let mut state_names: BTreeSet<String> = BTreeSet::new();
        for (name, line, col) in &raw.states {
            if !state_names.insert(name.clone()) {
                diags.push(Diagnostic {
                    code: DiagnosticCode::DuplicateId,
                    message: format!("state `{name}` declared twice in `{}`", raw.id),
                    line: *line,
                    col: *col,
                });
                continue;
            }
            states.push(StateId::new(name.clone()));
        }

        let mut starts: Vec<StateId> = Vec::new();
        for (name, line, col) in &raw.starts {
            if !state_names.contains(name) {
                diags.push(Diagnostic {
                    code: DiagnosticCode::UnresolvedRef,
                    message: format!("start state `{name}` is not declared in `{}`", raw.id),
                    line: *line,
                    col: *col,
                });
                continue;
            }
            starts.push(StateId::new(name.clone()));
        }

        let mut transitions: Vec<Transition> = Vec::new();
        for t in &raw.transitions {
            let mut bad = false;
            for (what, name) in [("source state", &t.source), ("target state", &t.target)] {
                if !state_names.contains(name) {
                    diags.push(Diagnostic {
                        code: DiagnosticCode::UnresolvedRef,
                        message: format!("{what} `{name}` is not declared in `{}`", raw.id),
                        line: t.line,
                        col: t.col,
                    });
                    bad = true;
                }
            }
            if !action_names.contains(&t.action) {
                diags.push(Diagnostic {
                    code: DiagnosticCode::UnresolvedRef,
                    message: format!("action `{}` is not declared in `{}`", t.action, raw.id),
                    line: t.line,
                    col: t.col,
                });
                bad = true;
            }
            if !bad {
                transitions.push(Transition::new(
                    TransitionName::new(t.labels.clone()),
                    t.source.as_str(),
                    t.action.clone(),
                    t.target.as_str(),
                ));
            }
        }

        file.automata.push(IoAutomaton {
            id: raw.id.clone(),
            states,
            actions,
            transitions,
            starts,
        });
    }

    for raw in &raw_metas {
        file.positions.push(DeclPosition {
            kind: DeclKind::Constraint,
            id: raw.id.clone(),
            line: raw.line,
            col: raw.col,
        });

        let subject = match file.automata.iter().find(|a| a.id == raw.subject) {
            Some(a) => a,
            None => {
                diags.push(Diagnostic {
                    code: DiagnosticCode::UnresolvedRef,
                    message: format!(
                        "constraint `{}` is over undeclared automaton `{}`",
                        raw.id, raw.subject
                    ),
                    line: raw.subject_line,
                    col: raw.subject_col,
                });
                continue;
            }
        };
        let terminals: BTreeSet<String> = subject
            .atomic_labels()
            .into_iter()
            .map(str::to_string)
            .collect();

        let mut states: Vec<StateId> = Vec::new();
        let mut state_names: BTreeSet<String> = BTreeSet::new();
        for (name, line, col) in &raw.states {
            if !state_names.insert(name.clone()) {
                diags.push(Diagnostic {
                    code: DiagnosticCode::DuplicateId,
                    message: format!("state `{name}` declared twice in `{}`", raw.id),
                    line: *line,
                    col: *col,
                });
                continue;
            }
            states.push(StateId::new(name.clone()));
        }

        let mut starts: Vec<StateId> = Vec::new();
        for (name, line, col) in &raw.starts {
            if !state_names.contains(name) {
                diags.push(Diagnostic {
                    code: DiagnosticCode::UnresolvedRef,
                    message: format!("start state `{name}` is not declared in `{}`", raw.id),
                    line: *line,
                    col: *col,
                });
                continue;
            }
            starts.push(StateId::new(name.clone()));
        }

        let mut transitions: Vec<MetaTransition> = Vec::new();
        for t in &raw.transitions {
            let mut bad = false;
            for (what, name) in [("source state", &t.source), ("target state", &t.target)] {
                if !state_names.contains(name) {
                    diags.push(Diagnostic {
                        code: DiagnosticCode::UnresolvedRef,
                        message: format!("{what} `{name}` is not declared in `{}`", raw.id),
                        line: t.line,
                        col: t.col,
                    });
                    bad = true;
                }
            }
            if !terminals.contains(&t.label) {
                diags.push(Diagnostic {
                    code: DiagnosticCode::UnresolvedRef,
                    message: format!(
                        "label `{}` names no transition of `{}`",
                        t.label, raw.subject
                    ),
                    line: t.line,
                    col: t.col,
                });
                bad = true;
            }
            if !bad {
                transitions.push(MetaTransition::new(
                    t.source.as_str(),
                    t.label.clone(),
                    t.target.as_str(),
                ));
            }
        }

        file.metas.push(MetaAutomaton {
            id: raw.id.clone(),
            subject: raw.subject.clone(),
            states,
            terminals,
            transitions,
            starts,
            policy: raw.policy.unwrap_or_default(),
        });
    }

    if diags.is_empty() {
        Ok(file)
    } else {
        Err(diags)
    }
}
