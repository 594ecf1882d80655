//! A grammar development session: the grammar store, the type system and
//! the query commands shared by batch and interactive use.

use std::fmt::Write as _;

use thiserror::Error;

use crate::expand::{
    check_consistency, expand, glb_typed, mark_recursive, satisfiable, Control, ControlError, Mode, Outcome,
};
use crate::fs::{build_fs, display_path, BuildError, Fs};
use crate::hierarchy::{Encoding, Hierarchy, HierarchyError, Kind};
use crate::simplify::{MemoTable, Target, DEFAULT_BUDGET};
use crate::syntax::template::{check_templates, expand_expr};
use crate::syntax::{
    expand_templates, parse_expr, parse_expr_list, parse_source, DefinitionAst, Template, Templates, TypeExprAst,
};
use crate::syntax::SyntaxError;
use crate::typesys::TypeSystem;

/// Version of the textual output format.
pub const FORMAT_VERSION: &str = "tdl-output 1";

#[derive(Debug, Clone)]
pub struct Options {
    pub encoding: Encoding,
    pub target: Target,
    pub mode: Mode,
    pub max_path_length: Option<usize>,
    pub memo: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            encoding: Encoding::TransitiveClosure,
            target: Target::Cnf,
            mode: Mode::Complete,
            max_path_length: Some(crate::expand::DEFAULT_MAX_PATH_LENGTH),
            memo: true,
        }
    }
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("{0}")]
    Syntax(#[from] SyntaxError),
    #[error("{pos}: {err}")]
    Definition { pos: crate::syntax::Pos, err: HierarchyError },
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("unknown command `:{0}`")]
    UnknownCommand(String),
    #[error("{0}")]
    Usage(String),
}

/// What a command printed, and whether the loop should stop.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Reply {
    pub text: String,
    pub quit: bool,
}

impl Reply {
    fn text(s: impl Into<String>) -> Self {
        Reply { text: s.into(), quit: false }
    }
}

pub struct Session {
    ts: TypeSystem,
    templates: Templates,
    instances: Vec<(String, TypeExprAst)>,
    control: Control,
    frozen: bool,
    inconsistent: bool,
    pending: String,
}

/// Splits `%control.` blocks out of a source text. Their lines are blanked
/// so positions in the rest stay valid.
pub fn extract_controls(source: &str) -> (String, Vec<String>) {
    let mut rest = String::with_capacity(source.len());
    let mut controls = Vec::new();
    let mut inside = false;
    for line in source.split_inclusive('\n') {
        let trimmed = line.trim();
        let newline = if line.ends_with('\n') { "\n" } else { "" };
        if trimmed == "%control." {
            inside = true;
            rest.push_str(newline);
            continue;
        }
        if inside && trimmed == "%end." {
            inside = false;
            rest.push_str(newline);
            continue;
        }
        if inside && trimmed.starts_with('%') {
            inside = false;
        }
        if inside {
            controls.push(trimmed.to_string());
            rest.push_str(newline);
        } else {
            rest.push_str(line);
        }
    }
    (rest, controls)
}

impl Session {
    pub fn new(options: &Options) -> Self {
        let memo = if options.memo { MemoTable::new(DEFAULT_BUDGET) } else { MemoTable::disabled(DEFAULT_BUDGET) };
        let control =
            Control { mode: options.mode, max_path_length: options.max_path_length, ..Control::default() };
        Session {
            ts: TypeSystem::new(Hierarchy::new(options.encoding, options.target), memo),
            templates: Templates::new(),
            instances: Vec::new(),
            control,
            frozen: false,
            inconsistent: false,
            pending: String::new(),
        }
    }

    pub fn types(&self) -> &TypeSystem {
        &self.ts
    }

    pub fn control(&self) -> &Control {
        &self.control
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    /// Some check or query found an inconsistency.
    pub fn found_inconsistency(&self) -> bool {
        self.inconsistent
    }

    pub fn instances(&self) -> &[(String, TypeExprAst)] {
        &self.instances
    }

    /// Loads definitions, declarations and control blocks. Stops at the
    /// first error; earlier definitions stay in effect.
    pub fn load_source(&mut self, source: &str) -> Result<(), SessionError> {
        let (rest, controls) = extract_controls(source);
        for c in controls {
            self.control.apply_line(&c)?;
        }
        for def in parse_source(&rest)? {
            self.define(&def.item).map_err(|e| match e {
                SessionError::Hierarchy(err) => SessionError::Definition { pos: def.pos, err },
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn define(&mut self, def: &DefinitionAst) -> Result<(), SessionError> {
        self.frozen = false;
        match expand_templates(def, &self.templates)? {
            DefinitionAst::TemplateDef { name, params, body } => {
                let old = self.templates.insert(name.clone(), Template { params, body });
                if let Err(e) = check_templates(&self.templates) {
                    match old {
                        Some(t) => self.templates.insert(name, t),
                        None => self.templates.remove(&name),
                    };
                    return Err(e.into());
                }
            }
            DefinitionAst::InstanceDef { name, body } => {
                self.instances.retain(|(n, _)| *n != name);
                self.instances.push((name, body));
            }
            DefinitionAst::TypeDef { name, kind, body } => {
                self.ts.hierarchy_mut().define_type(&name, kind, &body)?;
                mark_recursive(&mut self.ts);
            }
            DefinitionAst::IncompatibilityDecl(names) => {
                self.ts.hierarchy_mut().declare_incompatible(&names)?;
                mark_recursive(&mut self.ts);
            }
            DefinitionAst::PartitionDecl { supertype, members } => {
                self.ts.hierarchy_mut().declare_partition(&supertype, &members)?;
                mark_recursive(&mut self.ts);
            }
        }
        Ok(())
    }

    /// Builds a structure from an expression, expanding templates.
    pub fn structure(&self, e: &TypeExprAst) -> Result<Fs, SessionError> {
        Ok(build_fs(&expand_expr(e, &self.templates)?, &self.ts)?)
    }

    fn two(&self, args: &str) -> Result<(Fs, Fs), SessionError> {
        let es = parse_expr_list(args)?;
        let [a, b] = es.as_slice() else {
            return Err(SessionError::Usage(format!("expected two comma-separated expressions, got {}", es.len())));
        };
        Ok((self.structure(a)?, self.structure(b)?))
    }

    fn type_id(&self, name: &str) -> Result<usize, SessionError> {
        Ok(self.ts.hierarchy().require(name)?)
    }

    fn freeze(&mut self) {
        self.frozen = true;
    }

    /// Runs one input line: a `:command` or (part of) a definition.
    /// Definitions may span lines; they run once the text ends with `.`.
    pub fn execute_line(&mut self, line: &str) -> Result<Reply, SessionError> {
        let trimmed = line.trim();
        if self.pending.is_empty() {
            if let Some(cmd) = trimmed.strip_prefix(':') {
                return self.command(cmd);
            }
            if trimmed.is_empty() || trimmed.starts_with(';') {
                return Ok(Reply::default());
            }
        }
        self.pending.push_str(line);
        self.pending.push('\n');
        let code = strip_comment(&self.pending);
        if !code.trim_end().ends_with('.') {
            return Ok(Reply::default());
        }
        let src = std::mem::take(&mut self.pending);
        if src.trim() == "%control." {
            return Err(SessionError::Usage("use `:control <line>` for control settings interactively".into()));
        }
        self.load_source(&src)?;
        Ok(Reply::default())
    }

    /// Input is waiting for the rest of a definition.
    pub fn has_pending(&self) -> bool {
        !self.pending.is_empty()
    }

    fn command(&mut self, cmd: &str) -> Result<Reply, SessionError> {
        let (name, args) = match cmd.split_once(char::is_whitespace) {
            Some((n, a)) => (n, a.trim()),
            None => (cmd.trim(), ""),
        };
        match name {
            "quit" | "q" => Ok(Reply { text: String::new(), quit: true }),
            "freeze" => {
                self.freeze();
                Ok(Reply::text(format!("frozen: {} types", self.ts.hierarchy().user_types().count())))
            }
            "glb" => {
                self.freeze();
                let (a, b) = self.two(args)?;
                Ok(Reply::text(glb_typed(&self.ts, &a, &b, &self.control).to_string()))
            }
            "lub" => {
                self.freeze();
                let es = parse_expr_list(args)?;
                let names: Vec<String> = es
                    .iter()
                    .map(|e| match e {
                        TypeExprAst::TypeName(n) => Ok(n.clone()),
                        other => Err(SessionError::Usage(format!(
                            "`:lub` takes type names, not `{}`",
                            crate::syntax::print_expr(other)
                        ))),
                    })
                    .collect::<Result<_, _>>()?;
                let [a, b] = names.as_slice() else {
                    return Err(SessionError::Usage("expected two type names".into()));
                };
                let h = self.ts.hierarchy();
                let lub = h.lub_codes(self.type_id(a)?, self.type_id(b)?);
                let mut out: Vec<&str> = lub.iter().map(|&t| &**h.name(t)).collect();
                out.sort_unstable();
                Ok(Reply::text(out.join(" | ")))
            }
            "subsumes" => {
                self.freeze();
                let (a, b) = self.two(args)?;
                Ok(Reply::text(a.subsumes(&b, &self.ts).to_string()))
            }
            "unify" => {
                let (a, b) = self.two(args)?;
                Ok(Reply::text(match a.unify(&b, &self.ts) {
                    Ok(u) => u.to_string(),
                    Err(c) => {
                        self.inconsistent = true;
                        format!("*bottom* at {}: {}", display_path(&c.path), c.reason)
                    }
                }))
            }
            "expand" => {
                self.freeze();
                let (expr, overrides) = match args.split_once('{') {
                    Some((e, o)) => (e, Some(o.trim_end().trim_end_matches('}'))),
                    None => (args, None),
                };
                let mut control = self.control.clone();
                for l in overrides.into_iter().flat_map(|o| o.split(';')) {
                    control.apply_line(l)?;
                }
                let f = self.structure(&parse_expr(expr)?)?;
                let out = expand(&self.ts, &f, &control);
                if matches!(out, Outcome::Inconsistent(_)) {
                    self.inconsistent = true;
                }
                Ok(Reply::text(out.to_string()))
            }
            "sat" => {
                self.freeze();
                let (a, b) = self.two(args)?;
                let (sat, out) = satisfiable(&self.ts, &a, &b, &self.control);
                let mut text = sat.to_string();
                if let Outcome::Consistent(alts) = &out {
                    text.push('\n');
                    text.push_str(&crate::expand::render_alternatives(alts));
                }
                Ok(Reply::text(text))
            }
            "check" => {
                self.freeze();
                Ok(Reply::text(self.check()?))
            }
            "control" => {
                self.control.apply_line(args)?;
                Ok(Reply::default())
            }
            "stats" => Ok(Reply::text(self.stats())),
            "dump" => Ok(Reply::text(self.ts.hierarchy().dump().trim_end().to_string())),
            "recursive" => {
                let h = self.ts.hierarchy();
                let names: Vec<&str> = h.user_types().filter(|&t| h.entry(t).recursive).map(|t| &**h.name(t)).collect();
                Ok(Reply::text(if names.is_empty() { "none".to_string() } else { names.join(" ") }))
            }
            "undefined" => {
                let names = self.ts.hierarchy().undefined_types();
                Ok(Reply::text(if names.is_empty() { "none".to_string() } else { names.join(" ") }))
            }
            other => Err(SessionError::UnknownCommand(other.to_string())),
        }
    }

    /// Consistency report over all types and instances.
    pub fn check(&mut self) -> Result<String, SessionError> {
        let instances: Vec<(String, Fs)> = self
            .instances
            .iter()
            .map(|(n, e)| Ok((n.clone(), self.structure(e)?)))
            .collect::<Result<_, SessionError>>()?;
        let report = check_consistency(&self.ts, &instances, &self.control);
        let mut out = String::new();
        let mut counts = [0usize; 3];
        for (name, o) in &report {
            match o {
                Outcome::Consistent(_) => {
                    counts[0] += 1;
                    let _ = writeln!(out, "{name}: consistent");
                }
                Outcome::Inconsistent(c) => {
                    counts[1] += 1;
                    let _ = writeln!(out, "{name}: inconsistent at {}: {}", display_path(&c.path), c.reason);
                }
                Outcome::Bounded(why) => {
                    counts[2] += 1;
                    let _ = writeln!(out, "{name}: bounded: {why}");
                }
            }
        }
        if counts[1] > 0 {
            self.inconsistent = true;
        }
        let _ = write!(out, "{} consistent, {} inconsistent, {} bounded", counts[0], counts[1], counts[2]);
        Ok(out)
    }

    pub fn stats(&self) -> String {
        let h = self.ts.hierarchy();
        let count = |k: Kind| h.ids().filter(|&t| h.entry(t).kind == k).count();
        let m = self.ts.memo_stats();
        let hist: Vec<String> = m.hit_histogram.iter().map(|(k, v)| format!("{k}:{v}")).collect();
        let mut out = String::new();
        let _ = writeln!(out, "types: {}", h.user_types().count());
        let _ = writeln!(out, "intermediates: {}", count(Kind::Intermediate));
        let _ = writeln!(out, "undefined: {}", h.undefined_types().len());
        let _ = writeln!(out, "templates: {}", self.templates.len());
        let _ = writeln!(out, "instances: {}", self.instances.len());
        let _ = writeln!(out, "code bits: {}", h.code_bits());
        let _ = writeln!(out, "memo entries: {}", m.entries);
        let _ = writeln!(out, "memo reuses: {}", m.hits);
        let _ = writeln!(out, "memo misses: {}", m.misses);
        let _ = writeln!(out, "proper simplifications: {}", m.proper_simplifications);
        let _ = write!(out, "reuse histogram: {}", if hist.is_empty() { "-".to_string() } else { hist.join(" ") });
        out
    }
}

/// Drops `;` comments (outside string literals) so a trailing comment does
/// not hide the terminating dot.
fn strip_comment(src: &str) -> String {
    src.lines()
        .map(|l| {
            let mut in_str = false;
            for (i, c) in l.char_indices() {
                match c {
                    '"' => in_str = !in_str,
                    ';' if !in_str => return &l[..i],
                    _ => {}
                }
            }
            l
        })
        .collect::<Vec<_>>()
        .join("\n")
}
