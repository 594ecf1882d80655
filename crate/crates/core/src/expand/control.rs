//! Expansion controls and attribute path patterns.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::simplify::Name;

pub const DEFAULT_MAX_PATH_LENGTH: usize = 50;
pub const DEFAULT_STEP_BUDGET: usize = 200_000;
pub const DEFAULT_MAX_NODES: usize = 2_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Complete,
    /// Recursive types stop once a prefix path already carries them.
    Resolved,
}

impl FromStr for Mode {
    type Err = ControlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "complete" => Ok(Mode::Complete),
            "resolved" => Ok(Mode::Resolved),
            _ => Err(ControlError::Mode(s.into())),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Complete => "complete",
            Mode::Resolved => "resolved",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ControlError {
    #[error("unknown mode `{0}` (expected complete or resolved)")]
    Mode(String),
    #[error("bad control line `{0}`")]
    Line(String),
    #[error("empty path pattern")]
    EmptyPattern,
    #[error("type `{0}` is both expand-always and expand-never")]
    Conflict(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Segment {
    Attr(String),
    /// Exactly one attribute.
    Any,
    /// Zero or more attributes.
    Many,
}

/// `A|*|B`, `SYNSEM|**`, or negated with a leading `!`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathPattern {
    segments: Vec<Segment>,
    pub negated: bool,
}

impl FromStr for PathPattern {
    type Err = ControlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (negated, body) = match s.strip_prefix('!') {
            Some(rest) => (true, rest.trim()),
            None => (false, s),
        };
        if body.is_empty() {
            return Err(ControlError::EmptyPattern);
        }
        let segments = body
            .split('|')
            .map(|seg| match seg.trim() {
                "" => Err(ControlError::EmptyPattern),
                "*" => Ok(Segment::Any),
                "**" => Ok(Segment::Many),
                a => Ok(Segment::Attr(a.to_string())),
            })
            .collect::<Result<_, _>>()?;
        Ok(PathPattern { segments, negated })
    }
}

impl fmt::Display for PathPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("!")?;
        }
        for (i, s) in self.segments.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            match s {
                Segment::Attr(a) => f.write_str(a)?,
                Segment::Any => f.write_str("*")?,
                Segment::Many => f.write_str("**")?,
            }
        }
        Ok(())
    }
}

impl PathPattern {
    fn step(&self, i: usize, path: &[Name], j: usize, prefix_ok: bool, rest_ok: bool) -> bool {
        if j == path.len() {
            return prefix_ok || self.segments[i..].iter().all(|s| *s == Segment::Many);
        }
        if i == self.segments.len() {
            return rest_ok;
        }
        match &self.segments[i] {
            Segment::Many => {
                self.step(i + 1, path, j, prefix_ok, rest_ok) || self.step(i, path, j + 1, prefix_ok, rest_ok)
            }
            Segment::Any => self.step(i + 1, path, j + 1, prefix_ok, rest_ok),
            Segment::Attr(a) => **a == *path[j] && self.step(i + 1, path, j + 1, prefix_ok, rest_ok),
        }
    }

    /// `path` is a prefix of (or equal to) some path the pattern matches.
    pub fn leads_to(&self, path: &[Name]) -> bool {
        self.step(0, path, 0, true, false)
    }

    /// Some prefix of `path` (possibly all of it) matches the pattern.
    pub fn covers(&self, path: &[Name]) -> bool {
        self.step(0, path, 0, false, true)
    }
}

/// What to expand and how far.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Control {
    /// Types expanded even where resolved mode would stop.
    pub always: BTreeSet<String>,
    /// Types never expanded.
    pub never: BTreeSet<String>,
    pub paths: Vec<PathPattern>,
    /// Maximal self-nesting depth per type.
    pub depth: BTreeMap<String, usize>,
    pub max_path_length: Option<usize>,
    pub mode: Mode,
    /// Total expansion steps before giving up with `bounded`.
    pub step_budget: usize,
    /// Largest structure an alternative may grow to.
    pub max_nodes: usize,
}

impl Default for Control {
    fn default() -> Self {
        Control {
            always: BTreeSet::new(),
            never: BTreeSet::new(),
            paths: Vec::new(),
            depth: BTreeMap::new(),
            max_path_length: Some(DEFAULT_MAX_PATH_LENGTH),
            mode: Mode::Complete,
            step_budget: DEFAULT_STEP_BUDGET,
            max_nodes: DEFAULT_MAX_NODES,
        }
    }
}

impl Control {
    /// Applies one line of a control block.
    pub fn apply_line(&mut self, line: &str) -> Result<(), ControlError> {
        let line = line.trim().trim_end_matches('.').trim();
        if line.is_empty() || line.starts_with(';') {
            return Ok(());
        }
        let bad = || ControlError::Line(line.to_string());
        let (key, rest) = line.split_once(char::is_whitespace).ok_or_else(bad)?;
        let rest = rest.trim();
        match key {
            "expand-always" => {
                self.always.extend(rest.split_whitespace().map(String::from));
            }
            "expand-never" => {
                self.never.extend(rest.split_whitespace().map(String::from));
            }
            "expand-path" => self.paths.push(rest.parse()?),
            "depth" => {
                let (t, n) = rest.split_once(char::is_whitespace).ok_or_else(bad)?;
                self.depth.insert(t.to_string(), n.trim().parse().map_err(|_| bad())?);
            }
            "max-path-length" => {
                self.max_path_length = match rest {
                    "none" => None,
                    n => Some(n.parse().map_err(|_| bad())?),
                }
            }
            "mode" => self.mode = rest.parse()?,
            "step-budget" => self.step_budget = rest.parse().map_err(|_| bad())?,
            "max-nodes" => self.max_nodes = rest.parse().map_err(|_| bad())?,
            _ => return Err(bad()),
        }
        if let Some(t) = self.always.intersection(&self.never).next() {
            return Err(ControlError::Conflict(t.clone()));
        }
        Ok(())
    }

    pub fn forced_path(&self, path: &[Name]) -> bool {
        self.paths.iter().any(|p| !p.negated && p.leads_to(path))
    }

    pub fn blocked_path(&self, path: &[Name]) -> bool {
        self.paths.iter().any(|p| p.negated && p.covers(path))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(s: &str) -> Vec<Name> {
        if s.is_empty() {
            Vec::new()
        } else {
            s.split('|').map(Name::from).collect()
        }
    }

    #[test]
    fn prefixes_lead_to_matches() {
        let p: PathPattern = "PATCH|PATCH|PATCH".parse().unwrap();
        assert!(p.leads_to(&path("")));
        assert!(p.leads_to(&path("PATCH|PATCH")));
        assert!(p.leads_to(&path("PATCH|PATCH|PATCH")));
        assert!(!p.leads_to(&path("PATCH|PATCH|PATCH|PATCH")));
        assert!(!p.leads_to(&path("FRONT")));
    }

    #[test]
    fn wildcards() {
        let p: PathPattern = "A|*|C".parse().unwrap();
        assert!(p.leads_to(&path("A|B|C")));
        assert!(!p.leads_to(&path("A|B|D")));
        let q: PathPattern = "SYNSEM|**|CAT".parse().unwrap();
        assert!(q.leads_to(&path("SYNSEM|LOC|X|CAT")));
        assert!(q.leads_to(&path("SYNSEM|LOC")));
        assert!(q.covers(&path("SYNSEM|CAT|HEAD")));
        assert!(!q.covers(&path("SYNSEM|LOC")));
    }

    #[test]
    fn negation_covers_subtrees() {
        let p: PathPattern = "!DTRS".parse().unwrap();
        assert!(p.negated);
        assert!(p.covers(&path("DTRS|HEAD")));
        assert!(!p.covers(&path("")));
        assert_eq!(p.to_string(), "!DTRS");
    }

    #[test]
    fn control_lines() {
        let mut c = Control::default();
        for l in ["expand-always subcat-list", "expand-never daughters", "expand-path SYNSEM|LOC|CAT", "depth append 3", "max-path-length 20", "mode resolved", "max-nodes 300"] {
            c.apply_line(l).unwrap();
        }
        assert!(c.always.contains("subcat-list"));
        assert_eq!(c.depth["append"], 3);
        assert_eq!(c.max_path_length, Some(20));
        assert_eq!(c.mode, Mode::Resolved);
        assert_eq!(c.max_nodes, 300);
        assert!(c.apply_line("expand-always daughters").is_err());
        assert!(c.apply_line("frobnicate x").is_err());
        assert!(c.apply_line("mode lazy").is_err());
    }
}
