//! Symbolic simplification of type expressions to sorted CNF/DNF.

mod memo;
mod normalize;
pub mod order;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::syntax::Atom;

pub use memo::{MemoStats, MemoTable};
pub use normalize::{normalize, normalize_with_budget, simplify, DEFAULT_BUDGET};
pub use order::compare_nf;

/// Interned-ish type name.
pub type Name = Arc<str>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Literal {
    Type(Name),
    /// Negated type symbol. Negation never applies to atoms or feature terms.
    Neg(Name),
    /// Opaque handle for a feature term embedded in an expression.
    Feature(u32),
    Atom(Atom),
}

impl Literal {
    pub fn ty(name: &str) -> Self {
        Literal::Type(Name::from(name))
    }

    pub fn neg(name: &str) -> Self {
        Literal::Neg(Name::from(name))
    }

    pub fn complement(&self) -> Option<Literal> {
        match self {
            Literal::Type(n) => Some(Literal::Neg(n.clone())),
            Literal::Neg(n) => Some(Literal::Type(n.clone())),
            _ => None,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Type(n) => f.write_str(n),
            Literal::Neg(n) => write!(f, "~{n}"),
            Literal::Feature(i) => write!(f, "$fs{i}"),
            Literal::Atom(a) => write!(f, "{a}"),
        }
    }
}

/// Arbitrary boolean type expression; input to the simplifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Top,
    Bottom,
    Lit(Literal),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Xor(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn ty(name: &str) -> Self {
        Expr::Lit(Literal::ty(name))
    }

    pub fn not(e: Expr) -> Self {
        Expr::Not(Box::new(e))
    }

    pub fn xor(a: Expr, b: Expr) -> Self {
        Expr::Xor(Box::new(a), Box::new(b))
    }

    /// Number of literal occurrences.
    pub fn literal_count(&self) -> usize {
        match self {
            Expr::Top | Expr::Bottom => 0,
            Expr::Lit(_) => 1,
            Expr::Not(e) => e.literal_count(),
            Expr::And(xs) | Expr::Or(xs) => xs.iter().map(Expr::literal_count).sum(),
            Expr::Xor(a, b) => a.literal_count() + b.literal_count(),
        }
    }

    /// Canonical text with commutative operands sorted; equal for
    /// expressions that differ only by operand order.
    pub fn canonical_key(&self) -> String {
        match self {
            Expr::Top => "T".into(),
            Expr::Bottom => "F".into(),
            Expr::Lit(l) => l.to_string(),
            Expr::Not(e) => format!("~({})", e.canonical_key()),
            Expr::And(xs) | Expr::Or(xs) => {
                let mut keys: Vec<String> = xs.iter().map(Expr::canonical_key).collect();
                keys.sort();
                let op = if matches!(self, Expr::And(_)) { "&" } else { "|" };
                format!("{op}({})", keys.join(","))
            }
            Expr::Xor(a, b) => {
                let mut keys = [a.canonical_key(), b.canonical_key()];
                keys.sort();
                format!("+({},{})", keys[0], keys[1])
            }
        }
    }
}

/// Term view of a normal form, used for ordering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NfTerm {
    Lit(Literal),
    And(Vec<NfTerm>),
    Or(Vec<NfTerm>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Cnf,
    Dnf,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::Cnf => "cnf",
            Target::Dnf => "dnf",
        })
    }
}

/// A sorted normal form. For CNF the clauses are disjunctions joined by
/// conjunction; for DNF they are conjunctions joined by disjunction. Every
/// clause is nonempty and sorted strictly ascending, and so is the clause
/// sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NormalForm {
    Top,
    Bottom,
    Clauses { target: Target, clauses: Vec<Vec<Literal>> },
}

impl NormalForm {
    pub fn literal(l: Literal) -> Self {
        NormalForm::Clauses { target: Target::Dnf, clauses: vec![vec![l]] }
    }

    pub fn is_top(&self) -> bool {
        matches!(self, NormalForm::Top)
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, NormalForm::Bottom)
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            NormalForm::Clauses { clauses, .. } if clauses.len() == 1 && clauses[0].len() == 1 => Some(&clauses[0][0]),
            _ => None,
        }
    }

    pub fn literal_count(&self) -> usize {
        match self {
            NormalForm::Top | NormalForm::Bottom => 0,
            NormalForm::Clauses { clauses, .. } => clauses.iter().map(Vec::len).sum(),
        }
    }

    /// The disjuncts of a DNF (a literal counts as one single-literal term).
    /// `Top` yields one empty term and `Bottom` none.
    pub fn dnf_terms(&self) -> Vec<Vec<Literal>> {
        match self {
            NormalForm::Top => vec![vec![]],
            NormalForm::Bottom => vec![],
            NormalForm::Clauses { target: Target::Dnf, clauses } => clauses.clone(),
            NormalForm::Clauses { target: Target::Cnf, clauses } if clauses.iter().all(|c| c.len() == 1) => {
                vec![clauses.iter().map(|c| c[0].clone()).collect()]
            }
            NormalForm::Clauses { target: Target::Cnf, clauses } if clauses.len() == 1 => {
                clauses[0].iter().map(|l| vec![l.clone()]).collect()
            }
            other => normalize(&other.to_expr(), Target::Dnf, None)
                .map(|nf| nf.dnf_terms())
                .unwrap_or_else(|_| vec![vec![]]),
        }
    }

    pub fn to_expr(&self) -> Expr {
        match self {
            NormalForm::Top => Expr::Top,
            NormalForm::Bottom => Expr::Bottom,
            NormalForm::Clauses { target, clauses } => {
                let inner = |c: &Vec<Literal>| {
                    if c.len() == 1 {
                        Expr::Lit(c[0].clone())
                    } else {
                        let xs = c.iter().cloned().map(Expr::Lit).collect();
                        match target {
                            Target::Cnf => Expr::Or(xs),
                            Target::Dnf => Expr::And(xs),
                        }
                    }
                };
                if clauses.len() == 1 {
                    return inner(&clauses[0]);
                }
                let xs = clauses.iter().map(inner).collect();
                match target {
                    Target::Cnf => Expr::And(xs),
                    Target::Dnf => Expr::Or(xs),
                }
            }
        }
    }

    pub fn to_term(&self) -> Option<NfTerm> {
        match self {
            NormalForm::Top | NormalForm::Bottom => None,
            NormalForm::Clauses { target, clauses } => {
                let inner = |c: &Vec<Literal>| {
                    if c.len() == 1 {
                        NfTerm::Lit(c[0].clone())
                    } else {
                        let xs = c.iter().cloned().map(NfTerm::Lit).collect();
                        match target {
                            Target::Cnf => NfTerm::Or(xs),
                            Target::Dnf => NfTerm::And(xs),
                        }
                    }
                };
                if clauses.len() == 1 {
                    return Some(inner(&clauses[0]));
                }
                let xs = clauses.iter().map(inner).collect();
                Some(match target {
                    Target::Cnf => NfTerm::And(xs),
                    Target::Dnf => NfTerm::Or(xs),
                })
            }
        }
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormalForm::Top => f.write_str(crate::syntax::TOP),
            NormalForm::Bottom => f.write_str("*bottom*"),
            NormalForm::Clauses { target, clauses } => {
                let (outer, inner) = match target {
                    Target::Cnf => (" & ", " | "),
                    Target::Dnf => (" | ", " & "),
                };
                for (i, c) in clauses.iter().enumerate() {
                    if i > 0 {
                        f.write_str(outer)?;
                    }
                    let paren = *target == Target::Cnf && c.len() > 1 && clauses.len() > 1;
                    if paren {
                        f.write_str("(")?;
                    }
                    for (j, l) in c.iter().enumerate() {
                        if j > 0 {
                            f.write_str(inner)?;
                        }
                        write!(f, "{l}")?;
                    }
                    if paren {
                        f.write_str(")")?;
                    }
                }
                Ok(())
            }
        }
    }
}

/// Outcome of a hierarchy-aware meet of two literals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Meet {
    Bottom,
    /// The conjunction equals the disjunction of these literals (one
    /// literal in the common case).
    Alternatives(Vec<Literal>),
}

/// Semantic information the simplifier may consult.
pub trait TypeOracle {
    /// `general` subsumes `specific` (specific ⪯ general).
    fn subsumes(&self, general: &str, specific: &str) -> bool;
    /// The conjunction of all given types denotes the empty set.
    fn incompatible(&self, types: &[&str]) -> bool;
    /// Typed meet of two literals; `None` leaves the conjunction symbolic.
    fn meet(&self, _a: &Literal, _b: &Literal) -> Option<Meet> {
        None
    }
    /// Distinguishes oracles in memo keys.
    fn fingerprint(&self) -> u64 {
        1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalizeError {
    #[error("normal form too large: exceeded the budget of {budget} literals")]
    FormTooLarge { budget: usize },
    #[error("negation applies to type symbols only, found `~{0}`")]
    InvalidNegation(String),
}
