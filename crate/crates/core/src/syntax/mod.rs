//! Surface syntax: tokens, abstract syntax, parser, templates and printing.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod print;
pub mod template;

use thiserror::Error;

pub use ast::{Atom, DefinitionAst, KindHint, Located, TypeExprAst};
pub use lexer::{tokenize, Pos, Token, TokenKind};
pub use parser::{parse_definitions, parse_expr, parse_expr_list, parse_source};
pub use print::{print_definition, print_expr};
pub use template::{expand_templates, Template, Templates};

/// Name of the top type.
pub const TOP: &str = "*top*";
pub const LIST: &str = "list";
pub const LIST_CONS: &str = "cons";
pub const LIST_NULL: &str = "null-list";
pub const LIST_FIRST: &str = "FIRST";
pub const LIST_REST: &str = "REST";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("{pos}: {msg}")]
    Lex { pos: Pos, msg: String },
    #[error("{pos}: syntax error: found {found}, expected {expected}")]
    Parse { pos: Pos, found: String, expected: String },
    #[error("{pos}: duplicate attribute `{attr}` in feature term")]
    DuplicateAttribute { pos: Pos, attr: String },
    #[error("{pos}: negated feature terms are not supported; negation is restricted to type symbols")]
    NegatedFeatureTerm { pos: Pos },
    #[error("{pos}: unknown directive `%{name}.`")]
    Directive { pos: Pos, name: String },
    #[error("{pos}: {msg}")]
    Invalid { pos: Pos, msg: String },
    #[error("unknown template `{name}`")]
    UnknownTemplate { name: String },
    #[error("template `{name}` takes {expected} argument(s), {found} given")]
    TemplateArity { name: String, expected: usize, found: usize },
    #[error("recursive template use: {chain}")]
    TemplateRecursion { chain: String },
}

/// Rewrites list notation into FIRST/REST chains: `< >` becomes `null-list`
/// and a non-empty list becomes nested `cons` feature terms.
pub fn desugar_lists(e: &TypeExprAst) -> TypeExprAst {
    use TypeExprAst as E;
    match e {
        E::ListTerm { elements, tail } => {
            let mut acc = match tail {
                Some(t) => desugar_lists(t),
                None => E::name(LIST_NULL),
            };
            for el in elements.iter().rev() {
                acc = E::Conj(vec![
                    E::name(LIST_CONS),
                    E::FeatureTerm(vec![(LIST_FIRST.into(), desugar_lists(el)), (LIST_REST.into(), acc)]),
                ]);
            }
            acc
        }
        E::TypeName(_) | E::Atom(_) | E::Coref(_) => e.clone(),
        E::FeatureTerm(fs) => E::FeatureTerm(fs.iter().map(|(a, v)| (a.clone(), desugar_lists(v))).collect()),
        E::Conj(xs) => E::Conj(xs.iter().map(desugar_lists).collect()),
        E::Disj(xs) => E::Disj(xs.iter().map(desugar_lists).collect()),
        E::Xor(a, b) => E::Xor(Box::new(desugar_lists(a)), Box::new(desugar_lists(b))),
        E::Neg(a) => E::Neg(Box::new(desugar_lists(a))),
        E::TemplateCall { name, args } => {
            E::TemplateCall { name: name.clone(), args: args.iter().map(desugar_lists).collect() }
        }
    }
}
