use std::fmt;

use super::lexer::Pos;

/// Atomic values. The built-in sort of an atom is fixed by its lexical class.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Symbol(String),
    Str(String),
    Number(i64),
}

impl Atom {
    /// Name of the built-in sort this atom belongs to.
    pub fn builtin(&self) -> &'static str {
        match self {
            Atom::Symbol(_) => "symbol",
            Atom::Str(_) => "string",
            Atom::Number(_) => "number",
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Symbol(s) => write!(f, "'{s}"),
            Atom::Str(s) => write!(f, "{s:?}"),
            Atom::Number(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeExprAst {
    TypeName(String),
    Atom(Atom),
    Coref(String),
    FeatureTerm(Vec<(String, TypeExprAst)>),
    ListTerm { elements: Vec<TypeExprAst>, tail: Option<Box<TypeExprAst>> },
    Conj(Vec<TypeExprAst>),
    Disj(Vec<TypeExprAst>),
    Xor(Box<TypeExprAst>, Box<TypeExprAst>),
    Neg(Box<TypeExprAst>),
    TemplateCall { name: String, args: Vec<TypeExprAst> },
}

impl TypeExprAst {
    pub fn name(s: &str) -> Self {
        TypeExprAst::TypeName(s.to_string())
    }

    /// True if the expression mentions a feature term, list or coreference
    /// anywhere.
    pub fn has_features(&self) -> bool {
        match self {
            TypeExprAst::TypeName(_) | TypeExprAst::Atom(_) => false,
            TypeExprAst::Coref(_) | TypeExprAst::FeatureTerm(_) | TypeExprAst::ListTerm { .. } => true,
            TypeExprAst::Conj(xs) | TypeExprAst::Disj(xs) => xs.iter().any(Self::has_features),
            TypeExprAst::Xor(a, b) => a.has_features() || b.has_features(),
            TypeExprAst::Neg(a) => a.has_features(),
            TypeExprAst::TemplateCall { args, .. } => args.iter().any(Self::has_features),
        }
    }

    /// Calls `f` on every type name mentioned, including those inside
    /// feature values.
    pub fn for_each_type_name(&self, f: &mut impl FnMut(&str)) {
        match self {
            TypeExprAst::TypeName(n) => f(n),
            TypeExprAst::Atom(_) | TypeExprAst::Coref(_) => {}
            TypeExprAst::FeatureTerm(fs) => fs.iter().for_each(|(_, v)| v.for_each_type_name(f)),
            TypeExprAst::ListTerm { elements, tail } => {
                f(super::LIST_CONS);
                elements.iter().for_each(|e| e.for_each_type_name(f));
                match tail {
                    Some(t) => t.for_each_type_name(f),
                    None => f(super::LIST_NULL),
                }
            }
            TypeExprAst::Conj(xs) | TypeExprAst::Disj(xs) => xs.iter().for_each(|x| x.for_each_type_name(f)),
            TypeExprAst::Xor(a, b) => {
                a.for_each_type_name(f);
                b.for_each_type_name(f);
            }
            TypeExprAst::Neg(a) => a.for_each_type_name(f),
            TypeExprAst::TemplateCall { args, .. } => args.iter().for_each(|x| x.for_each_type_name(f)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KindHint {
    Avm,
    Sort,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DefinitionAst {
    TypeDef { name: String, kind: KindHint, body: TypeExprAst },
    InstanceDef { name: String, body: TypeExprAst },
    TemplateDef { name: String, params: Vec<String>, body: TypeExprAst },
    IncompatibilityDecl(Vec<String>),
    PartitionDecl { supertype: String, members: Vec<String> },
}

impl DefinitionAst {
    pub fn name(&self) -> Option<&str> {
        match self {
            DefinitionAst::TypeDef { name, .. }
            | DefinitionAst::InstanceDef { name, .. }
            | DefinitionAst::TemplateDef { name, .. } => Some(name),
            DefinitionAst::PartitionDecl { supertype, .. } => Some(supertype),
            DefinitionAst::IncompatibilityDecl(_) => None,
        }
    }
}

/// A definition together with where it started in the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Located<T> {
    pub pos: Pos,
    pub item: T,
}
