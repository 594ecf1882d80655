//! Parameterized template (macro) expansion.

use std::collections::HashMap;

use super::ast::{DefinitionAst, TypeExprAst};
use super::SyntaxError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub params: Vec<String>,
    pub body: TypeExprAst,
}

/// Template table keyed by name.
pub type Templates = HashMap<String, Template>;

struct Expander<'a> {
    templates: &'a Templates,
    stack: Vec<String>,
    fresh: usize,
}

impl Expander<'_> {
    fn expand(&mut self, e: &TypeExprAst) -> Result<TypeExprAst, SyntaxError> {
        Ok(match e {
            TypeExprAst::TemplateCall { name, args } => {
                let tpl = self
                    .templates
                    .get(name)
                    .ok_or_else(|| SyntaxError::UnknownTemplate { name: name.clone() })?;
                if tpl.params.len() != args.len() {
                    return Err(SyntaxError::TemplateArity {
                        name: name.clone(),
                        expected: tpl.params.len(),
                        found: args.len(),
                    });
                }
                if self.stack.contains(name) {
                    let mut chain = self.stack.clone();
                    chain.push(name.clone());
                    return Err(SyntaxError::TemplateRecursion { chain: chain.join(" -> ") });
                }
                let args = args.iter().map(|a| self.expand(a)).collect::<Result<Vec<_>, _>>()?;
                self.fresh += 1;
                let suffix = format!("${}", self.fresh);
                let renamed = rename_corefs(&tpl.body, &suffix);
                let bindings: HashMap<&str, &TypeExprAst> =
                    tpl.params.iter().map(String::as_str).zip(args.iter()).collect();
                let substituted = substitute(&renamed, &bindings);
                self.stack.push(name.clone());
                let out = self.expand(&substituted);
                self.stack.pop();
                out?
            }
            TypeExprAst::TypeName(_) | TypeExprAst::Atom(_) | TypeExprAst::Coref(_) => e.clone(),
            TypeExprAst::FeatureTerm(fs) => TypeExprAst::FeatureTerm(
                fs.iter().map(|(a, v)| Ok((a.clone(), self.expand(v)?))).collect::<Result<_, SyntaxError>>()?,
            ),
            TypeExprAst::ListTerm { elements, tail } => TypeExprAst::ListTerm {
                elements: elements.iter().map(|x| self.expand(x)).collect::<Result<_, _>>()?,
                tail: match tail {
                    Some(t) => Some(Box::new(self.expand(t)?)),
                    None => None,
                },
            },
            TypeExprAst::Conj(xs) => TypeExprAst::Conj(xs.iter().map(|x| self.expand(x)).collect::<Result<_, _>>()?),
            TypeExprAst::Disj(xs) => TypeExprAst::Disj(xs.iter().map(|x| self.expand(x)).collect::<Result<_, _>>()?),
            TypeExprAst::Xor(a, b) => TypeExprAst::Xor(Box::new(self.expand(a)?), Box::new(self.expand(b)?)),
            TypeExprAst::Neg(a) => TypeExprAst::Neg(Box::new(self.expand(a)?)),
        })
    }
}

fn map_children(e: &TypeExprAst, f: &mut impl FnMut(&TypeExprAst) -> TypeExprAst) -> TypeExprAst {
    match e {
        TypeExprAst::TypeName(_) | TypeExprAst::Atom(_) | TypeExprAst::Coref(_) => e.clone(),
        TypeExprAst::FeatureTerm(fs) => TypeExprAst::FeatureTerm(fs.iter().map(|(a, v)| (a.clone(), f(v))).collect()),
        TypeExprAst::ListTerm { elements, tail } => TypeExprAst::ListTerm {
            elements: elements.iter().map(&mut *f).collect(),
            tail: tail.as_ref().map(|t| Box::new(f(t))),
        },
        TypeExprAst::Conj(xs) => TypeExprAst::Conj(xs.iter().map(&mut *f).collect()),
        TypeExprAst::Disj(xs) => TypeExprAst::Disj(xs.iter().map(&mut *f).collect()),
        TypeExprAst::Xor(a, b) => TypeExprAst::Xor(Box::new(f(a)), Box::new(f(b))),
        TypeExprAst::Neg(a) => TypeExprAst::Neg(Box::new(f(a))),
        TypeExprAst::TemplateCall { name, args } => {
            TypeExprAst::TemplateCall { name: name.clone(), args: args.iter().map(&mut *f).collect() }
        }
    }
}

fn rename_corefs(e: &TypeExprAst, suffix: &str) -> TypeExprAst {
    match e {
        TypeExprAst::Coref(tag) => TypeExprAst::Coref(format!("{tag}{suffix}")),
        _ => map_children(e, &mut |c| rename_corefs(c, suffix)),
    }
}

fn substitute(e: &TypeExprAst, bindings: &HashMap<&str, &TypeExprAst>) -> TypeExprAst {
    match e {
        TypeExprAst::TypeName(n) => match bindings.get(n.as_str()) {
            Some(arg) => (*arg).clone(),
            None => e.clone(),
        },
        _ => map_children(e, &mut |c| substitute(c, bindings)),
    }
}

/// Replaces every template call in `e`.
pub fn expand_expr(e: &TypeExprAst, templates: &Templates) -> Result<TypeExprAst, SyntaxError> {
    Expander { templates, stack: Vec::new(), fresh: 0 }.expand(e)
}

/// Replaces every template call in the definition's body. Template
/// definitions themselves are returned unchanged.
pub fn expand_templates(def: &DefinitionAst, templates: &Templates) -> Result<DefinitionAst, SyntaxError> {
    Ok(match def {
        DefinitionAst::TypeDef { name, kind, body } => {
            DefinitionAst::TypeDef { name: name.clone(), kind: *kind, body: expand_expr(body, templates)? }
        }
        DefinitionAst::InstanceDef { name, body } => {
            DefinitionAst::InstanceDef { name: name.clone(), body: expand_expr(body, templates)? }
        }
        other => other.clone(),
    })
}

/// Checks that no template calls itself, directly or transitively.
pub fn check_templates(templates: &Templates) -> Result<(), SyntaxError> {
    let mut names: Vec<&String> = templates.keys().collect();
    names.sort();
    for name in names {
        let tpl = &templates[name];
        let call = TypeExprAst::TemplateCall {
            name: name.clone(),
            args: tpl.params.iter().map(|p| TypeExprAst::TypeName(p.clone())).collect(),
        };
        expand_expr(&call, templates)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parser::parse_expr;

    fn table(src: &[(&str, &[&str], &str)]) -> Templates {
        src.iter()
            .map(|(n, ps, b)| {
                (n.to_string(), Template { params: ps.iter().map(|p| p.to_string()).collect(), body: parse_expr(b).unwrap() })
            })
            .collect()
    }

    #[test]
    fn substitutes_parameter() {
        let t = table(&[("agr", &["N"], "[NUM N]")]);
        let out = expand_expr(&parse_expr("@agr(sg)").unwrap(), &t).unwrap();
        assert_eq!(out, parse_expr("[NUM sg]").unwrap());
    }

    #[test]
    fn identity_without_calls() {
        let e = parse_expr("a & [F b]").unwrap();
        assert_eq!(expand_expr(&e, &Templates::new()).unwrap(), e);
    }

    #[test]
    fn arity_mismatch() {
        let t = table(&[("agr", &["N"], "[NUM N]")]);
        let err = expand_expr(&parse_expr("@agr(sg, pl)").unwrap(), &t).unwrap_err();
        assert!(matches!(err, SyntaxError::TemplateArity { expected: 1, found: 2, .. }));
    }

    #[test]
    fn unknown_template() {
        let err = expand_expr(&parse_expr("@nope").unwrap(), &Templates::new()).unwrap_err();
        assert!(matches!(err, SyntaxError::UnknownTemplate { .. }));
    }

    #[test]
    fn recursion_rejected() {
        let t = table(&[("a", &[], "[F @b]"), ("b", &[], "[G @a]")]);
        assert!(matches!(check_templates(&t), Err(SyntaxError::TemplateRecursion { .. })));
    }

    #[test]
    fn corefs_are_fresh_per_instantiation() {
        let t = table(&[("share", &[], "[A #x, B #x]")]);
        let out = expand_expr(&parse_expr("[L @share, R @share, S #x]").unwrap(), &t).unwrap();
        let TypeExprAst::FeatureTerm(fs) = &out else { panic!() };
        assert_ne!(fs[0].1, fs[1].1);
        assert_eq!(fs[2].1, TypeExprAst::Coref("x".into()));
    }

    #[test]
    fn idempotent_on_output() {
        let t = table(&[("agr", &["N"], "[NUM N, P #p]")]);
        let once = expand_expr(&parse_expr("x & @agr(@agr(sg))").unwrap(), &t).unwrap();
        assert_eq!(expand_expr(&once, &t).unwrap(), once);
    }
}
