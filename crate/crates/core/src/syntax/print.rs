//! Rendering of syntax trees back to source text.

use std::fmt::Write;

use super::ast::{DefinitionAst, KindHint, TypeExprAst};

fn prec(e: &TypeExprAst) -> u8 {
    match e {
        TypeExprAst::Disj(_) => 0,
        TypeExprAst::Xor(..) => 1,
        TypeExprAst::Conj(_) => 2,
        TypeExprAst::Neg(_) => 3,
        _ => 4,
    }
}

fn child(out: &mut String, e: &TypeExprAst, parent: u8, strict: bool) {
    let p = prec(e);
    if p < parent || (strict && p == parent) {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}

pub fn write_expr(out: &mut String, e: &TypeExprAst) {
    match e {
        TypeExprAst::TypeName(n) => out.push_str(n),
        TypeExprAst::Atom(a) => {
            let _ = write!(out, "{a}");
        }
        TypeExprAst::Coref(t) => {
            let _ = write!(out, "#{t}");
        }
        TypeExprAst::FeatureTerm(fs) => {
            out.push('[');
            for (i, (attr, v)) in fs.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(attr);
                out.push(' ');
                write_expr(out, v);
            }
            out.push(']');
        }
        TypeExprAst::ListTerm { elements, tail } => {
            out.push('<');
            for (i, x) in elements.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, x);
            }
            if let Some(t) = tail {
                out.push_str(" . ");
                write_expr(out, t);
            }
            out.push('>');
        }
        TypeExprAst::Conj(xs) | TypeExprAst::Disj(xs) => {
            let (p, sep) = if matches!(e, TypeExprAst::Conj(_)) { (2, " & ") } else { (0, " | ") };
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    out.push_str(sep);
                }
                child(out, x, p, true);
            }
        }
        TypeExprAst::Xor(a, b) => {
            child(out, a, 1, false);
            out.push_str(" (+) ");
            child(out, b, 1, true);
        }
        TypeExprAst::Neg(a) => {
            out.push('~');
            child(out, a, 3, false);
        }
        TypeExprAst::TemplateCall { name, args } => {
            out.push('@');
            out.push_str(name);
            if !args.is_empty() {
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_expr(out, a);
                }
                out.push(')');
            }
        }
    }
}

pub fn print_expr(e: &TypeExprAst) -> String {
    let mut s = String::new();
    write_expr(&mut s, e);
    s
}

pub fn print_definition(d: &DefinitionAst) -> String {
    match d {
        DefinitionAst::TypeDef { name, kind: KindHint::Avm, body } => format!("{name} := {}.", print_expr(body)),
        DefinitionAst::TypeDef { name, kind: KindHint::Sort, body } => {
            format!("sort {name} := {}.", print_expr(body))
        }
        DefinitionAst::InstanceDef { name, body } => format!("{name} := {}.", print_expr(body)),
        DefinitionAst::TemplateDef { name, params, body } => {
            format!("{name}({}) := {}.", params.join(", "), print_expr(body))
        }
        DefinitionAst::IncompatibilityDecl(names) => format!("bottom = {}.", names.join(" & ")),
        DefinitionAst::PartitionDecl { supertype, members } => format!("{supertype} :< {}.", members.join(" | ")),
    }
}
