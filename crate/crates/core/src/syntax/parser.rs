//! Recursive-descent parser. Precedence, tightest first: `~`, `&`, `(+)`, `|`.

use std::collections::HashSet;

use super::ast::{Atom, DefinitionAst, KindHint, Located, TypeExprAst};
use super::lexer::{tokenize, Pos, Token, TokenKind};
use super::SyntaxError;

pub struct Parser<'t> {
    tokens: &'t [Token],
    at: usize,
    instances: bool,
}

impl<'t> Parser<'t> {
    pub fn new(tokens: &'t [Token]) -> Self {
        Parser { tokens, at: 0, instances: false }
    }

    fn peek(&self) -> Option<&TokenKind> {
        self.tokens.get(self.at).map(|t| &t.kind)
    }

    fn peek_at(&self, n: usize) -> Option<&TokenKind> {
        self.tokens.get(self.at + n).map(|t| &t.kind)
    }

    fn pos(&self) -> Pos {
        match self.tokens.get(self.at) {
            Some(t) => t.pos,
            None => self.tokens.last().map(|t| Pos { line: t.pos.line, col: t.pos.col + 1 }).unwrap_or_default(),
        }
    }

    fn bump(&mut self) -> Option<&'t Token> {
        let t = self.tokens.get(self.at);
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> SyntaxError {
        SyntaxError::Parse {
            pos: self.pos(),
            found: self.peek().map(|k| k.to_string()).unwrap_or_else(|| "end of input".into()),
            expected: expected.join(", "),
        }
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> Result<(), SyntaxError> {
        if self.peek() == Some(&kind) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[what]))
        }
    }

    fn expect_sym(&mut self) -> Result<String, SyntaxError> {
        match self.peek() {
            Some(TokenKind::Sym(s)) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.error(&["symbol"])),
        }
    }

    pub fn at_end(&self) -> bool {
        self.at >= self.tokens.len()
    }

    /// Parses every definition up to the end of the token stream.
    pub fn definitions(&mut self) -> Result<Vec<Located<DefinitionAst>>, SyntaxError> {
        let mut out = Vec::new();
        while !self.at_end() {
            if let Some(TokenKind::Directive(d)) = self.peek() {
                let pos = self.pos();
                match d.as_str() {
                    "instances" => self.instances = true,
                    "types" => self.instances = false,
                    other => return Err(SyntaxError::Directive { pos, name: other.to_string() }),
                }
                self.bump();
                continue;
            }
            out.push(self.definition()?);
        }
        Ok(out)
    }

    fn definition(&mut self) -> Result<Located<DefinitionAst>, SyntaxError> {
        let pos = self.pos();
        let item = match (self.peek(), self.peek_at(1)) {
            (Some(TokenKind::Sym(s)), Some(TokenKind::Equals)) if s == "bottom" => {
                self.bump();
                self.bump();
                let mut members = vec![self.expect_sym()?];
                while self.peek() == Some(&TokenKind::And) {
                    self.bump();
                    members.push(self.expect_sym()?);
                }
                if members.len() < 2 {
                    return Err(SyntaxError::Invalid { pos, msg: "an incompatibility needs at least two types".into() });
                }
                DefinitionAst::IncompatibilityDecl(members)
            }
            (Some(TokenKind::Sym(s)), Some(TokenKind::Sym(_))) if s == "sort" => {
                self.bump();
                let name = self.expect_sym()?;
                let body = if self.peek() == Some(&TokenKind::Define) {
                    self.bump();
                    self.expr()?
                } else {
                    TypeExprAst::name(super::TOP)
                };
                DefinitionAst::TypeDef { name, kind: KindHint::Sort, body }
            }
            (Some(TokenKind::Sym(_)), Some(TokenKind::PartitionOp)) => {
                let supertype = self.expect_sym()?;
                self.bump();
                let mut members = vec![self.expect_sym()?];
                while self.peek() == Some(&TokenKind::Or) {
                    self.bump();
                    members.push(self.expect_sym()?);
                }
                if members.len() < 2 {
                    return Err(SyntaxError::Invalid { pos, msg: "a partition needs at least two members".into() });
                }
                let mut seen = HashSet::new();
                for m in &members {
                    if !seen.insert(m) {
                        return Err(SyntaxError::Invalid { pos, msg: format!("partition member `{m}` repeated") });
                    }
                }
                DefinitionAst::PartitionDecl { supertype, members }
            }
            (Some(TokenKind::Sym(_)), Some(TokenKind::LParen)) => {
                let name = self.expect_sym()?;
                self.bump();
                let mut params = Vec::new();
                if self.peek() != Some(&TokenKind::RParen) {
                    params.push(self.expect_sym()?);
                    while self.peek() == Some(&TokenKind::Comma) {
                        self.bump();
                        params.push(self.expect_sym()?);
                    }
                }
                self.expect(TokenKind::RParen, "`)`")?;
                let mut seen = HashSet::new();
                for p in &params {
                    if !seen.insert(p) {
                        return Err(SyntaxError::Invalid { pos, msg: format!("template parameter `{p}` repeated") });
                    }
                }
                self.expect(TokenKind::Define, "`:=`")?;
                let body = self.expr()?;
                DefinitionAst::TemplateDef { name, params, body }
            }
            (Some(TokenKind::Sym(_)), _) => {
                let name = self.expect_sym()?;
                self.expect(TokenKind::Define, "`:=`")?;
                let body = self.expr()?;
                if self.instances {
                    DefinitionAst::InstanceDef { name, body }
                } else {
                    DefinitionAst::TypeDef { name, kind: KindHint::Avm, body }
                }
            }
            _ => return Err(self.error(&["definition"])),
        };
        self.expect(TokenKind::Dot, "`.`")?;
        Ok(Located { pos, item })
    }

    /// Parses one expression (lowest precedence: disjunction).
    pub fn expr(&mut self) -> Result<TypeExprAst, SyntaxError> {
        let first = self.xor()?;
        if self.peek() != Some(&TokenKind::Or) {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.peek() == Some(&TokenKind::Or) {
            self.bump();
            items.push(self.xor()?);
        }
        Ok(TypeExprAst::Disj(items))
    }

    fn xor(&mut self) -> Result<TypeExprAst, SyntaxError> {
        let mut lhs = self.conj()?;
        while self.peek() == Some(&TokenKind::Xor) {
            let pos = self.pos();
            self.bump();
            let rhs = self.conj()?;
            for side in [&lhs, &rhs] {
                if matches!(side, TypeExprAst::Coref(_)) {
                    return Err(SyntaxError::Invalid { pos, msg: "`(+)` cannot take a coreference tag as operand".into() });
                }
            }
            lhs = TypeExprAst::Xor(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> Result<TypeExprAst, SyntaxError> {
        let first = self.unary()?;
        if self.peek() != Some(&TokenKind::And) {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.peek() == Some(&TokenKind::And) {
            self.bump();
            items.push(self.unary()?);
        }
        Ok(TypeExprAst::Conj(items))
    }

    fn unary(&mut self) -> Result<TypeExprAst, SyntaxError> {
        if self.peek() == Some(&TokenKind::Not) {
            let pos = self.pos();
            self.bump();
            let inner = self.unary()?;
            if inner.has_features() {
                return Err(SyntaxError::NegatedFeatureTerm { pos });
            }
            if has_atom(&inner) {
                return Err(SyntaxError::Invalid { pos, msg: "negation applies to type symbols only, not atoms".into() });
            }
            return Ok(TypeExprAst::Neg(Box::new(inner)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<TypeExprAst, SyntaxError> {
        let pos = self.pos();
        let Some(tok) = self.bump() else {
            return Err(self.error(&["expression"]));
        };
        Ok(match &tok.kind {
            TokenKind::Sym(s) => TypeExprAst::TypeName(s.clone()),
            TokenKind::QuotedSym(s) => TypeExprAst::Atom(Atom::Symbol(s.clone())),
            TokenKind::Str(s) => TypeExprAst::Atom(Atom::Str(s.clone())),
            TokenKind::Number(n) => TypeExprAst::Atom(Atom::Number(*n)),
            TokenKind::Coref(c) => TypeExprAst::Coref(c.clone()),
            TokenKind::LParen => {
                let e = self.expr()?;
                self.expect(TokenKind::RParen, "`)`")?;
                e
            }
            TokenKind::LBracket => {
                let mut feats: Vec<(String, TypeExprAst)> = Vec::new();
                if self.peek() != Some(&TokenKind::RBracket) {
                    loop {
                        let apos = self.pos();
                        let attr = match self.peek() {
                            Some(TokenKind::Sym(s)) => s.clone(),
                            _ => return Err(self.error(&["attribute"])),
                        };
                        self.bump();
                        if feats.iter().any(|(a, _)| *a == attr) {
                            return Err(SyntaxError::DuplicateAttribute { pos: apos, attr });
                        }
                        let value = self.expr()?;
                        feats.push((attr, value));
                        if self.peek() == Some(&TokenKind::Comma) {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(TokenKind::RBracket, "`]` or `,`")?;
                TypeExprAst::FeatureTerm(feats)
            }
            TokenKind::LAngle => {
                let mut elements = Vec::new();
                let mut tail = None;
                if self.peek() != Some(&TokenKind::RAngle) {
                    loop {
                        elements.push(self.expr()?);
                        match self.peek() {
                            Some(TokenKind::Comma) => {
                                self.bump();
                            }
                            Some(TokenKind::Dot) => {
                                self.bump();
                                tail = Some(Box::new(self.expr()?));
                                break;
                            }
                            _ => break,
                        }
                    }
                }
                self.expect(TokenKind::RAngle, "`>`, `,` or `.`")?;
                TypeExprAst::ListTerm { elements, tail }
            }
            TokenKind::TemplateRef(name) => {
                let name = name.clone();
                let mut args = Vec::new();
                if self.peek() == Some(&TokenKind::LParen) {
                    self.bump();
                    if self.peek() != Some(&TokenKind::RParen) {
                        args.push(self.expr()?);
                        while self.peek() == Some(&TokenKind::Comma) {
                            self.bump();
                            args.push(self.expr()?);
                        }
                    }
                    self.expect(TokenKind::RParen, "`)`")?;
                }
                TypeExprAst::TemplateCall { name, args }
            }
            _ => {
                self.at -= 1;
                let _ = pos;
                return Err(self.error(&["expression"]));
            }
        })
    }
}

fn has_atom(e: &TypeExprAst) -> bool {
    match e {
        TypeExprAst::Atom(_) => true,
        TypeExprAst::Conj(xs) | TypeExprAst::Disj(xs) => xs.iter().any(has_atom),
        TypeExprAst::Xor(a, b) => has_atom(a) || has_atom(b),
        TypeExprAst::Neg(a) => has_atom(a),
        _ => false,
    }
}

/// Parses a sequence of definitions from tokens.
pub fn parse_definitions(tokens: &[Token]) -> Result<Vec<Located<DefinitionAst>>, SyntaxError> {
    Parser::new(tokens).definitions()
}

/// Convenience: tokenize and parse a source text.
pub fn parse_source(source: &str) -> Result<Vec<Located<DefinitionAst>>, SyntaxError> {
    parse_definitions(&tokenize(source)?)
}

/// Parses a single expression covering the whole input.
pub fn parse_expr(source: &str) -> Result<TypeExprAst, SyntaxError> {
    let tokens = tokenize(source)?;
    let mut p = Parser::new(&tokens);
    let e = p.expr()?;
    if !p.at_end() {
        return Err(p.error(&["end of expression"]));
    }
    Ok(e)
}

/// Parses a comma-separated list of expressions (commas nested inside
/// brackets belong to the inner terms).
pub fn parse_expr_list(source: &str) -> Result<Vec<TypeExprAst>, SyntaxError> {
    let tokens = tokenize(source)?;
    let mut p = Parser::new(&tokens);
    let mut out = Vec::new();
    if p.at_end() {
        return Ok(out);
    }
    out.push(p.expr()?);
    while p.peek() == Some(&TokenKind::Comma) {
        p.bump();
        out.push(p.expr()?);
    }
    if !p.at_end() {
        return Err(p.error(&["`,`", "end of input"]));
    }
    Ok(out)
}
