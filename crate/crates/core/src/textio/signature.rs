//! ```text
//! file  := decl*
//! decl  := "type" ident opts "."
//! opts  := ("sub" "{" ident+ "}")? ("approp" "{" (ident ":" ident)+ "}")?
//! ```

use std::collections::HashMap;

use super::{Cursor, ParseError, SourceSpan, Tok};
use crate::hierarchy::{Approp, SignatureDecls, SubtypeDecl, TypeDecl};

pub fn parse_signature(text: &str) -> Result<SignatureDecls, ParseError> {
    let mut cur = Cursor::new(text)?;
    let mut decls = SignatureDecls::default();
    let mut declared: HashMap<String, SourceSpan> = HashMap::new();
    while *cur.peek() != Tok::End {
        match cur.peek() {
            Tok::Ident(kw) if kw == "type" => {
                cur.bump();
            }
            _ => return Err(cur.unexpected("`type`")),
        }
        let (name, span) = cur.ident("a type name")?;
        if let Some(first) = declared.insert(name.clone(), span) {
            return Err(ParseError::new(
                format!("type `{name}` already declared at {first}"),
                span,
            ));
        }
        decls.types.push(TypeDecl { name: name.clone(), span: Some(span) });

        if matches!(cur.peek(), Tok::Ident(kw) if kw == "sub") {
            cur.bump();
            cur.expect_punct('{')?;
            loop {
                let (specific, span) = cur.ident("a subtype name")?;
                decls.subtypes.push(SubtypeDecl { general: name.clone(), specific, span: Some(span) });
                if cur.eat_punct('}') {
                    break;
                }
            }
        }
        if matches!(cur.peek(), Tok::Ident(kw) if kw == "approp") {
            cur.bump();
            cur.expect_punct('{')?;
            loop {
                let (feature, span) = cur.ident("a feature name")?;
                cur.expect_punct(':')?;
                let (value, _) = cur.ident("a value type")?;
                decls.approp.push(Approp { ty: name.clone(), feature, value, span: Some(span) });
                if cur.eat_punct('}') {
                    break;
                }
            }
        }
        cur.expect_punct('.')?;
    }
    Ok(decls)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::{compile_signature, SignatureError};

    pub(crate) const RHO: &str = "\
type bool sub {+ -}.
type + .
type - .
type t sub {t' t''} approp {f:bool g:bool}.
type t' approp {f:+ g:+}.
type t'' approp {f:- g:-}.
";

    #[test]
    fn rho_source_compiles_to_the_encoding() {
        let decls = parse_signature(RHO).unwrap();
        assert_eq!(decls.types.len(), 6);
        assert_eq!(decls.subtypes.len(), 4);
        assert_eq!(decls.approp.len(), 6);
        let sig = compile_signature(&decls).unwrap();
        assert_eq!(sig, crate::test_fixtures::rho());
        let tp = sig.species_id("t'").unwrap();
        assert_eq!(sig.spec_approp(tp, sig.feature_id("f").unwrap()), Some(sig.species_set_of("+").unwrap()));
    }

    #[test]
    fn empty_input_parses_but_does_not_compile() {
        let decls = parse_signature("  % nothing here\n").unwrap();
        assert_eq!(decls, SignatureDecls::default());
        assert_eq!(compile_signature(&decls), Err(SignatureError::NoTypes));
    }

    #[test]
    fn self_subtype_parses() {
        let decls = parse_signature("type a sub {a}.").unwrap();
        assert_eq!(decls.subtypes.len(), 1);
        // reflexive edges are accepted by the compiler
        assert_eq!(compile_signature(&decls).unwrap().species_count(), 1);
    }

    #[test]
    fn syntax_errors_carry_spans() {
        let err = parse_signature("type a.\ntype b sub {}.").unwrap_err();
        assert_eq!((err.span.line, err.span.column), (2, 13));
        let err = parse_signature("type a approp {f bool}.").unwrap_err();
        assert!(err.message.contains("`:`"), "{err}");
        let err = parse_signature("typ a.").unwrap_err();
        assert_eq!(err.span.column, 1);
    }

    #[test]
    fn duplicate_type_is_a_parse_error() {
        let err = parse_signature("type a.\ntype a.").unwrap_err();
        assert!(err.message.contains("already declared at 1:6"), "{err}");
    }

    #[test]
    fn compile_errors_point_at_source() {
        let decls = parse_signature("type a approp {f:b}.").unwrap();
        let err = compile_signature(&decls).unwrap_err();
        assert_eq!(err.span().map(|s| (s.line, s.column)), Some((1, 16)));
    }
}
