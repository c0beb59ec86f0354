//! Prefix-notation parser for concepts, roles and features.

use super::{Concept, Feature, FeatureError, Role};

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

const CONCEPT_HEADS: &[&str] = &["and", "or", "not", "diff", "some", "all", "const"];
const ROLE_HEADS: &[&str] = &["rand", "ror", "rnot", "inv", "comp", "plus", "star", "restrict", "id"];

impl<'a> Parser<'a> {
    fn err(&self, message: impl Into<String>) -> FeatureError {
        FeatureError::Parse { offset: self.pos, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while self.text[self.pos..].starts_with(char::is_whitespace) {
            self.pos += self.text[self.pos..].chars().next().unwrap().len_utf8();
        }
    }

    fn ident(&mut self) -> Result<&'a str, FeatureError> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let len = rest.find(|c: char| !(c.is_alphanumeric() || c == '_' || c == '-')).unwrap_or(rest.len());
        if len == 0 {
            return Err(self.err("expected an identifier"));
        }
        self.pos += len;
        Ok(&rest[..len])
    }

    fn expect(&mut self, c: char) -> Result<(), FeatureError> {
        self.skip_ws();
        if self.text[self.pos..].starts_with(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn peek_is(&mut self, c: char) -> bool {
        self.skip_ws();
        self.text[self.pos..].starts_with(c)
    }

    fn concept(&mut self) -> Result<Concept, FeatureError> {
        let start = self.pos;
        let head = self.ident()?;
        if !self.peek_is('(') {
            return match head {
                "top" => Ok(Concept::Top),
                "bot" => Ok(Concept::Bot),
                "univ" => Err(FeatureError::Sort("`univ` is a role, a concept was expected".into())),
                _ => {
                    let (pred, idx) = split_indices(head, 1).ok_or_else(|| {
                        if split_indices(head, 2).is_some() {
                            FeatureError::Sort(format!("`{head}` is a role, a concept was expected"))
                        } else {
                            FeatureError::Parse { offset: start, message: format!("`{head}` is not a primitive concept") }
                        }
                    })?;
                    Ok(Concept::Prim(pred.into(), idx[0]))
                }
            };
        }
        if ROLE_HEADS.contains(&head) {
            return Err(FeatureError::Sort(format!("`{head}` builds a role, a concept was expected")));
        }
        self.expect('(')?;
        let c = match head {
            "and" | "or" | "diff" => {
                let a = Box::new(self.concept()?);
                self.expect(',')?;
                let b = Box::new(self.concept()?);
                match head {
                    "and" => Concept::And(a, b),
                    "or" => Concept::Or(a, b),
                    _ => Concept::Diff(a, b),
                }
            }
            "not" => Concept::Not(Box::new(self.concept()?)),
            "some" | "all" => {
                let r = Box::new(self.role()?);
                self.expect(',')?;
                let c = Box::new(self.concept()?);
                if head == "some" {
                    Concept::Some(r, c)
                } else {
                    Concept::All(r, c)
                }
            }
            "const" => Concept::Const(self.ident()?.into()),
            _ => return Err(FeatureError::Parse { offset: start, message: format!("unknown concept constructor `{head}`") }),
        };
        self.expect(')')?;
        Ok(c)
    }

    fn role(&mut self) -> Result<Role, FeatureError> {
        let start = self.pos;
        let head = self.ident()?;
        if !self.peek_is('(') {
            return match head {
                "univ" => Ok(Role::Univ),
                "top" | "bot" => Err(FeatureError::Sort(format!("`{head}` is a concept, a role was expected"))),
                _ => {
                    let (pred, idx) = split_indices(head, 2).ok_or_else(|| {
                        if split_indices(head, 1).is_some() {
                            FeatureError::Sort(format!("`{head}` is a concept, a role was expected"))
                        } else {
                            FeatureError::Parse { offset: start, message: format!("`{head}` is not a primitive role") }
                        }
                    })?;
                    Ok(Role::Prim(pred.into(), idx[0], idx[1]))
                }
            };
        }
        if CONCEPT_HEADS.contains(&head) {
            return Err(FeatureError::Sort(format!("`{head}` builds a concept, a role was expected")));
        }
        self.expect('(')?;
        let r = match head {
            "rand" | "ror" | "comp" => {
                let a = Box::new(self.role()?);
                self.expect(',')?;
                let b = Box::new(self.role()?);
                match head {
                    "rand" => Role::And(a, b),
                    "ror" => Role::Or(a, b),
                    _ => Role::Comp(a, b),
                }
            }
            "rnot" => Role::Not(Box::new(self.role()?)),
            "inv" => Role::Inv(Box::new(self.role()?)),
            "plus" => Role::Plus(Box::new(self.role()?)),
            "star" => Role::Star(Box::new(self.role()?)),
            "restrict" => {
                let r = Box::new(self.role()?);
                self.expect(',')?;
                Role::Restrict(r, Box::new(self.concept()?))
            }
            "id" => Role::Id(Box::new(self.concept()?)),
            _ => return Err(FeatureError::Parse { offset: start, message: format!("unknown role constructor `{head}`") }),
        };
        self.expect(')')?;
        Ok(r)
    }

    fn feature(&mut self) -> Result<Feature, FeatureError> {
        let kind = self.ident()?;
        self.expect(':')?;
        let name = self.ident()?;
        self.expect('(')?;
        let f = match (kind, name) {
            ("bool", "empty") => Feature::Empty(self.concept()?),
            ("bool", "csub") => {
                let c = self.concept()?;
                self.expect(',')?;
                Feature::CSub(c, self.concept()?)
            }
            ("bool", "rsub") => {
                let r = self.role()?;
                self.expect(',')?;
                Feature::RSub(r, self.role()?)
            }
            ("bool", "nullary") => Feature::Nullary(self.ident()?.into()),
            ("num", "count") => Feature::Count(self.concept()?),
            ("num", "dist") | ("num", "sumdist") => {
                let c = self.concept()?;
                self.expect(',')?;
                let r = self.role()?;
                self.expect(',')?;
                let d = self.concept()?;
                if name == "dist" {
                    Feature::Dist(c, r, d)
                } else {
                    Feature::SumDist(c, r, d)
                }
            }
            ("num", "rdist") | ("num", "sumrdist") => {
                let r = self.role()?;
                self.expect(',')?;
                let s = self.role()?;
                self.expect(',')?;
                let t = self.role()?;
                if name == "rdist" {
                    Feature::RDist(r, s, t)
                } else {
                    Feature::SumRDist(r, s, t)
                }
            }
            _ => return Err(self.err(format!("unknown feature `{kind}:{name}`"))),
        };
        self.expect(')')?;
        Ok(f)
    }

    fn finish<T>(mut self, value: T) -> Result<T, FeatureError> {
        self.skip_ws();
        if self.pos != self.text.len() {
            return Err(self.err("trailing input"));
        }
        Ok(value)
    }
}

/// Splits `name_i` (n = 1) or `name_i_j` (n = 2) into the predicate and indices.
fn split_indices(token: &str, n: usize) -> Option<(&str, Vec<usize>)> {
    let mut rest = token;
    let mut idx = Vec::new();
    for _ in 0..n {
        let cut = rest.rfind('_')?;
        idx.push(rest[cut + 1..].parse().ok()?);
        rest = &rest[..cut];
    }
    if rest.is_empty() || rest.rsplit('_').next().is_some_and(|last| last.parse::<usize>().is_ok()) {
        return None;
    }
    idx.reverse();
    Some((rest, idx))
}

pub fn parse_feature(text: &str) -> Result<Feature, FeatureError> {
    let mut p = Parser { text, pos: 0 };
    let f = p.feature()?;
    p.finish(f)
}

pub fn parse_concept(text: &str) -> Result<Concept, FeatureError> {
    let mut p = Parser { text, pos: 0 };
    let c = p.concept()?;
    p.finish(c)
}

pub fn parse_role(text: &str) -> Result<Role, FeatureError> {
    let mut p = Parser { text, pos: 0 };
    let r = p.role()?;
    p.finish(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_prints_published_features() {
        for text in [
            "num:dist(position_0,next-fwd_0_1,position_G_0)",
            "bool:empty(some(door-in_0_1,player-at_0))",
            "num:count(some(plus(on_G_0_1),clear_0))",
            "num:count(some(rand(on_0_1,rnot(on_G_0_1)),top))",
            "bool:nullary(broken-leg)",
            "num:sumrdist(univ,inv(comp(a_0_1,b_1_0)),restrict(star(c_0_2),const(x)))",
            "bool:csub(diff(p_0,bot),all(id(q_1),top))",
        ] {
            let f = parse_feature(text).unwrap();
            assert_eq!(f.to_string(), text);
        }
    }

    #[test]
    fn primitive_names_split_from_the_right() {
        assert_eq!(split_indices("on_G_0_1", 2), Some(("on_G", vec![0, 1])));
        assert_eq!(split_indices("next-fwd_1", 1), Some(("next-fwd", vec![1])));
        assert_eq!(split_indices("on_0_1", 1), None);
        assert_eq!(split_indices("on", 1), None);
    }

    #[test]
    fn sort_errors_are_reported() {
        assert!(matches!(parse_feature("num:count(on_0_1)"), Err(FeatureError::Sort(_))));
        assert!(matches!(parse_feature("num:count(inv(on_0_1))"), Err(FeatureError::Sort(_))));
        assert!(matches!(parse_role("clear_0"), Err(FeatureError::Sort(_))));
        assert!(matches!(parse_role("some(r_0_1,top)"), Err(FeatureError::Sort(_))));
    }

    #[test]
    fn malformed_text_is_a_parse_error() {
        for bad in ["num:count(top", "num:count(top) x", "num:size(top)", "count(top)", "num:count(and(top))"] {
            assert!(matches!(parse_feature(bad), Err(FeatureError::Parse { .. })), "{bad}");
        }
    }
}
