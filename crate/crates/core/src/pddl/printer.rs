use super::*;
use std::fmt::Write;

fn typed(names: &[TypedName]) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < names.len() {
        let ty = &names[i].ty;
        let mut j = i;
        while j < names.len() && &names[j].ty == ty {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(&names[j].name);
            j += 1;
        }
        write!(out, " - {ty}").unwrap();
        i = j;
    }
    out
}

fn term(t: &Term) -> &str {
    match t {
        Term::Var(v) | Term::Const(v) => v,
    }
}

fn atom(a: &AtomExpr) -> String {
    let mut s = format!("({}", a.pred);
    for t in &a.args {
        s.push(' ');
        s.push_str(term(t));
    }
    s.push(')');
    s
}

fn effect_literal(l: &EffectLiteral) -> String {
    if l.positive {
        atom(&l.atom)
    } else {
        format!("(not {})", atom(&l.atom))
    }
}

fn conjunction(parts: Vec<String>) -> String {
    match parts.len() {
        0 => "(and)".to_string(),
        1 => parts.into_iter().next().unwrap(),
        _ => format!("(and {})", parts.join(" ")),
    }
}

pub fn domain(d: &Domain) -> String {
    let mut s = format!("(define (domain {})\n", d.name);
    if !d.requirements.is_empty() {
        writeln!(s, "  (:requirements {})", d.requirements.join(" ")).unwrap();
    }
    if !d.types.is_empty() {
        let names: Vec<TypedName> = d.types.iter().map(|(t, p)| TypedName { name: t.clone(), ty: p.clone() }).collect();
        writeln!(s, "  (:types {})", typed(&names)).unwrap();
    }
    if !d.constants.is_empty() {
        writeln!(s, "  (:constants {})", typed(&d.constants)).unwrap();
    }
    s.push_str("  (:predicates");
    for p in &d.predicates {
        if p.params.is_empty() {
            write!(s, " ({})", p.name).unwrap();
        } else {
            write!(s, " ({} {})", p.name, typed(&p.params)).unwrap();
        }
    }
    s.push_str(")\n");
    for a in &d.actions {
        writeln!(s, "  (:action {}", a.name).unwrap();
        writeln!(s, "    :parameters ({})", typed(&a.params)).unwrap();
        let pre: Vec<String> = a
            .precondition
            .iter()
            .map(|c| match c {
                Condition::Atom(at, true) => atom(at),
                Condition::Atom(at, false) => format!("(not {})", atom(at)),
                Condition::Equal(x, y, true) => format!("(= {} {})", term(x), term(y)),
                Condition::Equal(x, y, false) => format!("(not (= {} {}))", term(x), term(y)),
            })
            .collect();
        writeln!(s, "    :precondition {}", conjunction(pre)).unwrap();
        let mut eff: Vec<String> = a.effect.always.iter().map(effect_literal).collect();
        for group in &a.effect.oneof {
            let branches: Vec<String> = group.iter().map(|b| conjunction(b.iter().map(effect_literal).collect())).collect();
            eff.push(format!("(oneof {})", branches.join(" ")));
        }
        writeln!(s, "    :effect {})", conjunction(eff)).unwrap();
    }
    s.push_str(")\n");
    s
}

fn fact(f: &FactExpr) -> String {
    if f.args.is_empty() {
        format!("({})", f.pred)
    } else {
        format!("({} {})", f.pred, f.args.join(" "))
    }
}

pub fn problem(p: &Problem) -> String {
    let mut s = format!("(define (problem {})\n  (:domain {})\n", p.name, p.domain);
    if !p.objects.is_empty() {
        writeln!(s, "  (:objects {})", typed(&p.objects)).unwrap();
    }
    let init: Vec<String> = p.init.iter().map(fact).collect();
    writeln!(s, "  (:init {})", init.join(" ")).unwrap();
    writeln!(s, "  (:goal {}))", conjunction(p.goal.iter().map(fact).collect())).unwrap();
    s
}
