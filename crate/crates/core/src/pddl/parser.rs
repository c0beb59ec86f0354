use super::sexpr::{self, SExpr};
use super::*;

const UNSUPPORTED_REQUIREMENTS: &[&str] = &[
    ":conditional-effects",
    ":universal-preconditions",
    ":existential-preconditions",
    ":quantified-preconditions",
    ":disjunctive-preconditions",
    ":adl",
    ":fluents",
    ":numeric-fluents",
    ":object-fluents",
    ":durative-actions",
    ":derived-predicates",
    ":timed-initial-literals",
    ":preferences",
    ":constraints",
    ":probabilistic-effects",
];

const UNSUPPORTED_FORMULAS: &[&str] =
    &["or", "imply", "exists", "forall", "when", "increase", "decrease", "assign", "scale-up", "scale-down", "either", "probabilistic"];

pub fn parse_domain(text: &str) -> Result<Domain, PddlError> {
    let root = sexpr::read(text)?;
    let items = expect_define(&root)?;
    let name = header_name(&items[1], "domain")?;
    let mut domain = Domain { name, requirements: Vec::new(), types: Vec::new(), constants: Vec::new(), predicates: Vec::new(), actions: Vec::new() };
    let mut pending_actions = Vec::new();
    for section in &items[2..] {
        let list = section.as_list().ok_or_else(|| PddlError::syntax(section.pos(), &section.token(), "expected a section"))?;
        let head = section.head().ok_or_else(|| PddlError::syntax(section.pos(), &section.token(), "expected a section keyword"))?;
        match head {
            ":requirements" => {
                for r in &list[1..] {
                    let r_name = sym(r)?;
                    if UNSUPPORTED_REQUIREMENTS.contains(&r_name) {
                        return Err(PddlError::unsupported(r.pos(), r_name));
                    }
                    domain.requirements.push(r_name.to_string());
                }
            }
            ":types" => {
                for tn in typed_list(&list[1..])? {
                    domain.types.push((tn.name, tn.ty));
                }
            }
            ":constants" => domain.constants.extend(typed_list(&list[1..])?),
            ":predicates" => {
                for p in &list[1..] {
                    let pl = p.as_list().ok_or_else(|| PddlError::syntax(p.pos(), &p.token(), "expected a predicate declaration"))?;
                    let name = sym(pl.first().ok_or_else(|| PddlError::syntax(p.pos(), "(", "empty predicate declaration"))?)?;
                    domain.predicates.push(PredicateDecl { name: name.to_string(), params: typed_list(&pl[1..])? });
                }
            }
            ":action" => pending_actions.push(section),
            other => return Err(PddlError::unsupported(section.pos(), other)),
        }
    }
    // Undeclared parent types hang directly under the root.
    let parents: Vec<String> = domain.types.iter().map(|(_, p)| p.clone()).collect();
    for p in parents {
        if !domain.has_type(&p) {
            domain.types.push((p, ROOT_TYPE.to_string()));
        }
    }
    for c in &domain.constants {
        check_type(&domain, &c.ty)?;
    }
    for p in &domain.predicates {
        for param in &p.params {
            check_type(&domain, &param.ty)?;
        }
    }
    for a in pending_actions {
        let action = parse_action(a, &domain)?;
        domain.actions.push(action);
    }
    Ok(domain)
}

pub fn parse_problem(text: &str, domain: &Domain) -> Result<Problem, PddlError> {
    let root = sexpr::read(text)?;
    let items = expect_define(&root)?;
    let name = header_name(&items[1], "problem")?;
    let mut problem = Problem { name, domain: String::new(), objects: Vec::new(), init: Vec::new(), goal: Vec::new() };
    let mut goal_seen = false;
    for section in &items[2..] {
        let list = section.as_list().ok_or_else(|| PddlError::syntax(section.pos(), &section.token(), "expected a section"))?;
        let head = section.head().ok_or_else(|| PddlError::syntax(section.pos(), &section.token(), "expected a section keyword"))?;
        match head {
            ":domain" => {
                let d = list.get(1).ok_or_else(|| PddlError::syntax(section.pos(), ":domain", "missing domain name"))?;
                problem.domain = sym(d)?.to_string();
            }
            ":objects" => problem.objects.extend(typed_list(&list[1..])?),
            ":init" => {
                for f in &list[1..] {
                    if f.head() == Some("=") {
                        return Err(PddlError::unsupported(f.pos(), "numeric fluents"));
                    }
                    problem.init.push(fact(f)?);
                }
            }
            ":goal" => {
                goal_seen = true;
                let g = list.get(1).ok_or_else(|| PddlError::syntax(section.pos(), ":goal", "missing goal formula"))?;
                collect_goal(g, &mut problem.goal)?;
            }
            other => return Err(PddlError::unsupported(section.pos(), other)),
        }
    }
    if !goal_seen {
        return Err(PddlError::syntax(root.pos(), "define", "problem has no :goal"));
    }
    if problem.domain != domain.name {
        return Err(PddlError::Type(format!("problem `{}` targets domain `{}`, not `{}`", problem.name, problem.domain, domain.name)));
    }
    validate_problem(&problem, domain)?;
    Ok(problem)
}

fn expect_define(root: &SExpr) -> Result<&[SExpr], PddlError> {
    let items = root.as_list().ok_or_else(|| PddlError::syntax(root.pos(), &root.token(), "expected (define ...)"))?;
    if root.head() != Some("define") {
        let tok = items.first().map(|t| t.token()).unwrap_or_else(|| ")".to_string());
        return Err(PddlError::syntax(root.pos(), &tok, "expected `define`"));
    }
    if items.len() < 2 {
        return Err(PddlError::syntax(root.pos(), "define", "missing header"));
    }
    Ok(items)
}

fn header_name(header: &SExpr, kind: &str) -> Result<String, PddlError> {
    let l = header.as_list().ok_or_else(|| PddlError::syntax(header.pos(), &header.token(), "expected a header"))?;
    if l.len() != 2 || header.head() != Some(kind) {
        return Err(PddlError::syntax(header.pos(), &header.token(), &format!("expected ({kind} <name>)")));
    }
    Ok(sym(&l[1])?.to_string())
}

fn sym(e: &SExpr) -> Result<&str, PddlError> {
    e.as_sym().ok_or_else(|| PddlError::syntax(e.pos(), "(", "expected a symbol"))
}

fn typed_list(items: &[SExpr]) -> Result<Vec<TypedName>, PddlError> {
    let mut out = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let it = &items[i];
        if let Some(l) = it.as_list() {
            if l.first().and_then(|h| h.as_sym()) == Some("either") {
                return Err(PddlError::unsupported(it.pos(), "either"));
            }
            return Err(PddlError::syntax(it.pos(), "(", "expected a name in typed list"));
        }
        let s = sym(it)?;
        if s == "-" {
            let ty = items.get(i + 1).ok_or_else(|| PddlError::syntax(it.pos(), "-", "missing type after `-`"))?;
            if ty.head() == Some("either") {
                return Err(PddlError::unsupported(ty.pos(), "either"));
            }
            let ty = sym(ty)?;
            if pending.is_empty() {
                return Err(PddlError::syntax(it.pos(), "-", "type without names"));
            }
            out.extend(pending.drain(..).map(|name| TypedName { name, ty: ty.to_string() }));
            i += 2;
        } else {
            pending.push(s.to_string());
            i += 1;
        }
    }
    out.extend(pending.into_iter().map(|name| TypedName { name, ty: ROOT_TYPE.to_string() }));
    Ok(out)
}

fn check_type(domain: &Domain, ty: &str) -> Result<(), PddlError> {
    if domain.has_type(ty) {
        Ok(())
    } else {
        Err(PddlError::Type(format!("undeclared type `{ty}`")))
    }
}

fn parse_action(section: &SExpr, domain: &Domain) -> Result<ActionSchema, PddlError> {
    let list = section.as_list().unwrap_or(&[]);
    let name = sym(list.get(1).ok_or_else(|| PddlError::syntax(section.pos(), ":action", "missing action name"))?)?.to_string();
    let mut params = Vec::new();
    let mut precondition = Vec::new();
    let mut effect = Effect::default();
    let mut i = 2;
    while i < list.len() {
        let key = sym(&list[i])?;
        let value = list.get(i + 1).ok_or_else(|| PddlError::syntax(list[i].pos(), key, "missing value"))?;
        match key {
            ":parameters" => {
                let l = value.as_list().ok_or_else(|| PddlError::syntax(value.pos(), &value.token(), "expected a parameter list"))?;
                params = typed_list(l)?;
                for p in &params {
                    if !p.name.starts_with('?') {
                        return Err(PddlError::syntax(value.pos(), &p.name, "parameters must start with `?`"));
                    }
                    check_type(domain, &p.ty)?;
                }
            }
            ":precondition" => collect_precondition(value, &mut precondition)?,
            ":effect" => effect = parse_effect(value)?,
            other => return Err(PddlError::unsupported(list[i].pos(), other)),
        }
        i += 2;
    }
    let action = ActionSchema { name, params, precondition, effect };
    check_action(&action, domain)?;
    Ok(action)
}

fn term(e: &SExpr) -> Result<Term, PddlError> {
    let s = sym(e)?;
    Ok(if s.starts_with('?') { Term::Var(s.to_string()) } else { Term::Const(s.to_string()) })
}

fn atom(e: &SExpr) -> Result<AtomExpr, PddlError> {
    let l = e.as_list().ok_or_else(|| PddlError::syntax(e.pos(), &e.token(), "expected an atom"))?;
    let pred = sym(l.first().ok_or_else(|| PddlError::syntax(e.pos(), "(", "empty atom"))?)?;
    if UNSUPPORTED_FORMULAS.contains(&pred) {
        return Err(PddlError::unsupported(e.pos(), pred));
    }
    if matches!(pred, "and" | "not" | "oneof" | "=") {
        return Err(PddlError::syntax(e.pos(), pred, "expected an atom"));
    }
    Ok(AtomExpr { pred: pred.to_string(), args: l[1..].iter().map(term).collect::<Result<_, _>>()? })
}

fn collect_precondition(e: &SExpr, out: &mut Vec<Condition>) -> Result<(), PddlError> {
    let l = e.as_list().ok_or_else(|| PddlError::syntax(e.pos(), &e.token(), "expected a formula"))?;
    if l.is_empty() {
        return Ok(());
    }
    match e.head() {
        Some("and") => {
            for sub in &l[1..] {
                collect_precondition(sub, out)?;
            }
        }
        Some("not") => {
            let inner = l.get(1).ok_or_else(|| PddlError::syntax(e.pos(), "not", "missing operand"))?;
            match inner.head() {
                Some("=") => out.push(equality(inner, false)?),
                Some(h) if UNSUPPORTED_FORMULAS.contains(&h) || h == "and" || h == "not" => {
                    return Err(PddlError::unsupported(inner.pos(), &format!("not {h}")));
                }
                _ => out.push(Condition::Atom(atom(inner)?, false)),
            }
        }
        Some("=") => out.push(equality(e, true)?),
        Some(h) if UNSUPPORTED_FORMULAS.contains(&h) => return Err(PddlError::unsupported(e.pos(), h)),
        _ => out.push(Condition::Atom(atom(e)?, true)),
    }
    Ok(())
}

fn equality(e: &SExpr, positive: bool) -> Result<Condition, PddlError> {
    let l = e.as_list().unwrap_or(&[]);
    if l.len() != 3 {
        return Err(PddlError::syntax(e.pos(), "=", "equality takes two terms"));
    }
    Ok(Condition::Equal(term(&l[1])?, term(&l[2])?, positive))
}

fn parse_effect(e: &SExpr) -> Result<Effect, PddlError> {
    let mut effect = Effect::default();
    let l = e.as_list().ok_or_else(|| PddlError::syntax(e.pos(), &e.token(), "expected an effect"))?;
    if l.is_empty() {
        return Ok(effect);
    }
    let parts: Vec<&SExpr> = if e.head() == Some("and") { l[1..].iter().collect() } else { vec![e] };
    for part in parts {
        if part.head() == Some("oneof") {
            let branches = part.as_list().unwrap_or(&[])[1..]
                .iter()
                .map(|b| {
                    let mut lits = Vec::new();
                    collect_effect_literals(b, &mut lits)?;
                    Ok(lits)
                })
                .collect::<Result<Vec<_>, PddlError>>()?;
            if branches.is_empty() {
                return Err(PddlError::syntax(part.pos(), "oneof", "oneof needs at least one branch"));
            }
            effect.oneof.push(branches);
        } else {
            collect_effect_literals(part, &mut effect.always)?;
        }
    }
    Ok(effect)
}

fn collect_effect_literals(e: &SExpr, out: &mut Vec<EffectLiteral>) -> Result<(), PddlError> {
    let l = e.as_list().ok_or_else(|| PddlError::syntax(e.pos(), &e.token(), "expected an effect literal"))?;
    if l.is_empty() {
        return Ok(());
    }
    match e.head() {
        Some("and") => {
            for sub in &l[1..] {
                collect_effect_literals(sub, out)?;
            }
        }
        Some("oneof") => return Err(PddlError::unsupported(e.pos(), "nested oneof")),
        Some("not") => {
            let inner = l.get(1).ok_or_else(|| PddlError::syntax(e.pos(), "not", "missing operand"))?;
            out.push(EffectLiteral { atom: atom(inner)?, positive: false });
        }
        Some(h) if UNSUPPORTED_FORMULAS.contains(&h) => return Err(PddlError::unsupported(e.pos(), h)),
        _ => out.push(EffectLiteral { atom: atom(e)?, positive: true }),
    }
    Ok(())
}

fn fact(e: &SExpr) -> Result<FactExpr, PddlError> {
    let a = atom(e)?;
    let args = a
        .args
        .into_iter()
        .map(|t| match t {
            Term::Const(c) => Ok(c),
            Term::Var(v) => Err(PddlError::syntax(e.pos(), &v, "variables are not allowed in facts")),
        })
        .collect::<Result<_, _>>()?;
    Ok(FactExpr { pred: a.pred, args })
}

fn collect_goal(e: &SExpr, out: &mut Vec<FactExpr>) -> Result<(), PddlError> {
    let l = e.as_list().ok_or_else(|| PddlError::syntax(e.pos(), &e.token(), "expected a goal formula"))?;
    if l.is_empty() {
        return Ok(());
    }
    match e.head() {
        Some("and") => {
            for sub in &l[1..] {
                collect_goal(sub, out)?;
            }
            Ok(())
        }
        Some("not") => Err(PddlError::unsupported(e.pos(), "negative goals")),
        Some(h) if UNSUPPORTED_FORMULAS.contains(&h) => Err(PddlError::unsupported(e.pos(), h)),
        _ => {
            out.push(fact(e)?);
            Ok(())
        }
    }
}

fn check_action(a: &ActionSchema, domain: &Domain) -> Result<(), PddlError> {
    let var_type = |v: &str| a.params.iter().find(|p| p.name == v).map(|p| p.ty.clone());
    let const_type = |c: &str| domain.constants.iter().find(|k| k.name == c).map(|k| k.ty.clone());
    let term_type = |t: &Term| -> Result<String, PddlError> {
        match t {
            Term::Var(v) => var_type(v).ok_or_else(|| PddlError::Type(format!("action `{}` uses undeclared variable `{v}`", a.name))),
            Term::Const(c) => const_type(c).ok_or_else(|| PddlError::Type(format!("action `{}` uses undeclared constant `{c}`", a.name))),
        }
    };
    let check_atom = |at: &AtomExpr| -> Result<(), PddlError> {
        let decl = domain.predicate(&at.pred).ok_or_else(|| PddlError::Type(format!("action `{}` uses undeclared predicate `{}`", a.name, at.pred)))?;
        if decl.params.len() != at.args.len() {
            return Err(PddlError::Type(format!(
                "predicate `{}` expects {} arguments, got {} in action `{}`",
                at.pred,
                decl.params.len(),
                at.args.len(),
                a.name
            )));
        }
        for (arg, param) in at.args.iter().zip(&decl.params) {
            let ty = term_type(arg)?;
            if !domain.is_subtype(&ty, &param.ty) && !domain.is_subtype(&param.ty, &ty) {
                return Err(PddlError::Type(format!("argument of type `{ty}` does not fit `{}` in `{}` of action `{}`", param.ty, at.pred, a.name)));
            }
        }
        Ok(())
    };
    for c in &a.precondition {
        match c {
            Condition::Atom(at, _) => check_atom(at)?,
            Condition::Equal(x, y, _) => {
                term_type(x)?;
                term_type(y)?;
            }
        }
    }
    for lit in a.effect.always.iter().chain(a.effect.oneof.iter().flatten().flatten()) {
        check_atom(&lit.atom)?;
    }
    Ok(())
}

fn validate_problem(p: &Problem, domain: &Domain) -> Result<(), PddlError> {
    for o in &p.objects {
        check_type(domain, &o.ty)?;
    }
    let object_type = |name: &str| p.objects.iter().chain(domain.constants.iter()).find(|o| o.name == name).map(|o| o.ty.as_str());
    for f in p.init.iter().chain(&p.goal) {
        let decl = domain.predicate(&f.pred).ok_or_else(|| PddlError::Type(format!("undeclared predicate `{}`", f.pred)))?;
        if decl.params.len() != f.args.len() {
            return Err(PddlError::Type(format!("predicate `{}` expects {} arguments, got {}", f.pred, decl.params.len(), f.args.len())));
        }
        for (arg, param) in f.args.iter().zip(&decl.params) {
            let ty = object_type(arg).ok_or_else(|| PddlError::Type(format!("undeclared object `{arg}` in `{}`", f.pred)))?;
            if !domain.is_subtype(ty, &param.ty) {
                return Err(PddlError::Type(format!("object `{arg}` of type `{ty}` does not fit parameter type `{}` of `{}`", param.ty, f.pred)));
            }
        }
    }
    Ok(())
}
