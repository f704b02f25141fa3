use crate::model::{Predicate, SymbolRef, Term};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Literal {
    Eq(Term, Term),
    Atom(SymbolRef, Vec<Term>),
}

impl Literal {
    pub fn to_predicate(&self) -> Predicate {
        match self {
            Literal::Eq(l, r) => Predicate::Eq(l.clone(), r.clone()),
            Literal::Atom(s, a) => Predicate::Atom(s.clone(), a.clone()),
        }
    }
}

/// A disjunction of conjunctions of literals.
pub type Dnf = Vec<Vec<Literal>>;

/// Disjunctive normal form of the conjunction of `preds`, or the size it
/// would have exceeded `budget` at.
pub fn dnf_of_all(preds: &[&Predicate], budget: usize) -> Result<Dnf, usize> {
    let mut acc: Dnf = vec![Vec::new()];
    for p in preds {
        acc = product(acc, dnf(p, budget)?, budget)?;
    }
    Ok(acc)
}

pub fn dnf(p: &Predicate, budget: usize) -> Result<Dnf, usize> {
    match p {
        Predicate::Eq(l, r) => Ok(vec![vec![Literal::Eq(l.clone(), r.clone())]]),
        Predicate::Atom(s, a) => Ok(vec![vec![Literal::Atom(s.clone(), a.clone())]]),
        Predicate::And(ps) => {
            let mut acc: Dnf = vec![Vec::new()];
            for q in ps {
                acc = product(acc, dnf(q, budget)?, budget)?;
            }
            Ok(acc)
        }
        Predicate::Or(ps) => {
            let mut acc = Vec::new();
            for q in ps {
                acc.extend(dnf(q, budget)?);
                if acc.len() > budget {
                    return Err(acc.len());
                }
            }
            Ok(acc)
        }
    }
}

fn product(a: Dnf, b: Dnf, budget: usize) -> Result<Dnf, usize> {
    let size = a.len().saturating_mul(b.len());
    if size > budget {
        return Err(size);
    }
    let mut out = Vec::with_capacity(size);
    for x in &a {
        for y in &b {
            let mut c = x.clone();
            c.extend(y.iter().cloned());
            out.push(c);
        }
    }
    Ok(out)
}
