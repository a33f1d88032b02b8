use rand::seq::index::sample;
use rand::Rng;

use super::{Expr, Formula};

/// Uniform random `width`-CNF with `clauses` clauses: each clause picks
/// `width` distinct variables and random polarities.
pub fn random_cnf<R: Rng + ?Sized>(num_vars: usize, clauses: usize, width: usize, rng: &mut R) -> Formula {
    assert!(num_vars >= 1 && clauses >= 1 && width >= 1);
    let width = width.min(num_vars);
    let root = (0..clauses)
        .map(|_| {
            sample(rng, num_vars, width)
                .into_iter()
                .map(|v| {
                    let var = Expr::Var(v as u32 + 1);
                    if rng.random_bool(0.5) {
                        Expr::not(var)
                    } else {
                        var
                    }
                })
                .reduce(Expr::or)
                .expect("width >= 1")
        })
        .reduce(Expr::and)
        .expect("clauses >= 1");
    Formula::new(num_vars, root).expect("indices drawn in range")
}

/// The conjunction of literals satisfied only by assignment `index`.
pub fn planted(num_vars: usize, index: u64) -> Formula {
    assert!(num_vars >= 1 && index >> num_vars == 0);
    let root = (1..=num_vars as u32)
        .map(|i| {
            let var = Expr::Var(i);
            if (index >> (num_vars - i as usize)) & 1 == 1 {
                var
            } else {
                Expr::not(var)
            }
        })
        .reduce(Expr::and)
        .expect("num_vars >= 1");
    Formula::new(num_vars, root).expect("indices in range")
}

/// `(x1 | !x1) & … & (xn | !xn)`.
pub fn tautology(num_vars: usize) -> Formula {
    assert!(num_vars >= 1);
    let root = (1..=num_vars as u32)
        .map(|i| Expr::or(Expr::Var(i), Expr::not(Expr::Var(i))))
        .reduce(Expr::and)
        .expect("num_vars >= 1");
    Formula::new(num_vars, root).expect("indices in range")
}

/// `x1 & !x1`.
pub fn contradiction() -> Formula {
    Formula::new(1, Expr::and(Expr::Var(1), Expr::not(Expr::Var(1)))).expect("x1 in range")
}
