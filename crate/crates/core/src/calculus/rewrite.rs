use std::collections::{HashSet, VecDeque};

use num::One;
use serde::Serialize;

use super::expr::{FactorExpr, TensorFactor};
use super::{compress_rule, free_product_rule, CalcError, FreeParam};
use crate::scalar::{fmt_rational, int, rat, Rational};

/// Rewrite rules, listed in the order `normalize` tries them at a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// `(A * B) * C → A * B * C`.
    Flatten,
    /// `A * C → A`, `tensor(C, LZ2) → LZ2`.
    ScalarUnit,
    /// `LF(r) * LF(r') → LF(r + r')`.
    Addition,
    /// `R * LF(r) → LF(r + 1)`.
    HyperfiniteSummand,
    /// `LZ * LF(r) → LF(r + 1)`: a free semicircular generator with full support.
    CircleSummand,
    /// `LZ * R → LF(2)`.
    CircleWithHyperfinite,
    /// `R * R → R * LZ`.
    HyperfinitePair,
    /// `LZ * LZ → R * LZ`.
    CirclePair,
    /// `(A⊗LZ2) * (B⊗LZ2) → (A * A * B * B * LZ)⊗M2`.
    TwoSymmetries,
    /// `(A⊗M2) * (B⊗LZ2) → (A * B * B * LF(2))⊗M2`.
    MatrixAndSymmetry,
    /// `(A⊗M2) * (B⊗M2) → (A * B * LF(3))⊗M2`.
    MatrixPair,
    /// `LF(r)_γ → LF(1 + (r − 1)/γ²)`, for `compress` and for `tensor` with `M n`.
    Compression,
    /// `R_γ → R`.
    RAbsorption,
    /// `(M_γ₁)_γ₂ → M_{γ₁γ₂}`.
    CompressionComposition,
    /// `tensor(A, M1) → A`, `compress(A, gsq=1) → A`.
    TrivialCompression,
    /// `M_a ⊗ M_b → M_ab`, `C ⊗ M_n → M_n`, `M_1 → C`, `(M_a)_γ → M_{aγ}`.
    MatrixArithmetic,
}

impl Rule {
    pub const ALL: [Rule; 16] = [
        Rule::Flatten,
        Rule::ScalarUnit,
        Rule::Addition,
        Rule::HyperfiniteSummand,
        Rule::CircleSummand,
        Rule::CircleWithHyperfinite,
        Rule::HyperfinitePair,
        Rule::CirclePair,
        Rule::TwoSymmetries,
        Rule::MatrixAndSymmetry,
        Rule::MatrixPair,
        Rule::Compression,
        Rule::RAbsorption,
        Rule::CompressionComposition,
        Rule::TrivialCompression,
        Rule::MatrixArithmetic,
    ];
}

/// One rewrite: the subexpression at `path` went from `before` to `after`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Step {
    pub rule: Rule,
    pub path: Vec<usize>,
    pub before: FactorExpr,
    pub after: FactorExpr,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Derivation {
    pub input: FactorExpr,
    pub steps: Vec<Step>,
    pub output: FactorExpr,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Normalized {
    pub result: FactorExpr,
    /// `LF(r)`, `R`, `M n` or `C`; otherwise an irreducible composite.
    pub canonical: bool,
    pub derivation: Derivation,
}

fn lf(r: Rational) -> FactorExpr {
    FactorExpr::Lf(FreeParam::Finite(r))
}

fn m2(e: FactorExpr) -> FactorExpr {
    FactorExpr::tensor(e, TensorFactor::Matrix(2))
}

/// `A` with `e = A⊗M2`, and whether the tensor is written out. `R` and `LF(r)`
/// split as `R⊗M2` and `LF(1 + 4(r − 1))⊗M2`, and `M_{2k}` as `M_k⊗M2`.
fn split_m2(e: &FactorExpr) -> Option<(FactorExpr, Shape)> {
    match e {
        FactorExpr::Tensor(a, TensorFactor::Matrix(2)) => Some(((**a).clone(), Shape::Explicit)),
        FactorExpr::R => Some((FactorExpr::R, Shape::Diffuse)),
        FactorExpr::Lf(r) => {
            let a = compress_rule(r, &rat(1, 4)).ok()?;
            Some((FactorExpr::Lf(a), Shape::Diffuse))
        }
        FactorExpr::M(n) if n % 2 == 0 => {
            let a = if *n == 2 { FactorExpr::C } else { FactorExpr::M(n / 2) };
            Some((a, Shape::Finite))
        }
        _ => None,
    }
}

/// `B` with `e = B⊗LZ2`; a bare `LZ2` is `C⊗LZ2`.
fn split_z2(e: &FactorExpr) -> Option<FactorExpr> {
    match e {
        FactorExpr::Tensor(b, TensorFactor::Lz2) => Some((**b).clone()),
        FactorExpr::Lz2 => Some(FactorExpr::C),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    Explicit,
    Finite,
    Diffuse,
}

type Local = (Rule, FactorExpr, String);

/// Replacement items for an unordered pair of free product children.
fn pair_rewrites(a: &FactorExpr, b: &FactorExpr) -> Vec<(Rule, Vec<FactorExpr>, String)> {
    use FactorExpr::*;
    let mut out = Vec::new();

    if let (Lf(r), Lf(s)) = (a, b) {
        let t = free_product_rule(r, s);
        out.push((Rule::Addition, vec![Lf(t.clone())], format!("{r} + {s} = {t}")));
    }
    for (x, y) in [(a, b), (b, a)] {
        if let (R, Lf(r)) = (x, y) {
            let t = free_product_rule(r, &FreeParam::Finite(int(1)));
            out.push((Rule::HyperfiniteSummand, vec![Lf(t.clone())], format!("{r} + 1 = {t}")));
            break;
        }
    }
    for (x, y) in [(a, b), (b, a)] {
        if let (Lz, Lf(r)) = (x, y) {
            let t = free_product_rule(r, &FreeParam::Finite(int(1)));
            out.push((Rule::CircleSummand, vec![Lf(t.clone())], format!("{r} + 1 = {t}")));
            break;
        }
    }
    if matches!((a, b), (Lz, R) | (R, Lz)) {
        out.push((Rule::CircleWithHyperfinite, vec![lf(int(2))], "LZ * R = LF(2)".into()));
    }
    if matches!((a, b), (R, R)) {
        out.push((Rule::HyperfinitePair, vec![R, Lz], "R * R = R * LZ".into()));
    }
    if matches!((a, b), (Lz, Lz)) {
        out.push((Rule::CirclePair, vec![R, Lz], "LZ * LZ = R * LZ".into()));
    }

    if let (Some(x), Some(y)) = (split_z2(a), split_z2(b)) {
        let e = m2(FactorExpr::FreeProduct(vec![x.clone(), x.clone(), y.clone(), y.clone(), Lz]));
        out.push((Rule::TwoSymmetries, vec![e], format!("A = {x}, B = {y}")));
    }
    for (x, y) in [(a, b), (b, a)] {
        if let (Some((p, _)), Some(q)) = (split_m2(x), split_z2(y)) {
            let e = m2(FactorExpr::FreeProduct(vec![p.clone(), q.clone(), q.clone(), lf(int(2))]));
            out.push((Rule::MatrixAndSymmetry, vec![e], format!("A = {p}, B = {q}")));
            break;
        }
    }
    if let (Some((p, sp)), Some((q, sq))) = (split_m2(a), split_m2(b)) {
        // two diffuse factors would split again inside the result
        if sp != Shape::Diffuse || sq != Shape::Diffuse {
            let e = m2(FactorExpr::FreeProduct(vec![p.clone(), q.clone(), lf(int(3))]));
            out.push((Rule::MatrixPair, vec![e], format!("A = {p}, B = {q}")));
        }
    }
    out
}

fn exact_sqrt(r: &Rational) -> Option<u64> {
    if !r.is_integer() {
        return None;
    }
    let n: u64 = r.to_integer().try_into().ok()?;
    let s = (n as f64).sqrt().round() as u64;
    (s.checked_mul(s) == Some(n) && s >= 1).then_some(s)
}

/// Every single rewrite of the node itself, in rule order.
pub fn local_rewrites(e: &FactorExpr) -> Vec<Local> {
    use FactorExpr::*;
    let mut out: Vec<Local> = Vec::new();
    match e {
        M(1) => out.push((Rule::MatrixArithmetic, C, "M1 = C".into())),
        FreeProduct(cs) => {
            for (i, c) in cs.iter().enumerate() {
                if let FreeProduct(inner) = c {
                    let mut new = cs[..i].to_vec();
                    new.extend(inner.iter().cloned());
                    new.extend(cs[i + 1..].iter().cloned());
                    out.push((Rule::Flatten, FreeProduct(new), format!("child {i}")));
                }
            }
            for (i, c) in cs.iter().enumerate() {
                if *c == C {
                    let mut new = cs.clone();
                    new.remove(i);
                    out.push((Rule::ScalarUnit, FactorExpr::product(new), format!("child {i}")));
                }
            }
            let mut pairs = Vec::new();
            for i in 0..cs.len() {
                for j in i + 1..cs.len() {
                    for (rule, items, detail) in pair_rewrites(&cs[i], &cs[j]) {
                        let mut new = Vec::with_capacity(cs.len() + 1);
                        for (k, c) in cs.iter().enumerate() {
                            if k == i {
                                new.extend(items.iter().cloned());
                            } else if k != j {
                                new.push(c.clone());
                            }
                        }
                        pairs.push((rule, FactorExpr::product(new), format!("children {i}, {j}: {detail}")));
                    }
                }
            }
            pairs.sort_by_key(|(rule, _, _)| *rule);
            out.extend(pairs);
        }
        Tensor(inner, TensorFactor::Matrix(n)) => {
            let n = *n;
            let nsq = int(n as i64 * n as i64);
            match &**inner {
                Lf(r) => {
                    let t = compress_rule(r, &nsq).expect("n ≥ 1");
                    out.push((Rule::Compression, Lf(t.clone()), format!("1 + ({r} - 1)/{n}^2 = {t}")));
                }
                R => out.push((Rule::RAbsorption, R, format!("R ⊗ M{n} = R"))),
                M(a) => out.push((Rule::MatrixArithmetic, M(a * n), format!("M{a} ⊗ M{n} = M{}", a * n))),
                C => out.push((Rule::MatrixArithmetic, M(n), format!("C ⊗ M{n} = M{n}"))),
                Tensor(x, TensorFactor::Matrix(a)) => out.push((
                    Rule::CompressionComposition,
                    FactorExpr::tensor((**x).clone(), TensorFactor::Matrix(a * n)),
                    format!("M{a} ⊗ M{n} = M{}", a * n),
                )),
                Compress(x, g) => {
                    let g2 = g * &nsq;
                    out.push((
                        Rule::CompressionComposition,
                        FactorExpr::compress((**x).clone(), g2.clone()),
                        format!("{} * {n}^2 = {}", fmt_rational(g), fmt_rational(&g2)),
                    ));
                }
                _ => {}
            }
            if n == 1 {
                out.push((Rule::TrivialCompression, (**inner).clone(), "M1".into()));
            }
        }
        Tensor(inner, TensorFactor::Lz2) => {
            if **inner == C {
                out.push((Rule::ScalarUnit, Lz2, "C ⊗ LZ2 = LZ2".into()));
            }
        }
        Compress(inner, g) => {
            match &**inner {
                Lf(r) => {
                    let t = compress_rule(r, g).expect("positive compression");
                    out.push((
                        Rule::Compression,
                        Lf(t.clone()),
                        format!("1 + ({r} - 1)/({}) = {t}", fmt_rational(g)),
                    ));
                }
                R => out.push((Rule::RAbsorption, R, format!("R_γ = R, γ² = {}", fmt_rational(g)))),
                Compress(x, g1) => {
                    let g2 = g1 * g;
                    out.push((
                        Rule::CompressionComposition,
                        FactorExpr::compress((**x).clone(), g2.clone()),
                        format!("{} * {} = {}", fmt_rational(g1), fmt_rational(g), fmt_rational(&g2)),
                    ));
                }
                Tensor(x, TensorFactor::Matrix(a)) => {
                    let g2 = int(*a as i64 * *a as i64) * g;
                    out.push((
                        Rule::CompressionComposition,
                        FactorExpr::compress((**x).clone(), g2.clone()),
                        format!("{a}^2 * {} = {}", fmt_rational(g), fmt_rational(&g2)),
                    ));
                }
                M(a) => {
                    if let Some(m) = exact_sqrt(&(int(*a as i64 * *a as i64) * g)) {
                        out.push((Rule::MatrixArithmetic, M(m), format!("{a}^2 * {} = {m}^2", fmt_rational(g))));
                    }
                }
                _ => {}
            }
            if g.is_one() {
                out.push((Rule::TrivialCompression, (**inner).clone(), "gsq = 1".into()));
            }
        }
        _ => {}
    }
    out
}

fn paths(e: &FactorExpr, prefix: &mut Vec<usize>, post_order: bool, out: &mut Vec<Vec<usize>>) {
    if !post_order {
        out.push(prefix.clone());
    }
    for (i, c) in e.children().into_iter().enumerate() {
        prefix.push(i);
        paths(c, prefix, post_order, out);
        prefix.pop();
    }
    if post_order {
        out.push(prefix.clone());
    }
}

fn step_at(e: &FactorExpr, path: Vec<usize>, (rule, after, detail): Local) -> Step {
    let before = e.at(&path).expect("path from traversal").clone();
    Step { rule, path, before, after, detail }
}

/// Every single-step rewrite of `e`, anywhere in the tree.
pub fn rewrites(e: &FactorExpr) -> Vec<Step> {
    let mut ps = Vec::new();
    paths(e, &mut Vec::new(), false, &mut ps);
    let mut out = Vec::new();
    for path in ps {
        let node = e.at(&path).expect("path from traversal");
        for local in local_rewrites(node) {
            out.push(step_at(e, path.clone(), local));
        }
    }
    out
}

fn first_innermost(e: &FactorExpr) -> Option<Step> {
    let mut ps = Vec::new();
    paths(e, &mut Vec::new(), true, &mut ps);
    ps.into_iter().find_map(|path| {
        let node = e.at(&path).expect("path from traversal");
        local_rewrites(node).into_iter().next().map(|l| step_at(e, path, l))
    })
}

fn apply(e: &FactorExpr, step: &Step) -> FactorExpr {
    e.replace_at(&step.path, step.after.clone()).expect("path from traversal")
}

/// Rewrites innermost-first with the first applicable rule until no rule
/// applies.
pub fn normalize(e: &FactorExpr) -> Normalized {
    let mut current = e.clone();
    let mut steps = Vec::new();
    while let Some(step) = first_innermost(&current) {
        current = apply(&current, &step);
        steps.push(step);
    }
    Normalized {
        canonical: current.is_canonical(),
        result: current.clone(),
        derivation: Derivation { input: e.clone(), steps, output: current },
    }
}

/// Replays a derivation: each step must rewrite the current subexpression at
/// its path by its named rule, and the last expression must be the output.
pub fn verify_derivation(d: &Derivation) -> Result<(), CalcError> {
    let mut current = d.input.clone();
    for (k, step) in d.steps.iter().enumerate() {
        let reject = |msg: &str| CalcError::Rejected { step: k, msg: msg.into() };
        let node = current.at(&step.path).ok_or_else(|| reject("path does not exist"))?;
        if *node != step.before {
            return Err(reject("left side does not match the current expression"));
        }
        let licensed = local_rewrites(node).into_iter().any(|(rule, after, _)| rule == step.rule && after == step.after);
        if !licensed {
            return Err(reject(&format!("{:?} does not rewrite {} to {}", step.rule, step.before, step.after)));
        }
        current = apply(&current, step);
    }
    if current != d.output {
        return Err(CalcError::Rejected { step: d.steps.len(), msg: "final expression differs from output".into() });
    }
    Ok(())
}

pub const DEFAULT_STATE_LIMIT: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Exploration {
    pub states: usize,
    /// Sorted, deduplicated.
    pub normal_forms: Vec<FactorExpr>,
    /// False when the state limit cut the search short.
    pub complete: bool,
}

impl Exploration {
    pub fn confluent(&self) -> bool {
        self.complete && self.normal_forms.len() == 1
    }
}

/// Follows every rewrite order breadth-first and collects the normal forms.
pub fn explore(e: &FactorExpr, state_limit: usize) -> Exploration {
    let mut seen: HashSet<FactorExpr> = HashSet::new();
    let mut queue = VecDeque::new();
    let mut normal = Vec::new();
    seen.insert(e.clone());
    queue.push_back(e.clone());
    let mut complete = true;
    while let Some(cur) = queue.pop_front() {
        let next = rewrites(&cur);
        if next.is_empty() {
            normal.push(cur);
            continue;
        }
        for step in next {
            let n = apply(&cur, &step);
            if seen.contains(&n) {
                continue;
            }
            if seen.len() >= state_limit {
                complete = false;
                continue;
            }
            seen.insert(n.clone());
            queue.push_back(n);
        }
    }
    normal.sort();
    normal.dedup();
    Exploration { states: seen.len(), normal_forms: normal, complete }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn norm(text: &str) -> Normalized {
        normalize(&parse(text).unwrap())
    }

    fn result(text: &str) -> String {
        norm(text).result.to_string()
    }

    #[test]
    fn canonical_examples() {
        assert_eq!(result("LF(2) * LF(3)"), "LF(5)");
        assert_eq!(result("compress(LF(2), gsq=1/4)"), "LF(5)");
        assert_eq!(result("tensor(LF(5), M2)"), "LF(2)");
        assert_eq!(result("R * R"), "LF(2)");
        assert_eq!(result("LZ * LZ"), "LF(2)");
        assert_eq!(result("LZ * R"), "LF(2)");
        assert_eq!(result("LF(2) * LF(inf)"), "LF(inf)");
        assert_eq!(result("tensor(R, M3)"), "R");
        assert_eq!(result("compress(R, gsq=1/3)"), "R");
        assert_eq!(result("tensor(tensor(M2, M3), M1)"), "M6");
        assert_eq!(result("compress(M4, gsq=1/4)"), "M2");
        assert_eq!(result("C * C"), "C");
        assert_eq!(result("LF(3/2) * C"), "LF(3/2)");
        assert_eq!(result("compress(compress(LF(2), gsq=1/2), gsq=1/2)"), "LF(5)");
        // L(Z2) * L(Z2) is L(Z)⊗M2
        assert_eq!(result("LZ2 * LZ2"), "tensor(LZ, M2)");
        assert_eq!(result("M2 * M2"), "LF(3/2)");
        assert!(norm("R * R").canonical);
        assert!(!norm("LZ2 * LZ2").canonical);
    }

    #[test]
    fn two_paths_for_matrix_pair() {
        let e = parse("tensor(R, M2) * tensor(R, M2)").unwrap();
        let n = normalize(&e);
        assert_eq!(n.result.to_string(), "LF(2)");
        assert!(n.derivation.steps.iter().all(|s| s.rule != Rule::MatrixPair));
        // the other order: the matrix-pair rule at the root first
        let first = rewrites(&e).into_iter().find(|s| s.rule == Rule::MatrixPair).unwrap();
        assert_eq!(first.after.to_string(), "tensor(R * R * LF(3), M2)");
        let n2 = normalize(&first.after);
        assert_eq!(n2.result.to_string(), "LF(2)");
        assert_eq!(result("tensor(R * R * LF(3), M2)"), "LF(2)");
        let ex = explore(&e, DEFAULT_STATE_LIMIT);
        assert!(ex.confluent(), "{ex:?}");
    }

    #[test]
    fn matrix_and_symmetry_instance() {
        let n = norm("R * tensor(R, LZ2)");
        assert!(n.derivation.steps.iter().any(|s| s.rule == Rule::MatrixAndSymmetry));
        assert_eq!(n.result, FactorExpr::lf(int(2)).unwrap());
    }

    #[test]
    fn certificates_replay() {
        for text in ["R * R", "tensor(R, M2) * tensor(R, M2)", "compress(LF(2) * R, gsq=2/3) * LZ2"] {
            let n = norm(text);
            verify_derivation(&n.derivation).unwrap();
            let mut bad = n.derivation.clone();
            if let Some(s) = bad.steps.last_mut() {
                s.after = FactorExpr::lf(rat(11, 2)).unwrap();
                bad.output = bad.steps.last().unwrap().after.clone();
            }
            assert!(verify_derivation(&bad).is_err(), "{text}");
        }
    }

    #[test]
    fn irreducible_stays() {
        let n = norm("LZ2 * tensor(LZ, M3)");
        assert!(!n.canonical);
        assert!(n.derivation.steps.is_empty());
        assert_eq!(norm("LZ").result, FactorExpr::Lz);
        assert!(!norm("LZ").canonical);
    }

    #[test]
    fn explorer_limit() {
        let e = parse("LF(2) * LF(3) * LF(4) * LF(5) * R").unwrap();
        let ex = explore(&e, 5);
        assert!(!ex.complete);
        let ex = explore(&e, DEFAULT_STATE_LIMIT);
        assert!(ex.confluent());
        assert_eq!(ex.normal_forms[0].to_string(), "LF(15)");
    }
}
