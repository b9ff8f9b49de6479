//! The registered checks. Each one reads its parameters, runs the library
//! routine over the requested sweep and returns counters plus serialized
//! counterexamples.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use toysht::charts::{
    all_matrices, all_rational_charts, chart_equivalence_check, predicted_non_transversal, rank_le1,
    transversality_check, ChartError,
};
use toysht::divisors::{
    is_principal_pair, partial_frobenius_divisor_pullback_check, radon_backward, radon_forward,
    schubert_decomposition_check, DivisorError, HoroDivisor, HoroType, Incidence, PartialFrobenius,
};
use toysht::linalg::{echelonize, enumerate_grassmannian, gauss_binomial};
use toysht::tate::{random_zero_sum, Chain, FiniteTateModel, Side, TateError, TatePair};
use toysht::toysht::{
    dichotomy_check, enumerate_left_flags, enumerate_right_flags, enumerate_toysht, partial_frobenius_minus,
    partial_frobenius_plus, ToyShtError,
};
use toysht::{Budget, Elem, Field, FieldError, LinalgError, PAdicRational, Scalars, Subspace};

use crate::{CliError, Mode, Params};

#[derive(Debug, Error)]
pub(crate) enum CheckError {
    #[error(transparent)]
    Param(#[from] CliError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    ToySht(#[from] ToyShtError),
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error(transparent)]
    Divisor(#[from] DivisorError),
    #[error(transparent)]
    Tate(#[from] TateError),
}

pub(crate) struct Outcome {
    pub mode: Mode,
    pub counters: BTreeMap<String, u64>,
    pub counterexamples: Vec<Value>,
    /// Items examined; zero makes the verdict vacuous.
    pub scanned: u64,
}

impl Outcome {
    fn new(mode: Mode) -> Outcome {
        Outcome { mode, counters: BTreeMap::new(), counterexamples: Vec::new(), scanned: 0 }
    }

    fn count(&mut self, key: &str, by: u64) {
        *self.counters.entry(key.to_string()).or_insert(0) += by;
    }

    fn fail(&mut self, v: Value) {
        self.counterexamples.push(v);
    }

    fn finish(mut self) -> Outcome {
        self.counters.insert("counterexamples".into(), self.counterexamples.len() as u64);
        self
    }
}

type Runner = fn(&Params, u64) -> Result<Outcome, CheckError>;

pub(crate) struct Check {
    pub name: &'static str,
    pub mode: Mode,
    pub keys: &'static [&'static str],
    pub run: Runner,
}

const FIELD_KEYS: [&str; 4] = ["p", "e", "m", "budget"];

const REGISTRY: &[Check] = &[
    Check { name: "chart_equivalence", mode: Mode::Exhaustive, keys: &["N", "n"], run: chart_equivalence },
    Check { name: "schubert_decomposition", mode: Mode::Probabilistic, keys: &["N", "n", "reps", "w_index"], run: schubert_decomposition },
    Check { name: "radon_duality", mode: Mode::Exhaustive, keys: &["N", "n", "trials"], run: radon_duality },
    Check { name: "dichotomy", mode: Mode::Exhaustive, keys: &["N", "n"], run: dichotomy },
    Check { name: "partial_frobenius_composition", mode: Mode::Exhaustive, keys: &["N", "n"], run: partial_frobenius_composition },
    Check { name: "radon_fourier_square", mode: Mode::Exhaustive, keys: &["D", "c", "inner", "outer", "trials"], run: radon_fourier_square },
    Check { name: "picard_relation", mode: Mode::Exhaustive, keys: &["D", "c"], run: picard_relation },
    Check { name: "gamma_identity", mode: Mode::Exhaustive, keys: &["D", "c", "trials"], run: gamma_identity },
    Check { name: "canonical_preimage", mode: Mode::Exhaustive, keys: &["D", "c", "trials"], run: canonical_preimage },
    Check { name: "transversality_locus", mode: Mode::Exhaustive, keys: &["s", "t"], run: transversality_locus },
    Check { name: "pullback_multiplicity", mode: Mode::Probabilistic, keys: &["N", "n", "horo", "direction", "reps"], run: pullback_multiplicity },
    Check { name: "trivial_locus_count", mode: Mode::Exhaustive, keys: &["N", "n"], run: trivial_locus_count },
    Check { name: "grassmannian_count", mode: Mode::Exhaustive, keys: &["N", "n"], run: grassmannian_count },
    Check { name: "fourier_pairs", mode: Mode::Exhaustive, keys: &["D", "c"], run: fourier_pairs },
    Check { name: "schubert_linear_equivalence", mode: Mode::Exhaustive, keys: &["D", "c", "count"], run: schubert_linear_equivalence },
];

/// Names of all registered checks.
pub const CHECKS: [&str; 15] = [
    "chart_equivalence",
    "schubert_decomposition",
    "radon_duality",
    "dichotomy",
    "partial_frobenius_composition",
    "radon_fourier_square",
    "picard_relation",
    "gamma_identity",
    "canonical_preimage",
    "transversality_locus",
    "pullback_multiplicity",
    "trivial_locus_count",
    "grassmannian_count",
    "fourier_pairs",
    "schubert_linear_equivalence",
];

pub(crate) fn lookup(name: &str) -> Result<&'static Check, CliError> {
    REGISTRY.iter().find(|c| c.name == name).ok_or_else(|| CliError::UnknownCheck(name.to_string()))
}

pub(crate) fn validate(check: &Check, params: &Params) -> Result<(), CliError> {
    let allowed: Vec<&str> = check.keys.iter().copied().chain(FIELD_KEYS).collect();
    params.check_keys(&allowed)
}

fn invalid(key: &str, reason: &str) -> CheckError {
    CheckError::Param(CliError::InvalidParam { key: key.into(), reason: reason.into() })
}

fn field(params: &Params) -> Result<Field, CheckError> {
    Ok(Field::new(params.get_u32("p", Some(2))?, params.get_u32("e", Some(1))?, params.get_u32("m", Some(1))?)?)
}

/// The `budget` parameter, else `TOYSHT_BUDGET`, else the default.
fn budget(params: &Params) -> Result<Budget, CheckError> {
    match params.get("budget") {
        Some(_) => Ok(Budget(params.get_u64("budget", None)?)),
        None => Ok(Budget::from_env()),
    }
}

fn big_to_u64(x: &BigUint) -> u64 {
    u64::try_from(x).unwrap_or(u64::MAX)
}

/// `(N, n)` with `1 ≤ n ≤ N − 1`.
fn ambient_and_rank(params: &Params) -> Result<(usize, usize), CheckError> {
    let big_n = params.get_usize("N", None)?;
    let n = params.get_usize("n", None)?;
    if n == 0 || n >= big_n {
        return Err(invalid("n", "need 1 ≤ n ≤ N − 1"));
    }
    Ok((big_n, n))
}

fn chart_equivalence(params: &Params, _seed: u64) -> Result<Outcome, CheckError> {
    let f = field(params)?;
    let (big_n, n) = ambient_and_rank(params)?;
    let budget = budget(params)?;
    let charts = all_rational_charts(&f, big_n, n, budget)?;
    let reports = charts
        .par_iter()
        .map(|c| chart_equivalence_check(&f, c, budget).map(|r| (c, r)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = Outcome::new(Mode::Exhaustive);
    out.count("charts", charts.len() as u64);
    for (c, r) in reports {
        out.count("matrices", r.matrices);
        out.count("toy_shtukas", r.toy_shtukas);
        out.scanned += r.matrices;
        for a in r.counterexamples {
            out.fail(json!({ "chart_w": c.w(), "chart_wp": c.wp(), "matrix": a }));
        }
    }
    Ok(out.finish())
}

fn trivial_locus_count(params: &Params, _seed: u64) -> Result<Outcome, CheckError> {
    let f = field(params)?;
    let (big_n, n) = ambient_and_rank(params)?;
    let points = enumerate_toysht(&f, big_n, n, false, budget(params)?)?;
    let mut out = Outcome::new(Mode::Exhaustive);
    let trivial: Vec<_> = points.iter().filter(|p| p.is_trivial()).collect();
    let expected = big_to_u64(&gauss_binomial(big_n, n, f.q() as u64));
    out.count("toy_points", points.len() as u64);
    out.count("trivial", trivial.len() as u64);
    out.count("expected", expected);
    out.scanned = points.len() as u64;
    for p in &trivial {
        if !p.l().is_rational(&f) {
            out.fail(json!({ "trivial_but_not_rational": p.l() }));
        }
    }
    if trivial.len() as u64 != expected {
        out.fail(json!({ "trivial": trivial.len(), "expected": expected }));
    }
    Ok(out.finish())
}

fn grassmannian_count(params: &Params, _seed: u64) -> Result<Outcome, CheckError> {
    let f = field(params)?;
    let big_n = params.get_usize("N", None)?;
    let n = params.get_usize("n", None)?;
    if n > big_n {
        return Err(invalid("n", "need n ≤ N"));
    }
    let budget = budget(params)?;
    let mut out = Outcome::new(Mode::Exhaustive);
    for (label, scalars, q) in
        [("base", Scalars::Base, f.q() as u64), ("extension", Scalars::Extension, f.size() as u64)]
    {
        let count = enumerate_grassmannian(&f, big_n, n, scalars, budget)?.count() as u64;
        let expected = big_to_u64(&gauss_binomial(big_n, n, q));
        out.count(&format!("{label}_count"), count);
        out.count(&format!("{label}_expected"), expected);
        out.scanned += count;
        if count != expected {
            out.fail(json!({ "scalars": label, "count": count, "expected": expected }));
        }
    }
    Ok(out.finish())
}

fn dichotomy(params: &Params, _seed: u64) -> Result<Outcome, CheckError> {
    let f = field(params)?;
    let (big_n, n) = ambient_and_rank(params)?;
    let budget = budget(params)?;
    let points = enumerate_toysht(&f, big_n, n, false, budget)?;
    let mut ws: Vec<Subspace> = Vec::new();
    for k in 0..=big_n {
        ws.extend(enumerate_grassmannian(&f, big_n, k, Scalars::Base, budget)?);
    }
    let results: Vec<(u64, u64, Vec<Value>)> = points
        .par_iter()
        .map(|p| {
            let (mut sub, mut quot, mut bad) = (0, 0, Vec::new());
            for w in &ws {
                match dichotomy_check(&f, p.l(), w) {
                    Ok(o) => {
                        sub += o.sub_fixed as u64;
                        quot += o.quot_fixed as u64;
                    }
                    Err(e) => bad.push(json!({ "l": p.l(), "w": w, "error": e.to_string() })),
                }
            }
            (sub, quot, bad)
        })
        .collect();
    let mut out = Outcome::new(Mode::Exhaustive);
    out.count("toy_points", points.len() as u64);
    out.count("rational_subspaces", ws.len() as u64);
    out.scanned = (points.len() * ws.len()) as u64;
    out.count("pairs", out.scanned);
    for (sub, quot, bad) in results {
        out.count("intersection_fixed", sub);
        out.count("quotient_fixed", quot);
        bad.into_iter().for_each(|b| out.fail(b));
    }
    Ok(out.finish())
}

fn schubert_decomposition(params: &Params, seed: u64) -> Result<Outcome, CheckError> {
    let f = field(params)?;
    let (big_n, n) = ambient_and_rank(params)?;
    let reps = params.get_usize("reps", Some(5))?;
    let budget = budget(params)?;
    let mut ws: Vec<Subspace> = enumerate_grassmannian(&f, big_n, big_n - n, Scalars::Base, budget)?.collect();
    if params.get("w_index").is_some() {
        let i = params.get_usize("w_index", None)?;
        if i >= ws.len() {
            return Err(invalid("w_index", "out of range"));
        }
        ws = vec![ws.swap_remove(i)];
    }
    let reports = ws
        .par_iter()
        .enumerate()
        .map(|(i, w)| schubert_decomposition_check(&f, w, reps, seed.wrapping_add(i as u64), budget).map(|r| (w, r)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = Outcome::new(if reps > 0 { Mode::Probabilistic } else { Mode::Exhaustive });
    out.count("subspaces_w", ws.len() as u64);
    for (w, r) in reports {
        out.scanned += r.points;
        out.count("points", r.points);
        out.count("schubert_points", r.schubert_points);
        out.count("deficit2_points", r.deficit2_points);
        out.count("components_probed", r.probes.len() as u64);
        for l in &r.set_counterexamples {
            out.fail(json!({ "w": w, "set_mismatch": l }));
        }
        for l in &r.deficit2_unexplained {
            out.fail(json!({ "w": w, "deficit2_unexplained": l }));
        }
        for p in &r.probes {
            out.count("probe_repetitions", p.orders.len() as u64);
            out.count("probe_retries", p.retries);
            if p.orders.iter().any(|o| o.finite() != Some(1)) {
                out.fail(json!({ "w": w, "component": p.component, "orders": p.orders }));
            }
        }
    }
    Ok(out.finish())
}

fn radon_duality(params: &Params, seed: u64) -> Result<Outcome, CheckError> {
    let f = field(params)?;
    let (big_n, n) = ambient_and_rank(params)?;
    let trials = params.get_usize("trials", Some(200))?;
    let inc = Incidence::new(&f, big_n);
    let p = f.p();
    let mut out = Outcome::new(Mode::Exhaustive);
    let round_trip = |out: &mut Outcome, mu: Vec<PAdicRational>| -> Result<(), CheckError> {
        let lambda = radon_forward(&inc, &mu, n)?;
        let back = radon_backward(&inc, &lambda, n)?;
        let forth = radon_forward(&inc, &radon_backward(&inc, &mu, n)?, n)?;
        let principal = is_principal_pair(&inc, &HoroDivisor { n, lambda, mu: mu.clone() });
        if back != mu || forth != mu || !principal {
            out.fail(json!({ "mu": mu.iter().map(|x| x.to_string()).collect::<Vec<_>>() }));
        }
        out.scanned += 1;
        Ok(())
    };
    // δ_0 − δ_j span the zero-sum space, so these settle the identity by linearity.
    for j in 1..inc.len() {
        let mut mu = vec![PAdicRational::zero(p); inc.len()];
        mu[0] = PAdicRational::one(p);
        mu[j] = PAdicRational::from_int(-1, p);
        round_trip(&mut out, mu)?;
        out.count("basis_checks", 1);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        round_trip(&mut out, random_zero_sum(p, inc.len(), 10, &mut rng))?;
        out.count("random_trials", 1);
    }
    out.count("points", inc.len() as u64);
    Ok(out.finish())
}

fn partial_frobenius_composition(params: &Params, _seed: u64) -> Result<Outcome, CheckError> {
    let f = field(params)?;
    let (big_n, n) = ambient_and_rank(params)?;
    let budget = budget(params)?;
    let mut out = Outcome::new(Mode::Exhaustive);
    for flag in enumerate_right_flags(&f, big_n, n, budget)? {
        let image = partial_frobenius_plus(&f, &flag)?;
        if partial_frobenius_minus(&f, &image)? != flag.frobenius(&f) {
            out.fail(json!({ "right_flag": flag }));
        }
        out.count("right_flags", 1);
        out.scanned += 1;
    }
    for flag in enumerate_left_flags(&f, big_n, n, budget)? {
        let image = partial_frobenius_minus(&f, &flag)?;
        if partial_frobenius_plus(&f, &image)? != flag.frobenius(&f) {
            out.fail(json!({ "left_flag": flag }));
        }
        out.count("left_flags", 1);
        out.scanned += 1;
    }
    Ok(out.finish())
}

fn transversality_locus(params: &Params, _seed: u64) -> Result<Outcome, CheckError> {
    let f = field(params)?;
    let s = params.get_usize("s", None)?;
    let t = params.get_usize("t", None)?;
    if s == 0 || t == 0 {
        return Err(invalid("s", "matrix shape must be positive"));
    }
    budget(params)?.check(&BigUint::from(f.size()).pow((s * t) as u32))?;
    let scalars: Vec<Elem> = f.elements().collect();
    let mut out = Outcome::new(Mode::Exhaustive);
    for a in all_matrices(s, t, &scalars).filter(|a| rank_le1(&f, a)) {
        out.count("rank_le1_points", 1);
        for i in 0..s {
            for j in 0..t {
                if !a[(i, j)].is_zero() {
                    continue;
                }
                let got = transversality_check(&f, &a, i, j)?;
                out.scanned += 1;
                if !got {
                    out.count("non_transversal", 1);
                }
                if got == predicted_non_transversal(&a, i, j) {
                    out.fail(json!({ "matrix": a, "row": i, "col": j, "transversal": got }));
                }
            }
        }
    }
    out.count("hyperplane_probes", out.scanned);
    Ok(out.finish())
}

fn pullback_multiplicity(params: &Params, seed: u64) -> Result<Outcome, CheckError> {
    let f = field(params)?;
    let big_n = params.get_usize("N", None)?;
    let n = params.get_usize("n", None)?;
    let horo = match params.get_str("horo", "J")? {
        "H" => HoroType::H,
        "J" => HoroType::J,
        _ => return Err(invalid("horo", "expected H or J")),
    };
    let direction = match params.get_str("direction", "plus")? {
        "plus" => PartialFrobenius::Plus,
        "minus" => PartialFrobenius::Minus,
        _ => return Err(invalid("direction", "expected plus or minus")),
    };
    let ok_rank = match direction {
        PartialFrobenius::Plus => n < big_n,
        PartialFrobenius::Minus => n >= 1 && n <= big_n,
    };
    if !ok_rank {
        return Err(invalid("n", "no flags of this rank"));
    }
    let reps = params.get_usize("reps", Some(5))?;
    let r = partial_frobenius_divisor_pullback_check(&f, big_n, n, horo, direction, reps, seed, budget(params)?)?;
    let mut out = Outcome::new(Mode::Probabilistic);
    out.count("flags", r.flags);
    out.count("generic_points", r.generic_points);
    out.count("expected_order", r.expected_ratio as u64);
    out.count("probe_repetitions", r.probes.len() as u64);
    out.count("probe_retries", r.retries);
    for (t, order) in r.probes.iter().map(|(_, t)| t).enumerate() {
        out.count(&format!("order_{t}"), order.finite().map_or(u64::MAX, |k| k as u64));
    }
    out.scanned = r.generic_points;
    for (flag, c) in &r.set_mismatches {
        out.fail(json!({ "set_mismatch": flag, "component": c }));
    }
    if !r.probes_pass() {
        out.fail(json!({ "probes": r.probes, "expected": r.expected_ratio }));
    }
    if !r.composition_ok {
        out.fail(json!({ "composition": "partial Frobenius composite differs from Frobenius on a probe curve" }));
    }
    Ok(out.finish())
}

/// A Tate model together with nested random lattices of the requested
/// dimensions, drawn as spans of leading rows of a random invertible matrix.
fn tate_setup(params: &Params, seed: u64, dims: &[usize]) -> Result<(FiniteTateModel, Vec<Subspace>), CheckError> {
    let f = field(params)?;
    if f.m() != 1 {
        return Err(invalid("m", "Tate models need m = 1"));
    }
    let d = params.get_usize("D", None)?;
    let c = params.get_i64("c", None)?;
    if d == 0 || d > 8 {
        return Err(invalid("D", "need 1 ≤ D ≤ 8"));
    }
    budget(params)?.check(&BigUint::from(f.q()).pow(d as u32))?;
    let model = FiniteTateModel::new(&f, d, c)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = loop {
        let rows: Vec<Vec<Elem>> =
            (0..d).map(|_| (0..d).map(|_| f.elem(rng.gen_range(0..f.q())).expect("below q")).collect()).collect();
        if echelonize(&f, &rows, d)?.dim() == d {
            break rows;
        }
    };
    let lattices = dims
        .iter()
        .map(|&k| {
            if k > d {
                return Err(invalid("D", "lattice dimension exceeds D"));
            }
            Ok(echelonize(&f, &rows[..k], d)?)
        })
        .collect::<Result<Vec<_>, CheckError>>()?;
    Ok((model, lattices))
}

/// A chain `W₋₁ ⊂ W₀ ⊂ W₁` with indices `-1, 0, 1`.
fn tate_chain(params: &Params, seed: u64) -> Result<(FiniteTateModel, Chain), CheckError> {
    let d = params.get_i64("D", None)?;
    let c = params.get_i64("c", None)?;
    if !(1..=d - 1).contains(&-c) {
        return Err(invalid("c", "need 1 ≤ −c ≤ D − 1 for a chain of indices −1, 0, 1"));
    }
    let k = (-c) as usize;
    let (model, l) = tate_setup(params, seed, &[k - 1, k, k + 1])?;
    let chain = model.chain([l[0].clone(), l[1].clone(), l[2].clone()])?;
    Ok((model, chain))
}

fn radon_fourier_square(params: &Params, seed: u64) -> Result<Outcome, CheckError> {
    let inner = params.get_usize("inner", None)?;
    let outer = params.get_usize("outer", None)?;
    if inner >= outer {
        return Err(invalid("inner", "need inner < outer"));
    }
    let c = params.get_i64("c", None)?;
    if inner as i64 + c > -2 || outer as i64 + c < 2 {
        return Err(invalid("c", "need n(inner) ≤ −2 and n(outer) ≥ 2"));
    }
    let trials = params.get_usize("trials", Some(100))?;
    let (m, l) = tate_setup(params, seed, &[inner, outer])?;
    let quot = m.quotient(Side::Primal, &l[0], &l[1])?;
    let mut out = Outcome::new(Mode::Exhaustive);
    let p = m.field().p();
    let len = quot.incidence().len();
    for j in 1..len {
        let mut g = vec![PAdicRational::zero(p); len];
        g[0] = PAdicRational::one(p);
        g[j] = PAdicRational::from_int(-1, p);
        let lhs = m.fourier(&m.eps_extend(&quot, &g)?)?;
        let rhs = m.eps_extend_dual(&quot, &m.radon_finite(&quot, &g)?)?;
        if lhs != rhs {
            out.fail(json!({ "g": g.iter().map(|x| x.to_string()).collect::<Vec<_>>() }));
        }
        out.count("basis_checks", 1);
        out.scanned += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let r = m.radon_fourier_check(&quot, trials, &mut rng)?;
    out.count("random_trials", r.trials);
    out.scanned += r.trials;
    for g in r.failures {
        out.fail(json!({ "g": g.iter().map(|x| x.to_string()).collect::<Vec<_>>() }));
    }
    out.count("quotient_dim", quot.dim() as u64);
    Ok(out.finish())
}

fn fourier_pairs(params: &Params, seed: u64) -> Result<Outcome, CheckError> {
    let (m, chain) = tate_chain(params, seed)?;
    let f = m.field().clone();
    let [wm, w0, w1] = chain.lattices().clone();
    let p = f.p();
    let q = PAdicRational::q_power(f.e(), 1, p);
    let one = PAdicRational::one(p);
    let qm1 = q - one;
    let mut out = Outcome::new(Mode::Exhaustive);
    let fact = |out: &mut Outcome, name: &str, ok: bool| {
        out.count("facts", 1);
        out.scanned += 1;
        if !ok {
            out.fail(json!({ "fact": name }));
        }
    };
    let a_src = m.indicator_difference(Side::Primal, &w1, &w0);
    let b_src = m.indicator(Side::Primal, &wm).scale(-q).add(&m.indicator(Side::Primal, &w0));
    fact(&mut out, "a(1_{W1-W0}) = q-1", m.integrate(&a_src) == qm1);
    fact(&mut out, "b(1_{W1-W0}) = 0", a_src.at_zero().is_zero());
    fact(&mut out, "a(-q 1_{W-1} + 1_{W0}) = 0", m.integrate(&b_src).is_zero());
    fact(&mut out, "b(-q 1_{W-1} + 1_{W0}) = -(q-1)", b_src.at_zero() == -qm1);
    let a_expected = m.indicator(Side::Dual, &w1.perp(&f)).scale(q).sub(&m.indicator(Side::Dual, &w0.perp(&f)));
    fact(&mut out, "Four(1_{W1-W0}) = q 1_{W1^perp} - 1_{W0^perp}", m.fourier(&a_src)? == a_expected);
    let b_expected = m.indicator_difference(Side::Dual, &wm.perp(&f), &w0.perp(&f)).scale(-one);
    fact(&mut out, "Four(-q 1_{W-1} + 1_{W0}) = -1_{W-1^perp - W0^perp}", m.fourier(&b_src)? == b_expected);
    for (i, w) in [wm, w0, w1].iter().enumerate() {
        let scale = PAdicRational::q_power(f.e(), m.index(Side::Primal, w) as i32, p);
        let ok = m.fourier(&m.indicator(Side::Primal, w))? == m.indicator(Side::Dual, &w.perp(&f)).scale(scale);
        fact(&mut out, &format!("Four(1_W) = q^n(W) 1_(W^perp) for W{}", i as i64 - 1), ok);
    }
    Ok(out.finish())
}

fn picard_relation(params: &Params, seed: u64) -> Result<Outcome, CheckError> {
    let (m, chain) = tate_chain(params, seed)?;
    let mut out = Outcome::new(Mode::Exhaustive);
    out.scanned = 1;
    if !m.picard_relation_check(&chain)? {
        let lb = m.line_bundle_pairs(&chain);
        out.fail(json!({ "relation": "ell_b - ell_a - (q-1) ell_det", "ell_det": lb.ell_det }));
    }
    Ok(out.finish())
}

fn gamma_identity(params: &Params, seed: u64) -> Result<Outcome, CheckError> {
    let (m, chain) = tate_chain(params, seed)?;
    let trials = params.get_usize("trials", Some(50))?;
    let p = m.field().p();
    let mut out = Outcome::new(Mode::Exhaustive);
    let check = |out: &mut Outcome, f: toysht::tate::TateFn| -> Result<(), CheckError> {
        out.scanned += 1;
        if !m.gamma_identity_check(&f, &chain)? {
            out.fail(json!({ "f": f.values.iter().map(|x| x.to_string()).collect::<Vec<_>>() }));
        }
        Ok(())
    };
    // δ at zero and the indicators of single punctured lines span the
    // invariant functions, so these settle the identity by linearity.
    let mut delta = m.zero_fn(Side::Primal);
    delta.values[0] = PAdicRational::one(p);
    check(&mut out, delta)?;
    for line in 0..m.lines().len() {
        let f = m.from_fn(Side::Primal, |v| {
            let idx = m.vector_index(v);
            if m.line_of(idx) == Some(line) { PAdicRational::one(p) } else { PAdicRational::zero(p) }
        });
        check(&mut out, f)?;
    }
    out.count("basis_checks", out.scanned);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9a11a);
    for _ in 0..trials {
        check(&mut out, m.random_invariant(Side::Primal, 9, &mut rng))?;
    }
    out.count("random_trials", trials as u64);
    Ok(out.finish())
}

fn canonical_preimage(params: &Params, seed: u64) -> Result<Outcome, CheckError> {
    let (m, chain) = tate_chain(params, seed)?;
    let trials = params.get_usize("trials", Some(10))?;
    let p = m.field().p();
    let mut out = Outcome::new(Mode::Exhaustive);
    let lb = m.line_bundle_pairs(&chain);
    let gens = [lb.ell_det.neg(), lb.ell_a, lb.ell_b];
    for (name, g) in ["schubert", "ell_a", "ell_b"].iter().zip(&gens) {
        out.scanned += 1;
        if !m.in_canonical_preimage(g)? {
            out.fail(json!({ "generator": name }));
        }
    }
    out.count("generators", 3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let coeffs: Vec<PAdicRational> = (0..3)
            .map(|_| PAdicRational::from_int(rng.gen_range(-9..=9), p) * PAdicRational::p_power(-rng.gen_range(0..3), p))
            .collect();
        let combo = gens
            .iter()
            .zip(&coeffs)
            .fold(TatePair { f1: m.zero_fn(Side::Dual), f2: m.zero_fn(Side::Primal) }, |acc, (g, &k)| acc.add(&g.scale(k)));
        out.scanned += 1;
        if !m.in_canonical_preimage(&combo)? {
            out.fail(json!({ "combination": coeffs.iter().map(|x| x.to_string()).collect::<Vec<_>>() }));
        }
        // moving f1 on one line of T* takes the pair out of the preimage
        let mut perturbed = combo.clone();
        let line = rng.gen_range(0..m.lines().len());
        for i in 1..m.len() {
            if m.line_of(i) == Some(line) {
                perturbed.f1.values[i] += PAdicRational::one(p);
            }
        }
        if m.in_canonical_preimage(&perturbed)? {
            out.fail(json!({ "perturbation_accepted": line }));
        }
    }
    out.count("combinations", trials as u64);
    Ok(out.finish())
}

fn schubert_linear_equivalence(params: &Params, seed: u64) -> Result<Outcome, CheckError> {
    let d = params.get_usize("D", None)?;
    let c = params.get_i64("c", None)?;
    let count = params.get_usize("count", Some(3))?;
    if !(0..=d as i64).contains(&-c) {
        return Err(invalid("c", "need 0 ≤ −c ≤ D so that n(W) = 0 is attainable"));
    }
    let k = (-c) as usize;
    let (m, _) = tate_setup(params, seed, &[])?;
    let all: Vec<Subspace> = enumerate_grassmannian(m.field(), d, k, Scalars::Base, budget(params)?)?.collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = Vec::new();
    while picked.len() < count.min(all.len()) {
        let i = rng.gen_range(0..all.len());
        if !picked.contains(&i) {
            picked.push(i);
        }
    }
    picked.sort_unstable();
    let pairs = picked.iter().map(|&i| m.schubert_pair(&all[i])).collect::<Result<Vec<_>, _>>()?;
    let mut out = Outcome::new(Mode::Exhaustive);
    out.count("subspaces", pairs.len() as u64);
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            out.scanned += 1;
            if !m.is_principal(&pairs[i].sub(&pairs[j]))? {
                out.fail(json!({ "w1": all[picked[i]], "w2": all[picked[j]] }));
            }
        }
    }
    out.count("differences", out.scanned);
    Ok(out.finish())
}
