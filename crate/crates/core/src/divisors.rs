//! Horospherical divisor coefficients on `P_{V*} ⊔ P_V`, the finite Radon
//! transform between them, and the Schubert and partial-Frobenius divisor
//! checks on toy shtukas.
//!
//! Hyperplanes are indexed by their annihilating line, so both coefficient
//! vectors share one [`ProjectiveSpace`] of rational lines.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::charts::{
    eq_contains_vector, eq_in_hyperplane, eq_schubert, probe_with_doubling, Chart, ChartError, ChartModel, ProbeCurve,
    SeriesMatrix, SeriesPoint, Valuation,
};
use crate::gf::Field;
use crate::linalg::{
    enumerate_grassmannian, induced_map, map_rank, Budget, LinalgError, ProjectiveSpace, Scalars, Subspace,
};
use crate::padic::PAdicRational;
use crate::toysht::{
    enumerate_left_flags, enumerate_right_flags, enumerate_toysht, partial_frobenius_minus, partial_frobenius_plus,
    FlagKind, FlagPoint, ToyShtError,
};

/// Attempts at finding a curve transversal to a component before giving up.
const MAX_DIRECTION_RETRIES: u64 = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DivisorError {
    #[error("coefficients sum to {0}, not zero")]
    SumNotZero(PAdicRational),
    #[error("expected {expected} coefficients, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("no curve transversal to the component found after {0} attempts")]
    NoTransversalCurve(u64),
    #[error("no chart contains the chosen point")]
    NoChart,
    #[error(transparent)]
    ToySht(#[from] ToyShtError),
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Rational points of `P(V)` with the line–hyperplane incidence.
#[derive(Clone, Debug)]
pub struct Incidence {
    p: u32,
    e: u32,
    pg: ProjectiveSpace,
    /// `lines_in[h]`: lines `J ⊂ H_h`.
    lines_in: Vec<Vec<usize>>,
    /// `hyperplanes_through[j]`: hyperplanes `H ⊃ J_j`.
    hyperplanes_through: Vec<Vec<usize>>,
}

impl Incidence {
    pub fn new(field: &Field, ambient: usize) -> Incidence {
        let pg = ProjectiveSpace::new(field, ambient);
        let lines_in = pg.incidence(field);
        let mut hyperplanes_through = vec![Vec::new(); pg.len()];
        for (h, js) in lines_in.iter().enumerate() {
            for &j in js {
                hyperplanes_through[j].push(h);
            }
        }
        Incidence { p: field.p(), e: field.e(), pg, lines_in, hyperplanes_through }
    }

    pub fn ambient_dim(&self) -> usize {
        self.pg.ambient_dim()
    }

    /// Number of rational lines (equivalently hyperplanes).
    pub fn len(&self) -> usize {
        self.pg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pg.is_empty()
    }

    pub fn projective_space(&self) -> &ProjectiveSpace {
        &self.pg
    }

    pub fn lines_in(&self, h: usize) -> &[usize] {
        &self.lines_in[h]
    }

    pub fn hyperplanes_through(&self, j: usize) -> &[usize] {
        &self.hyperplanes_through[j]
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn zero(&self) -> PAdicRational {
        PAdicRational::zero(self.p)
    }

    /// `q^k`.
    pub fn q_power(&self, k: i32) -> PAdicRational {
        PAdicRational::q_power(self.e, k, self.p)
    }

    fn sum(&self, xs: &[PAdicRational]) -> PAdicRational {
        xs.iter().fold(self.zero(), |a, &b| a + b)
    }

    fn check_len(&self, xs: &[PAdicRational]) -> Result<(), DivisorError> {
        if xs.len() != self.len() {
            return Err(DivisorError::DimensionMismatch { expected: self.len(), got: xs.len() });
        }
        Ok(())
    }

    fn check_zero_sum(&self, xs: &[PAdicRational]) -> Result<(), DivisorError> {
        self.check_len(xs)?;
        let s = self.sum(xs);
        if !s.is_zero() {
            return Err(DivisorError::SumNotZero(s));
        }
        Ok(())
    }
}

/// `λ_H = q^{n−(N−1)} Σ_{J ⊂ H} μ_J`.
pub fn radon_forward(inc: &Incidence, mu: &[PAdicRational], n: usize) -> Result<Vec<PAdicRational>, DivisorError> {
    inc.check_zero_sum(mu)?;
    let scale = inc.q_power(n as i32 - (inc.ambient_dim() as i32 - 1));
    Ok((0..inc.len())
        .map(|h| scale * inc.lines_in(h).iter().fold(inc.zero(), |a, &j| a + mu[j]))
        .collect())
}

/// `μ_J = q^{1−n} Σ_{H ⊃ J} λ_H`.
pub fn radon_backward(inc: &Incidence, lambda: &[PAdicRational], n: usize) -> Result<Vec<PAdicRational>, DivisorError> {
    inc.check_zero_sum(lambda)?;
    let scale = inc.q_power(1 - n as i32);
    Ok((0..inc.len())
        .map(|j| scale * inc.hyperplanes_through(j).iter().fold(inc.zero(), |a, &h| a + lambda[h]))
        .collect())
}

/// Coefficients of a horospherical divisor at level `n`: `lambda[h]` on the
/// hyperplane annihilated by line `h`, `mu[j]` on line `j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HoroDivisor {
    pub n: usize,
    pub lambda: Vec<PAdicRational>,
    pub mu: Vec<PAdicRational>,
}

impl HoroDivisor {
    pub fn zero(inc: &Incidence, n: usize) -> HoroDivisor {
        HoroDivisor { n, lambda: vec![inc.zero(); inc.len()], mu: vec![inc.zero(); inc.len()] }
    }

    pub fn add(&self, o: &HoroDivisor) -> HoroDivisor {
        assert_eq!(self.n, o.n);
        HoroDivisor {
            n: self.n,
            lambda: self.lambda.iter().zip(&o.lambda).map(|(&a, &b)| a + b).collect(),
            mu: self.mu.iter().zip(&o.mu).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn neg(&self) -> HoroDivisor {
        HoroDivisor { n: self.n, lambda: self.lambda.iter().map(|&a| -a).collect(), mu: self.mu.iter().map(|&a| -a).collect() }
    }

    /// Coefficientwise comparison.
    pub fn le(&self, o: &HoroDivisor) -> bool {
        self.lambda.iter().zip(&o.lambda).all(|(a, b)| a <= b) && self.mu.iter().zip(&o.mu).all(|(a, b)| a <= b)
    }

    /// `(λ, μ) ↦ (λ, qμ)` at level `n − 1`.
    pub fn shift_down(&self, inc: &Incidence) -> HoroDivisor {
        assert!(self.n >= 1);
        let q = inc.q_power(1);
        HoroDivisor { n: self.n - 1, lambda: self.lambda.clone(), mu: self.mu.iter().map(|&m| q * m).collect() }
    }
}

/// `Σ μ = 0` and `λ = radon_forward(μ)`.
pub fn is_principal_pair(inc: &Incidence, d: &HoroDivisor) -> bool {
    match radon_forward(inc, &d.mu, d.n) {
        Ok(lambda) => lambda == d.lambda,
        Err(_) => false,
    }
}

/// `rank(L → V/W) < dim L`, for `dim W = N − dim L`.
pub fn schubert_membership(field: &Field, l: &Subspace, w: &Subspace) -> Result<bool, DivisorError> {
    Ok(schubert_deficit(field, l, w)? > 0)
}

/// `dim L − rank(L → V/W)`.
pub fn schubert_deficit(field: &Field, l: &Subspace, w: &Subspace) -> Result<usize, DivisorError> {
    if l.dim() + w.dim() != l.ambient_dim() {
        return Err(DivisorError::DimensionMismatch { expected: l.ambient_dim() - l.dim(), got: w.dim() });
    }
    Ok(l.dim() - map_rank(field, &induced_map(field, l, w)?))
}

/// An irreducible horospherical component, by index into the projective
/// space of rational lines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Component {
    /// Subspaces inside the hyperplane annihilated by this line.
    Hyperplane(usize),
    /// Subspaces containing this line.
    Line(usize),
}

/// Local generators of a component on a family of subspaces given by rows.
pub fn component_equations(field: &Field, pg: &ProjectiveSpace, rows: &SeriesMatrix, c: Component) -> Vec<crate::charts::Series> {
    match c {
        Component::Hyperplane(h) => eq_in_hyperplane(field, rows, pg.point(h)),
        Component::Line(j) => eq_contains_vector(field, rows, pg.point(j)),
    }
}

/// Vanishing orders along the probes through one component.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentProbe {
    pub component: Component,
    /// Sampled points lying on this component and on no other one.
    pub generic_points: u64,
    /// Order of the divisor equation along each repetition.
    pub orders: Vec<Valuation>,
    /// Curves discarded for not meeting the component transversally.
    pub retries: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchubertReport {
    pub points: u64,
    pub schubert_points: u64,
    pub set_counterexamples: Vec<Subspace>,
    pub deficit2_points: u64,
    /// Points with `rank(L → V/W) ≤ n − 2` lying neither on a rational plane
    /// of `W` nor in a rational codimension-two space containing `W`.
    pub deficit2_unexplained: Vec<Subspace>,
    pub probes: Vec<ComponentProbe>,
}

impl SchubertReport {
    pub fn vacuous(&self) -> bool {
        self.points == 0
    }

    pub fn probes_pass(&self) -> bool {
        self.probes.iter().all(|p| p.orders.iter().all(|&o| o == Valuation::Finite(1)))
    }

    pub fn passes(&self) -> bool {
        self.set_counterexamples.is_empty() && self.deficit2_unexplained.is_empty() && self.probes_pass()
    }
}

/// Set-level check, over every nontrivial toy point, that the Schubert
/// locus of `W` is the union of the horospherical components `L ⊂ H ⊇ W` and
/// `W ⊇ J ⊂ L`; points of higher deficit are checked to lie on a codimension
/// two horospherical locus, and each component met by a point lying on it
/// alone is probed `repetitions` times for multiplicity one.
pub fn schubert_decomposition_check(
    field: &Field,
    w: &Subspace,
    repetitions: usize,
    seed: u64,
    budget: Budget,
) -> Result<SchubertReport, DivisorError> {
    let ambient = w.ambient_dim();
    if !w.is_rational(field) {
        return Err(ToyShtError::NotRational.into());
    }
    let n = ambient - w.dim();
    let inc = Incidence::new(field, ambient);
    let pg = inc.projective_space();
    let h_comps: Vec<usize> = (0..pg.len()).filter(|&h| pg.hyperplane(field, h).contains(field, w).unwrap()).collect();
    let j_comps: Vec<usize> = (0..pg.len()).filter(|&j| w.contains_vector(field, pg.point(j))).collect();
    let planes: Vec<Subspace> = if w.dim() >= 2 {
        enumerate_grassmannian(field, ambient, 2, Scalars::Base, budget)?.filter(|j| w.contains(field, j).unwrap()).collect()
    } else {
        Vec::new()
    };
    let corank2: Vec<Subspace> = if w.dim() + 2 <= ambient {
        enumerate_grassmannian(field, ambient, ambient - 2, Scalars::Base, budget)?
            .filter(|h| h.contains(field, w).unwrap())
            .collect()
    } else {
        Vec::new()
    };

    let mut report = SchubertReport::default();
    let mut single: std::collections::BTreeMap<Component, Vec<Subspace>> = Default::default();
    for p in enumerate_toysht(field, ambient, n, true, budget)? {
        let l = p.l();
        report.points += 1;
        let deficit = schubert_deficit(field, l, w)?;
        let on_h: Vec<Component> = h_comps
            .iter()
            .filter(|&&h| l.basis().row_vecs().iter().all(|r| field.dot(r, pg.point(h)).is_zero()))
            .map(|&h| Component::Hyperplane(h))
            .collect();
        let on_j: Vec<Component> =
            j_comps.iter().filter(|&&j| l.contains_vector(field, pg.point(j))).map(|&j| Component::Line(j)).collect();
        let on_any = !(on_h.is_empty() && on_j.is_empty());
        if deficit > 0 {
            report.schubert_points += 1;
        }
        if (deficit > 0) != on_any {
            report.set_counterexamples.push(l.clone());
        }
        if deficit >= 2 {
            report.deficit2_points += 1;
            let explained = planes.iter().any(|j| l.contains(field, j).unwrap())
                || corank2.iter().any(|h| h.contains(field, l).unwrap());
            if !explained {
                report.deficit2_unexplained.push(l.clone());
            }
        }
        if deficit == 1 && on_h.len() + on_j.len() == 1 {
            let c = on_h.first().or(on_j.first()).copied().expect("one component");
            single.entry(c).or_default().push(l.clone());
        }
    }

    if repetitions > 0 {
        let functionals = w.perp(field).basis().clone();
        let chart_spaces: Vec<Subspace> =
            enumerate_grassmannian(field, ambient, ambient - n, Scalars::Base, budget)?.collect();
        for (ci, (&comp, pts)) in single.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(ci as u64);
            let mut probe = ComponentProbe { component: comp, generic_points: pts.len() as u64, orders: Vec::new(), retries: 0 };
            for _ in 0..repetitions {
                let l = pts.choose(&mut rng).expect("nonempty");
                let chart = random_chart_containing(field, &chart_spaces, l, &mut rng)?;
                let (order, retries) = probe_transversal(field, pg, comp, &mut rng, |rng| {
                    let a0 = chart.coords(field, l).expect("chart contains l");
                    Ok(ProbeCurve::through(field, chart.clone(), ChartModel::Toy, a0, rng))
                }, |pt| match pt {
                    SeriesPoint::Toy(rows) => vec![eq_schubert(field, rows, &functionals)],
                    SeriesPoint::Flag { .. } => unreachable!("toy model"),
                })?;
                probe.retries += retries;
                probe.orders.push(order);
            }
            report.probes.push(probe);
        }
    }
    Ok(report)
}

/// A rational chart `(W_c, W′)` with `l ∩ W_c = 0`, `W_c` chosen uniformly.
fn random_chart_containing(
    field: &Field,
    spaces: &[Subspace],
    l: &Subspace,
    rng: &mut ChaCha8Rng,
) -> Result<Chart, DivisorError> {
    let good: Vec<&Subspace> = spaces.iter().filter(|w| w.intersect(field, l).map(|i| i.dim() == 0).unwrap_or(false)).collect();
    let w = good.choose(rng).ok_or(DivisorError::NoChart)?;
    Ok(Chart::standard(field, (*w).clone())?)
}

/// Draws curves until one meets `comp` with order exactly one, then returns
/// the order of `target` along it together with the number of discarded
/// curves.
fn probe_transversal(
    field: &Field,
    pg: &ProjectiveSpace,
    comp: Component,
    rng: &mut ChaCha8Rng,
    mut make: impl FnMut(&mut ChaCha8Rng) -> Result<ProbeCurve, DivisorError>,
    mut target: impl FnMut(&SeriesPoint) -> Vec<crate::charts::Series>,
) -> Result<(Valuation, u64), DivisorError> {
    for attempt in 0..MAX_DIRECTION_RETRIES {
        let curve = make(rng)?;
        let source = probe_with_doubling(field, |t| {
            let pt = curve.point(field, t)?;
            if !pt.on_variety(field) {
                return Err(ChartError::CurveOffVariety { truncation: t });
            }
            Ok(component_equations(field, pg, member_rows(&pt, comp), comp))
        })?;
        if source != Valuation::Finite(1) {
            continue;
        }
        let order = probe_with_doubling(field, |t| Ok(target(&curve.point(field, t)?)))?;
        return Ok((order, attempt));
    }
    Err(DivisorError::NoTransversalCurve(MAX_DIRECTION_RETRIES))
}

/// The member a component condition is imposed on: `big ⊂ H`, `J ⊂ small`.
fn member_rows(pt: &SeriesPoint, comp: Component) -> &SeriesMatrix {
    match (pt, comp) {
        (SeriesPoint::Toy(rows), _) => rows,
        (SeriesPoint::Flag { big, .. }, Component::Hyperplane(_)) => big,
        (SeriesPoint::Flag { small, .. }, Component::Line(_)) => small,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HoroType {
    /// Flags whose big member lies in a rational hyperplane.
    H,
    /// Flags whose small member contains a rational line.
    J,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PartialFrobenius {
    /// Right flags of rank `n` to left flags of rank `n + 1`.
    Plus,
    /// Left flags of rank `n` to right flags of rank `n − 1`.
    Minus,
}

impl PartialFrobenius {
    /// Multiplicity of the pullback of a component of the given type.
    pub fn expected_ratio(self, horo: HoroType, q: u32) -> u32 {
        match (self, horo) {
            (PartialFrobenius::Plus, HoroType::H) | (PartialFrobenius::Minus, HoroType::J) => 1,
            (PartialFrobenius::Plus, HoroType::J) | (PartialFrobenius::Minus, HoroType::H) => q,
        }
    }

    pub fn apply(self, field: &Field, f: &FlagPoint) -> Result<FlagPoint, ToyShtError> {
        match self {
            PartialFrobenius::Plus => partial_frobenius_plus(field, f),
            PartialFrobenius::Minus => partial_frobenius_minus(field, f),
        }
    }

    fn apply_series(self, field: &Field, p: &SeriesPoint) -> Option<SeriesPoint> {
        match self {
            PartialFrobenius::Plus => p.partial_frobenius_plus(field),
            PartialFrobenius::Minus => p.partial_frobenius_minus(field),
        }
    }
}

/// Rational components a flag lies on: `big ⊂ H` and `J ⊂ small`.
pub fn flag_components(field: &Field, pg: &ProjectiveSpace, f: &FlagPoint) -> Vec<Component> {
    let m = crate::toysht::horospherical_membership(field, f.big(), pg);
    let small = crate::toysht::horospherical_membership(field, f.small(), pg);
    m.h_set
        .into_iter()
        .map(Component::Hyperplane)
        .chain(small.j_set.into_iter().map(Component::Line))
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PullbackReport {
    pub flags: u64,
    /// Flags `f` and components `c` with `f ∈ c` but `F(f) ∉ c` or vice versa.
    pub set_mismatches: Vec<(FlagPoint, Component)>,
    pub expected_ratio: u32,
    pub generic_points: u64,
    /// `(order on the source, order of the pulled back equation)` per probe.
    pub probes: Vec<(Valuation, Valuation)>,
    pub retries: u64,
    /// `F⁻∘F⁺` (resp. `F⁺∘F⁻`) equals `σ` on every probe curve.
    pub composition_ok: bool,
}

impl PullbackReport {
    pub fn probes_pass(&self) -> bool {
        self.probes.iter().all(|&(s, t)| s == Valuation::Finite(1) && t == Valuation::Finite(self.expected_ratio as usize))
    }

    pub fn passes(&self) -> bool {
        self.set_mismatches.is_empty() && self.probes_pass() && self.composition_ok
    }
}

/// Compares a horospherical component with its preimage under a partial
/// Frobenius, as sets on every enumerated flag and as divisors along
/// `repetitions` random curves through points lying on that component only.
#[allow(clippy::too_many_arguments)]
pub fn partial_frobenius_divisor_pullback_check(
    field: &Field,
    ambient: usize,
    n: usize,
    horo: HoroType,
    direction: PartialFrobenius,
    repetitions: usize,
    seed: u64,
    budget: Budget,
) -> Result<PullbackReport, DivisorError> {
    let inc = Incidence::new(field, ambient);
    let pg = inc.projective_space();
    let flags = match direction {
        PartialFrobenius::Plus => enumerate_right_flags(field, ambient, n, budget)?,
        PartialFrobenius::Minus => enumerate_left_flags(field, ambient, n, budget)?,
    };
    let mut report = PullbackReport {
        expected_ratio: direction.expected_ratio(horo, field.q()),
        composition_ok: true,
        ..Default::default()
    };
    let mut generic: Vec<(FlagPoint, Component)> = Vec::new();
    for f in &flags {
        report.flags += 1;
        let image = direction.apply(field, f)?;
        let before = flag_components(field, pg, f);
        let after = flag_components(field, pg, &image);
        for c in before.iter().chain(&after) {
            if before.contains(c) != after.contains(c) {
                report.set_mismatches.push((f.clone(), *c));
            }
        }
        if before.len() == 1 {
            let matches = matches!((before[0], horo), (Component::Hyperplane(_), HoroType::H) | (Component::Line(_), HoroType::J));
            if matches {
                generic.push((f.clone(), before[0]));
            }
        }
    }
    report.set_mismatches.dedup();
    report.generic_points = generic.len() as u64;
    if generic.is_empty() || repetitions == 0 {
        return Ok(report);
    }

    let chart_spaces: Vec<Subspace> =
        enumerate_grassmannian(field, ambient, ambient - n, Scalars::Base, budget)?.collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..repetitions {
        let (f, comp) = generic.choose(&mut rng).expect("nonempty").clone();
        let chart = random_chart_containing(field, &chart_spaces, f.toy_subspace(), &mut rng)?;
        let mut composition_ok = true;
        let (order, retries) = probe_transversal(
            field,
            pg,
            comp,
            &mut rng,
            |rng| Ok(ProbeCurve::through_flag(field, chart.clone(), f.small(), f.big(), f.kind(), rng)?),
            |pt| {
                let image = direction.apply_series(field, pt).expect("flag of the right kind");
                let back = match direction {
                    PartialFrobenius::Plus => image.partial_frobenius_minus(field),
                    PartialFrobenius::Minus => image.partial_frobenius_plus(field),
                };
                if back.as_ref() != Some(&pt.frobenius(field)) {
                    composition_ok = false;
                }
                component_equations(field, pg, member_rows(&image, comp), comp)
            },
        )?;
        report.retries += retries;
        report.composition_ok &= composition_ok;
        report.probes.push((Valuation::Finite(1), order));
    }
    Ok(report)
}

/// `FlagKind` of the flags a partial Frobenius takes as input.
pub fn source_kind(direction: PartialFrobenius) -> FlagKind {
    match direction {
        PartialFrobenius::Plus => FlagKind::Right,
        PartialFrobenius::Minus => FlagKind::Left,
    }
}
