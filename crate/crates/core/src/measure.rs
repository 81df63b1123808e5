//! Discrete random measures on the canonical base space `([0,1], θ·dx)`,
//! test functions, and the deterministic integrals built on them.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

const QUAD_ABS_TOL: f64 = 1e-10;
const QUAD_REL_TOL: f64 = 1e-12;

/// The parameter space `X = [0,1]` with `ν = θ·Lebesgue`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseSpace {
    theta: f64,
}

impl BaseSpace {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::InvalidParameter(format!("total charge must be positive, got {theta}")));
        }
        Ok(BaseSpace { theta })
    }

    /// Normalized base space, `θ = 1`.
    pub fn unit() -> Self {
        BaseSpace { theta: 1.0 }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub charge: f64,
}

impl Atom {
    pub fn new(location: f64, charge: f64) -> Self {
        Atom { location, charge }
    }
}

/// A finite positive atomic measure `η = Σ zᵢ δ_{xᵢ}`, stored with charges in
/// non-increasing order, plus an upper bound on the truncated remainder.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    atoms: Vec<Atom>,
    total_charge: f64,
    tail_bound: f64,
}

fn ordered_sum(values: impl DoubleEndedIterator<Item = f64>) -> f64 {
    // smallest terms first
    values.rev().fold(0.0, |acc, v| acc + v)
}

impl DiscreteMeasure {
    /// Builds a measure from atoms in any order. Sorting is stable, so exact
    /// charge ties keep their input order.
    pub fn new(mut atoms: Vec<Atom>, tail_bound: f64) -> Result<Self> {
        for a in &atoms {
            if !(0.0..=1.0).contains(&a.location) {
                return Err(Error::DomainError(format!("atom location {} outside [0,1]", a.location)));
            }
            if !(a.charge > 0.0 && a.charge.is_finite()) {
                return Err(Error::DomainError(format!("atom charge {} must be positive", a.charge)));
            }
        }
        if !(tail_bound >= 0.0 && tail_bound.is_finite()) {
            return Err(Error::DomainError(format!("tail bound {tail_bound} must be non-negative")));
        }
        atoms.sort_by(|x, y| y.charge.total_cmp(&x.charge));
        Ok(Self::from_sorted(atoms, tail_bound))
    }

    /// Trusted constructor for samplers that emit charges already ordered.
    pub(crate) fn from_sorted(atoms: Vec<Atom>, tail_bound: f64) -> Self {
        assert!(
            atoms.windows(2).all(|w| w[0].charge >= w[1].charge),
            "atoms must be sorted by non-increasing charge"
        );
        assert!(atoms.iter().all(|a| a.charge > 0.0), "atom charges must be positive");
        let total_charge = ordered_sum(atoms.iter().map(|a| a.charge));
        DiscreteMeasure { atoms, total_charge, tail_bound }
    }

    pub fn empty() -> Self {
        DiscreteMeasure { atoms: Vec::new(), total_charge: 0.0, tail_bound: 0.0 }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_charge(&self) -> f64 {
        self.total_charge
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// `c·η`, tail bound included.
    pub fn scale(&self, c: f64) -> DiscreteMeasure {
        assert!(c > 0.0, "scale factor must be positive");
        let atoms = self.atoms.iter().map(|a| Atom::new(a.location, a.charge * c)).collect();
        DiscreteMeasure::from_sorted(atoms, self.tail_bound * c)
    }

    /// Total charge restricted to `[lo, hi)` (closed at 1).
    pub fn mass_in(&self, lo: f64, hi: f64) -> f64 {
        let closed = hi >= 1.0;
        ordered_sum(
            self.atoms
                .iter()
                .filter(|a| a.location >= lo && (a.location < hi || (closed && a.location <= hi)))
                .map(|a| a.charge),
        )
    }
}

#[derive(Serialize, Deserialize)]
struct AtomRepr {
    x: f64,
    z: f64,
}

#[derive(Serialize)]
struct AtomOut {
    x: Box<serde_json::value::RawValue>,
    z: Box<serde_json::value::RawValue>,
}

#[derive(Serialize)]
struct MeasureOut {
    atoms: Vec<AtomOut>,
    tail_bound: Box<serde_json::value::RawValue>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureIn {
    atoms: Vec<AtomRepr>,
    tail_bound: f64,
}

/// A double printed with 17 significant digits, as a JSON number.
pub(crate) fn raw_f64(v: f64) -> Box<serde_json::value::RawValue> {
    serde_json::value::RawValue::from_string(format_f64(v)).expect("formatted double is valid JSON")
}

/// 17 significant digits, locale-free.
pub fn format_f64(v: f64) -> String {
    if v == 0.0 {
        "0.0".to_string()
    } else {
        format!("{v:.16e}")
    }
}

impl Serialize for DiscreteMeasure {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MeasureOut {
            atoms: self
                .atoms
                .iter()
                .map(|a| AtomOut { x: raw_f64(a.location), z: raw_f64(a.charge) })
                .collect(),
            tail_bound: raw_f64(self.tail_bound),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DiscreteMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = MeasureIn::deserialize(deserializer)?;
        DiscreteMeasure::new(
            repr.atoms.into_iter().map(|a| Atom::new(a.x, a.z)).collect(),
            repr.tail_bound,
        )
        .map_err(serde::de::Error::custom)
    }
}

/// Point of the cone `C`: non-increasing positive summable terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConicSequence {
    terms: Vec<f64>,
    tail_bound: f64,
}

impl ConicSequence {
    pub fn new(mut terms: Vec<f64>, tail_bound: f64) -> Result<Self> {
        if terms.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::DomainError("conic terms must be positive and finite".into()));
        }
        terms.sort_by(|x, y| y.total_cmp(x));
        Ok(ConicSequence { terms, tail_bound })
    }

    pub fn terms(&self) -> &[f64] {
        &self.terms
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn sum(&self) -> f64 {
        ordered_sum(self.terms.iter().copied())
    }
}

/// Truncated point of the simplex `Σ`: non-increasing positive terms summing
/// to at least `1 - tail_tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexSequence {
    terms: Vec<f64>,
    tail_tolerance: f64,
}

impl SimplexSequence {
    pub fn new(mut terms: Vec<f64>, tail_tolerance: f64) -> Result<Self> {
        if terms.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::DomainError("simplex terms must be positive and finite".into()));
        }
        terms.sort_by(|x, y| y.total_cmp(x));
        let s = ordered_sum(terms.iter().copied());
        if s > 1.0 + 1e-9 || s < 1.0 - tail_tolerance - 1e-9 {
            return Err(Error::DomainError(format!(
                "simplex terms sum to {s}, outside [1 - {tail_tolerance}, 1]"
            )));
        }
        Ok(SimplexSequence { terms, tail_tolerance })
    }

    pub fn terms(&self) -> &[f64] {
        &self.terms
    }

    pub fn tail_tolerance(&self) -> f64 {
        self.tail_tolerance
    }

    pub fn sum(&self) -> f64 {
        ordered_sum(self.terms.iter().copied())
    }

    /// Mass not represented by the stored terms.
    pub fn residual(&self) -> f64 {
        (1.0 - self.sum()).max(0.0)
    }
}

/// Piecewise-constant function on `[0,1]`: value `values[i]` on
/// `[breaks[i], breaks[i+1])`, the last piece closed at 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.len() != values.len() + 1 || values.is_empty() {
            return Err(Error::InvalidParameter("need one more breakpoint than values".into()));
        }
        if breaks[0] != 0.0 || *breaks.last().expect("non-empty") != 1.0 {
            return Err(Error::InvalidParameter("breakpoints must start at 0 and end at 1".into()));
        }
        if breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("breakpoints must be strictly increasing".into()));
        }
        if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter("step values must be finite and non-negative".into()));
        }
        Ok(StepFunction { breaks, values })
    }

    /// Equal-width pieces.
    pub fn uniform(values: Vec<f64>) -> Result<Self> {
        let k = values.len();
        let breaks = (0..=k).map(|i| i as f64 / k as f64).collect();
        Self::new(breaks, values)
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        let idx = self.breaks.partition_point(|&b| b <= x).saturating_sub(1);
        self.values[idx.min(self.values.len() - 1)]
    }

    /// `(value, Lebesgue mass)` pairs: the law `ν_a` of the function.
    pub fn distribution(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().zip(self.breaks.windows(2)).map(|(&v, w)| (v, w[1] - w[0]))
    }

    fn merged(&self, other: &StepFunction, op: impl Fn(f64, f64) -> f64) -> StepFunction {
        let mut breaks: Vec<f64> = self.breaks.iter().chain(&other.breaks).copied().collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let values = breaks
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                op(self.eval(mid), other.eval(mid))
            })
            .collect();
        StepFunction { breaks, values }
    }
}

type Callable = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A non-negative function `a` on `[0,1]`: defines the functional `f_a` and
/// the multiplicator `M_a`.
#[derive(Clone)]
pub enum TestFunction {
    Step(StepFunction),
    /// Evaluable map with declared envelope `lower ≤ a(x) ≤ upper`.
    Callable { name: String, f: Callable, lower: f64, upper: f64 },
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFunction::Step(s) => f.debug_tuple("Step").field(s).finish(),
            TestFunction::Callable { name, lower, upper, .. } => f
                .debug_struct("Callable")
                .field("name", name)
                .field("lower", lower)
                .field("upper", upper)
                .finish(),
        }
    }
}

impl TestFunction {
    pub fn constant(c: f64) -> Self {
        TestFunction::Step(StepFunction::new(vec![0.0, 1.0], vec![c]).expect("valid constant"))
    }

    pub fn step(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Ok(TestFunction::Step(StepFunction::new(breaks, values)?))
    }

    /// `a(x) = intercept + slope·x`, required non-negative on `[0,1]`.
    pub fn linear(intercept: f64, slope: f64) -> Result<Self> {
        let (lo, hi) = if slope >= 0.0 { (intercept, intercept + slope) } else { (intercept + slope, intercept) };
        if lo < 0.0 {
            return Err(Error::InvalidParameter("linear function takes negative values".into()));
        }
        Ok(TestFunction::Callable {
            name: format!("{intercept}+{slope}x"),
            f: Arc::new(move |x| intercept + slope * x),
            lower: lo,
            upper: hi,
        })
    }

    pub fn callable(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        lower: f64,
        upper: f64,
    ) -> Self {
        TestFunction::Callable { name: name.into(), f: Arc::new(f), lower, upper }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TestFunction::Step(s) => s.eval(x),
            TestFunction::Callable { f, .. } => f(x),
        }
    }

    pub fn lower(&self) -> f64 {
        match self {
            TestFunction::Step(s) => s.values.iter().copied().fold(f64::INFINITY, f64::min),
            TestFunction::Callable { lower, .. } => *lower,
        }
    }

    pub fn upper(&self) -> f64 {
        match self {
            TestFunction::Step(s) => s.values.iter().copied().fold(0.0, f64::max),
            TestFunction::Callable { upper, .. } => *upper,
        }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            TestFunction::Step(s) if s.values.iter().all(|&v| v == s.values[0]) => Some(s.values[0]),
            _ => None,
        }
    }

    pub fn as_step(&self) -> Option<&StepFunction> {
        match self {
            TestFunction::Step(s) => Some(s),
            _ => None,
        }
    }

    pub fn name(&self) -> String {
        match self {
            TestFunction::Step(s) if s.values.len() == 1 => format!("const({})", s.values[0]),
            TestFunction::Step(s) => format!("step({:?};{:?})", s.breaks, s.values),
            TestFunction::Callable { name, .. } => name.clone(),
        }
    }

    /// Membership in the multiplicator group: `∫|log a| dν < ∞`. Steps need
    /// strictly positive values; callables with a zero lower envelope (such as
    /// `a(x) = x`) are settled by quadrature of `|log a|`.
    pub fn check_in_group(&self) -> Result<()> {
        let lo = self.lower();
        let hi = self.upper();
        if lo > 0.0 && hi.is_finite() {
            return Ok(());
        }
        let reject = || Err(Error::NotInGroup(format!("{} has envelope [{lo}, {hi}]", self.name())));
        match self {
            TestFunction::Callable { f, .. } if hi.is_finite() && lo >= 0.0 => {
                match quadrature::integrate(|x| f(x).ln().abs(), 0.0, 1.0, QUAD_ABS_TOL, 1e-8) {
                    Ok(v) if v.is_finite() => Ok(()),
                    _ => reject(),
                }
            }
            _ => reject(),
        }
    }

    /// `∫_0^1 g(a(x)) dx`: exact for steps, adaptive quadrature otherwise.
    pub fn integrate<G: Fn(f64) -> f64>(&self, g: G) -> Result<f64> {
        match self {
            TestFunction::Step(s) => Ok(s.distribution().map(|(v, p)| p * g(v)).sum()),
            TestFunction::Callable { f, .. } => {
                quadrature::integrate(|x| g(f(x)), 0.0, 1.0, QUAD_ABS_TOL, QUAD_REL_TOL)
            }
        }
    }

    fn combine(&self, other: &TestFunction, op: fn(f64, f64) -> f64) -> TestFunction {
        match (self, other) {
            (TestFunction::Step(a), TestFunction::Step(b)) => TestFunction::Step(a.merged(b, op)),
            _ => {
                let (fa, fb) = (self.clone(), other.clone());
                let corners = [
                    op(self.lower(), other.lower()),
                    op(self.lower(), other.upper()),
                    op(self.upper(), other.lower()),
                    op(self.upper(), other.upper()),
                ];
                TestFunction::Callable {
                    name: format!("({})∘({})", self.name(), other.name()),
                    f: Arc::new(move |x| op(fa.eval(x), fb.eval(x))),
                    lower: corners.iter().copied().fold(f64::INFINITY, f64::min),
                    upper: corners.iter().copied().fold(0.0, f64::max),
                }
            }
        }
    }

    /// Pointwise product `a·b`.
    pub fn mul(&self, other: &TestFunction) -> TestFunction {
        self.combine(other, |x, y| x * y)
    }

    /// Pointwise quotient `a/b`.
    pub fn div(&self, other: &TestFunction) -> TestFunction {
        self.combine(other, |x, y| x / y)
    }

    /// Pointwise inverse `1/a`, the group inverse.
    pub fn recip(&self) -> TestFunction {
        TestFunction::constant(1.0).div(self)
    }
}

/// `f_a(η) = ∫ a dη = Σ a(xᵢ) zᵢ`.
pub fn functional_f_a(a: &TestFunction, eta: &DiscreteMeasure) -> f64 {
    ordered_sum(eta.atoms().iter().map(|at| a.eval(at.location) * at.charge))
}

/// Ordered charges of `η`, locations discarded.
pub fn conic_part(eta: &DiscreteMeasure) -> ConicSequence {
    ConicSequence {
        terms: eta.atoms().iter().map(|a| a.charge).collect(),
        tail_bound: eta.tail_bound(),
    }
}

/// Splits `η` into its total charge and the normalized measure `η/η(X)`.
pub fn normalize(eta: &DiscreteMeasure) -> Result<(f64, DiscreteMeasure)> {
    let total = eta.total_charge();
    if !(total > 0.0) {
        return Err(Error::ZeroMass);
    }
    Ok((total, eta.scale(1.0 / total)))
}

/// Simplicial part of `η`: ordered charges over the total.
pub fn simplex_part(eta: &DiscreteMeasure) -> Result<SimplexSequence> {
    let total = eta.total_charge();
    if !(total > 0.0) {
        return Err(Error::ZeroMass);
    }
    let terms: Vec<f64> = eta.atoms().iter().map(|a| a.charge / total).collect();
    let tol = (eta.tail_bound() / total).min(1.0);
    SimplexSequence::new(terms, tol)
}

/// `∫_X log a dν = θ ∫_0^1 log a(x) dx`.
pub fn log_integral(a: &TestFunction, base: &BaseSpace) -> Result<f64> {
    a.check_in_group()?;
    Ok(base.theta() * a.integrate(f64::ln)?)
}

/// `∫_X log(1 + z·a) dν`.
pub fn log1p_integral(a: &TestFunction, z: f64, base: &BaseSpace) -> Result<f64> {
    let lo = 1.0 + z * a.lower();
    let hi = 1.0 + z * a.upper();
    if !(lo > 0.0 && hi > 0.0) {
        return Err(Error::DomainError(format!("1 + {z}·a(x) is not positive on [0,1]")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    Ok(base.theta() * a.integrate(|v| (z * v).ln_1p())?)
}

/// Serializable description of a test function for configs and reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Const(f64),
    Step { breaks: Vec<f64>, values: Vec<f64> },
    Linear { intercept: f64, slope: f64 },
}

impl FunctionSpec {
    pub fn build(&self) -> Result<TestFunction> {
        match self {
            FunctionSpec::Const(c) => {
                if !(*c >= 0.0) {
                    return Err(Error::InvalidParameter(format!("constant {c} is negative")));
                }
                Ok(TestFunction::constant(*c))
            }
            FunctionSpec::Step { breaks, values } => TestFunction::step(breaks.clone(), values.clone()),
            FunctionSpec::Linear { intercept, slope } => TestFunction::linear(*intercept, *slope),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn two_atoms() -> DiscreteMeasure {
        DiscreteMeasure::new(vec![Atom::new(0.25, 1.0), Atom::new(0.5, 0.5)], 0.0).unwrap()
    }

    #[test]
    fn functional_examples() {
        let eta = two_atoms();
        assert_eq!(functional_f_a(&TestFunction::constant(0.0), &eta), 0.0);
        let m = DiscreteMeasure::new(vec![Atom::new(0.1, 2.0), Atom::new(0.7, 0.5)], 0.0).unwrap();
        assert_relative_eq!(functional_f_a(&TestFunction::constant(1.0), &m), 2.5);
        let id = TestFunction::linear(0.0, 1.0).unwrap();
        assert_relative_eq!(functional_f_a(&id, &eta), 0.5);
    }

    #[test]
    fn conic_part_sorts_and_conserves_mass() {
        let eta = DiscreteMeasure::new(vec![Atom::new(0.1, 0.5), Atom::new(0.9, 1.0)], 0.0).unwrap();
        let c = conic_part(&eta);
        assert_eq!(c.terms(), &[1.0, 0.5]);
        assert_relative_eq!(c.sum(), eta.total_charge());
        assert!(conic_part(&DiscreteMeasure::empty()).terms().is_empty());
    }

    #[test]
    fn normalize_examples() {
        let eta = DiscreteMeasure::new(vec![Atom::new(0.1, 2.0), Atom::new(0.2, 2.0)], 0.0).unwrap();
        let (total, n) = normalize(&eta).unwrap();
        assert_eq!(total, 4.0);
        assert_eq!(n.atoms().iter().map(|a| a.charge).collect::<Vec<_>>(), vec![0.5, 0.5]);
        let single = DiscreteMeasure::new(vec![Atom::new(0.3, 3.0)], 0.0).unwrap();
        let (t, n) = normalize(&single).unwrap();
        assert_eq!((t, n.atoms()[0].charge), (3.0, 1.0));
        assert_eq!(normalize(&DiscreteMeasure::empty()), Err(Error::ZeroMass));
    }

    #[test]
    fn log_integral_examples() {
        let unit = BaseSpace::unit();
        assert_eq!(log_integral(&TestFunction::constant(1.0), &unit).unwrap(), 0.0);
        assert_relative_eq!(
            log_integral(&TestFunction::constant(std::f64::consts::E), &unit).unwrap(),
            1.0,
            max_relative = 1e-15
        );
        // antiderivative of log(1+x): (1+x)log(1+x) - x
        let two = BaseSpace::new(2.0).unwrap();
        let a = TestFunction::linear(1.0, 1.0).unwrap();
        let exact = 2.0 * (2.0 * 2f64.ln() - 1.0);
        assert_relative_eq!(log_integral(&a, &two).unwrap(), exact, epsilon = 1e-10);
        assert_relative_eq!(exact, 0.772_588_722_239_781, epsilon = 1e-12);
    }

    #[test]
    fn log_integral_rejects_zero_values() {
        let a = TestFunction::step(vec![0.0, 0.5, 1.0], vec![0.0, 1.0]).unwrap();
        assert!(matches!(log_integral(&a, &BaseSpace::unit()), Err(Error::NotInGroup(_))));
        // a(x) = x vanishes at 0 but ∫|log x| = 1
        let id = TestFunction::linear(0.0, 1.0).unwrap();
        assert_relative_eq!(log_integral(&id, &BaseSpace::unit()).unwrap(), -1.0, epsilon = 1e-8);
        let bad = TestFunction::callable("exp(-1/x)", |x| (-1.0 / x).exp(), 0.0, 1.0);
        assert!(matches!(log_integral(&bad, &BaseSpace::unit()), Err(Error::NotInGroup(_))));
    }

    #[test]
    fn log1p_integral_examples() {
        let unit = BaseSpace::unit();
        let id = TestFunction::linear(0.0, 1.0).unwrap();
        assert_eq!(log1p_integral(&id, 0.0, &unit).unwrap(), 0.0);
        assert_relative_eq!(
            log1p_integral(&TestFunction::constant(1.0), 1.0, &unit).unwrap(),
            2f64.ln(),
            max_relative = 1e-15
        );
        assert_relative_eq!(log1p_integral(&id, 1.0, &unit).unwrap(), 2.0 * 2f64.ln() - 1.0, epsilon = 1e-10);
        assert!(matches!(
            log1p_integral(&TestFunction::constant(2.0), -0.5, &unit),
            Err(Error::DomainError(_))
        ));
    }

    #[test]
    fn step_algebra() {
        let a = TestFunction::step(vec![0.0, 0.5, 1.0], vec![2.0, 1.0]).unwrap();
        let b = TestFunction::step(vec![0.0, 0.25, 1.0], vec![3.0, 4.0]).unwrap();
        let ab = a.mul(&b);
        for &x in &[0.1, 0.3, 0.6, 1.0] {
            assert_eq!(ab.eval(x), a.eval(x) * b.eval(x));
            assert_eq!(a.recip().eval(x), 1.0 / a.eval(x));
        }
        assert_eq!(a.eval(1.0), 1.0);
        assert_eq!(a.eval(0.5), 1.0);
        assert_eq!(a.eval(0.0), 2.0);
    }

    #[test]
    fn json_shape_and_roundtrip() {
        let eta = two_atoms();
        let s = serde_json::to_string(&eta).unwrap();
        assert!(s.starts_with("{\"atoms\":[{\"x\":"), "{s}");
        assert!(s.contains("\"z\":1.0000000000000000e0"), "{s}");
        let back: DiscreteMeasure = serde_json::from_str(&s).unwrap();
        assert_eq!(back, eta);
    }

    proptest! {
        #[test]
        fn conic_part_commutes_with_scaling(
            charges in prop::collection::vec(1e-6f64..10.0, 1..30),
            c in 1e-3f64..1e3,
        ) {
            let atoms = charges.iter().enumerate()
                .map(|(i, &z)| Atom::new(i as f64 / 30.0, z)).collect();
            let eta = DiscreteMeasure::new(atoms, 0.0).unwrap();
            let lhs = conic_part(&eta.scale(c));
            let rhs = conic_part(&eta);
            for (x, y) in lhs.terms().iter().zip(rhs.terms()) {
                prop_assert!((x - c * y).abs() <= 1e-12 * x.abs());
            }
        }

        #[test]
        fn cached_total_matches_sum(charges in prop::collection::vec(1e-9f64..1e3, 0..50)) {
            let atoms = charges.iter().map(|&z| Atom::new(0.5, z)).collect();
            let eta = DiscreteMeasure::new(atoms, 0.0).unwrap();
            let naive: f64 = charges.iter().sum();
            prop_assert!((eta.total_charge() - naive).abs() <= 1e-12 * naive.max(1e-300));
            prop_assert!(eta.atoms().windows(2).all(|w| w[0].charge >= w[1].charge));
        }

        #[test]
        fn log1p_integral_monotone_in_z(v in prop::collection::vec(0.0f64..5.0, 1..6), z1 in 0.0f64..5.0, dz in 0.0f64..5.0) {
            let a = TestFunction::Step(StepFunction::uniform(v).unwrap());
            let base = BaseSpace::new(1.3).unwrap();
            let l1 = log1p_integral(&a, z1, &base).unwrap();
            let l2 = log1p_integral(&a, z1 + dz, &base).unwrap();
            prop_assert!(l2 >= l1 - 1e-15);
        }

        #[test]
        fn normalize_scale_roundtrip(charges in prop::collection::vec(1e-3f64..10.0, 1..20)) {
            let atoms = charges.iter().enumerate().map(|(i, &z)| Atom::new(i as f64 / 20.0, z)).collect();
            let eta = DiscreteMeasure::new(atoms, 0.0).unwrap();
            let (t, n) = normalize(&eta).unwrap();
            prop_assert!((n.total_charge() - 1.0).abs() < 1e-12);
            let back = n.scale(t);
            for (x, y) in back.atoms().iter().zip(eta.atoms()) {
                prop_assert!((x.charge - y.charge).abs() <= 1e-12 * y.charge);
                prop_assert_eq!(x.location, y.location);
            }
        }
    }
}
