//! The deterministic integrand ψ and its accumulated square
//! `φ(t) = ∫₀ᵗ ψ(u)² du`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::quad;

/// Default absolute tolerance for quadrature of φ.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A running integral above this value is treated as divergent for
/// tabulated integrands. `exp(½φ)` has long overflowed by then.
pub const DIVERGENCE_CAP: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegrandKind {
    /// `ψ(u) = c`, params `[c]`.
    Constant,
    /// `ψ(u) = Σ a_k u^k`, params `[a_0, a_1, ...]`.
    Polynomial,
    /// `ψ(u) = c·exp(−λu)`, params `[c, λ]`.
    ExponentialDecay,
    /// Piecewise-linear interpolation of `table`, constant past the last knot.
    Tabulated,
    /// `ψ(u) = c·(T* − u)^(−1/2)`, params `[c]`, `T* = blowup_time`.
    InverseSqrtBlowup,
}

/// Declarative description of ψ. Construct through the helper constructors
/// or deserialize from JSON; both paths validate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct IntegrandSpec {
    pub kind: IntegrandKind,
    pub params: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blowup_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<(f64, f64)>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    kind: IntegrandKind,
    #[serde(default)]
    params: Vec<f64>,
    #[serde(default)]
    blowup_time: Option<f64>,
    #[serde(default)]
    table: Option<Vec<(f64, f64)>>,
}

impl TryFrom<RawSpec> for IntegrandSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        let spec = IntegrandSpec { kind: raw.kind, params: raw.params, blowup_time: raw.blowup_time, table: raw.table };
        spec.validate()?;
        Ok(spec)
    }
}

/// How φ should be computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiMethod {
    /// Closed form when the kind has one, trapezoid otherwise.
    #[default]
    Auto,
    ClosedForm,
    /// Composite trapezoid with Richardson extrapolation (Romberg).
    Trapezoid,
    /// Adaptive Gauss–Kronrod panel subdivision.
    Adaptive,
}

/// Method actually used to build a [`PhiProfile`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileMethod {
    ClosedForm,
    Trapezoid,
    Adaptive,
}

/// φ evaluated on every node of a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiProfile {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    pub method: ProfileMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NovikovVerdict {
    Finite,
    Divergent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NovikovReport {
    pub horizon: f64,
    pub verdict: NovikovVerdict,
    /// `½φ(horizon)` when finite.
    pub half_phi: Option<f64>,
    /// First time the running integral was known to blow up.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diverged_at: Option<f64>,
}

impl IntegrandSpec {
    pub fn constant(c: f64) -> Self {
        Self { kind: IntegrandKind::Constant, params: vec![c], blowup_time: None, table: None }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn polynomial(coefficients: Vec<f64>) -> Result<Self> {
        let s = Self { kind: IntegrandKind::Polynomial, params: coefficients, blowup_time: None, table: None };
        s.validate()?;
        Ok(s)
    }

    pub fn exponential_decay(c: f64, rate: f64) -> Result<Self> {
        let s = Self { kind: IntegrandKind::ExponentialDecay, params: vec![c, rate], blowup_time: None, table: None };
        s.validate()?;
        Ok(s)
    }

    pub fn tabulated(knots: Vec<(f64, f64)>) -> Result<Self> {
        let s = Self { kind: IntegrandKind::Tabulated, params: Vec::new(), blowup_time: None, table: Some(knots) };
        s.validate()?;
        Ok(s)
    }

    pub fn inverse_sqrt_blowup(c: f64, blowup_time: f64) -> Result<Self> {
        let s = Self {
            kind: IntegrandKind::InverseSqrtBlowup,
            params: vec![c],
            blowup_time: Some(blowup_time),
            table: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if let Some(p) = self.params.iter().find(|p| !p.is_finite()) {
            return bad(format!("non-finite parameter {p}"));
        }
        if self.kind != IntegrandKind::InverseSqrtBlowup && self.blowup_time.is_some() {
            return bad("blowup_time is only valid for inverse_sqrt_blowup".into());
        }
        if self.kind != IntegrandKind::Tabulated && self.table.is_some() {
            return bad("table is only valid for tabulated".into());
        }
        match self.kind {
            IntegrandKind::Constant if self.params.len() != 1 => {
                bad(format!("constant expects 1 parameter, got {}", self.params.len()))
            }
            IntegrandKind::Polynomial if self.params.is_empty() => {
                bad("polynomial expects at least one coefficient".into())
            }
            IntegrandKind::ExponentialDecay if self.params.len() != 2 => {
                bad(format!("exponential_decay expects [c, rate], got {} parameters", self.params.len()))
            }
            IntegrandKind::InverseSqrtBlowup => {
                if self.params.len() != 1 {
                    return bad(format!("inverse_sqrt_blowup expects 1 parameter, got {}", self.params.len()));
                }
                match self.blowup_time {
                    Some(b) if b > 0.0 && b.is_finite() => Ok(()),
                    Some(b) => bad(format!("blowup_time must be positive, got {b}")),
                    None => bad("inverse_sqrt_blowup requires blowup_time".into()),
                }
            }
            IntegrandKind::Tabulated => {
                let Some(table) = &self.table else {
                    return bad("tabulated requires table".into());
                };
                if table.is_empty() {
                    return bad("table must have at least one knot".into());
                }
                if table[0].0 != 0.0 {
                    return bad(format!("first knot must be at t = 0, got {}", table[0].0));
                }
                if table.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
                    return bad("table entries must be finite".into());
                }
                if table.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return bad("knot times must be strictly increasing".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// True when ψ is identically zero, which short-circuits several checks.
    pub fn is_zero(&self) -> bool {
        match self.kind {
            IntegrandKind::Tabulated => self.knots().iter().all(|&(_, v)| v == 0.0),
            IntegrandKind::Polynomial => self.params.iter().all(|&a| a == 0.0),
            _ => self.params[0] == 0.0,
        }
    }

    pub fn has_closed_form(&self) -> bool {
        self.kind != IntegrandKind::Tabulated
    }

    fn knots(&self) -> &[(f64, f64)] {
        self.table.as_deref().unwrap_or(&[])
    }

    /// Breakpoints of a tabulated ψ strictly inside `(a, b)`.
    fn interior_knots(&self, a: f64, b: f64) -> impl Iterator<Item = f64> + '_ {
        self.knots().iter().map(|k| k.0).filter(move |&t| t > a && t < b)
    }
}

/// ψ(t).
pub fn eval_psi(spec: &IntegrandSpec, t: f64) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("psi evaluated at t = {t}")));
    }
    Ok(match spec.kind {
        IntegrandKind::Constant => spec.params[0],
        IntegrandKind::Polynomial => spec.params.iter().rev().fold(0.0, |acc, &a| acc * t + a),
        IntegrandKind::ExponentialDecay => spec.params[0] * (-spec.params[1] * t).exp(),
        IntegrandKind::InverseSqrtBlowup => {
            let blowup = spec.blowup_time.expect("validated");
            if t >= blowup {
                return Err(Error::Singular { time: blowup });
            }
            spec.params[0] / (blowup - t).sqrt()
        }
        IntegrandKind::Tabulated => interpolate(spec.knots(), t),
    })
}

fn interpolate(knots: &[(f64, f64)], t: f64) -> f64 {
    let last = knots[knots.len() - 1];
    if t >= last.0 {
        return last.1;
    }
    // first knot index with time > t; knots[0].0 == 0 <= t
    let hi = knots.partition_point(|k| k.0 <= t);
    let (t0, v0) = knots[hi - 1];
    let (t1, v1) = knots[hi];
    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
}

fn psi_squared(spec: &IntegrandSpec, t: f64) -> f64 {
    match eval_psi(spec, t) {
        Ok(v) => v * v,
        Err(_) => f64::INFINITY,
    }
}

/// `φ(t) = ∫₀ᵗ ψ(u)² du`.
///
/// Returns [`Error::Divergent`] instead of a number when the integral is
/// infinite on `[0, t]`.
pub fn phi(spec: &IntegrandSpec, t: f64, method: PhiMethod, tol: f64) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("phi requested at t = {t}")));
    }
    check_analytic_divergence(spec, t)?;
    match resolve(spec, method)? {
        ProfileMethod::ClosedForm => Ok(closed_form(spec, t)),
        m => quadrature(spec, 0.0, t, m, tol, 0.0),
    }
}

fn resolve(spec: &IntegrandSpec, method: PhiMethod) -> Result<ProfileMethod> {
    match method {
        PhiMethod::Auto if spec.has_closed_form() => Ok(ProfileMethod::ClosedForm),
        PhiMethod::Auto => Ok(ProfileMethod::Trapezoid),
        PhiMethod::ClosedForm if spec.has_closed_form() => Ok(ProfileMethod::ClosedForm),
        PhiMethod::ClosedForm => Err(Error::InvalidArgument("tabulated integrands have no closed-form phi".into())),
        PhiMethod::Trapezoid => Ok(ProfileMethod::Trapezoid),
        PhiMethod::Adaptive => Ok(ProfileMethod::Adaptive),
    }
}

fn check_analytic_divergence(spec: &IntegrandSpec, t: f64) -> Result<()> {
    if spec.kind == IntegrandKind::InverseSqrtBlowup && spec.params[0] != 0.0 {
        let blowup = spec.blowup_time.expect("validated");
        if t >= blowup {
            return Err(Error::Divergent { horizon: t, diverged_at: blowup });
        }
    }
    Ok(())
}

fn closed_form(spec: &IntegrandSpec, t: f64) -> f64 {
    match spec.kind {
        IntegrandKind::Constant => spec.params[0] * spec.params[0] * t,
        IntegrandKind::Polynomial => {
            let a = &spec.params;
            let mut sq = vec![0.0; 2 * a.len() - 1];
            for (j, aj) in a.iter().enumerate() {
                for (k, ak) in a.iter().enumerate() {
                    sq[j + k] += aj * ak;
                }
            }
            // ∫₀ᵗ Σ s_n u^n du = t · Σ s_n t^n / (n+1)
            let inner = sq.iter().enumerate().rev().fold(0.0, |acc, (n, s)| acc * t + s / (n + 1) as f64);
            inner * t
        }
        IntegrandKind::ExponentialDecay => {
            let (c, rate) = (spec.params[0], spec.params[1]);
            if rate == 0.0 {
                c * c * t
            } else {
                c * c * -(-2.0 * rate * t).exp_m1() / (2.0 * rate)
            }
        }
        IntegrandKind::InverseSqrtBlowup => {
            let c = spec.params[0];
            if c == 0.0 {
                return 0.0;
            }
            let blowup = spec.blowup_time.expect("validated");
            -c * c * (-t / blowup).ln_1p()
        }
        IntegrandKind::Tabulated => unreachable!("tabulated has no closed form"),
    }
}

/// Integral of ψ² over `[a, b]` by quadrature. `offset` is the value of φ
/// at `a`, used only for the divergence cap on tabulated kinds.
fn quadrature(spec: &IntegrandSpec, a: f64, b: f64, method: ProfileMethod, tol: f64, offset: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    let integrate = |lo: f64, hi: f64, tol: f64| -> Result<f64> {
        let f = |u: f64| psi_squared(spec, u);
        let v = match method {
            ProfileMethod::Trapezoid => quad::romberg(f, lo, hi, tol)?,
            _ => quad::adaptive(f, lo, hi, tol)?,
        };
        Ok(v.max(0.0))
    };
    let mut cuts = vec![a];
    cuts.extend(spec.interior_knots(a, b));
    cuts.push(b);
    let share = tol / (cuts.len() - 1) as f64;
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let piece = integrate(w[0], w[1], share)?;
        if spec.kind == IntegrandKind::Tabulated && offset + total + piece > DIVERGENCE_CAP {
            let crossing = crossing_time(w[0], w[1], DIVERGENCE_CAP - offset - total, |x| integrate(w[0], x, share))?;
            return Err(Error::Divergent { horizon: b, diverged_at: crossing });
        }
        total += piece;
    }
    Ok(total)
}

/// Smallest x in `[lo, hi]` with `partial(x) > target`, by bisection.
fn crossing_time<F: Fn(f64) -> Result<f64>>(lo: f64, hi: f64, target: f64, partial: F) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        if partial(m)? > target {
            b = m;
        } else {
            a = m;
        }
    }
    Ok(b)
}

/// Novikov criterion: is `exp(½φ(t))` finite?
pub fn novikov_check(spec: &IntegrandSpec, t: f64) -> Result<NovikovReport> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("novikov_check needs t > 0, got {t}")));
    }
    match phi(spec, t, PhiMethod::Auto, DEFAULT_TOL) {
        Ok(v) => Ok(NovikovReport {
            horizon: t,
            verdict: NovikovVerdict::Finite,
            half_phi: Some(0.5 * v),
            diverged_at: None,
        }),
        Err(Error::Divergent { diverged_at, .. }) => Ok(NovikovReport {
            horizon: t,
            verdict: NovikovVerdict::Divergent,
            half_phi: None,
            diverged_at: Some(diverged_at),
        }),
        Err(e) => Err(e),
    }
}

/// φ on every node of `grid`.
pub fn phi_profile(spec: &IntegrandSpec, grid: &TimeGrid, method: PhiMethod, tol: f64) -> Result<PhiProfile> {
    check_analytic_divergence(spec, grid.horizon())?;
    let resolved = resolve(spec, method)?;
    let t = grid.times();
    let mut values = Vec::with_capacity(t.len());
    values.push(0.0);
    match resolved {
        ProfileMethod::ClosedForm => {
            for &ti in &t[1..] {
                // rounding in sign-changing polynomials must not break monotonicity
                let prev = values[values.len() - 1];
                values.push(closed_form(spec, ti).max(prev));
            }
        }
        m => {
            for w in t.windows(2) {
                let prev = values[values.len() - 1];
                let panel = quadrature(spec, w[0], w[1], m, tol, prev).map_err(|e| match e {
                    Error::Divergent { diverged_at, .. } => Error::Divergent { horizon: grid.horizon(), diverged_at },
                    other => other,
                })?;
                values.push(prev + panel);
            }
        }
    }
    Ok(PhiProfile { grid: grid.clone(), values, method: resolved })
}

/// Left-endpoint Riemann sum `φ_N(t_j) = Σ_{i<j} ψ(t_i)² Δt_i`, the exact
/// variance of the discretised Itô integral.
pub fn discrete_compensator(spec: &IntegrandSpec, grid: &TimeGrid) -> Result<Vec<f64>> {
    let psi = left_values(spec, grid)?;
    let mut out = Vec::with_capacity(grid.n_nodes());
    let mut acc = 0.0;
    out.push(acc);
    for (i, p) in psi.iter().enumerate() {
        acc += p * p * grid.dt(i);
        out.push(acc);
    }
    Ok(out)
}

/// ψ at the left endpoint of each grid step.
pub fn left_values(spec: &IntegrandSpec, grid: &TimeGrid) -> Result<Vec<f64>> {
    grid.times()[..grid.n_steps()].iter().map(|&t| eval_psi(spec, t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn eval_examples() {
        assert_eq!(eval_psi(&IntegrandSpec::constant(1.0), 0.7).unwrap(), 1.0);
        let id = IntegrandSpec::polynomial(vec![0.0, 1.0]).unwrap();
        assert_eq!(eval_psi(&id, 2.0).unwrap(), 2.0);
        let b = IntegrandSpec::inverse_sqrt_blowup(1.0, 1.0).unwrap();
        let v = eval_psi(&b, 0.75).unwrap();
        assert_eq!(v, 2.0);
        assert_eq!(v * v * 0.25, 1.0);
    }

    #[test]
    fn eval_at_blowup_names_the_time() {
        let b = IntegrandSpec::inverse_sqrt_blowup(1.0, 1.5).unwrap();
        assert_eq!(eval_psi(&b, 1.5), Err(Error::Singular { time: 1.5 }));
        assert_eq!(eval_psi(&b, 2.0), Err(Error::Singular { time: 1.5 }));
        assert!(eval_psi(&b, -0.1).is_err());
    }

    #[test]
    fn tabulated_interpolation_and_extrapolation() {
        let s = IntegrandSpec::tabulated(vec![(0.0, 1.0), (1.0, 3.0), (2.0, 2.0)]).unwrap();
        assert_eq!(eval_psi(&s, 0.5).unwrap(), 2.0);
        assert_eq!(eval_psi(&s, 1.0).unwrap(), 3.0);
        assert_eq!(eval_psi(&s, 1.5).unwrap(), 2.5);
        assert_eq!(eval_psi(&s, 7.0).unwrap(), 2.0);
        let single = IntegrandSpec::tabulated(vec![(0.0, 4.0)]).unwrap();
        assert_eq!(eval_psi(&single, 3.0).unwrap(), 4.0);
    }

    #[test]
    fn validation_errors() {
        assert!(IntegrandSpec::tabulated(vec![(0.1, 1.0)]).is_err());
        assert!(IntegrandSpec::tabulated(vec![(0.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(IntegrandSpec::tabulated(vec![]).is_err());
        assert!(IntegrandSpec::inverse_sqrt_blowup(1.0, 0.0).is_err());
        assert!(IntegrandSpec::inverse_sqrt_blowup(1.0, -1.0).is_err());
        assert!(IntegrandSpec::polynomial(vec![]).is_err());
        assert!(IntegrandSpec::exponential_decay(1.0, f64::NAN).is_err());
    }

    #[test]
    fn phi_examples() {
        let one = IntegrandSpec::constant(1.0);
        assert_eq!(phi(&one, 2.0, PhiMethod::Auto, DEFAULT_TOL).unwrap(), 2.0);

        // oracle: u³/3 at 1
        let id = IntegrandSpec::polynomial(vec![0.0, 1.0]).unwrap();
        for m in [PhiMethod::ClosedForm, PhiMethod::Trapezoid, PhiMethod::Adaptive] {
            assert!(close(phi(&id, 1.0, m, DEFAULT_TOL).unwrap(), 1.0 / 3.0, 1e-9), "{m:?}");
        }

        // oracle: −ln(1−t) at 0.5 = ln 2
        let b = IntegrandSpec::inverse_sqrt_blowup(1.0, 1.0).unwrap();
        let ln2 = std::f64::consts::LN_2;
        assert!(close(phi(&b, 0.5, PhiMethod::ClosedForm, DEFAULT_TOL).unwrap(), ln2, 1e-15));
        assert!(close(phi(&b, 0.5, PhiMethod::Adaptive, DEFAULT_TOL).unwrap(), ln2, 1e-9));
    }

    #[test]
    fn phi_other_kinds_against_scipy() {
        // values from scipy.integrate.quad
        let e = IntegrandSpec::exponential_decay(2.0, 0.5).unwrap();
        let p = IntegrandSpec::polynomial(vec![1.0, -2.0, 3.0]).unwrap();
        let tab = IntegrandSpec::tabulated(vec![(0.0, 1.0), (1.0, 3.0), (2.0, 2.0)]).unwrap();
        for m in [PhiMethod::Auto, PhiMethod::Trapezoid, PhiMethod::Adaptive] {
            assert!(close(phi(&e, 1.5, m, DEFAULT_TOL).unwrap(), 3.1074793594062804, 1e-9));
            assert!(close(phi(&p, 0.8, m, DEFAULT_TOL).unwrap(), 0.5876906666666668, 1e-9));
            assert!(close(phi(&tab, 3.0, m, DEFAULT_TOL).unwrap(), 14.666666666666668, 1e-9));
        }
        assert!(phi(&tab, 1.0, PhiMethod::ClosedForm, DEFAULT_TOL).is_err());
    }

    #[test]
    fn phi_divergence() {
        let b = IntegrandSpec::inverse_sqrt_blowup(1.0, 1.0).unwrap();
        for m in [PhiMethod::Auto, PhiMethod::Trapezoid, PhiMethod::Adaptive] {
            assert!(matches!(phi(&b, 1.0, m, DEFAULT_TOL), Err(Error::Divergent { .. })));
        }
        // zero amplitude never diverges
        let z = IntegrandSpec::inverse_sqrt_blowup(0.0, 1.0).unwrap();
        assert_eq!(phi(&z, 1.0, PhiMethod::Auto, DEFAULT_TOL).unwrap(), 0.0);
    }

    #[test]
    fn tabulated_cap_records_crossing_time() {
        let s = IntegrandSpec::tabulated(vec![(0.0, 1e6), (1.0, 1e6)]).unwrap();
        // φ(t) = 1e12·t crosses the cap at t = 1
        let r = novikov_check(&s, 3.0).unwrap();
        assert_eq!(r.verdict, NovikovVerdict::Divergent);
        let at = r.diverged_at.unwrap();
        assert!(close(at, 1.0, 1e-6), "{at}");
        assert!(r.half_phi.is_none());
        let ok = novikov_check(&s, 0.5).unwrap();
        assert_eq!(ok.verdict, NovikovVerdict::Finite);
    }

    #[test]
    fn novikov_examples() {
        let r = novikov_check(&IntegrandSpec::constant(1.0), 1.0).unwrap();
        assert_eq!((r.verdict, r.half_phi), (NovikovVerdict::Finite, Some(0.5)));
        let b = IntegrandSpec::inverse_sqrt_blowup(1.0, 1.0).unwrap();
        let r = novikov_check(&b, 1.0).unwrap();
        assert_eq!(r.verdict, NovikovVerdict::Divergent);
        assert_eq!(r.diverged_at, Some(1.0));
        let r = novikov_check(&IntegrandSpec::zero(), 10.0).unwrap();
        assert_eq!((r.verdict, r.half_phi), (NovikovVerdict::Finite, Some(0.0)));
        assert!(novikov_check(&IntegrandSpec::zero(), 0.0).is_err());
    }

    #[test]
    fn profile_examples() {
        let g = TimeGrid::new(vec![0.0, 0.5, 1.0]).unwrap();
        let p = phi_profile(&IntegrandSpec::constant(1.0), &g, PhiMethod::Auto, DEFAULT_TOL).unwrap();
        assert_eq!(p.values, vec![0.0, 0.5, 1.0]);
        assert_eq!(p.method, ProfileMethod::ClosedForm);

        let g = TimeGrid::new(vec![0.0, 1.0, 2.0]).unwrap();
        let id = IntegrandSpec::polynomial(vec![0.0, 1.0]).unwrap();
        for m in [PhiMethod::Auto, PhiMethod::Trapezoid, PhiMethod::Adaptive] {
            let p = phi_profile(&id, &g, m, DEFAULT_TOL).unwrap();
            assert!(close(p.values[1], 1.0 / 3.0, 1e-9));
            assert!(close(p.values[2], 8.0 / 3.0, 2e-9));
        }

        let g = TimeGrid::uniform(3.0, 5).unwrap();
        let p = phi_profile(&IntegrandSpec::zero(), &g, PhiMethod::Trapezoid, DEFAULT_TOL).unwrap();
        assert!(p.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn profile_refuses_divergent_horizon() {
        let b = IntegrandSpec::inverse_sqrt_blowup(1.0, 1.0).unwrap();
        let g = TimeGrid::uniform(1.0, 4).unwrap();
        assert!(matches!(
            phi_profile(&b, &g, PhiMethod::Auto, DEFAULT_TOL),
            Err(Error::Divergent { diverged_at, .. }) if diverged_at == 1.0
        ));
    }

    #[test]
    fn discrete_compensator_left_endpoint() {
        let id = IntegrandSpec::polynomial(vec![0.0, 1.0]).unwrap();
        let g = TimeGrid::new(vec![0.0, 1.0, 2.0]).unwrap();
        assert_eq!(discrete_compensator(&id, &g).unwrap(), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn json_grammar() {
        let s: IntegrandSpec = serde_json::from_str(r#"{"kind":"constant","params":[1.0]}"#).unwrap();
        assert_eq!(s, IntegrandSpec::constant(1.0));
        let s: IntegrandSpec =
            serde_json::from_str(r#"{"kind":"inverse_sqrt_blowup","params":[1],"blowup_time":1}"#).unwrap();
        assert_eq!(s.blowup_time, Some(1.0));
        let s: IntegrandSpec = serde_json::from_str(r#"{"kind":"tabulated","table":[[0,1],[1,2]]}"#).unwrap();
        assert_eq!(
            serde_json::to_string(&s).unwrap(),
            r#"{"kind":"tabulated","params":[],"table":[[0.0,1.0],[1.0,2.0]]}"#
        );
        assert!(serde_json::from_str::<IntegrandSpec>(r#"{"params":[1]}"#).is_err());
        assert!(serde_json::from_str::<IntegrandSpec>(r#"{"kind":"inverse_sqrt_blowup","params":[1]}"#).is_err());
        assert!(serde_json::from_str::<IntegrandSpec>(r#"{"kind":"tabulated","table":[[0.5,1]]}"#).is_err());
    }
}
