//! Explicit rates of metastability built from search functionals.
//!
//! The functionals are realized by bounded search, post-verified before they
//! return. The Abel and Tauber pipelines compose them into a gap function `f`
//! for the outer search, then re-check the resulting instance of the finite
//! theorem in full.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exact::{ceil_index, omega, to_index, Natural, Rational};
use crate::metastability::{
    check_on, least_n_by, FEval, GapFunction, SearchOutcome, Window, WindowPredicate,
};
use crate::series::{CoefficientSequence, PointFamily};
use crate::theorems::{verify_abel, verify_tauber, AbelInstance, InstanceVerdict, TauberInstance};

/// Right end `h(n)` of the window `[n; h(n)]` a functional must satisfy.
pub type Endpoint<'a> = &'a dyn Fn(u64) -> Result<u64>;

fn search(pred: &WindowPredicate, from: u64, cap: u64, h: Endpoint, stage: &str) -> Result<u64> {
    match least_n_by(pred, from, cap, |n| Ok(Window::new(n, h(n)?)))? {
        SearchOutcome::Found { n, window, .. } => {
            if !check_on(pred, window)?.holds {
                return Err(Error::Unsound(format!(
                    "{stage}: search returned {n} but {window} fails on re-check"
                )));
            }
            Ok(n)
        }
        SearchOutcome::NotFoundBelowCap { cap } => Err(Error::not_found(stage, cap)),
    }
}

/// Least `n <= cap` with `1 - delta <= x_m` for every `m` in `[n; h(n)]`.
///
/// For `v_m = 1 - 1/m` the answer is `max(1, ceil(1/delta))` without search.
pub fn phi_points(points: &PointFamily, delta: &Rational, h: Endpoint, cap: u64) -> Result<u64> {
    if !delta.is_positive() {
        return Err(Error::domain(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let pred = WindowPredicate::points_near_one(points.clone(), delta.clone());
    if let PointFamily::V = points {
        let n = to_index(&ceil_index(&delta.recip()?)?, "1/delta")?.max(1);
        if n > cap {
            return Err(Error::not_found("phi", cap));
        }
        let w = Window::new(n, h(n)?);
        if !check_on(&pred, w)?.holds {
            return Err(Error::Unsound(format!("phi: v-points fail on {w}")));
        }
        return Ok(n);
    }
    search(&pred, points.first_index(), cap, h, "phi")
}

/// Least `n <= cap` with `i |a_i| <= eps/8` for every `i` in `[n; h(n)]`.
pub fn psi_tail(seq: &CoefficientSequence, eps: &Rational, h: Endpoint, cap: u64) -> Result<u64> {
    if !eps.is_positive() {
        return Err(Error::domain(format!("eps must be positive, got {eps}")));
    }
    let pred = WindowPredicate::small_tail(seq.clone(), eps / Rational::from_u64(8));
    search(&pred, 0, cap, h, "psi")
}

/// A functional returning, for a tolerance `eps` and an endpoint `h`, some
/// `n` whose window `[n; h(n)]` is `eps`-stable.
#[derive(Clone, Debug)]
pub enum SearchFunctional {
    /// Stability of the partial sums.
    PartialSums { seq: CoefficientSequence, from: u64 },
    /// Stability of `F` along `points`.
    FValues {
        seq: CoefficientSequence,
        points: PointFamily,
        f_eval: FEval,
        from: u64,
    },
}

impl SearchFunctional {
    pub fn partial_sums(seq: CoefficientSequence) -> Self {
        SearchFunctional::PartialSums { seq, from: 0 }
    }

    pub fn f_values(seq: CoefficientSequence, points: PointFamily) -> Self {
        let from = points.first_index();
        SearchFunctional::FValues {
            seq,
            points,
            f_eval: FEval::default(),
            from,
        }
    }

    pub fn sequence(&self) -> &CoefficientSequence {
        match self {
            SearchFunctional::PartialSums { seq, .. } | SearchFunctional::FValues { seq, .. } => {
                seq
            }
        }
    }

    fn from(&self) -> u64 {
        match self {
            SearchFunctional::PartialSums { from, .. } | SearchFunctional::FValues { from, .. } => {
                *from
            }
        }
    }

    fn predicate(&self, eps: &Rational, fallback: Option<&Rational>) -> WindowPredicate {
        match self {
            SearchFunctional::PartialSums { seq, .. } => {
                WindowPredicate::cauchy_partial_sums(seq.clone(), eps.clone())
            }
            SearchFunctional::FValues {
                seq,
                points,
                f_eval,
                ..
            } => {
                let mut f_eval = f_eval.clone();
                if f_eval.fallback_bound.is_none() {
                    f_eval.fallback_bound = fallback.cloned();
                }
                WindowPredicate::CauchyOfF {
                    seq: seq.clone(),
                    eps: eps.clone(),
                    points: points.clone(),
                    f_eval,
                }
            }
        }
    }

    /// Least `n` in `[max(from, min_from); cap]` with the window property at
    /// `eps` on `[n; h(n)]`.
    pub fn find(
        &self,
        eps: &Rational,
        h: Endpoint,
        min_from: u64,
        cap: u64,
        stage: &str,
    ) -> Result<u64> {
        self.find_with(eps, h, min_from, cap, stage, None)
    }

    fn find_with(
        &self,
        eps: &Rational,
        h: Endpoint,
        min_from: u64,
        cap: u64,
        stage: &str,
        fallback: Option<&Rational>,
    ) -> Result<u64> {
        let pred = self.predicate(eps, fallback);
        search(&pred, self.from().max(min_from), cap, h, stage)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RateKind {
    Abel,
    Tauber,
}

/// Every intermediate quantity of one rate computation.
///
/// For Abel, `p = p_{N1}`, `l = omega(eps/(8Lp), p)` and
/// `f_n1 = max(N + g(N), l)`. For Tauber, `tail_index = ceil(2 L N1^2 / eps)`,
/// `p = N + g(N)` and `f_n1 = l = omega(eps/(4Lp), p)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RateBundle {
    pub kind: RateKind,
    pub eps: Rational,
    pub l_bound: Rational,
    pub gap: String,
    pub n1: u64,
    pub n2: u64,
    pub n: u64,
    pub g_n: u64,
    pub m_n1: u64,
    pub p: Natural,
    pub l: Natural,
    pub f_n1: Natural,
    pub h_n1_n2: u64,
    pub tail_index: Option<u64>,
}

impl RateBundle {
    /// `[N; N + g(N)]`.
    pub fn window(&self) -> Window {
        Window::new(self.n, self.n + self.g_n)
    }

    /// Recomputes the identities linking the fields from `g` and the scalar
    /// inputs; the error names the first one that does not hold.
    pub fn audit(&self, g: &GapFunction) -> core::result::Result<(), String> {
        let fail = |what: &str| Err(format!("{what} does not hold"));
        let g_n = g.eval(self.n).map_err(|e| format!("g(N): {e}"))?;
        if g_n != self.g_n {
            return fail("g(N)");
        }
        let end = self.n.checked_add(g_n).ok_or("N + g(N) overflows")?;
        if self.h_n1_n2 != end {
            return fail("h_N1(N2) = N + g(N)");
        }
        if self.m_n1 != self.n {
            return fail("M_N1 = N");
        }
        let scale = match self.kind {
            RateKind::Abel => 8,
            RateKind::Tauber => 4,
        };
        let denom = Rational::from_u64(scale) * &self.l_bound * Rational::from_natural(&self.p);
        let l = self
            .eps
            .checked_div(&denom)
            .and_then(|e| omega(&e, &self.p))
            .map_err(|e| format!("l: {e}"))?;
        if l != self.l {
            return fail("l = omega(eps/(cLp), p)");
        }
        match self.kind {
            RateKind::Abel => {
                if self.n != self.n1.max(self.n2) {
                    return fail("N = max(N1, N2)");
                }
                if self.f_n1 != Natural::from(end).max(l) {
                    return fail("f(N1) = max(N + g(N), l)");
                }
            }
            RateKind::Tauber => {
                let c =
                    tail_index(&self.l_bound, &self.eps, self.n1).map_err(|e| format!("{e}"))?;
                if self.tail_index != Some(c) || self.n != c.max(self.n2) {
                    return fail("N = max(ceil(2 L N1^2 / eps), N2)");
                }
                if self.p != Natural::from(end) {
                    return fail("p = N + g(N)");
                }
                if self.f_n1 != l {
                    return fail("f(N1) = omega(eps/(4Lp), p)");
                }
            }
        }
        Ok(())
    }
}

/// A rate together with the re-checked theorem instance behind it.
#[derive(Clone, Debug)]
pub struct RateResult {
    pub n: u64,
    pub bundle: RateBundle,
    pub verdict: InstanceVerdict,
}

fn positive(what: &str, q: &Rational) -> Result<()> {
    if q.is_positive() {
        Ok(())
    } else {
        Err(Error::config(format!("{what} must be positive, got {q}")))
    }
}

fn offset_end(g: &GapFunction, n: u64) -> Result<u64> {
    Ok(g.offset_window(n)?.hi)
}

fn tail_index(l_bound: &Rational, eps: &Rational, a: u64) -> Result<u64> {
    let a = Rational::from_u64(a);
    let q = (Rational::from_u64(2) * l_bound * &a * &a).checked_div(eps)?;
    to_index(&ceil_index(&q)?, "2 L a^2 / eps")
}

/// `ceil(max { 1/(1 - x_m) : m <= e })`, at least 1.
fn point_scale(points: &PointFamily, e: u64) -> Result<Natural> {
    if let PointFamily::V = points {
        return Ok(Natural::from(e.max(1)));
    }
    let mut best = Rational::one();
    for m in points.first_index()..=e {
        let r = (Rational::one() - points.point(m)?).recip()?;
        if r > best {
            best = r;
        }
    }
    ceil_index(&best)
}

/// Rate for the finite Abelian theorem.
///
/// With `h_a(b) = max(a,b) + g(max(a,b))`, `M_a = max(a, phi(eps/(8La), h_a))`,
/// `p_a = ceil(max { 1/(1-x_m) : m <= M_a + g(M_a) })` and
/// `f(a) = max(M_a + g(M_a), omega(eps/(8 L p_a), p_a))`, takes `N1` from
/// `s_meta` at `(eps/4, f)`, `N2 = phi(eps/(8 L N1), h_N1)` and `N = max(N1, N2)`.
/// The instance `(N1, N2, p_N1)` is re-checked before returning.
pub fn abel_rate(
    eps: &Rational,
    g: &GapFunction,
    l_bound: &Rational,
    points: &PointFamily,
    s_meta: &SearchFunctional,
    cap: u64,
) -> Result<RateResult> {
    positive("eps", eps)?;
    positive("L", l_bound)?;
    let eight_l = Rational::from_u64(8) * l_bound;
    let h = |a: u64, b: u64| offset_end(g, a.max(b));
    let m_of = |a: u64| -> Result<u64> {
        let delta = eps.checked_div(&(&eight_l * Rational::from_u64(a)))?;
        let ha = |b: u64| h(a, b);
        Ok(a.max(phi_points(points, &delta, &ha, cap)?))
    };
    let p_of = |m: u64| point_scale(points, offset_end(g, m)?);
    let l_of = |p: &Natural| {
        omega(
            &eps.checked_div(&(&eight_l * Rational::from_natural(p)))?,
            p,
        )
    };
    let f = |a: u64| -> Result<u64> {
        let m = m_of(a)?;
        let p = p_of(m)?;
        let l = to_index(&l_of(&p)?, "l")?;
        Ok(offset_end(g, m)?.max(l))
    };

    let quarter = eps / Rational::from_u64(4);
    let n1 = s_meta.find(&quarter, &f, 1, cap, "abel: partial sums")?;
    let delta = eps.checked_div(&(&eight_l * Rational::from_u64(n1)))?;
    let h_n1 = |b: u64| h(n1, b);
    let n2 = phi_points(points, &delta, &h_n1, cap)?;
    let n = n1.max(n2);
    let m_n1 = m_of(n1)?;
    let p = p_of(m_n1)?;
    let l = l_of(&p)?;
    let g_n = g.eval(n)?;
    let bundle = RateBundle {
        kind: RateKind::Abel,
        eps: eps.clone(),
        l_bound: l_bound.clone(),
        gap: format!("{g}"),
        n1,
        n2,
        n,
        g_n,
        m_n1,
        f_n1: Natural::from(f(n1)?),
        h_n1_n2: h(n1, n2)?,
        p: p.clone(),
        l,
        tail_index: None,
    };
    bundle
        .audit(g)
        .map_err(|e| Error::Unsound(format!("abel bundle: {e}")))?;

    let inst = AbelInstance {
        seq: s_meta.sequence().clone(),
        points: points.clone(),
        l_bound: l_bound.clone(),
        eps: eps.clone(),
        gap: g.clone(),
        n1,
        n2,
        p,
    };
    let verdict = verify_abel(&inst)?;
    if !verdict.premise.holds {
        return Err(Error::Unsound(format!(
            "abel: constructed instance fails its premise: {:?}",
            verdict.premise.failure()
        )));
    }
    Ok(RateResult { n, bundle, verdict })
}

/// Rate for the finite Tauberian theorem, with `F` read at `v_m = 1 - 1/m`.
///
/// With `c(a) = ceil(2 L a^2 / eps)`, `h_a(b) = max(c(a),b) + g(max(c(a),b))`,
/// `M_a = max(c(a), N2(a))` where `N2(a)` comes from `f_meta` at
/// `(eps/4, h_a)`, `p_a = M_a + g(M_a)` and `f(a) = omega(eps/(4 L p_a), p_a)`,
/// takes `N1` from [`psi_tail`] at `f`, `N2 = N2(N1)` and `N = M_N1`.
pub fn tauber_rate(
    eps: &Rational,
    g: &GapFunction,
    l_bound: &Rational,
    seq: &CoefficientSequence,
    f_meta: &SearchFunctional,
    cap: u64,
) -> Result<RateResult> {
    positive("eps", eps)?;
    positive("L", l_bound)?;
    let quarter = eps / Rational::from_u64(4);
    let four_l = Rational::from_u64(4) * l_bound;
    let c = |a: u64| tail_index(l_bound, eps, a);
    let h = |a: u64, b: u64| -> Result<u64> { offset_end(g, c(a)?.max(b)) };
    let n2_of = |a: u64| -> Result<u64> {
        let ha = |b: u64| h(a, b);
        f_meta.find_with(&quarter, &ha, 1, cap, "tauber: F values", Some(l_bound))
    };
    let l_of = |p: u64| {
        omega(
            &eps.checked_div(&(&four_l * Rational::from_u64(p)))?,
            &Natural::from(p),
        )
    };
    let f = |a: u64| -> Result<u64> {
        let m = c(a)?.max(n2_of(a)?);
        to_index(&l_of(offset_end(g, m)?)?, "l")
    };

    let n1 = psi_tail(seq, eps, &f, cap)?;
    let n2 = n2_of(n1)?;
    let t = c(n1)?;
    let n = t.max(n2);
    let g_n = g.eval(n)?;
    let p = offset_end(g, n)?;
    let l = l_of(p)?;
    let bundle = RateBundle {
        kind: RateKind::Tauber,
        eps: eps.clone(),
        l_bound: l_bound.clone(),
        gap: format!("{g}"),
        n1,
        n2,
        n,
        g_n,
        m_n1: n,
        p: Natural::from(p),
        f_n1: Natural::from(f(n1)?),
        l,
        h_n1_n2: h(n1, n2)?,
        tail_index: Some(t),
    };
    bundle
        .audit(g)
        .map_err(|e| Error::Unsound(format!("tauber bundle: {e}")))?;

    let inst = TauberInstance {
        seq: seq.clone(),
        l_bound: l_bound.clone(),
        eps: eps.clone(),
        gap: g.clone(),
        n1,
        n2,
    };
    let verdict = verify_tauber(&inst)?;
    if !verdict.premise.holds {
        return Err(Error::Unsound(format!(
            "tauber: constructed instance fails its premise: {:?}",
            verdict.premise.failure()
        )));
    }
    Ok(RateResult { n, bundle, verdict })
}

/// Explicit guards on iteration count and iterate size.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResourceLimits {
    pub max_iterations: u64,
    pub max_bits: u64,
}

impl Default for ResourceLimits {
    fn default() -> Self {
        ResourceLimits {
            max_iterations: 1_000_000,
            max_bits: 1 << 16,
        }
    }
}

fn iterate<F>(f: F, count: &Natural, limits: &ResourceLimits, what: &str) -> Result<Vec<Natural>>
where
    F: Fn(&Natural) -> Result<Natural>,
{
    if count > &Natural::from(limits.max_iterations) {
        return Err(Error::resource(format!(
            "{what}: {count} iterations exceed the limit of {}",
            limits.max_iterations
        )));
    }
    let k = to_index(count, "iteration count")?;
    let mut values = alloc::vec![Natural::from(0u32)];
    for j in 0..k {
        let next = f(&values[values.len() - 1])?;
        if next.bits() > limits.max_bits {
            return Err(Error::resource(format!(
                "{what}: iterate {} has {} bits, over the limit of {} (iterates so far: {})",
                j + 1,
                next.bits(),
                limits.max_bits,
                values
                    .iter()
                    .map(|v| format!("{v}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            )));
        }
        values.push(next);
    }
    Ok(values)
}

/// `f'^k(0)` with `k = ceil(L / eps')`: for a monotone sequence whose values
/// range over an interval of length at most `L`, some `N` at most this value
/// has `|s_m - s_n| <= eps'` on `[N; f'(N)]`, provided `f'` is monotone.
pub fn monotone_metastability_bound<F>(
    eps_prime: &Rational,
    f_prime: F,
    l_bound: &Rational,
    limits: &ResourceLimits,
) -> Result<Natural>
where
    F: Fn(&Natural) -> Result<Natural>,
{
    positive("eps'", eps_prime)?;
    positive("L", l_bound)?;
    let k = ceil_index(&l_bound.checked_div(eps_prime)?)?;
    let values = iterate(f_prime, &k, limits, "monotone bound")?;
    Ok(values.last().cloned().unwrap_or_default())
}

/// [`monotone_metastability_bound`] for `f'(n) = g(n)` read as an absolute
/// endpoint.
pub fn monotone_metastability_bound_gap(
    eps_prime: &Rational,
    g: &GapFunction,
    l_bound: &Rational,
    limits: &ResourceLimits,
) -> Result<Natural> {
    monotone_metastability_bound(eps_prime, |n| g.eval_big(n), l_bound, limits)
}

/// Intermediate values of [`gamma_bound`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaBundle {
    /// `ceil(4L/eps)`.
    pub k: Natural,
    /// `f^0(0), ..., f^k(0)`.
    pub iterates: Vec<Natural>,
    pub gamma: Natural,
}

/// `Gamma_L(eps, g) = ceil(8 L f^k(0) / eps)` with `k = ceil(4L/eps)`,
/// `f(a) = p_a * max(1, ceil_log2(8 L p_a / eps))` and
/// `p_a = max(1, g~(ceil(8 L a / eps)))`, `g~(x) = x + g(x)`.
///
/// Bounds the least `N >= 1` with `|F(v_m) - s_n| <= eps` on `[N; N + g(N)]`
/// for series of non-negative terms whose partial sums stay below `L`.
pub fn gamma_bound(
    eps: &Rational,
    g: &GapFunction,
    l_bound: &Rational,
    limits: &ResourceLimits,
) -> Result<GammaBundle> {
    positive("eps", eps)?;
    positive("L", l_bound)?;
    let eight_l = Rational::from_u64(8) * l_bound;
    let k = ceil_index(&(Rational::from_u64(4) * l_bound).checked_div(eps)?)?;
    let f = |a: &Natural| -> Result<Natural> {
        let x = ceil_index(&(&eight_l * Rational::from_natural(a)).checked_div(eps)?)?;
        let tilde = &x + g.eval_big(&x)?;
        let p = tilde.max(Natural::from(1u32));
        omega(
            &eps.checked_div(&(&eight_l * Rational::from_natural(&p)))?,
            &p,
        )
    };
    let iterates = iterate(f, &k, limits, "gamma")?;
    let last = iterates.last().cloned().unwrap_or_default();
    let gamma = ceil_index(&(&eight_l * Rational::from_natural(&last)).checked_div(eps)?)?;
    Ok(GammaBundle { k, iterates, gamma })
}
