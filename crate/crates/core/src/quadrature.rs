//! Integrands `φ` and their primitives `Φ(τ) = ∫₀^τ φ(t) dt`.
//!
//! Built-in integrands carry a closed-form primitive (and its logarithm, so
//! ratios of primitives survive underflow). Expression integrands are
//! integrated numerically with globally adaptive Gauss–Kronrod (7/15)
//! bisection on `[δ, τ]`; the sliver `[0, δ]` is bounded, not evaluated.

use std::fmt;

use serde::Serialize;

use crate::expr::{ExprAst, FreeVar};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    /// Absolute target, used only when the integral estimate is exactly zero.
    pub abs_tol: f64,
    /// Width `δ` of the excluded sliver next to `t = 0`.
    pub singularity_offset: f64,
    /// Maximum number of panels.
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { rel_tol: 1e-8, abs_tol: 1e-12, singularity_offset: 1e-12, max_subdivisions: 60 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.rel_tol, self.abs_tol, self.singularity_offset]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if !positive || self.max_subdivisions < 10 {
            return Err(Error::InvalidParameter(format!("invalid quadrature configuration {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    /// `φ ≡ 1`, `Φ(τ) = τ`.
    ConstOne,
    /// `φ(t) = t^(1/t − 2)(1 − ln t)`, `Φ(τ) = τ^(1/τ)`.
    BranciariExample,
}

impl Builtin {
    pub fn name(self) -> &'static str {
        match self {
            Builtin::ConstOne => "const_one",
            Builtin::BranciariExample => "branciari_example",
        }
    }

    pub fn from_name(name: &str) -> Option<Builtin> {
        match name {
            "const_one" => Some(Builtin::ConstOne),
            "branciari_example" => Some(Builtin::BranciariExample),
            _ => None,
        }
    }

    fn phi(self, t: f64) -> f64 {
        match self {
            Builtin::ConstOne => 1.0,
            Builtin::BranciariExample if t == 0.0 => 0.0,
            Builtin::BranciariExample => t.powf(1.0 / t - 2.0) * (1.0 - t.ln()),
        }
    }

    fn primitive(self, tau: f64) -> f64 {
        match self {
            Builtin::ConstOne => tau,
            // τ^(1/τ) → 0 as τ → 0⁺.
            Builtin::BranciariExample if tau == 0.0 => 0.0,
            Builtin::BranciariExample => tau.powf(1.0 / tau),
        }
    }

    fn ln_primitive(self, tau: f64) -> f64 {
        match self {
            Builtin::ConstOne => tau.ln(),
            Builtin::BranciariExample => tau.ln() / tau,
        }
    }

    fn domain_cap(self) -> f64 {
        match self {
            Builtin::ConstOne => f64::INFINITY,
            // φ turns negative past t = e; every distance in its example is <= 1.
            Builtin::BranciariExample => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum IntegrandForm {
    Builtin(Builtin),
    Expr(ExprAst),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Integrand {
    name: String,
    form: IntegrandForm,
    domain_cap: f64,
}

/// Outcome of a numeric integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadEstimate {
    pub value: f64,
    pub error_estimate: f64,
    /// Upper bound for `∫₀^δ φ`, which is not included in `value`.
    pub tail_bound: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub nonnegative_on_grid: bool,
    pub positive_integral_at: Vec<(f64, bool)>,
    pub monotone_primitive: bool,
}

impl AdmissibilityReport {
    pub fn admissible(&self) -> bool {
        self.nonnegative_on_grid && self.monotone_primitive && self.positive_integral_at.iter().all(|&(_, ok)| ok)
    }
}

const GRID_POINTS: usize = 1000;

impl Integrand {
    pub fn builtin(b: Builtin) -> Integrand {
        Integrand { name: b.name().to_string(), form: IntegrandForm::Builtin(b), domain_cap: b.domain_cap() }
    }

    pub fn const_one() -> Integrand {
        Integrand::builtin(Builtin::ConstOne)
    }

    pub fn branciari_example() -> Integrand {
        Integrand::builtin(Builtin::BranciariExample)
    }

    pub fn by_name(name: &str) -> Result<Integrand> {
        Builtin::from_name(name)
            .map(Integrand::builtin)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown built-in integrand `{name}`")))
    }

    /// An integrand written in `t`, trusted up to `domain_cap`.
    pub fn from_expr(phi: &str, domain_cap: f64) -> Result<Integrand> {
        if !(domain_cap > 0.0) {
            return Err(Error::InvalidParameter(format!("domain_cap must be positive, got {domain_cap}")));
        }
        let ast = ExprAst::parse(phi, FreeVar::T)?;
        Ok(Integrand { name: format!("t -> {ast}"), form: IntegrandForm::Expr(ast), domain_cap })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn form(&self) -> &IntegrandForm {
        &self.form
    }

    pub fn domain_cap(&self) -> f64 {
        self.domain_cap
    }

    pub fn has_closed_form(&self) -> bool {
        matches!(self.form, IntegrandForm::Builtin(_))
    }

    pub fn is_const_one(&self) -> bool {
        self.form == IntegrandForm::Builtin(Builtin::ConstOne)
    }

    pub fn phi(&self, t: f64) -> Result<f64> {
        match &self.form {
            IntegrandForm::Builtin(b) => Ok(b.phi(t)),
            IntegrandForm::Expr(ast) => Ok(ast.evaluate(t)?),
        }
    }

    fn check_tau(&self, tau: f64) -> Result<()> {
        if !(tau >= 0.0) || tau.is_infinite() {
            return Err(Error::InvalidTau(tau));
        }
        if tau > self.domain_cap {
            return Err(Error::BeyondDomainCap { name: self.name.clone(), tau, cap: self.domain_cap });
        }
        Ok(())
    }

    /// `Φ(τ)`; the closed form when one exists, numeric quadrature otherwise.
    pub fn integrate(&self, tau: f64, cfg: &QuadratureConfig) -> Result<f64> {
        self.check_tau(tau)?;
        if tau == 0.0 {
            return Ok(0.0);
        }
        match &self.form {
            IntegrandForm::Builtin(b) => Ok(b.primitive(tau)),
            IntegrandForm::Expr(_) => Ok(self.integrate_numeric(tau, cfg)?.value),
        }
    }

    /// `ln Φ(τ)` when a closed form is available.
    pub fn ln_integral(&self, tau: f64) -> Result<Option<f64>> {
        self.check_tau(tau)?;
        Ok(match self.form {
            IntegrandForm::Builtin(b) => Some(b.ln_primitive(tau)),
            IntegrandForm::Expr(_) => None,
        })
    }

    /// `Φ(num) / Φ(den)`, or `None` when both vanish.
    ///
    /// When direct evaluation underflows and a closed form exists the ratio
    /// is formed in log space. A zero denominator under a positive numerator
    /// yields `+inf`.
    pub fn ratio(&self, num: f64, den: f64, cfg: &QuadratureConfig) -> Result<Option<f64>> {
        if self.is_const_one() {
            self.check_tau(num)?;
            self.check_tau(den)?;
            return Ok(plain_ratio(num, den));
        }
        let pn = self.integrate(num, cfg)?;
        let pd = self.integrate(den, cfg)?;
        let lost_num = num > 0.0 && !pn.is_normal();
        let lost_den = den > 0.0 && !pd.is_normal();
        if lost_num || lost_den {
            if let (Some(ln_n), Some(ln_d)) = (self.ln_integral(num)?, self.ln_integral(den)?) {
                return Ok(Some(if num == 0.0 { 0.0 } else { (ln_n - ln_d).exp() }));
            }
        }
        Ok(plain_ratio(pn, pd))
    }

    /// Adaptive quadrature on `[δ, τ]` regardless of any closed form.
    pub fn integrate_numeric(&self, tau: f64, cfg: &QuadratureConfig) -> Result<QuadEstimate> {
        cfg.validate()?;
        self.check_tau(tau)?;
        let delta = cfg.singularity_offset.min(tau);
        let mut tail_max = 0.0f64;
        for i in 1..=8 {
            tail_max = tail_max.max(self.phi(delta * i as f64 / 8.0)?.abs());
        }
        let tail_bound = delta * tail_max;
        if tau <= delta {
            return Ok(QuadEstimate { value: 0.0, error_estimate: 0.0, tail_bound, panels: 0 });
        }

        let mut panels = vec![self.kronrod_panel(delta, tau)?];
        loop {
            let value: f64 = panels.iter().map(|p| p.value).sum();
            let error: f64 = panels.iter().map(|p| p.error).sum();
            let target = if value == 0.0 { cfg.abs_tol } else { cfg.rel_tol * value.abs() };
            if error <= target {
                return Ok(QuadEstimate { value, error_estimate: error, tail_bound, panels: panels.len() });
            }
            if panels.len() >= cfg.max_subdivisions {
                return Err(Error::QuadratureNotConverged {
                    name: self.name.clone(),
                    tau,
                    subdivisions: cfg.max_subdivisions,
                    error,
                });
            }
            // Split the worst panel; ties go to the leftmost for determinism.
            let worst = panels
                .iter()
                .enumerate()
                .fold(0, |best, (i, p)| if p.error > panels[best].error { i } else { best });
            let Panel { a, b, .. } = panels[worst];
            let mid = 0.5 * (a + b);
            panels[worst] = self.kronrod_panel(a, mid)?;
            panels.insert(worst + 1, self.kronrod_panel(mid, b)?);
        }
    }

    fn kronrod_panel(&self, a: f64, b: f64) -> Result<Panel> {
        let center = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let fc = self.phi(center)?;
        let mut kronrod = fc * WGK[7];
        let mut gauss = fc * WG[3];
        for j in 0..7 {
            let dx = half * XGK[j];
            let sum = self.phi(center - dx)? + self.phi(center + dx)?;
            kronrod += WGK[j] * sum;
            if j % 2 == 1 {
                gauss += WG[j / 2] * sum;
            }
        }
        Ok(Panel { a, b, value: kronrod * half, error: ((kronrod - gauss) * half).abs() })
    }

    /// Grid checks of the admissibility hypotheses: `φ >= 0`, `Φ(ε) > 0`
    /// for each supplied `ε`, and a nondecreasing primitive with `Φ(0) = 0`.
    pub fn check_admissible(&self, epsilons: &[f64], cfg: &QuadratureConfig) -> Result<AdmissibilityReport> {
        for &eps in epsilons {
            if !(eps > 0.0) {
                return Err(Error::InvalidParameter(format!("admissibility epsilon must be positive, got {eps}")));
            }
            self.check_tau(eps)?;
        }
        let upper = if self.domain_cap.is_finite() {
            self.domain_cap
        } else {
            epsilons.iter().copied().fold(1.0, f64::max)
        };
        let grid: Vec<f64> = (1..=GRID_POINTS).map(|i| upper * i as f64 / GRID_POINTS as f64).collect();

        let nonnegative_on_grid = grid.iter().all(|&t| matches!(self.phi(t), Ok(v) if v >= 0.0));

        let positive_integral_at = epsilons
            .iter()
            .map(|&eps| {
                let positive = match self.ln_integral(eps) {
                    Ok(Some(ln)) => ln > f64::NEG_INFINITY,
                    _ => matches!(self.integrate(eps, cfg), Ok(v) if v > 0.0),
                };
                (eps, positive)
            })
            .collect();

        let monotone_primitive = match &self.form {
            IntegrandForm::Builtin(_) => {
                let mut prev = self.integrate(0.0, cfg)?;
                prev == 0.0
                    && grid.iter().all(|&t| {
                        let cur = self.integrate(t, cfg).unwrap_or(f64::NAN);
                        let ok = cur >= prev;
                        prev = cur;
                        ok
                    })
            }
            IntegrandForm::Expr(_) => {
                let mut prev = 0.0;
                (1..=20).all(|i| {
                    let t = upper * i as f64 / 20.0;
                    match self.integrate(t, cfg) {
                        Ok(cur) if cur >= prev => {
                            prev = cur;
                            true
                        }
                        _ => false,
                    }
                })
            }
        };

        Ok(AdmissibilityReport { nonnegative_on_grid, positive_integral_at, monotone_primitive })
    }
}

impl fmt::Display for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

fn plain_ratio(num: f64, den: f64) -> Option<f64> {
    match (num == 0.0, den == 0.0) {
        (true, true) => None,
        (false, true) => Some(f64::INFINITY),
        _ => Some(num / den),
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

// Kronrod abscissae (descending) and weights; Gauss nodes are the odd entries.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];
