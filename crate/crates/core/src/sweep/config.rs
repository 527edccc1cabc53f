//! Sweep configuration: TOML schema, defaults and validation.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bath::{BathLabel, BathSpec};
use crate::error::{Error, Result};
use crate::overlap::STABLE_WINDOW;
use crate::point::TruncationPolicy;
use crate::spectrum::{validate_params, SystemParams, ValidatedParams};

/// Slack allowed on `|dT| <= 2 T_0` before temperatures are clamped at zero.
pub const DELTA_T_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default = "one")]
    pub omega_a: f64,
    #[serde(default = "one")]
    pub epsilon: f64,
    #[serde(default)]
    pub lambda: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            omega_a: 1.0,
            epsilon: 1.0,
            lambda: 0.0,
        }
    }
}

impl ModelSection {
    pub fn params(&self, lambda: f64) -> SystemParams {
        SystemParams::new(self.omega_a, self.epsilon, lambda)
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathTemplate {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_omega_c")]
    pub omega_c: f64,
}

fn default_alpha() -> f64 {
    1e-3
}
fn default_omega_c() -> f64 {
    10.0
}

impl Default for BathTemplate {
    fn default() -> Self {
        Self {
            alpha: default_alpha(),
            omega_c: default_omega_c(),
        }
    }
}

impl BathTemplate {
    pub fn at(&self, label: BathLabel, temperature: f64) -> BathSpec {
        BathSpec {
            label,
            alpha: self.alpha,
            omega_c: self.omega_c,
            temperature,
        }
    }
}

/// Bath templates and the base temperatures `T_R = T0 + delta_T / 2`,
/// `T_Q = T0 - delta_T / 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathsSection {
    #[serde(rename = "T0", default = "one")]
    pub t0: f64,
    #[serde(rename = "delta_T", default)]
    pub delta_t: f64,
    #[serde(default)]
    pub resonator: BathTemplate,
    #[serde(default)]
    pub qubit: BathTemplate,
}

impl Default for BathsSection {
    fn default() -> Self {
        Self {
            t0: 1.0,
            delta_t: 0.0,
            resonator: BathTemplate::default(),
            qubit: BathTemplate::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AxisName {
    #[serde(rename = "delta_T")]
    DeltaT,
    #[serde(rename = "lambda")]
    Lambda,
    #[serde(rename = "T_R")]
    TR,
    #[serde(rename = "T_Q")]
    TQ,
    #[serde(rename = "T0")]
    T0,
}

impl AxisName {
    pub const ALL: [AxisName; 5] = [Self::DeltaT, Self::Lambda, Self::TR, Self::TQ, Self::T0];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::DeltaT => "delta_T",
            Self::Lambda => "lambda",
            Self::TR => "T_R",
            Self::TQ => "T_Q",
            Self::T0 => "T0",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default = "linear")]
    pub spacing: String,
    /// Explicit sample points; replaces `min`/`max`/`count`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

fn linear() -> String {
    "linear".into()
}

impl AxisSpec {
    pub fn linear(name: AxisName, min: f64, max: f64, count: usize) -> Self {
        Self {
            name: name.as_str().into(),
            min: Some(min),
            max: Some(max),
            count: Some(count),
            spacing: linear(),
            values: None,
        }
    }

    pub fn explicit(name: AxisName, values: Vec<f64>) -> Self {
        Self {
            name: name.as_str().into(),
            min: None,
            max: None,
            count: None,
            spacing: linear(),
            values: Some(values),
        }
    }

    /// Sample points; empty when the axis is malformed.
    pub fn points(&self) -> Vec<f64> {
        if let Some(v) = &self.values {
            return v.clone();
        }
        match (self.min, self.max, self.count) {
            (Some(lo), Some(hi), Some(n)) if n >= 2 => (0..n)
                .map(|i| {
                    if i + 1 == n {
                        hi
                    } else {
                        lo + (hi - lo) * i as f64 / (n - 1) as f64
                    }
                })
                .collect(),
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Observable {
    Current,
    Noise,
    Skewness,
    Rectification,
    XiSquared,
    WeakCurrent,
    /// `J / lambda^2`.
    CurrentScaled,
    /// `I_{m,1}`, `I_{m,0}` for `m = 2, 3`.
    WeakComponents,
}

impl Observable {
    pub const ALL: [Observable; 8] = [
        Self::Current,
        Self::Noise,
        Self::Skewness,
        Self::Rectification,
        Self::XiSquared,
        Self::WeakCurrent,
        Self::CurrentScaled,
        Self::WeakComponents,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Current => "current",
            Self::Noise => "noise",
            Self::Skewness => "skewness",
            Self::Rectification => "rectification",
            Self::XiSquared => "xi_squared",
            Self::WeakCurrent => "weak_current",
            Self::CurrentScaled => "current_scaled",
            Self::WeakComponents => "weak_components",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|o| o.as_str() == s)
    }

    /// CSV column headers contributed by this observable.
    pub fn columns(self) -> Vec<String> {
        match self {
            Self::Current => vec!["current[omega_a^2]".into()],
            Self::Noise => vec!["noise[omega_a^3]".into()],
            Self::Skewness => vec!["skewness[omega_a^4]".into()],
            Self::Rectification => vec!["rectification[1]".into()],
            Self::XiSquared => vec!["xi_squared[1]".into()],
            Self::WeakCurrent => vec!["weak_current[omega_a^2]".into()],
            Self::CurrentScaled => vec!["current_scaled[1]".into()],
            Self::WeakComponents => WEAK_COMPONENT_MS
                .iter()
                .flat_map(|m| [format!("I_{m}_1[omega_a]"), format!("I_{m}_0[omega_a]")])
                .collect(),
        }
    }
}

/// Photon numbers whose cyclic components are reported by `weak_components`.
pub const WEAK_COMPONENT_MS: [usize; 2] = [2, 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub baths: BathsSection,
    #[serde(default)]
    pub grid: Vec<AxisSpec>,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<String>,
    #[serde(default)]
    pub truncation: TruncationPolicy,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

fn default_outputs() -> Vec<String> {
    vec!["current".into()]
}
fn default_workers() -> usize {
    1
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            model: ModelSection::default(),
            baths: BathsSection::default(),
            grid: Vec::new(),
            outputs: default_outputs(),
            truncation: TruncationPolicy::default(),
            workers: default_workers(),
        }
    }
}

/// One grid point: model parameters and both baths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSetup {
    pub params: ValidatedParams,
    pub resonator: BathSpec,
    pub qubit: BathSpec,
}

impl SweepConfig {
    /// Axes as `(name, points)`; only meaningful on a validated config.
    pub fn axes(&self) -> Vec<(AxisName, Vec<f64>)> {
        self.grid
            .iter()
            .filter_map(|a| AxisName::parse(&a.name).map(|n| (n, a.points())))
            .collect()
    }

    pub fn observables(&self) -> Vec<Observable> {
        self.outputs.iter().filter_map(|o| Observable::parse(o)).collect()
    }

    pub fn wants(&self, o: Observable) -> bool {
        self.observables().contains(&o)
    }

    /// Row-major list of axis coordinates (first axis outermost).
    pub fn grid_points(&self) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::new()];
        for (_, pts) in self.axes() {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    pts.iter().map(move |&x| {
                        let mut p = prefix.clone();
                        p.push(x);
                        p
                    })
                })
                .collect();
        }
        out
    }

    /// Model and baths at given axis coordinates.
    pub fn setup(&self, coords: &[f64]) -> Result<PointSetup> {
        let mut lambda = self.model.lambda;
        let mut t0 = self.baths.t0;
        let mut dt = self.baths.delta_t;
        let mut t_r = None;
        let mut t_q = None;
        for ((name, _), &x) in self.axes().iter().zip(coords) {
            match name {
                AxisName::Lambda => lambda = x,
                AxisName::T0 => t0 = x,
                AxisName::DeltaT => dt = x,
                AxisName::TR => t_r = Some(x),
                AxisName::TQ => t_q = Some(x),
            }
        }
        let params = validate_params(self.model.params(lambda))?;
        let t_r = t_r.unwrap_or((t0 + 0.5 * dt).max(0.0));
        let t_q = t_q.unwrap_or((t0 - 0.5 * dt).max(0.0));
        let resonator = self.baths.resonator.at(BathLabel::R, t_r);
        let qubit = self.baths.qubit.at(BathLabel::Q, t_q);
        resonator.validate()?;
        qubit.validate()?;
        Ok(PointSetup {
            params,
            resonator,
            qubit,
        })
    }

    /// Every violated invariant, in a stable order.
    pub fn violations(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let m = &self.model;
        if !(m.omega_a > 0.0) || !m.omega_a.is_finite() {
            errs.push(format!("model.omega_a = {} must be > 0", m.omega_a));
        }
        if !m.epsilon.is_finite() {
            errs.push(format!("model.epsilon = {} must be finite", m.epsilon));
        }
        let limit = SystemParams::max_coupling(m.omega_a);
        let check_lambda = |errs: &mut Vec<String>, l: f64, what: &str| {
            if !(0.0..=limit).contains(&l) {
                errs.push(format!(
                    "{what} = {l} violates the coupling bound 0 <= lambda < omega_a / 4 (max {limit})"
                ));
            }
        };
        check_lambda(&mut errs, m.lambda, "model.lambda");

        let b = &self.baths;
        for (name, t) in [("resonator", &b.resonator), ("qubit", &b.qubit)] {
            if !(t.alpha >= 0.0) || !t.alpha.is_finite() {
                errs.push(format!("baths.{name}.alpha = {} must be >= 0", t.alpha));
            }
            if !(t.omega_c > 0.0) || !t.omega_c.is_finite() {
                errs.push(format!("baths.{name}.omega_c = {} must be > 0", t.omega_c));
            }
        }
        if !(b.t0 >= 0.0) || !b.t0.is_finite() {
            errs.push(format!("baths.T0 = {} must be >= 0", b.t0));
        }
        if !b.delta_t.is_finite() {
            errs.push(format!("baths.delta_T = {} must be finite", b.delta_t));
        }

        if self.grid.len() > 2 {
            errs.push(format!("grid has {} axes, at most 2 are allowed", self.grid.len()));
        }
        let mut seen = BTreeSet::new();
        let mut t0_min = b.t0;
        let mut dt_max = b.delta_t.abs();
        for (i, a) in self.grid.iter().enumerate() {
            let label = format!("grid[{i}] ({})", a.name);
            let Some(name) = AxisName::parse(&a.name) else {
                errs.push(format!(
                    "grid[{i}].name = '{}' is not one of delta_T, lambda, T_R, T_Q, T0",
                    a.name
                ));
                continue;
            };
            if !seen.insert(name) {
                errs.push(format!("{label}: axis repeated"));
            }
            if a.spacing != "linear" {
                errs.push(format!("{label}: spacing '{}' is not supported (linear)", a.spacing));
            }
            let pts = match &a.values {
                Some(v) => {
                    if a.min.is_some() || a.max.is_some() || a.count.is_some() {
                        errs.push(format!("{label}: give either values or min/max/count"));
                    }
                    if v.is_empty() {
                        errs.push(format!("{label}: values is empty"));
                    }
                    if v.iter().any(|x| !x.is_finite()) {
                        errs.push(format!("{label}: values must be finite"));
                    }
                    v.clone()
                }
                None => {
                    match (a.min, a.max, a.count) {
                        (Some(lo), Some(hi), Some(n)) => {
                            if n < 2 {
                                errs.push(format!("{label}: count = {n} must be >= 2"));
                            }
                            if !(lo < hi) {
                                errs.push(format!("{label}: min = {lo} must be < max = {hi}"));
                            }
                        }
                        _ => errs.push(format!("{label}: min, max and count are required")),
                    }
                    a.points()
                }
            };
            let finite: Vec<f64> = pts.into_iter().filter(|x| x.is_finite()).collect();
            match name {
                AxisName::Lambda => {
                    for &l in &finite {
                        check_lambda(&mut errs, l, &format!("{label} value"));
                    }
                    if self.wants(Observable::CurrentScaled) && finite.iter().any(|&l| l == 0.0) {
                        errs.push(format!("{label}: current_scaled needs lambda > 0"));
                    }
                }
                AxisName::TR | AxisName::TQ | AxisName::T0 => {
                    if finite.iter().any(|&t| t < 0.0) {
                        errs.push(format!("{label}: temperatures must be >= 0"));
                    }
                    if name == AxisName::T0 {
                        t0_min = finite.iter().copied().fold(f64::INFINITY, f64::min);
                    }
                }
                AxisName::DeltaT => {
                    dt_max = finite.iter().map(|x| x.abs()).fold(0.0, f64::max);
                }
            }
        }
        let explicit_t = seen.contains(&AxisName::TR) || seen.contains(&AxisName::TQ);
        if explicit_t && (seen.contains(&AxisName::DeltaT) || seen.contains(&AxisName::T0)) {
            errs.push("T_R/T_Q axes cannot be combined with delta_T or T0 axes".into());
        }
        if !explicit_t && dt_max > 2.0 * t0_min + DELTA_T_FLOOR {
            errs.push(format!(
                "|delta_T| up to {dt_max} exceeds 2 T0 = {}, a bath temperature would be negative",
                2.0 * t0_min
            ));
        }
        if self.wants(Observable::CurrentScaled) && !seen.contains(&AxisName::Lambda) && m.lambda == 0.0 {
            errs.push("current_scaled needs lambda > 0".into());
        }

        if self.outputs.is_empty() {
            errs.push("outputs is empty".into());
        }
        let mut seen_out = BTreeSet::new();
        for o in &self.outputs {
            match Observable::parse(o) {
                None => errs.push(format!(
                    "outputs: '{o}' is not one of current, noise, skewness, rectification, xi_squared, weak_current, current_scaled, weak_components"
                )),
                Some(obs) => {
                    if !seen_out.insert(obs) {
                        errs.push(format!("outputs: '{o}' repeated"));
                    }
                }
            }
        }

        let t = &self.truncation;
        if t.initial_n < 1 {
            errs.push("truncation.initial_N must be >= 1".into());
        }
        if t.step < 1 {
            errs.push("truncation.step must be >= 1".into());
        }
        if t.initial_n + t.step > t.max_n {
            errs.push(format!(
                "truncation.initial_N + step = {} exceeds max_N = {}",
                t.initial_n + t.step,
                t.max_n
            ));
        }
        if t.max_n > STABLE_WINDOW {
            errs.push(format!("truncation.max_N = {} exceeds {STABLE_WINDOW}", t.max_n));
        }
        if !(t.tol > 0.0) || !t.tol.is_finite() {
            errs.push(format!("truncation.tol = {} must be > 0", t.tol));
        }
        if self.workers < 1 {
            errs.push("workers must be >= 1".into());
        }
        errs
    }

    pub fn validate(&self) -> Result<()> {
        let errs = self.violations();
        if errs.is_empty() {
            self.warn_regimes();
            Ok(())
        } else {
            Err(Error::Validation(errs))
        }
    }

    fn warn_regimes(&self) {
        for (name, t) in [("resonator", &self.baths.resonator), ("qubit", &self.baths.qubit)] {
            if t.alpha > 1e-2 {
                log::warn!(
                    "baths.{name}.alpha = {} is large for a second-order master equation",
                    t.alpha
                );
            }
        }
        if self.wants(Observable::WeakCurrent) || self.wants(Observable::WeakComponents) {
            let lambda_max = self
                .axes()
                .iter()
                .find(|a| a.0 == AxisName::Lambda)
                .map(|a| a.1.iter().copied().fold(0.0, f64::max))
                .unwrap_or(self.model.lambda);
            if lambda_max > 0.02 * self.model.omega_a {
                log::warn!("weak-coupling outputs requested up to lambda = {lambda_max}");
            }
        }
    }
}

/// Parses and validates a TOML sweep configuration.
pub fn parse_config(text: &str) -> Result<SweepConfig> {
    let cfg: SweepConfig = toml::from_str(text).map_err(|e| {
        let line = e
            .span()
            .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
            .unwrap_or(0);
        Error::Parse {
            line,
            message: e.message().to_string(),
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}
