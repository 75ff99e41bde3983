//! Parameter-grid evaluation and the figure datasets.
//!
//! A [`SweepSpec`] names one [`Quantity`], up to a few swept axes and a set
//! of fixed parameters. Grid points are visited in row-major order (first
//! axis slowest). Evaluation fans out over a rayon pool and is merged by
//! index, so the output never depends on the worker count.
//!
//! # Spec file grammar
//!
//! Line oriented, `#` starts a comment, blank lines are ignored.
//!
//! ```text
//! quantity = normalized_variance      # required
//! model = practical                   # normalized_variance only: ideal | practical
//! matching = fixed                    # variances only: fixed | detector_waist | mirror_waist
//! T = 0.1                             # fixed parameter: <name> = <number>
//! mu = 1
//! Rm = 1
//!
//! [axis z1]                           # starts an axis block for parameter z1
//! start = 0
//! stop = 2
//! count = 9
//! spacing = linear                    # linear | log (default linear)
//!
//! [fixed]                             # optional: back to fixed parameters
//! kappa = 62.83
//! ```

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;

use crate::beam_optics::rayleigh_range;
use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::fluctuation::{
    detector_response_factor, ideal_variance, normalized_variance, practical_variance, DetectorModel, LaserModel,
    ModeMatching, VarianceModel, SUB_POISSON_SLACK,
};
use crate::mode_network::{OpticalNetworkParams, LOSSLESS_TOLERANCE};
use crate::overlap::{mu_closed, rm_closed, OVERLAP_TOLERANCE};

/// Sweepable scalar parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Param {
    Wavelength,
    T,
    Rm,
    Mu,
    Z1,
    Alpha2,
    Dk,
    Kappa,
    D,
    W0,
    Wm,
}

impl Param {
    pub const ALL: [Param; 11] = [
        Param::Wavelength,
        Param::T,
        Param::Rm,
        Param::Mu,
        Param::Z1,
        Param::Alpha2,
        Param::Dk,
        Param::Kappa,
        Param::D,
        Param::W0,
        Param::Wm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Param::Wavelength => "wavelength",
            Param::T => "T",
            Param::Rm => "Rm",
            Param::Mu => "mu",
            Param::Z1 => "z1",
            Param::Alpha2 => "alpha2",
            Param::Dk => "dk",
            Param::Kappa => "kappa",
            Param::D => "D",
            Param::W0 => "w0",
            Param::Wm => "wm",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Param {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Param::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::spec(None, format!("unknown parameter `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    Mu,
    Rm,
    IdealVariance,
    PracticalVariance,
    NormalizedVariance,
    DetectorFactor,
}

impl Quantity {
    pub const ALL: [Quantity; 6] = [
        Quantity::Mu,
        Quantity::Rm,
        Quantity::IdealVariance,
        Quantity::PracticalVariance,
        Quantity::NormalizedVariance,
        Quantity::DetectorFactor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::Mu => "mu",
            Quantity::Rm => "rm",
            Quantity::IdealVariance => "ideal_variance",
            Quantity::PracticalVariance => "practical_variance",
            Quantity::NormalizedVariance => "normalized_variance",
            Quantity::DetectorFactor => "detector_factor",
        }
    }

    fn is_variance(self) -> bool {
        matches!(
            self,
            Quantity::IdealVariance | Quantity::PracticalVariance | Quantity::NormalizedVariance
        )
    }
}

impl FromStr for Quantity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL.into_iter().find(|q| q.name() == s).ok_or_else(|| {
            let names: Vec<_> = Quantity::ALL.iter().map(|q| q.name()).collect();
            Error::spec(
                None,
                format!("unknown quantity `{s}` (expected one of {})", names.join(", ")),
            )
        })
    }
}

/// How `mu` and `Rm` are obtained for the variance quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MatchingKind {
    /// `mu` and `Rm` are parameters.
    #[default]
    Fixed,
    /// `mu` from the round-trip closed form with waist `w0`; `Rm = 1`.
    DetectorWaist,
    /// `Rm` from the mirror-waist closed form with `w0`, `wm`; `mu = 1`.
    MirrorWaist,
}

impl MatchingKind {
    pub fn name(self) -> &'static str {
        match self {
            MatchingKind::Fixed => "fixed",
            MatchingKind::DetectorWaist => "detector_waist",
            MatchingKind::MirrorWaist => "mirror_waist",
        }
    }
}

impl FromStr for MatchingKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(MatchingKind::Fixed),
            "detector_waist" => Ok(MatchingKind::DetectorWaist),
            "mirror_waist" => Ok(MatchingKind::MirrorWaist),
            _ => Err(Error::spec(
                None,
                format!("unknown matching `{s}` (expected fixed, detector_waist or mirror_waist)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ModelKind {
    #[default]
    Ideal,
    Practical,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Ideal => "ideal",
            ModelKind::Practical => "practical",
        }
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal" => Ok(ModelKind::Ideal),
            "practical" => Ok(ModelKind::Practical),
            _ => Err(Error::spec(
                None,
                format!("unknown model `{s}` (expected ideal or practical)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

impl Spacing {
    pub fn name(self) -> &'static str {
        match self {
            Spacing::Linear => "linear",
            Spacing::Log => "log",
        }
    }
}

impl FromStr for Spacing {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Spacing::Linear),
            "log" => Ok(Spacing::Log),
            _ => Err(Error::spec(
                None,
                format!("unknown spacing `{s}` (expected linear or log)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub param: Param,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Axis {
    pub fn linear(param: Param, start: f64, stop: f64, count: usize) -> Self {
        Self {
            param,
            start,
            stop,
            count,
            spacing: Spacing::Linear,
        }
    }

    pub fn log(param: Param, start: f64, stop: f64, count: usize) -> Self {
        Self {
            spacing: Spacing::Log,
            ..Self::linear(param, start, stop, count)
        }
    }

    fn validate(&self) -> Result<()> {
        let name = self.param.name();
        if self.count < 2 {
            return Err(Error::spec(
                None,
                format!("axis `{name}`: count must be >= 2, got {}", self.count),
            ));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) || self.start >= self.stop {
            return Err(Error::spec(
                None,
                format!(
                    "axis `{name}`: need finite start < stop, got [{}, {}]",
                    self.start, self.stop
                ),
            ));
        }
        if self.spacing == Spacing::Log && self.start <= 0.0 {
            return Err(Error::spec(None, format!("axis `{name}`: log spacing needs start > 0")));
        }
        Ok(())
    }

    /// The `i`-th node; the endpoints are reproduced exactly.
    pub fn value(&self, i: usize) -> f64 {
        let last = self.count - 1;
        if i == 0 {
            return self.start;
        }
        if i == last {
            return self.stop;
        }
        let frac = i as f64 / last as f64;
        match self.spacing {
            Spacing::Linear => self.start + (self.stop - self.start) * frac,
            Spacing::Log => {
                let (lo, hi) = (self.start.log10(), self.stop.log10());
                10f64.powf(lo + (hi - lo) * frac)
            }
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub quantity: Quantity,
    pub matching: MatchingKind,
    pub model: ModelKind,
    pub axes: Vec<Axis>,
    pub fixed: Vec<(Param, f64)>,
}

struct Requirements {
    required: Vec<Param>,
    optional: Vec<Param>,
}

impl SweepSpec {
    pub fn new(quantity: Quantity) -> Self {
        Self {
            quantity,
            matching: MatchingKind::default(),
            model: ModelKind::default(),
            axes: Vec::new(),
            fixed: Vec::new(),
        }
    }

    pub fn with_axis(mut self, axis: Axis) -> Self {
        self.axes.push(axis);
        self
    }

    pub fn with_fixed(mut self, param: Param, value: f64) -> Self {
        self.fixed.push((param, value));
        self
    }

    pub fn with_matching(mut self, matching: MatchingKind) -> Self {
        self.matching = matching;
        self
    }

    pub fn with_model(mut self, model: ModelKind) -> Self {
        self.model = model;
        self
    }

    fn uses_detector(&self) -> bool {
        match self.quantity {
            Quantity::PracticalVariance | Quantity::DetectorFactor => true,
            Quantity::NormalizedVariance => self.model == ModelKind::Practical,
            _ => false,
        }
    }

    fn requirements(&self) -> Requirements {
        use Param::*;
        let mut required = vec![Z1];
        let mut optional = vec![Wavelength];
        match self.quantity {
            Quantity::Mu => required.push(W0),
            Quantity::Rm => required.extend([W0, Wm]),
            Quantity::DetectorFactor => {}
            _ => {
                required.push(T);
                optional.push(Alpha2);
                match self.matching {
                    MatchingKind::Fixed => required.extend([Mu, Rm]),
                    MatchingKind::DetectorWaist => required.push(W0),
                    MatchingKind::MirrorWaist => required.extend([W0, Wm]),
                }
            }
        }
        if self.uses_detector() {
            optional.extend([Kappa, D]);
            if self.quantity != Quantity::DetectorFactor {
                optional.push(Dk);
            }
        }
        Requirements { required, optional }
    }

    /// Checks axes and that every needed parameter is supplied exactly once.
    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() {
            return Err(Error::spec(None, "at least one axis is required"));
        }
        for axis in &self.axes {
            axis.validate()?;
        }
        let mut seen = BTreeSet::new();
        for p in self.axes.iter().map(|a| a.param).chain(self.fixed.iter().map(|f| f.0)) {
            if !seen.insert(p) {
                return Err(Error::spec(None, format!("parameter `{p}` is supplied more than once")));
            }
        }
        for (p, v) in &self.fixed {
            if !v.is_finite() {
                return Err(Error::spec(
                    None,
                    format!("parameter `{p}` must be a finite number, got {v}"),
                ));
            }
        }
        let req = self.requirements();
        for p in &req.required {
            if !seen.contains(p) {
                return Err(Error::spec(
                    None,
                    format!(
                        "missing parameter `{p}` required by quantity `{}`",
                        self.describe_quantity()
                    ),
                ));
            }
        }
        for p in &seen {
            if !req.required.contains(p) && !req.optional.contains(p) {
                return Err(Error::spec(
                    None,
                    format!("parameter `{p}` is not used by quantity `{}`", self.describe_quantity()),
                ));
            }
        }
        Ok(())
    }

    fn describe_quantity(&self) -> String {
        let mut s = self.quantity.name().to_string();
        if self.quantity.is_variance() {
            s.push_str(&format!(" with matching={}", self.matching.name()));
        }
        if self.quantity == Quantity::NormalizedVariance {
            s.push_str(&format!(", model={}", self.model.name()));
        }
        s
    }

    pub fn record_count(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    /// Axis values of row `index` (row-major, first axis slowest).
    pub fn grid_point(&self, index: usize) -> Vec<f64> {
        let mut rest = index;
        let mut out = vec![0.0; self.axes.len()];
        for (slot, axis) in out.iter_mut().zip(&self.axes).rev() {
            *slot = axis.value(rest % axis.count);
            rest /= axis.count;
        }
        out
    }

    /// Parses the spec-file grammar described in the module docs.
    pub fn parse(text: &str) -> Result<Self> {
        let mut quantity = None;
        let mut matching = None;
        let mut model = None;
        let mut fixed: Vec<(Param, f64)> = Vec::new();
        let mut axes: Vec<(usize, Param, AxisDraft)> = Vec::new();
        let mut in_axis = false;

        let at = |line: usize, e: Error| match e {
            Error::Spec { message, .. } => Error::spec(Some(line), message),
            other => other,
        };

        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('[') {
                let header = header
                    .strip_suffix(']')
                    .ok_or_else(|| Error::spec(Some(line_no), format!("unterminated section header `{line}`")))?
                    .trim();
                let mut words = header.split_whitespace();
                match (words.next(), words.next(), words.next()) {
                    (Some("fixed"), None, None) => in_axis = false,
                    (Some("axis"), Some(name), None) => {
                        let param = name.parse::<Param>().map_err(|e| at(line_no, e))?;
                        axes.push((line_no, param, AxisDraft::default()));
                        in_axis = true;
                    }
                    _ => {
                        return Err(Error::spec(
                            Some(line_no),
                            format!("unknown section `[{header}]` (expected `[axis <name>]` or `[fixed]`)"),
                        ))
                    }
                }
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::spec(Some(line_no), format!("expected `key = value`, got `{line}`")))?;
            if value.is_empty() {
                return Err(Error::spec(Some(line_no), format!("missing value for `{key}`")));
            }

            if in_axis {
                let (_, param, draft) = axes.last_mut().expect("axis block open");
                draft.set(*param, key, value).map_err(|e| at(line_no, e))?;
                continue;
            }
            match key {
                "quantity" => set_once(&mut quantity, key, value.parse().map_err(|e| at(line_no, e))?, line_no)?,
                "matching" => set_once(&mut matching, key, value.parse().map_err(|e| at(line_no, e))?, line_no)?,
                "model" => set_once(&mut model, key, value.parse().map_err(|e| at(line_no, e))?, line_no)?,
                _ => {
                    let param = key.parse::<Param>().map_err(|e| at(line_no, e))?;
                    if fixed.iter().any(|(p, _)| *p == param) {
                        return Err(Error::spec(
                            Some(line_no),
                            format!("parameter `{param}` is supplied more than once"),
                        ));
                    }
                    let v = parse_number(key, value).map_err(|e| at(line_no, e))?;
                    fixed.push((param, v));
                }
            }
        }

        let quantity = quantity.ok_or_else(|| Error::spec(None, "missing `quantity = ...` line"))?;
        let mut axes_out = Vec::with_capacity(axes.len());
        for (line_no, param, draft) in axes {
            axes_out.push(draft.finish(param).map_err(|e| at(line_no, e))?);
        }
        let spec = SweepSpec {
            quantity,
            matching: matching.unwrap_or_default(),
            model: model.unwrap_or_default(),
            axes: axes_out,
            fixed,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Renders the spec in the file grammar; `parse(to_text())` reproduces it.
    pub fn to_text(&self) -> String {
        let mut out = format!("quantity = {}\n", self.quantity.name());
        if self.quantity.is_variance() {
            out.push_str(&format!("matching = {}\n", self.matching.name()));
        }
        if self.quantity == Quantity::NormalizedVariance {
            out.push_str(&format!("model = {}\n", self.model.name()));
        }
        for (p, v) in &self.fixed {
            out.push_str(&format!("{p} = {v:?}\n"));
        }
        for a in &self.axes {
            out.push_str(&format!(
                "[axis {}]\nstart = {:?}\nstop = {:?}\ncount = {}\nspacing = {}\n",
                a.param,
                a.start,
                a.stop,
                a.count,
                a.spacing.name()
            ));
        }
        out
    }
}

fn set_once<T>(slot: &mut Option<T>, key: &str, value: T, line: usize) -> Result<()> {
    if slot.is_some() {
        return Err(Error::spec(Some(line), format!("`{key}` is given more than once")));
    }
    *slot = Some(value);
    Ok(())
}

fn parse_number(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::spec(None, format!("`{key}`: expected a finite number, got `{value}`")))
}

#[derive(Default)]
struct AxisDraft {
    start: Option<f64>,
    stop: Option<f64>,
    count: Option<usize>,
    spacing: Option<Spacing>,
}

impl AxisDraft {
    fn set(&mut self, param: Param, key: &str, value: &str) -> Result<()> {
        let dup = || Error::spec(None, format!("axis `{param}`: `{key}` is given more than once"));
        match key {
            "start" => {
                if self.start.replace(parse_number(key, value)?).is_some() {
                    return Err(dup());
                }
            }
            "stop" => {
                if self.stop.replace(parse_number(key, value)?).is_some() {
                    return Err(dup());
                }
            }
            "count" => {
                let n = value.parse::<usize>().map_err(|_| {
                    Error::spec(None, format!("axis `{param}`: count must be an integer, got `{value}`"))
                })?;
                if self.count.replace(n).is_some() {
                    return Err(dup());
                }
            }
            "spacing" => {
                if self.spacing.replace(value.parse()?).is_some() {
                    return Err(dup());
                }
            }
            _ => {
                return Err(Error::spec(
                    None,
                    format!("axis `{param}`: unknown key `{key}` (expected start, stop, count, spacing)"),
                ))
            }
        }
        Ok(())
    }

    fn finish(self, param: Param) -> Result<Axis> {
        let missing = |k: &str| Error::spec(None, format!("axis `{param}`: missing `{k}`"));
        let axis = Axis {
            param,
            start: self.start.ok_or_else(|| missing("start"))?,
            stop: self.stop.ok_or_else(|| missing("stop"))?,
            count: self.count.ok_or_else(|| missing("count"))?,
            spacing: self.spacing.unwrap_or_default(),
        };
        axis.validate()?;
        Ok(axis)
    }
}

/// Values of all parameters at one grid point, with defaults filled in.
#[derive(Debug, Clone, Copy)]
struct Point {
    values: [Option<f64>; Param::ALL.len()],
}

impl Point {
    fn get(&self, p: Param) -> Option<f64> {
        self.values[p.index()]
    }

    fn req(&self, p: Param) -> f64 {
        self.get(p).expect("validated spec supplies every required parameter")
    }

    fn wavelength(&self) -> f64 {
        self.get(Param::Wavelength).unwrap_or(1.0)
    }

    fn detector(&self) -> Result<DetectorModel> {
        let lambda = self.wavelength();
        let kappa = self
            .get(Param::Kappa)
            .unwrap_or(DEFAULT_ABSORPTION_PER_K0 * 2.0 * PI / lambda);
        let depth = self.get(Param::D).unwrap_or(lambda);
        DetectorModel::new(kappa, depth)
    }
}

/// Default detector absorption coefficient in units of the carrier wavenumber.
pub const DEFAULT_ABSORPTION_PER_K0: f64 = 10.0;

fn evaluate(spec: &SweepSpec, point: &Point) -> Result<f64> {
    let lambda = require_positive("wavelength", point.wavelength())?;
    let z1 = require_non_negative("z1", point.req(Param::Z1))?;
    match spec.quantity {
        Quantity::Mu => {
            let w0 = require_positive("w0", point.req(Param::W0))?;
            Ok(mu_closed(z1, rayleigh_range(w0, lambda)))
        }
        Quantity::Rm => {
            let w0 = require_positive("w0", point.req(Param::W0))?;
            let wm = require_positive("wm", point.req(Param::Wm))?;
            Ok(rm_closed(z1, w0, wm, lambda))
        }
        Quantity::DetectorFactor => Ok(detector_response_factor(&point.detector()?, 2.0 * PI / lambda, z1)),
        Quantity::IdealVariance | Quantity::PracticalVariance | Quantity::NormalizedVariance => {
            let alpha2 = require_non_negative("alpha2", point.get(Param::Alpha2).unwrap_or(1.0))?;
            let dk = point.get(Param::Dk).unwrap_or(0.0);
            let laser = LaserModel::new(alpha2.sqrt(), 0.0, 2.0 * PI / lambda, dk)?;
            let (mu, rm) = match spec.matching {
                MatchingKind::Fixed => (point.req(Param::Mu), point.req(Param::Rm)),
                _ => (1.0, 1.0),
            };
            let matching = match spec.matching {
                MatchingKind::Fixed => ModeMatching::Fixed,
                MatchingKind::DetectorWaist => ModeMatching::DetectorWaist {
                    w0: point.req(Param::W0),
                },
                MatchingKind::MirrorWaist => ModeMatching::MirrorWaist {
                    w0: point.req(Param::W0),
                    wm: point.req(Param::Wm),
                },
            };
            matching.validate()?;
            let mut template = OpticalNetworkParams::lossless(point.req(Param::T), rm, mu, z1);
            template.wavenumber = laser.wavenumber;
            template.amplitude = laser.amplitude;
            let p = matching.apply(&template, z1, lambda);
            match spec.quantity {
                Quantity::IdealVariance => ideal_variance(&p, &laser),
                Quantity::PracticalVariance => practical_variance(&p, &laser, &point.detector()?),
                _ => {
                    let model = match spec.model {
                        ModelKind::Ideal => VarianceModel::Ideal,
                        ModelKind::Practical => VarianceModel::Practical(point.detector()?),
                    };
                    normalized_variance(&p, &laser, &model)
                }
            }
        }
    }
}

/// Tabulated sweep output.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub columns: Vec<String>,
    /// Row-major records: axis values followed by the quantity.
    pub records: Vec<Vec<f64>>,
    /// Ordered `(key, value)` metadata.
    pub metadata: Vec<(String, String)>,
}

impl SweepResult {
    /// Values of one named column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.records.iter().map(|r| r[idx]).collect())
    }

    /// CSV with `#` metadata lines, a header and one record per line. Numbers
    /// use 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (k, v) in &self.metadata {
            writeln!(out, "# {k} = {v}")?;
        }
        writeln!(out, "{}", self.columns.join(","))?;
        let mut line = String::new();
        for record in &self.records {
            line.clear();
            for (i, v) in record.iter().enumerate() {
                if i > 0 {
                    line.push(',');
                }
                line.push_str(&format_csv_number(*v));
            }
            line.push('\n');
            out.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }

    /// Parses output of [`SweepResult::write_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut metadata = Vec::new();
        let mut columns: Option<Vec<String>> = None;
        let mut records = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line_no = n + 1;
            if let Some(meta) = line.strip_prefix('#') {
                let (k, v) = meta.split_once('=').unwrap_or((meta, ""));
                metadata.push((k.trim().to_string(), v.trim().to_string()));
                continue;
            }
            if line.is_empty() {
                continue;
            }
            match &columns {
                None => columns = Some(line.split(',').map(str::to_string).collect()),
                Some(cols) => {
                    let record = line
                        .split(',')
                        .map(|f| {
                            f.parse::<f64>()
                                .map_err(|_| Error::spec(Some(line_no), format!("bad number `{f}`")))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    if record.len() != cols.len() {
                        return Err(Error::spec(
                            Some(line_no),
                            format!("expected {} fields, got {}", cols.len(), record.len()),
                        ));
                    }
                    records.push(record);
                }
            }
        }
        Ok(Self {
            columns: columns.ok_or_else(|| Error::spec(None, "CSV has no header"))?,
            records,
            metadata,
        })
    }
}

pub fn format_csv_number(v: f64) -> String {
    format!("{v:.16e}")
}

/// Evaluates the sweep on the global rayon pool.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let values = (0..spec.record_count())
        .into_par_iter()
        .map(|i| evaluate_row(spec, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(spec, values))
}

/// Evaluates the sweep on a dedicated pool of `workers` threads.
pub fn run_sweep_with_workers(spec: &SweepSpec, workers: usize) -> Result<SweepResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::spec(None, format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| run_sweep(spec))
}

fn evaluate_row(spec: &SweepSpec, index: usize) -> Result<f64> {
    let coords = spec.grid_point(index);
    let mut point = Point {
        values: [None; Param::ALL.len()],
    };
    for (p, v) in &spec.fixed {
        point.values[p.index()] = Some(*v);
    }
    for (axis, v) in spec.axes.iter().zip(&coords) {
        point.values[axis.param.index()] = Some(*v);
    }
    evaluate(spec, &point).map_err(|e| Error::AtGridPoint {
        coordinates: spec
            .axes
            .iter()
            .zip(&coords)
            .map(|(a, v)| format!("{}={v:?}", a.param))
            .collect::<Vec<_>>()
            .join(", "),
        source: Box::new(e),
    })
}

fn assemble(spec: &SweepSpec, values: Vec<f64>) -> SweepResult {
    let mut columns: Vec<String> = spec.axes.iter().map(|a| a.param.name().to_string()).collect();
    columns.push(spec.quantity.name().to_string());
    let records = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let mut r = spec.grid_point(i);
            r.push(v);
            r
        })
        .collect();
    SweepResult {
        columns,
        records,
        metadata: metadata(spec),
    }
}

fn metadata(spec: &SweepSpec) -> Vec<(String, String)> {
    let mut m = vec![
        ("generator".to_string(), "mirrorvac sweep".to_string()),
        ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("quantity".to_string(), spec.quantity.name().to_string()),
    ];
    if spec.quantity.is_variance() {
        m.push(("matching".into(), spec.matching.name().into()));
    }
    if spec.quantity == Quantity::NormalizedVariance {
        m.push(("model".into(), spec.model.name().into()));
    }
    for a in &spec.axes {
        m.push((
            format!("axis {}", a.param),
            format!("{} {:?} {:?} {}", a.spacing.name(), a.start, a.stop, a.count),
        ));
    }
    for (p, v) in &spec.fixed {
        m.push((format!("fixed {p}"), format!("{v:?}")));
    }
    let req = spec.requirements();
    let supplied: BTreeSet<Param> = spec
        .axes
        .iter()
        .map(|a| a.param)
        .chain(spec.fixed.iter().map(|f| f.0))
        .collect();
    for p in req.optional.iter().filter(|p| !supplied.contains(p)) {
        let d = match p {
            Param::Wavelength => "1".to_string(),
            Param::Alpha2 => "1".to_string(),
            Param::Dk => "0".to_string(),
            Param::Kappa => format!("{DEFAULT_ABSORPTION_PER_K0} k0"),
            Param::D => "1 wavelength".to_string(),
            _ => continue,
        };
        m.push((format!("default {p}"), d));
    }
    m.push(("records".into(), spec.record_count().to_string()));
    m.push((
        "tolerances".into(),
        format!(
            "overlap_quadrature={OVERLAP_TOLERANCE:e} sub_poisson_slack={SUB_POISSON_SLACK:e} lossless={LOSSLESS_TOLERANCE:e}"
        ),
    ));
    m
}

/// Waist radius used for the mirror-waist surface.
pub const FIGURE3_LASER_WAIST: f64 = 100.0;

/// Mode-matching `mu` over waist `w0` (80 log-spaced nodes in `[1, 200]`)
/// and mirror distance `z1` (200 linear nodes in `[0, 5e4]`).
pub fn figure2_spec() -> SweepSpec {
    SweepSpec::new(Quantity::Mu)
        .with_axis(Axis::log(Param::W0, 1.0, 200.0, 80))
        .with_axis(Axis::linear(Param::Z1, 0.0, 5.0e4, 200))
}

/// Effective reflectance over mirror waist `wm` and distance `z1`, with the
/// laser waist fixed at `100`. The `wm` axis has 30 log nodes per decade
/// starting at 1, so `wm = 1, 10, 100` are nodes; it ends at `10^(79/30)`.
pub fn figure3_spec() -> SweepSpec {
    SweepSpec::new(Quantity::Rm)
        .with_axis(Axis::log(Param::Wm, 1.0, 10f64.powf(79.0 / 30.0), 80))
        .with_axis(Axis::linear(Param::Z1, 0.0, 5.0e4, 200))
        .with_fixed(Param::W0, FIGURE3_LASER_WAIST)
}

pub fn figure2_dataset() -> SweepResult {
    run_sweep(&figure2_spec()).expect("figure 2 preset is valid")
}

pub fn figure3_dataset() -> SweepResult {
    run_sweep(&figure3_spec()).expect("figure 3 preset is valid")
}
