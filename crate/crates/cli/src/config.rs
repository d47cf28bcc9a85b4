//! Experiment configuration: a flat TOML schema, command-line overrides,
//! per-kind field validation, and row-major grid expansion for sweeps.

use std::fmt;
use std::path::PathBuf;

use jcberry::BranchSign;
use serde::Deserialize;

/// The experiment families the driver knows how to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Semiclassical,
    SingleMode,
    TwoMode,
    Mixed,
    Adiabatic,
    SemiclassicalLimit,
}

impl Kind {
    pub fn parse(s: &str) -> Result<Self, String> {
        Ok(match s {
            "semiclassical" => Kind::Semiclassical,
            "single-mode" => Kind::SingleMode,
            "two-mode" => Kind::TwoMode,
            "mixed" => Kind::Mixed,
            "adiabatic" => Kind::Adiabatic,
            "semiclassical-limit" => Kind::SemiclassicalLimit,
            other => return Err(format!("unknown experiment kind {other:?}")),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Kind::Semiclassical => "semiclassical",
            Kind::SingleMode => "single-mode",
            Kind::TwoMode => "two-mode",
            Kind::Mixed => "mixed",
            Kind::Adiabatic => "adiabatic",
            Kind::SemiclassicalLimit => "semiclassical-limit",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "jsonl" => Ok(Format::Jsonl),
            other => Err(format!("unknown output format {other:?}, expected csv or jsonl")),
        }
    }
}

/// A float-valued parameter: a single value, an explicit list, or an
/// inclusive evenly spaced range. Lists and ranges are only legal in sweeps.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum FloatAxis {
    Scalar(f64),
    List(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

impl FloatAxis {
    fn values(&self) -> Result<Vec<f64>, String> {
        match self {
            FloatAxis::Scalar(v) => Ok(vec![*v]),
            FloatAxis::List(vs) => {
                if vs.is_empty() {
                    return Err("empty axis".into());
                }
                Ok(vs.clone())
            }
            FloatAxis::Range { start, stop, count } => {
                if *count == 0 {
                    return Err("empty axis (count = 0)".into());
                }
                if *count == 1 {
                    return Ok(vec![*start]);
                }
                let step = (stop - start) / (*count as f64 - 1.0);
                Ok((0..*count).map(|k| start + step * k as f64).collect())
            }
        }
    }

    fn is_scalar(&self) -> bool {
        matches!(self, FloatAxis::Scalar(_))
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum IntAxis {
    Scalar(u64),
    List(Vec<u64>),
}

impl IntAxis {
    fn values(&self) -> Result<Vec<usize>, String> {
        match self {
            IntAxis::Scalar(v) => Ok(vec![*v as usize]),
            IntAxis::List(vs) => {
                if vs.is_empty() {
                    return Err("empty axis".into());
                }
                Ok(vs.iter().map(|&v| v as usize).collect())
            }
        }
    }

    fn is_scalar(&self) -> bool {
        matches!(self, IntAxis::Scalar(_))
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum SignAxis {
    Scalar(String),
    List(Vec<String>),
}

impl SignAxis {
    fn values(&self) -> Result<Vec<BranchSign>, String> {
        let parse = |s: &str| -> Result<BranchSign, String> {
            match s {
                "+" | "plus" => Ok(BranchSign::Plus),
                "-" | "minus" => Ok(BranchSign::Minus),
                other => Err(format!("unknown branch sign {other:?}, expected + or -")),
            }
        };
        match self {
            SignAxis::Scalar(s) => Ok(vec![parse(s)?]),
            SignAxis::List(vs) => {
                if vs.is_empty() {
                    return Err("empty axis".into());
                }
                vs.iter().map(|s| parse(s)).collect()
            }
        }
    }

    fn is_scalar(&self) -> bool {
        matches!(self, SignAxis::Scalar(_))
    }
}

/// The raw configuration file. Every field is optional here; kind-specific
/// validation happens after command-line overrides are merged in.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub kind: Option<String>,
    /// Inner experiment kind of a sweep.
    pub experiment: Option<String>,
    pub delta: Option<FloatAxis>,
    pub lambda: Option<FloatAxis>,
    pub nu: Option<FloatAxis>,
    pub alpha: Option<FloatAxis>,
    pub beta: Option<FloatAxis>,
    pub theta: Option<FloatAxis>,
    pub n: Option<IntAxis>,
    pub nprime: Option<IntAxis>,
    pub sign: Option<SignAxis>,
    pub duration: Option<FloatAxis>,
    pub nodes: Option<u64>,
    pub cutoff_a: Option<u64>,
    pub cutoff_b: Option<u64>,
    pub steps: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub workers: Option<u64>,
    pub fail_fast: Option<bool>,
    pub seed: Option<u64>,
    pub timing: Option<bool>,
}

/// Scalar overrides collected from command-line flags; a flag replaces the
/// corresponding file value, collapsing an axis to a single point.
#[derive(Debug, Default)]
pub struct Overrides {
    pub experiment: Option<String>,
    pub delta: Option<f64>,
    pub lambda: Option<f64>,
    pub nu: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub theta: Option<f64>,
    pub n: Option<u64>,
    pub nprime: Option<u64>,
    pub sign: Option<String>,
    pub duration: Option<f64>,
    pub nodes: Option<u64>,
    pub cutoff_a: Option<u64>,
    pub cutoff_b: Option<u64>,
    pub steps: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub workers: Option<u64>,
    pub fail_fast: bool,
    pub seed: Option<u64>,
    pub timing: bool,
}

/// One fully resolved grid point. Fields the experiment kind does not use
/// stay `None` and serialize as empty columns.
#[derive(Clone, Debug, Default)]
pub struct Point {
    pub delta: Option<f64>,
    pub lambda: Option<f64>,
    pub nu: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub theta: Option<f64>,
    pub n: Option<usize>,
    pub nprime: Option<usize>,
    pub sign: Option<BranchSign>,
    pub duration: Option<f64>,
    pub nodes: Option<usize>,
    pub cutoff_a: Option<usize>,
    pub cutoff_b: Option<usize>,
    pub steps: Option<usize>,
}

/// A validated experiment: the kind, the expanded grid in row-major order,
/// and the output plumbing.
#[derive(Debug)]
pub struct Experiment {
    pub kind: Kind,
    pub points: Vec<Point>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub workers: usize,
    pub fail_fast: bool,
    pub seed: Option<u64>,
    pub timing: bool,
}

/// Environment variable supplying the default worker count; the `--workers`
/// flag and the config file both take precedence over it.
pub const WORKERS_ENV: &str = "JCBERRY_WORKERS";

fn merge(file: &mut FileConfig, flags: Overrides) {
    if let Some(v) = flags.experiment {
        file.experiment = Some(v);
    }
    if let Some(v) = flags.delta {
        file.delta = Some(FloatAxis::Scalar(v));
    }
    if let Some(v) = flags.lambda {
        file.lambda = Some(FloatAxis::Scalar(v));
    }
    if let Some(v) = flags.nu {
        file.nu = Some(FloatAxis::Scalar(v));
    }
    if let Some(v) = flags.alpha {
        file.alpha = Some(FloatAxis::Scalar(v));
    }
    if let Some(v) = flags.beta {
        file.beta = Some(FloatAxis::Scalar(v));
    }
    if let Some(v) = flags.theta {
        file.theta = Some(FloatAxis::Scalar(v));
    }
    if let Some(v) = flags.n {
        file.n = Some(IntAxis::Scalar(v));
    }
    if let Some(v) = flags.nprime {
        file.nprime = Some(IntAxis::Scalar(v));
    }
    if let Some(v) = flags.sign {
        file.sign = Some(SignAxis::Scalar(v));
    }
    if let Some(v) = flags.duration {
        file.duration = Some(FloatAxis::Scalar(v));
    }
    if let Some(v) = flags.nodes {
        file.nodes = Some(v);
    }
    if let Some(v) = flags.cutoff_a {
        file.cutoff_a = Some(v);
    }
    if let Some(v) = flags.cutoff_b {
        file.cutoff_b = Some(v);
    }
    if let Some(v) = flags.steps {
        file.steps = Some(v);
    }
    if let Some(v) = flags.out {
        file.out = Some(v);
    }
    if let Some(v) = flags.format {
        file.format = Some(v);
    }
    if let Some(v) = flags.workers {
        file.workers = Some(v);
    }
    if flags.fail_fast {
        file.fail_fast = Some(true);
    }
    if let Some(v) = flags.seed {
        file.seed = Some(v);
    }
    if flags.timing {
        file.timing = Some(true);
    }
}

struct FieldUse {
    /// Physical axis fields the kind consumes, in canonical grid order.
    axes: &'static [&'static str],
    /// Fields that must be present (no default).
    required: &'static [&'static str],
    /// Scalar numeric controls the kind consumes.
    controls: &'static [&'static str],
}

fn field_use(kind: Kind) -> FieldUse {
    match kind {
        Kind::Semiclassical => FieldUse {
            axes: &["delta", "lambda", "alpha"],
            required: &["lambda"],
            controls: &["nodes"],
        },
        Kind::SingleMode => FieldUse {
            axes: &["delta", "lambda", "nu", "n", "sign"],
            required: &["lambda"],
            controls: &["nodes", "cutoff_a"],
        },
        Kind::TwoMode => FieldUse {
            axes: &["lambda", "nu", "theta", "n", "nprime", "sign"],
            required: &["lambda", "theta"],
            controls: &["nodes", "cutoff_a", "cutoff_b"],
        },
        Kind::Mixed => FieldUse {
            axes: &["theta"],
            required: &["theta"],
            controls: &[],
        },
        Kind::Adiabatic => FieldUse {
            axes: &["delta", "lambda", "nu", "n", "sign", "duration"],
            required: &["lambda", "duration"],
            controls: &["nodes", "cutoff_a", "steps"],
        },
        Kind::SemiclassicalLimit => FieldUse {
            axes: &["alpha", "beta", "theta", "duration"],
            required: &["theta", "duration"],
            controls: &["cutoff_a", "cutoff_b", "steps"],
        },
    }
}

/// All physical axis fields, in the canonical row-major expansion order
/// (the last listed axis varies fastest).
const AXIS_ORDER: [&str; 10] =
    ["delta", "lambda", "nu", "alpha", "beta", "theta", "n", "nprime", "sign", "duration"];

const CONTROL_ORDER: [&str; 4] = ["nodes", "cutoff_a", "cutoff_b", "steps"];

enum AxisValues {
    Float(Vec<f64>),
    Int(Vec<usize>),
    Sign(Vec<BranchSign>),
}

impl AxisValues {
    fn len(&self) -> usize {
        match self {
            AxisValues::Float(v) => v.len(),
            AxisValues::Int(v) => v.len(),
            AxisValues::Sign(v) => v.len(),
        }
    }
}

fn axis_present(file: &FileConfig, name: &str) -> bool {
    match name {
        "delta" => file.delta.is_some(),
        "lambda" => file.lambda.is_some(),
        "nu" => file.nu.is_some(),
        "alpha" => file.alpha.is_some(),
        "beta" => file.beta.is_some(),
        "theta" => file.theta.is_some(),
        "n" => file.n.is_some(),
        "nprime" => file.nprime.is_some(),
        "sign" => file.sign.is_some(),
        "duration" => file.duration.is_some(),
        _ => unreachable!(),
    }
}

fn axis_is_scalar(file: &FileConfig, name: &str) -> bool {
    match name {
        "delta" => file.delta.as_ref().is_none_or(FloatAxis::is_scalar),
        "lambda" => file.lambda.as_ref().is_none_or(FloatAxis::is_scalar),
        "nu" => file.nu.as_ref().is_none_or(FloatAxis::is_scalar),
        "alpha" => file.alpha.as_ref().is_none_or(FloatAxis::is_scalar),
        "beta" => file.beta.as_ref().is_none_or(FloatAxis::is_scalar),
        "theta" => file.theta.as_ref().is_none_or(FloatAxis::is_scalar),
        "n" => file.n.as_ref().is_none_or(IntAxis::is_scalar),
        "nprime" => file.nprime.as_ref().is_none_or(IntAxis::is_scalar),
        "sign" => file.sign.as_ref().is_none_or(SignAxis::is_scalar),
        "duration" => file.duration.as_ref().is_none_or(FloatAxis::is_scalar),
        _ => unreachable!(),
    }
}

fn control_present(file: &FileConfig, name: &str) -> bool {
    match name {
        "nodes" => file.nodes.is_some(),
        "cutoff_a" => file.cutoff_a.is_some(),
        "cutoff_b" => file.cutoff_b.is_some(),
        "steps" => file.steps.is_some(),
        _ => unreachable!(),
    }
}

fn axis_values(
    file: &FileConfig,
    kind: Kind,
    name: &str,
) -> Result<AxisValues, String> {
    let fl = |axis: &Option<FloatAxis>, default: Option<f64>| -> Result<AxisValues, String> {
        match (axis, default) {
            (Some(a), _) => Ok(AxisValues::Float(a.values()?)),
            (None, Some(d)) => Ok(AxisValues::Float(vec![d])),
            (None, None) => Err(format!("{} requires the {name} parameter", kind.name())),
        }
    };
    let int = |axis: &Option<IntAxis>, default: usize| -> Result<AxisValues, String> {
        match axis {
            Some(a) => Ok(AxisValues::Int(a.values()?)),
            None => Ok(AxisValues::Int(vec![default])),
        }
    };
    match name {
        "delta" => fl(&file.delta, Some(0.0)),
        "lambda" => fl(&file.lambda, None),
        "nu" => fl(&file.nu, Some(1.0)),
        "alpha" => fl(
            &file.alpha,
            Some(if kind == Kind::Semiclassical { 1.0 } else { 0.0 }),
        ),
        "beta" => fl(&file.beta, Some(0.0)),
        "theta" => fl(&file.theta, None),
        "duration" => fl(&file.duration, None),
        "n" => int(&file.n, 0),
        "nprime" => int(&file.nprime, 0),
        "sign" => match &file.sign {
            Some(a) => Ok(AxisValues::Sign(a.values()?)),
            None => Ok(AxisValues::Sign(vec![BranchSign::Plus])),
        },
        _ => unreachable!(),
    }
}

fn set_point_field(point: &mut Point, name: &str, values: &AxisValues, idx: usize) {
    match (name, values) {
        ("delta", AxisValues::Float(v)) => point.delta = Some(v[idx]),
        ("lambda", AxisValues::Float(v)) => point.lambda = Some(v[idx]),
        ("nu", AxisValues::Float(v)) => point.nu = Some(v[idx]),
        ("alpha", AxisValues::Float(v)) => point.alpha = Some(v[idx]),
        ("beta", AxisValues::Float(v)) => point.beta = Some(v[idx]),
        ("theta", AxisValues::Float(v)) => point.theta = Some(v[idx]),
        ("duration", AxisValues::Float(v)) => point.duration = Some(v[idx]),
        ("n", AxisValues::Int(v)) => point.n = Some(v[idx]),
        ("nprime", AxisValues::Int(v)) => point.nprime = Some(v[idx]),
        ("sign", AxisValues::Sign(v)) => point.sign = Some(v[idx]),
        _ => unreachable!(),
    }
}

/// Builds the validated experiment from a parsed file and flag overrides.
///
/// `command` is the invoked subcommand; `sweep` selects grid mode, where the
/// inner kind comes from the `experiment` field and the physical parameters
/// may carry list or range axes. Outside of sweeps every parameter must be
/// a single value.
pub fn resolve(
    mut file: FileConfig,
    flags: Overrides,
    command: Option<Kind>,
    sweep: bool,
) -> Result<Experiment, String> {
    merge(&mut file, flags);

    let kind = if sweep {
        let name = file
            .experiment
            .as_deref()
            .ok_or("sweep needs an experiment field naming the inner kind")?;
        Kind::parse(name)?
    } else {
        if file.experiment.is_some() {
            return Err("the experiment field belongs to sweep configs".into());
        }
        let command = command.expect("non-sweep commands carry a kind");
        if let Some(name) = file.kind.as_deref() {
            let file_kind = Kind::parse(name)?;
            if file_kind != command {
                return Err(format!(
                    "config kind {file_kind} does not match the {command} subcommand"
                ));
            }
        }
        command
    };
    if sweep {
        if let Some(name) = file.kind.as_deref() {
            if name != "sweep" {
                let file_kind = Kind::parse(name)?;
                if file_kind != kind {
                    return Err(format!(
                        "config kind {file_kind} does not match the sweep's experiment {kind}"
                    ));
                }
            }
        }
    }

    let usage = field_use(kind);
    for name in AXIS_ORDER {
        if axis_present(&file, name) && !usage.axes.contains(&name) {
            return Err(format!("{name} is not a {} parameter", kind.name()));
        }
        if !sweep && !axis_is_scalar(&file, name) {
            return Err(format!("{name} carries an axis; lists and ranges need the sweep command"));
        }
    }
    for name in CONTROL_ORDER {
        if control_present(&file, name) && !usage.controls.contains(&name) {
            return Err(format!("{name} is not a {} control", kind.name()));
        }
    }
    for name in usage.required {
        if !axis_present(&file, name) {
            return Err(format!("{} requires the {name} parameter", kind.name()));
        }
    }

    // numeric controls must be positive where given
    if file.nodes == Some(0) {
        return Err("nodes must be positive".into());
    }
    if file.cutoff_a == Some(0) || file.cutoff_b == Some(0) {
        return Err("cutoffs must be positive".into());
    }
    if let Some(d) = &file.duration {
        if d.values().is_ok_and(|vs| vs.iter().any(|&v| !(v > 0.0) || !v.is_finite())) {
            return Err("duration must be positive and finite".into());
        }
    }

    let axes: Vec<(&str, AxisValues)> = usage
        .axes
        .iter()
        .map(|&name| Ok((name, axis_values(&file, kind, name)?)))
        .collect::<Result<_, String>>()?;

    let total: usize = axes.iter().map(|(_, v)| v.len()).product();
    let mut points = Vec::with_capacity(total);
    for mut flat in 0..total {
        let mut point = Point::default();
        // row-major: the last axis varies fastest
        let mut indices = vec![0usize; axes.len()];
        for (slot, (_, values)) in axes.iter().enumerate().rev() {
            indices[slot] = flat % values.len();
            flat /= values.len();
        }
        for (slot, (name, values)) in axes.iter().enumerate() {
            set_point_field(&mut point, name, values, indices[slot]);
        }
        apply_controls(&mut point, &file, kind);
        points.push(point);
    }

    let format = match file.format.as_deref() {
        Some(s) => Format::parse(s)?,
        None => Format::Csv,
    };
    let workers = match file.workers {
        Some(0) => return Err("workers must be positive".into()),
        Some(w) => w as usize,
        None => match std::env::var(WORKERS_ENV) {
            Ok(s) => match s.trim().parse::<usize>() {
                Ok(w) if w > 0 => w,
                _ => return Err(format!("{WORKERS_ENV} must be a positive integer, got {s:?}")),
            },
            Err(_) => 1,
        },
    };

    Ok(Experiment {
        kind,
        points,
        out: file.out,
        format,
        workers,
        fail_fast: file.fail_fast.unwrap_or(false),
        seed: file.seed,
        timing: file.timing.unwrap_or(false),
    })
}

fn apply_controls(point: &mut Point, file: &FileConfig, kind: Kind) {
    let n = point.n.unwrap_or(0);
    let np = point.nprime.unwrap_or(0);
    match kind {
        Kind::Semiclassical => {
            point.nodes = Some(file.nodes.unwrap_or(2000) as usize);
        }
        Kind::SingleMode => {
            point.nodes = Some(file.nodes.unwrap_or(2000) as usize);
            point.cutoff_a = Some(file.cutoff_a.map_or(n + 8, |c| c as usize));
        }
        Kind::TwoMode => {
            point.nodes = Some(file.nodes.unwrap_or(16384) as usize);
            let floor = n + np + 2;
            point.cutoff_a = Some(file.cutoff_a.map_or(floor.max(8), |c| c as usize));
            point.cutoff_b = Some(file.cutoff_b.map_or(floor.max(8), |c| c as usize));
        }
        Kind::Mixed => {}
        Kind::Adiabatic => {
            point.nodes = Some(file.nodes.unwrap_or(256) as usize);
            point.cutoff_a = Some(file.cutoff_a.map_or(n + 8, |c| c as usize));
            point.steps = Some(file.steps.unwrap_or(0) as usize);
        }
        Kind::SemiclassicalLimit => {
            let pick = |cut: Option<u64>, amp: Option<f64>| -> usize {
                cut.map_or_else(
                    || {
                        jcberry::fock::recommended_coherent_cutoff(jcberry::C64::from(
                            amp.unwrap_or(0.0),
                        ))
                    },
                    |c| c as usize,
                )
            };
            point.cutoff_a = Some(pick(file.cutoff_a, point.alpha));
            point.cutoff_b = Some(pick(file.cutoff_b, point.beta));
            point.steps = Some(file.steps.unwrap_or(0) as usize);
        }
    }
}
