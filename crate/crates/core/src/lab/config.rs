//! JSON configuration: complex scalars, matrices, step functions, generator
//! descriptors and sweep configs.
//!
//! A complex number is either a JSON number or `[re, im]`. Vectors are arrays
//! of complex numbers; matrices are arrays of rows. A step function is
//! `{"breakpoints": [...], "values": [[...], ...], "support_end": x}`; each
//! value is a vector of length d_k. When `support_end` is omitted the last
//! value must be zero and the support ends at the last breakpoint.

use std::path::Path;

use serde_json::{Map, Value};

use crate::error::{QrwError, Result};
use crate::generators::{
    add_delta, ampliation, delta_embedding, example7_theta, example7_walk, homgen, hp_generator, Adaptedness, GKSLData,
    Generator, Side,
};
use crate::linops::{Operator, C64};
use crate::random::{random_gksl, rng, WMode};
use crate::signals::StepFunction;
use crate::toywalk::ExpVectorLabel;

fn cfg<T>(msg: impl Into<String>) -> Result<T> {
    Err(QrwError::Config(msg.into()))
}

fn obj<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| QrwError::Config(format!("{what} must be an object")))
}

fn field<'a>(o: &'a Map<String, Value>, key: &str, what: &str) -> Result<&'a Value> {
    o.get(key).ok_or_else(|| QrwError::Config(format!("{what}: missing field `{key}`")))
}

fn num(v: &Value, what: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| QrwError::Config(format!("{what} must be a number")))
}

fn count(v: &Value, what: &str) -> Result<usize> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| QrwError::Config(format!("{what} must be a non-negative integer")))
}

pub fn parse_complex(v: &Value) -> Result<C64> {
    match v {
        Value::Number(n) => Ok(C64::new(n.as_f64().unwrap_or(f64::NAN), 0.0)),
        Value::Array(a) if a.len() == 2 && a.iter().all(Value::is_number) => {
            Ok(C64::new(a[0].as_f64().unwrap(), a[1].as_f64().unwrap()))
        }
        _ => cfg(format!("expected a complex number (number or [re, im]), got {v}")),
    }
}

pub fn parse_vector(v: &Value) -> Result<Vec<C64>> {
    match v {
        Value::Array(a) => a.iter().map(parse_complex).collect(),
        _ => cfg(format!("expected an array of complex numbers, got {v}")),
    }
}

pub fn parse_matrix(v: &Value) -> Result<Operator> {
    let rows = v.as_array().ok_or_else(|| QrwError::Config("a matrix must be an array of rows".into()))?;
    let rows: Vec<Vec<C64>> = rows.iter().map(parse_vector).collect::<Result<_>>()?;
    Operator::from_rows(&rows).map_err(|e| QrwError::Config(format!("bad matrix: {e}")))
}

pub fn parse_step_function(v: &Value, d_k: usize) -> Result<StepFunction> {
    let o = obj(v, "step function")?;
    let bps: Vec<f64> = field(o, "breakpoints", "step function")?
        .as_array()
        .ok_or_else(|| QrwError::Config("breakpoints must be an array".into()))?
        .iter()
        .map(|b| num(b, "breakpoint"))
        .collect::<Result<_>>()?;
    let vals: Vec<Vec<C64>> = field(o, "values", "step function")?
        .as_array()
        .ok_or_else(|| QrwError::Config("values must be an array".into()))?
        .iter()
        .map(parse_vector)
        .collect::<Result<_>>()?;
    match o.get("support_end") {
        Some(e) => StepFunction::new(d_k, bps, vals, num(e, "support_end")?),
        None => {
            // The support ends where the trailing zero piece starts.
            let (Some(last), Some(&end)) = (vals.last(), bps.last()) else {
                return cfg("breakpoints and values must be non-empty");
            };
            if last.iter().any(|z| *z != C64::new(0.0, 0.0)) {
                return cfg("without support_end the last value must be zero");
            }
            let n = bps.len() - 1;
            if n == 0 {
                return Ok(StepFunction::zero(d_k));
            }
            StepFunction::new(d_k, bps[..n].to_vec(), vals[..n].to_vec(), end)
        }
    }
}

pub fn parse_label(v: &Value, d_k: usize) -> Result<ExpVectorLabel> {
    let o = obj(v, "test vector")?;
    let u = parse_vector(field(o, "u", "test vector")?)?;
    let f = match o.get("f") {
        Some(f) => parse_step_function(f, d_k)?,
        None => StepFunction::zero(d_k),
    };
    Ok(ExpVectorLabel::new(u, f))
}

/// A generator descriptor.
#[derive(Clone, Debug)]
pub enum GeneratorDescriptor {
    Explicit(Generator),
    Gksl(GKSLData),
    Hp { f: Operator, side: Side, d_k: usize },
    /// The scalar example: φ_h when `h` is given, θ otherwise.
    Example7 { c: f64, h: Option<f64> },
    /// GKSL data drawn from the seeded generator.
    RandomGksl { d_h: usize, d_k: usize, scale: f64, w: WMode, seed: Option<u64> },
}

fn with_path(path: &Path, e: QrwError) -> QrwError {
    match e {
        QrwError::Json(j) => QrwError::Config(format!("{}: {j}", path.display())),
        QrwError::Config(m) => QrwError::Config(format!("{}: {m}", path.display())),
        QrwError::InvalidData(m) => QrwError::Config(format!("{}: {m}", path.display())),
        QrwError::StepFunction(m) => QrwError::Config(format!("{}: invalid step function: {m}", path.display())),
        QrwError::Dimension(m) => QrwError::Config(format!("{}: dimension mismatch: {m}", path.display())),
        other => other,
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| QrwError::Io { path: path.display().to_string(), source: e })?;
    serde_json::from_str(&text).map_err(|e| with_path(path, e.into()))
}

impl GeneratorDescriptor {
    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&read_json(path)?).map_err(|e| with_path(path, e))
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let o = obj(v, "generator descriptor")?;
        let kind = field(o, "kind", "generator descriptor")?.as_str().unwrap_or("");
        match kind {
            "explicit" => {
                let d_h = count(field(o, "d_h", "explicit")?, "d_h")?;
                let d_k = count(field(o, "d_k", "explicit")?, "d_k")?;
                let action = parse_matrix(field(o, "action", "explicit")?)?;
                Ok(GeneratorDescriptor::Explicit(Generator::new(d_h, d_k, action)?))
            }
            "gksl" => {
                let g = parse_matrix(field(o, "g", "gksl")?)?;
                let r = parse_matrix(field(o, "r", "gksl")?)?;
                let d_h = g.rows();
                if d_h == 0 || r.cols() % d_h != 0 {
                    return cfg("gksl: r must be d_h x (d_h·d_k)");
                }
                let d_k = r.cols() / d_h;
                let pi = match o.get("pi") {
                    Some(p) => parse_matrix(p)?,
                    None => ampliation(d_h, d_k),
                };
                let w = match o.get("w") {
                    Some(w) => parse_matrix(w)?,
                    None => Operator::identity(&[d_h * d_k]),
                };
                let data = GKSLData::new(g, pi, r, w)?;
                data.validate()?;
                Ok(GeneratorDescriptor::Gksl(data))
            }
            "hp" => {
                let f = parse_matrix(field(o, "F", "hp")?)?;
                let side = match field(o, "side", "hp")?.as_str() {
                    Some("left") => Side::Left,
                    Some("right") => Side::Right,
                    _ => return cfg("hp: side must be \"left\" or \"right\""),
                };
                let d_k = match o.get("d_k") {
                    Some(d) => count(d, "d_k")?,
                    None => 1,
                };
                Ok(GeneratorDescriptor::Hp { f, side, d_k })
            }
            "example7" => {
                let c = num(field(o, "c", "example7")?, "c")?;
                let h = o.get("h").map(|h| num(h, "h")).transpose()?;
                Ok(GeneratorDescriptor::Example7 { c, h })
            }
            "random_gksl" => {
                let d_h = count(field(o, "d_h", "random_gksl")?, "d_h")?;
                let d_k = count(field(o, "d_k", "random_gksl")?, "d_k")?;
                let scale = match o.get("scale") {
                    Some(s) => num(s, "scale")?,
                    None => 0.5,
                };
                let w = match o.get("w").and_then(Value::as_str) {
                    None | Some("identity") => WMode::Identity,
                    Some("random") => WMode::Random,
                    Some(other) => return cfg(format!("random_gksl: unknown w mode `{other}`")),
                };
                let seed = o.get("seed").map(|s| count(s, "seed").map(|x| x as u64)).transpose()?;
                Ok(GeneratorDescriptor::RandomGksl { d_h, d_k, scale, w, seed })
            }
            other => cfg(format!("unknown generator kind `{other}`")),
        }
    }

    /// GKSL data behind the descriptor, if any; `seed` fills in a missing seed.
    pub fn gksl_data(&self, seed: u64) -> Option<GKSLData> {
        match self {
            GeneratorDescriptor::Gksl(d) => Some(d.clone()),
            GeneratorDescriptor::RandomGksl { d_h, d_k, scale, w, seed: s } => {
                let mut r = rng(s.unwrap_or(seed));
                Some(random_gksl(&mut r, *d_h, *d_k, *scale, *w))
            }
            _ => None,
        }
    }

    /// The generator the descriptor names; GKSL data give the dilation generator.
    pub fn generator(&self, seed: u64) -> Result<Generator> {
        match self {
            GeneratorDescriptor::Explicit(g) => Ok(g.clone()),
            GeneratorDescriptor::Gksl(_) | GeneratorDescriptor::RandomGksl { .. } => {
                Ok(homgen(&self.gksl_data(seed).expect("gksl")))
            }
            GeneratorDescriptor::Hp { f, side, d_k } => hp_generator(f, *side, *d_k),
            GeneratorDescriptor::Example7 { c, h: Some(h) } => Ok(example7_walk(*c, *h)),
            GeneratorDescriptor::Example7 { c, h: None } => Ok(example7_theta(*c)),
        }
    }
}

/// How the walk generators φ_h are produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Euler,
    RepeatedInteraction,
    Example7,
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub limit: GeneratorDescriptor,
    pub family: Family,
    pub adaptedness: Adaptedness,
    pub h_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub tests: Vec<(ExpVectorLabel, ExpVectorLabel)>,
    pub a_list: Vec<Operator>,
    /// Required bound on the sup error at the finest h.
    pub tol: Option<f64>,
    /// Also compare walk-vector norms with cocycle-vector norms.
    pub norms: bool,
}

impl SweepConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&read_json(path)?).map_err(|e| with_path(path, e))
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text)?;
        Self::from_json(&v)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let o = obj(v, "sweep config")?;
        let limit = GeneratorDescriptor::from_json(field(o, "limit", "sweep config")?)?;
        let family = match o.get("family").and_then(Value::as_str).unwrap_or("euler") {
            "euler" => Family::Euler,
            "repeated_interaction" => Family::RepeatedInteraction,
            "example7" => Family::Example7,
            other => return cfg(format!("unknown family `{other}`")),
        };
        let adaptedness = match o.get("adaptedness").and_then(Value::as_str).unwrap_or("vacuum") {
            "vacuum" => Adaptedness::Vacuum,
            "identity" => Adaptedness::Identity,
            other => return cfg(format!("unknown adaptedness `{other}`")),
        };
        let h_grid: Vec<f64> = match (o.get("h_grid"), o.get("h_exponents")) {
            (Some(h), _) => h.as_array().ok_or_else(|| QrwError::Config("h_grid must be an array".into()))?.iter().map(|x| num(x, "h")).collect::<Result<_>>()?,
            (None, Some(k)) => k
                .as_array()
                .ok_or_else(|| QrwError::Config("h_exponents must be an array".into()))?
                .iter()
                .map(|x| count(x, "h exponent").map(|k| 0.5f64.powi(k as i32)))
                .collect::<Result<_>>()?,
            (None, None) => (1..=8).map(|k| 0.5f64.powi(k)).collect(),
        };
        if h_grid.is_empty() || h_grid.iter().any(|&h| !(h > 0.0)) || h_grid.windows(2).any(|w| w[1] >= w[0]) {
            return cfg("h_grid must be positive and strictly decreasing");
        }
        let t_grid: Vec<f64> = match (o.get("t_grid"), o.get("t_max")) {
            (Some(t), _) => t.as_array().ok_or_else(|| QrwError::Config("t_grid must be an array".into()))?.iter().map(|x| num(x, "t")).collect::<Result<_>>()?,
            (None, Some(tm)) => {
                let tm = num(tm, "t_max")?;
                let step = h_grid[0];
                let n = crate::signals::grid_index(tm, step);
                (0..=n).map(|k| k as f64 * step).collect()
            }
            (None, None) => return cfg("sweep config needs t_grid or t_max"),
        };
        if t_grid.iter().any(|&t| !(t >= 0.0)) {
            return cfg("t_grid entries must be non-negative");
        }
        let d_k = match &limit {
            GeneratorDescriptor::Explicit(g) => g.d_k(),
            GeneratorDescriptor::Gksl(d) => d.d_k,
            GeneratorDescriptor::Hp { d_k, .. } => *d_k,
            GeneratorDescriptor::Example7 { .. } => 1,
            GeneratorDescriptor::RandomGksl { d_k, .. } => *d_k,
        };
        let tests = o
            .get("tests")
            .or_else(|| o.get("test_vectors"))
            .ok_or_else(|| QrwError::Config("sweep config: missing field `tests`".into()))?
            .as_array()
            .ok_or_else(|| QrwError::Config("tests must be an array".into()))?
            .iter()
            .map(|t| {
                let to = obj(t, "test")?;
                Ok((parse_label(field(to, "bra", "test")?, d_k)?, parse_label(field(to, "ket", "test")?, d_k)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let a_list = match o.get("a_list") {
            Some(Value::String(s)) if s == "units" => {
                let d_h = tests.first().map(|t| t.0.u.len()).unwrap_or(1);
                (0..d_h * d_h).map(|k| Operator::unit(d_h, k % d_h, k / d_h)).collect()
            }
            Some(a) => a.as_array().ok_or_else(|| QrwError::Config("a_list must be an array".into()))?.iter().map(parse_matrix).collect::<Result<_>>()?,
            None => return cfg("sweep config: missing field `a_list`"),
        };
        let tol = o.get("tol").map(|t| num(t, "tol")).transpose()?;
        let norms = o.get("norms").and_then(Value::as_bool).unwrap_or(true);
        Ok(SweepConfig { limit, family, adaptedness, h_grid, t_grid, tests, a_list, tol, norms })
    }

    /// The walk generator at step size h.
    pub fn walk_generator(&self, h: f64, seed: u64) -> Result<Generator> {
        match self.family {
            Family::Euler => Ok(crate::generators::euler_family(&self.limit.generator(seed)?, h, self.adaptedness)),
            Family::RepeatedInteraction => {
                let data = self.limit.gksl_data(seed).ok_or_else(|| QrwError::Config("repeated_interaction needs GKSL data".into()))?;
                crate::generators::repeated_interaction(&data, h)
            }
            Family::Example7 => match self.limit {
                GeneratorDescriptor::Example7 { c, .. } => Ok(example7_walk(c, h)),
                _ => cfg("family example7 needs an example7 limit descriptor"),
            },
        }
    }

    /// The limit generator: ψ for vacuum sweeps, θ for identity sweeps.
    pub fn limit_generator(&self, seed: u64) -> Result<Generator> {
        let base = match (&self.family, &self.limit) {
            (Family::Example7, GeneratorDescriptor::Example7 { c, .. }) => {
                let theta = example7_theta(*c);
                return Ok(match self.adaptedness {
                    Adaptedness::Identity => theta,
                    Adaptedness::Vacuum => add_delta(&theta),
                });
            }
            (Family::Example7, _) => return cfg("family example7 needs an example7 limit descriptor"),
            _ => self.limit.generator(seed)?,
        };
        Ok(match (self.family, self.adaptedness) {
            // The dilation generator is vacuum-adapted; θ = ψ − ·⊗Δ.
            (Family::RepeatedInteraction, Adaptedness::Identity) => {
                base.try_sub(&delta_embedding(base.d_h(), base.d_k()))?
            }
            _ => base,
        })
    }

    pub fn validate_dims(&self, seed: u64) -> Result<()> {
        let g = self.limit_generator(seed)?;
        for (i, (b, k)) in self.tests.iter().enumerate() {
            if b.u.len() != g.d_h() || k.u.len() != g.d_h() {
                return cfg(format!("test {i}: vectors must have length d_h = {}", g.d_h()));
            }
        }
        for (i, a) in self.a_list.iter().enumerate() {
            if a.rows() != g.d_h() || a.cols() != g.d_h() {
                return cfg(format!("a_list[{i}] must be {0}x{0}", g.d_h()));
            }
        }
        Ok(())
    }
}
