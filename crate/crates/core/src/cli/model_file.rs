//! The JSON model document shared by all commands.
//!
//! ```json
//! {
//!   "family": "gexp", "m": 1, "n": 0,
//!   "params": {"omega": 0.2, "mu": 0.0, "e": [0.5], "f": [0.0], "d": 0.7},
//!   "bounds": {"omega": [0.01, 2.0], "mu": [-1.0, 1.0], "e": [[0.05, 3.0]], "d": [0.1, 3.0]},
//!   "innovation": {"gamma": 0.5}
//! }
//! ```

use serde_json::{Map, Value};

use super::CliError;
use crate::innovations::GedShape;
use crate::params::{ParamBounds, ParamVector};
use crate::weights::{Family, ModelSpec, ShapeExponents};

pub const DEFAULT_NW: usize = 10_000;

#[derive(Debug, Clone)]
pub struct ModelFile {
    pub spec: ModelSpec,
    pub theta: ParamVector,
    pub bounds: Option<ParamBounds>,
    pub shape: GedShape,
    /// Weight truncation used for simulation.
    pub n_w: usize,
    /// Lets `simulate` run when the truncated weights sum to 1 or more.
    pub allow_nonstationary: bool,
}

impl ModelFile {
    pub fn from_path(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read model file {}: {e}", path.display())))?;
        Self::from_str(&text)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn from_str(text: &str) -> Result<Self, CliError> {
        let v: Value = serde_json::from_str(text).map_err(|e| CliError::config(format!("model file: {e}")))?;
        Self::from_value(&v)
    }

    pub fn from_value(v: &Value) -> Result<Self, CliError> {
        let root = object(v, "model")?;
        let family: Family = match root.get("family") {
            Some(Value::String(s)) => s.parse().map_err(|e| field_err("family", e))?,
            Some(_) => return Err(field_err("family", "must be a string")),
            None => return Err(field_err("family", "missing")),
        };
        let m = opt_count(root, "m")?.unwrap_or(0);
        let n = opt_count(root, "n")?.unwrap_or(0);
        let f_free = flag(root, "f_free")?;
        let allow_nonstationary = flag(root, "allow_nonstationary")?;

        let params = object(root.get("params").ok_or_else(|| field_err("params", "missing"))?, "params")?;
        let omega = number(params.get("omega"), "params.omega")?;
        let mu = number(params.get("mu"), "params.mu")?;

        let mut zeta = Vec::new();
        let shape_exp = match family {
            Family::Garch | Family::Fgarch | Family::Figarch => {
                zeta.extend(numbers(params, "a", m, "params")?);
                zeta.extend(numbers(params, "b", n, "params")?);
                if family != Family::Garch {
                    zeta.push(number(params.get("d"), "params.d")?);
                }
                ShapeExponents::Free
            }
            Family::Gexp | Family::Ghyp => {
                if n != 0 {
                    return Err(field_err("n", "gexp/ghyp take no denominator order"));
                }
                zeta.extend(numbers(params, "e", m, "params")?);
                let shape = if f_free {
                    zeta.extend(numbers(params, "f", m, "params")?);
                    ShapeExponents::Free
                } else if params.contains_key("f") {
                    ShapeExponents::Fixed(numbers(params, "f", m, "params")?)
                } else {
                    ShapeExponents::Fixed(vec![0.0; m])
                };
                zeta.push(number(params.get("d"), "params.d")?);
                shape
            }
            Family::Zero => {
                if m != 0 || n != 0 {
                    return Err(field_err("m", "zero family takes no orders"));
                }
                ShapeExponents::Free
            }
        };
        let spec = ModelSpec { family, m, n, shape: shape_exp };
        spec.validate().map_err(|e| field_err("family", e))?;
        let theta = ParamVector::new(omega, mu, &zeta);
        theta.validate(&spec).map_err(|e| field_err("params", e))?;

        let bounds = match root.get("bounds") {
            None => None,
            Some(b) => Some(parse_bounds(object(b, "bounds")?, &spec, f_free)?),
        };

        let shape = match root.get("innovation") {
            None => GedShape::GAUSSIAN,
            Some(inn) => {
                let inn = object(inn, "innovation")?;
                let g = number(inn.get("gamma"), "innovation.gamma")?;
                GedShape::new(g).map_err(|e| field_err("innovation.gamma", e))?
            }
        };
        let n_w = opt_count(root, "n_w")?.unwrap_or(DEFAULT_NW);
        if n_w == 0 {
            return Err(field_err("n_w", "must be positive"));
        }
        Ok(Self { spec, theta, bounds, shape, n_w, allow_nonstationary })
    }

    pub fn require_bounds(&self) -> Result<&ParamBounds, CliError> {
        self.bounds.as_ref().ok_or_else(|| field_err("bounds", "missing (required for estimation)"))
    }
}

fn parse_bounds(b: &Map<String, Value>, spec: &ModelSpec, f_free: bool) -> Result<ParamBounds, CliError> {
    let mut pairs = vec![interval(b.get("omega"), "bounds.omega")?, interval(b.get("mu"), "bounds.mu")?];
    let (m, n) = (spec.m, spec.n);
    match spec.family {
        Family::Garch | Family::Fgarch | Family::Figarch => {
            pairs.extend(intervals(b, "a", m)?);
            pairs.extend(intervals(b, "b", n)?);
            if spec.family != Family::Garch {
                pairs.push(interval(b.get("d"), "bounds.d")?);
            }
        }
        Family::Gexp | Family::Ghyp => {
            pairs.extend(intervals(b, "e", m)?);
            if f_free {
                pairs.extend(intervals(b, "f", m)?);
            }
            pairs.push(interval(b.get("d"), "bounds.d")?);
        }
        Family::Zero => {}
    }
    let (lower, upper) = pairs.into_iter().unzip();
    let bounds = ParamBounds::new(lower, upper).map_err(|e| field_err("bounds", e))?;
    bounds.validate_for(spec).map_err(|e| field_err("bounds", e))?;
    Ok(bounds)
}

fn field_err(path: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::config(format!("{path}: {msg}"))
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, CliError> {
    v.as_object().ok_or_else(|| field_err(path, "must be an object"))
}

fn number(v: Option<&Value>, path: &str) -> Result<f64, CliError> {
    match v {
        None => Err(field_err(path, "missing")),
        Some(v) => v.as_f64().filter(|x| x.is_finite()).ok_or_else(|| field_err(path, "must be a finite number")),
    }
}

fn flag(obj: &Map<String, Value>, key: &str) -> Result<bool, CliError> {
    match obj.get(key) {
        None => Ok(false),
        Some(Value::Bool(b)) => Ok(*b),
        Some(_) => Err(field_err(key, "must be a boolean")),
    }
}

fn opt_count(obj: &Map<String, Value>, key: &str) -> Result<Option<usize>, CliError> {
    match obj.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_u64()
            .map(|x| Some(x as usize))
            .ok_or_else(|| field_err(key, "must be a non-negative integer")),
    }
}

fn numbers(obj: &Map<String, Value>, key: &str, len: usize, prefix: &str) -> Result<Vec<f64>, CliError> {
    let path = format!("{prefix}.{key}");
    if len == 0 && !obj.contains_key(key) {
        return Ok(Vec::new());
    }
    let arr = match obj.get(key) {
        None => return Err(field_err(&path, "missing")),
        Some(Value::Array(a)) => a,
        Some(_) => return Err(field_err(&path, "must be an array")),
    };
    if arr.len() != len {
        return Err(field_err(&path, format!("expected {len} values, got {}", arr.len())));
    }
    arr.iter().enumerate().map(|(i, v)| number(Some(v), &format!("{path}[{i}]"))).collect()
}

fn interval(v: Option<&Value>, path: &str) -> Result<(f64, f64), CliError> {
    match v {
        None => Err(field_err(path, "missing")),
        Some(Value::Array(a)) if a.len() == 2 => {
            Ok((number(Some(&a[0]), &format!("{path}[0]"))?, number(Some(&a[1]), &format!("{path}[1]"))?))
        }
        Some(_) => Err(field_err(path, "must be a [lo, hi] pair")),
    }
}

fn intervals(obj: &Map<String, Value>, key: &str, len: usize) -> Result<Vec<(f64, f64)>, CliError> {
    let path = format!("bounds.{key}");
    if len == 0 && !obj.contains_key(key) {
        return Ok(Vec::new());
    }
    match obj.get(key) {
        None => Err(field_err(&path, "missing")),
        Some(Value::Array(a)) if a.len() == len => {
            a.iter().enumerate().map(|(i, v)| interval(Some(v), &format!("{path}[{i}]"))).collect()
        }
        Some(_) => Err(field_err(&path, format!("must be a list of {len} [lo, hi] pairs"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GEXP: &str = r#"{
        "family": "gexp", "m": 1,
        "params": {"omega": 0.2, "mu": 0.0, "e": [0.5], "d": 0.7},
        "bounds": {"omega": [0.01, 2.0], "mu": [-1.0, 1.0], "e": [[0.05, 3.0]], "d": [0.1, 3.0]},
        "innovation": {"gamma": 0.5}
    }"#;

    #[test]
    fn parses_gexp() {
        let mf = ModelFile::from_str(GEXP).unwrap();
        assert_eq!(mf.theta.as_slice(), &[0.2, 0.0, 0.5, 0.7]);
        assert_eq!(mf.spec.shape, ShapeExponents::Fixed(vec![0.0]));
        assert_eq!(mf.bounds.unwrap().upper, vec![2.0, 1.0, 3.0, 3.0]);
    }

    #[test]
    fn missing_omega_names_field() {
        let text = GEXP.replace("\"omega\": 0.2, ", "");
        let err = ModelFile::from_str(&text).unwrap_err();
        assert_eq!(err.code, 2);
        assert!(err.message.contains("params.omega"), "{}", err.message);
    }

    #[test]
    fn wrong_lengths_and_types() {
        let err = ModelFile::from_str(&GEXP.replace("\"e\": [0.5]", "\"e\": [0.5, 0.1]")).unwrap_err();
        assert!(err.message.contains("params.e"));
        let err = ModelFile::from_str(&GEXP.replace("\"d\": [0.1, 3.0]", "\"d\": 3.0")).unwrap_err();
        assert!(err.message.contains("bounds.d"));
        let err = ModelFile::from_str(&GEXP.replace("\"gexp\"", "\"nope\"")).unwrap_err();
        assert!(err.message.contains("family"));
    }

    #[test]
    fn parses_fgarch_and_zero() {
        let mf = ModelFile::from_str(
            r#"{"family": "fgarch", "m": 1, "n": 1, "params": {"omega": 0.1, "mu": 0, "a": [0.4], "b": [0.3], "d": 0.6}}"#,
        )
        .unwrap();
        assert_eq!(mf.theta.zeta(), &[0.4, 0.3, 0.6]);
        assert!(mf.bounds.is_none());
        let z = ModelFile::from_str(r#"{"family": "zero", "params": {"omega": 1, "mu": 0}}"#).unwrap();
        assert_eq!(z.spec.r(), 0);
    }
}
