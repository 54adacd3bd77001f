//! Distribution specifications: `uniform:N=10`, `zipf:N=100,s=1.2`,
//! `geometric:N=30,r=0.8`, `spike:N=50,m=0.5` or `file:path.json`.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use missing_mass_bounds::distributions::Family;
use missing_mass_bounds::Distribution;

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum DistSpec {
    Family { kind: Family, count: usize, param: f64 },
    File(PathBuf),
}

impl FromStr for DistSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (head, rest) = s.split_once(':').ok_or_else(|| format!("expected <family>:<params>, got {s:?}"))?;
        let (kind, param_key) = match head {
            "file" => {
                if rest.is_empty() {
                    return Err("file: needs a path".into());
                }
                return Ok(DistSpec::File(PathBuf::from(rest)));
            }
            "uniform" => (Family::Uniform, None),
            "zipf" => (Family::Zipf, Some("s")),
            "geometric" => (Family::Geometric, Some("r")),
            "spike" => (Family::Spike, Some("m")),
            other => return Err(format!("unknown family {other:?}")),
        };
        let mut params = BTreeMap::new();
        for pair in rest.split(',').filter(|p| !p.is_empty()) {
            let (key, value) = pair.split_once('=').ok_or_else(|| format!("expected key=value, got {pair:?}"))?;
            let value: f64 = value.trim().parse().map_err(|_| format!("{key} is not a number: {value:?}"))?;
            if params.insert(key.trim().to_string(), value).is_some() {
                return Err(format!("{key} given twice"));
            }
        }
        let count = params.remove("N").ok_or("missing N=<support size>")?;
        if count < 1.0 || count.fract() != 0.0 {
            return Err(format!("N must be a positive integer, got {count}"));
        }
        let param = match param_key {
            Some(key) => params.remove(key).ok_or_else(|| format!("{head} needs {key}=<value>"))?,
            None => 0.0,
        };
        if let Some(key) = params.keys().next() {
            return Err(format!("unknown parameter {key:?} for {head}"));
        }
        Ok(DistSpec::Family { kind, count: count as usize, param })
    }
}

impl DistSpec {
    pub fn build(&self) -> Result<Distribution, CliError> {
        match self {
            DistSpec::Family { kind, count, param } => Ok(Distribution::family(*kind, *count, *param)?),
            DistSpec::File(path) => crate::read_json(path),
        }
    }
}
