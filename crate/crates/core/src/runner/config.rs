use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use super::{ReportFormat, RunSpec};
use crate::churn::{ArrivalProcess, ChurnKind};
use crate::engine::SimConfig;
use crate::error::{Error, Result};
use crate::predictors::PredictorKind;
use crate::stabilizers::StabilizerKind;

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SearchCap {
    Limit(u64),
    Keyword(String),
}

/// The config file: flat kebab-case keys, all optional.
#[derive(Deserialize, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct FileConfig {
    capacity: Option<usize>,
    slots: Option<u32>,
    topologies: Option<u32>,
    backup_size: Option<OneOrMany<usize>>,
    stabilizer: Option<OneOrMany<String>>,
    predictor: Option<OneOrMany<String>>,
    shadow_predictors: Option<Vec<String>>,
    timeout_multiplier: Option<f64>,
    rtt_base_ms: Option<f64>,
    rtt_per_unit_distance_ms: Option<f64>,
    search_cap: Option<SearchCap>,
    seed: Option<u64>,
    rejoin: Option<String>,
    pred_error: Option<String>,
    max_state_size: Option<usize>,
    session_shape: Option<f64>,
    session_mean_hours: Option<f64>,
    interarrival_mean_seconds: Option<f64>,
    churn_kind: Option<String>,
    uniform_q: Option<f64>,
    arrival_process: Option<String>,
    out: Option<PathBuf>,
    format: Option<OneOrMany<String>>,
    trace: Option<bool>,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub capacity: Option<usize>,
    pub slots: Option<u32>,
    pub topologies: Option<u32>,
    pub backup_sizes: Option<Vec<usize>>,
    pub stabilizers: Option<Vec<StabilizerKind>>,
    pub predictors: Option<Vec<PredictorKind>>,
    /// `Some(None)` lifts the cap.
    pub search_cap: Option<Option<u64>>,
    pub out: Option<PathBuf>,
    pub formats: Option<Vec<ReportFormat>>,
    pub trace: bool,
}

fn parse_list<T: FromStr<Err = Error>>(items: Vec<String>) -> Result<Vec<T>> {
    items.iter().map(|s| s.parse()).collect()
}

fn parse_search_cap(v: SearchCap) -> Result<Option<u64>> {
    match v {
        SearchCap::Limit(n) => Ok(Some(n)),
        SearchCap::Keyword(s) if s.eq_ignore_ascii_case("none") => Ok(None),
        SearchCap::Keyword(s) => Err(Error::config(
            "search-cap",
            format!("expected an integer or `none`, got `{s}`"),
        )),
    }
}

/// Reads the config file at `path` (or only defaults when `None`) and applies
/// the overrides.
pub fn parse_config(path: Option<&Path>, overrides: &Overrides) -> Result<RunSpec> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)?,
        None => String::new(),
    };
    parse_config_str(&text, overrides)
}

pub fn parse_config_str(text: &str, overrides: &Overrides) -> Result<RunSpec> {
    let file: FileConfig = toml::from_str(text)?;
    let mut base = SimConfig::default();

    macro_rules! set {
        ($field:expr, $value:expr) => {
            if let Some(v) = $value {
                $field = v;
            }
        };
    }
    set!(base.capacity, file.capacity);
    set!(base.slots, file.slots);
    set!(base.topologies, file.topologies);
    set!(base.timeout_multiplier, file.timeout_multiplier);
    set!(base.rtt_base_ms, file.rtt_base_ms);
    set!(base.rtt_per_unit_distance_ms, file.rtt_per_unit_distance_ms);
    set!(base.seed, file.seed);
    set!(base.max_state_size, file.max_state_size);
    set!(base.trace, file.trace);
    set!(base.churn.session_shape, file.session_shape);
    set!(base.churn.session_mean_hours, file.session_mean_hours);
    set!(base.churn.interarrival_mean_seconds, file.interarrival_mean_seconds);
    if let Some(s) = file.arrival_process {
        base.churn.arrivals = match s.to_ascii_lowercase().as_str() {
            "poisson" => ArrivalProcess::Poisson,
            "deterministic" => ArrivalProcess::Deterministic,
            _ => return Err(Error::config("arrival-process", format!("unknown arrival process `{s}`"))),
        };
    }
    match file.churn_kind.as_deref().map(str::to_ascii_lowercase).as_deref() {
        None | Some("debian") => {
            if file.uniform_q.is_some() {
                return Err(Error::config("uniform-q", "only valid with `churn-kind = \"uniform\"`"));
            }
        }
        Some("uniform") => {
            let q = file
                .uniform_q
                .ok_or_else(|| Error::config("uniform-q", "required with `churn-kind = \"uniform\"`"))?;
            base.churn.kind = ChurnKind::Uniform { q };
        }
        Some(other) => return Err(Error::config("churn-kind", format!("unknown churn kind `{other}`"))),
    }
    if let Some(v) = file.search_cap {
        base.search_cap = parse_search_cap(v)?;
    }
    if let Some(s) = file.rejoin {
        base.rejoin = s.parse()?;
    }
    if let Some(s) = file.pred_error {
        base.pred_error = s.parse()?;
    }
    if let Some(v) = file.shadow_predictors {
        base.shadow_predictors = parse_list(v)?;
    }

    let mut backup_sizes = file.backup_size.map(OneOrMany::into_vec);
    let mut stabilizers = file.stabilizer.map(|v| parse_list(v.into_vec())).transpose()?;
    let mut predictors = file.predictor.map(|v| parse_list(v.into_vec())).transpose()?;
    let mut formats = file.format.map(|v| parse_list(v.into_vec())).transpose()?;
    let mut out = file.out;

    set!(base.seed, overrides.seed);
    set!(base.capacity, overrides.capacity);
    set!(base.slots, overrides.slots);
    set!(base.topologies, overrides.topologies);
    set!(base.search_cap, overrides.search_cap);
    base.trace |= overrides.trace;
    if overrides.backup_sizes.is_some() {
        backup_sizes.clone_from(&overrides.backup_sizes);
    }
    if overrides.stabilizers.is_some() {
        stabilizers.clone_from(&overrides.stabilizers);
    }
    if overrides.predictors.is_some() {
        predictors.clone_from(&overrides.predictors);
    }
    if overrides.formats.is_some() {
        formats.clone_from(&overrides.formats);
    }
    if overrides.out.is_some() {
        out.clone_from(&overrides.out);
    }

    let mut spec = RunSpec::new(base.clone());
    if let Some(v) = backup_sizes {
        spec.backup_sizes = v;
    }
    if let Some(v) = stabilizers {
        spec.stabilizers = v;
    }
    if let Some(v) = predictors {
        spec.predictors = v;
    }
    if let Some(v) = formats {
        spec.formats = v;
    }
    if let Some(v) = out {
        spec.out_dir = v;
    }
    spec.base.backup_size = spec.backup_sizes.first().copied().unwrap_or(base.backup_size);
    spec.base.stabilizer = spec.stabilizers.first().copied().unwrap_or(base.stabilizer);
    spec.base.predictor = spec.predictors.first().copied().unwrap_or(base.predictor);
    spec.validate()?;
    Ok(spec)
}
