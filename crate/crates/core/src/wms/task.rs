//! JSON task objects exchanged between workflow model and manager.

use std::collections::BTreeMap;

use chrono::NaiveDateTime;
use serde::{Serialize, Serializer};
use serde_json::{Map, Value};

use super::WmsError;

/// Timestamp layout of task objects, microsecond resolution.
pub const TIME_FORMAT: &str = "%Y-%m-%dT%H:%M:%S%.6f";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Deploy {
    #[serde(rename = "NP")]
    pub np: u32,
    pub cmd: Vec<String>,
    pub nodes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskObject {
    #[serde(rename = "ID")]
    pub id: u64,
    #[serde(serialize_with = "ser_params")]
    pub params: BTreeMap<String, f64>,
    pub taskdir: String,
    pub deploy: Deploy,
    pub env: String,
    #[serde(serialize_with = "ser_time")]
    pub starttime: Option<NaiveDateTime>,
    #[serde(serialize_with = "ser_time")]
    pub endtime: Option<NaiveDateTime>,
    pub returncode: Option<i32>,
}

fn ser_time<S: Serializer>(t: &Option<NaiveDateTime>, s: S) -> Result<S::Ok, S::Error> {
    match t {
        Some(t) => s.serialize_str(&t.format(TIME_FORMAT).to_string()),
        None => s.serialize_none(),
    }
}

/// Integral values are written as JSON integers, the rest as floats.
fn ser_params<S: Serializer>(p: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_map(p.iter().map(|(k, v)| {
        let n = if v.fract() == 0.0 && v.abs() < 9.0e15 && !(*v == 0.0 && v.is_sign_negative()) {
            Value::from(*v as i64)
        } else {
            Value::from(*v)
        };
        (k, n)
    }))
}

impl TaskObject {
    /// Task with one core, no command and no timing yet.
    pub fn new(id: u64, params: BTreeMap<String, f64>) -> Self {
        TaskObject {
            id,
            params,
            taskdir: String::new(),
            deploy: Deploy {
                np: 1,
                cmd: Vec::new(),
                nodes: Vec::new(),
            },
            env: String::new(),
            starttime: None,
            endtime: None,
            returncode: None,
        }
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }

    /// Checks the cross-field invariants.
    pub fn check(&self) -> Result<(), WmsError> {
        if self.deploy.np == 0 {
            return Err(WmsError::SchemaError("deploy.NP".into()));
        }
        if let Some((k, _)) = self.params.iter().find(|(_, v)| !v.is_finite()) {
            return Err(WmsError::SchemaError(format!("params.{k}")));
        }
        if let (Some(s), Some(e)) = (self.starttime, self.endtime) {
            if s > e {
                return Err(WmsError::SchemaError("endtime".into()));
            }
        }
        if self.returncode.is_some() != self.endtime.is_some() {
            return Err(WmsError::SchemaError("returncode".into()));
        }
        Ok(())
    }
}

/// Directory for a state point, `workflow/results/T_1.5/rho_0.01/step_0`.
pub fn taskdir_for(params: &BTreeMap<String, f64>) -> String {
    let mut dir = String::from("workflow/results");
    for key in ["T", "rho", "step"] {
        if let Some(v) = params.get(key) {
            dir.push_str(&format!("/{key}_{v}"));
        }
    }
    dir
}

pub fn serialize_task(t: &TaskObject) -> String {
    serde_json::to_string_pretty(t).expect("task objects always serialize")
}

fn field<'a>(obj: &'a Map<String, Value>, name: &str, path: &str) -> Result<&'a Value, WmsError> {
    obj.get(name).ok_or_else(|| WmsError::SchemaError(path.to_string()))
}

fn opt_field<'a>(obj: &'a Map<String, Value>, name: &str) -> Option<&'a Value> {
    obj.get(name).filter(|v| !v.is_null())
}

fn strings(v: Option<&Value>, path: &str) -> Result<Vec<String>, WmsError> {
    match v {
        None => Ok(Vec::new()),
        Some(Value::Array(items)) => items
            .iter()
            .map(|i| i.as_str().map(str::to_string).ok_or_else(|| WmsError::SchemaError(path.to_string())))
            .collect(),
        Some(_) => Err(WmsError::SchemaError(path.to_string())),
    }
}

fn time(v: Option<&Value>, path: &str) -> Result<Option<NaiveDateTime>, WmsError> {
    v.map(|v| {
        v.as_str()
            .and_then(|s| NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S%.f").ok())
            .ok_or_else(|| WmsError::SchemaError(path.to_string()))
    })
    .transpose()
}

/// Parses a task object. `ID`, `params` and `deploy.NP` are required;
/// other fields default to empty.
pub fn parse_task(s: &str) -> Result<TaskObject, WmsError> {
    let root: Value = serde_json::from_str(s).map_err(|e| WmsError::JsonSyntaxError(e.to_string()))?;
    let obj = root.as_object().ok_or_else(|| WmsError::SchemaError("task".into()))?;
    let id = field(obj, "ID", "ID")?.as_u64().ok_or_else(|| WmsError::SchemaError("ID".into()))?;
    let params = field(obj, "params", "params")?
        .as_object()
        .ok_or_else(|| WmsError::SchemaError("params".into()))?
        .iter()
        .map(|(k, v)| {
            v.as_f64()
                .map(|x| (k.clone(), x))
                .ok_or_else(|| WmsError::SchemaError(format!("params.{k}")))
        })
        .collect::<Result<BTreeMap<_, _>, _>>()?;
    let deploy = field(obj, "deploy", "deploy")?
        .as_object()
        .ok_or_else(|| WmsError::SchemaError("deploy".into()))?;
    let np = field(deploy, "NP", "deploy.NP")?
        .as_u64()
        .and_then(|n| u32::try_from(n).ok())
        .ok_or_else(|| WmsError::SchemaError("deploy.NP".into()))?;
    let text = |name: &str| -> Result<String, WmsError> {
        match opt_field(obj, name) {
            None => Ok(String::new()),
            Some(v) => v.as_str().map(str::to_string).ok_or_else(|| WmsError::SchemaError(name.to_string())),
        }
    };
    let returncode = opt_field(obj, "returncode")
        .map(|v| {
            v.as_i64()
                .and_then(|n| i32::try_from(n).ok())
                .ok_or_else(|| WmsError::SchemaError("returncode".into()))
        })
        .transpose()?;
    let task = TaskObject {
        id,
        params,
        taskdir: text("taskdir")?,
        deploy: Deploy {
            np,
            cmd: strings(opt_field(deploy, "cmd"), "deploy.cmd")?,
            nodes: strings(opt_field(deploy, "nodes"), "deploy.nodes")?,
        },
        env: text("env")?,
        starttime: time(opt_field(obj, "starttime"), "starttime")?,
        endtime: time(opt_field(obj, "endtime"), "endtime")?,
        returncode,
    };
    task.check()?;
    Ok(task)
}
