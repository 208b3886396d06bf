//! TOML configuration files with `section.key=value` overrides.

use std::path::Path;

use oldroyd_core::integrator::RunConfig;
use oldroyd_core::verifier::{parse_ids, Ensemble, EstimateId, SuiteParams};
use serde::Deserialize;
use toml::{Table, Value};

use crate::error::{CliError, CliResult};

/// A parsed configuration: the table after overrides, and the source text
/// with the overrides appended as comments.
pub struct Loaded {
    pub table: Table,
    pub text: String,
}

fn parse_value(raw: &str) -> Value {
    toml::from_str::<Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Applies `section.key=value`; the value is read as a TOML literal, or as a
/// bare string when it is not one.
pub fn apply_override(table: &mut Table, spec: &str) -> CliResult<()> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::invalid(format!("override `{spec}` is not key=value")))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.len() < 2 || keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::invalid(format!(
            "override key `{path}` must have the form section.key"
        )));
    }
    let (last, sections) = keys.split_last().expect("two or more keys");
    let mut cursor = table;
    for section in sections {
        let entry = cursor
            .entry(section.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        cursor = entry.as_table_mut().ok_or_else(|| {
            CliError::invalid(format!(
                "override key `{path}`: `{section}` is not a section"
            ))
        })?;
    }
    cursor.insert(last.to_string(), parse_value(raw.trim()));
    Ok(())
}

pub fn load(path: Option<&Path>, overrides: &[String]) -> CliResult<Loaded> {
    let mut text = match path {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| CliError::io(format!("cannot read {}: {e}", p.display())))?,
        None => String::new(),
    };
    let mut table: Table =
        toml::from_str(&text).map_err(|e| CliError::invalid(format!("config parse error: {e}")))?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    if !overrides.is_empty() {
        if !text.is_empty() && !text.ends_with('\n') {
            text.push('\n');
        }
        for o in overrides {
            text.push_str(&format!("# override: {o}\n"));
        }
    }
    Ok(Loaded { table, text })
}

fn section<'a>(table: &'a Table, name: &str) -> CliResult<Option<&'a Table>> {
    match table.get(name) {
        None => Ok(None),
        Some(Value::Table(t)) => Ok(Some(t)),
        Some(_) => Err(CliError::invalid(format!("`{name}` must be a section"))),
    }
}

fn check_sections(table: &Table, allowed: &[&str]) -> CliResult<()> {
    for key in table.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(CliError::invalid(format!(
                "unknown section `{key}`; expected one of: {}",
                allowed.join(", ")
            )));
        }
    }
    Ok(())
}

fn merge_known(target: &mut Table, user: &Table, name: &str) -> CliResult<()> {
    for (key, value) in user {
        let value = match (target.get(key), value) {
            (Some(Value::Table(_)) | None, _) => {
                return Err(CliError::invalid(format!("unknown key `{name}.{key}`")));
            }
            (Some(Value::Float(_)), Value::Integer(i)) => Value::Float(*i as f64),
            (Some(default), v) if default.type_str() != v.type_str() => {
                return Err(CliError::invalid(format!(
                    "`{name}.{key}` must be {}, got {}",
                    default.type_str(),
                    v.type_str()
                )));
            }
            (Some(_), v) => v.clone(),
        };
        target.insert(key.clone(), value);
    }
    Ok(())
}

/// `[run]` holds the scalar run settings, `[params]` the system parameters
/// and `[initial_condition]` the data family (tagged by `kind`). Missing
/// keys take their defaults.
pub fn run_config(table: &Table) -> CliResult<RunConfig> {
    check_sections(table, &["run", "params", "initial_condition"])?;
    let mut merged = Table::try_from(RunConfig::default())
        .map_err(|e| CliError::invalid(format!("default config: {e}")))?;
    if let Some(run) = section(table, "run")? {
        merge_known(&mut merged, run, "run")?;
    }
    if let Some(params) = section(table, "params")? {
        let target = merged
            .get_mut("params")
            .and_then(Value::as_table_mut)
            .expect("defaults carry params");
        merge_known(target, params, "params")?;
    }
    if let Some(ic) = section(table, "initial_condition")? {
        merged.insert("initial_condition".into(), Value::Table(ic.clone()));
    }
    let config: RunConfig = Value::Table(merged)
        .try_into()
        .map_err(|e: toml::de::Error| {
            CliError::invalid(format!("invalid initial_condition: {}", e.message()))
        })?;
    config.validate()?;
    Ok(config)
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct VerifySection {
    estimates: Vec<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct VerifyFile {
    verify: VerifySection,
    ensemble: Ensemble,
    params: SuiteParams,
}

#[derive(Debug)]
pub struct VerifyConfig {
    pub estimates: Vec<EstimateId>,
    pub ensemble: Ensemble,
    pub params: SuiteParams,
}

/// `[verify] estimates` selects the checks (all when absent), `[ensemble]`
/// and `[params]` override the defaults.
pub fn verify_config(table: &Table) -> CliResult<VerifyConfig> {
    let file: VerifyFile =
        Value::Table(table.clone())
            .try_into()
            .map_err(|e: toml::de::Error| {
                CliError::invalid(format!("invalid config: {}", e.message()))
            })?;
    let estimates = parse_ids(&file.verify.estimates)?;
    file.ensemble.validate()?;
    Ok(VerifyConfig {
        estimates,
        ensemble: file.ensemble,
        params: file.params,
    })
}
