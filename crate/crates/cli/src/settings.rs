use serde::de::DeserializeOwned;
use serde::Serialize;
use std::path::Path;
use toml::{Table, Value};

#[derive(Debug, thiserror::Error)]
pub enum SettingsError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot parse {path}: {source}")]
    Parse { path: String, source: toml::de::Error },
    #[error("override `{0}` is not of the form section.key=value")]
    Override(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("`{0}` is not a table")]
    NotTable(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

pub fn read_file(path: &Path) -> Result<Table, SettingsError> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| SettingsError::Read { path: name.clone(), source })?;
    text.parse::<Table>().map_err(|source| SettingsError::Parse { path: name, source })
}

/// A bare value parses as TOML when it can and falls back to a string.
fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

pub fn apply_override(table: &mut Table, spec: &str) -> Result<(), SettingsError> {
    let (path, raw) = spec.split_once('=').ok_or_else(|| SettingsError::Override(spec.into()))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(SettingsError::Override(spec.into()));
    }
    let (last, parents) = keys.split_last().expect("split yields one key");
    let mut cur = table;
    for (i, k) in parents.iter().enumerate() {
        let entry = cur.entry(k.to_string()).or_insert_with(|| Value::Table(Table::new()));
        cur = entry.as_table_mut().ok_or_else(|| SettingsError::NotTable(keys[..=i].join(".")))?;
    }
    cur.insert(last.to_string(), parse_value(raw.trim()));
    Ok(())
}

fn merge(base: &mut Table, over: Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn leaf_paths(table: &Table, prefix: &str, out: &mut Vec<String>) {
    for (k, v) in table {
        let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(t) if !t.is_empty() => leaf_paths(t, &path, out),
            _ => out.push(path),
        }
    }
}

fn has_path(table: &Table, path: &str) -> bool {
    let mut cur = table;
    let keys: Vec<&str> = path.split('.').collect();
    for (i, k) in keys.iter().enumerate() {
        match cur.get(*k) {
            Some(Value::Table(t)) if i + 1 < keys.len() => cur = t,
            Some(_) if i + 1 == keys.len() => return true,
            _ => return false,
        }
    }
    false
}

/// Defaults, then the file, then the overrides. Keys the config type does not know are rejected.
pub fn resolve<C: Serialize + DeserializeOwned + Default>(file: Option<Table>, overrides: &[String]) -> Result<C, SettingsError> {
    let mut user = file.unwrap_or_default();
    for o in overrides {
        apply_override(&mut user, o)?;
    }
    let mut merged = Value::try_from(C::default()).map_err(|e| SettingsError::Invalid(e.to_string()))?;
    let base = merged.as_table_mut().ok_or_else(|| SettingsError::NotTable("<root>".into()))?;
    merge(base, user.clone());
    let cfg: C = Value::Table(base.clone()).try_into().map_err(|e: toml::de::Error| SettingsError::Invalid(e.to_string()))?;
    let seen = match Value::try_from(&cfg).map_err(|e| SettingsError::Invalid(e.to_string()))? {
        Value::Table(t) => t,
        _ => return Err(SettingsError::NotTable("<root>".into())),
    };
    let mut paths = Vec::new();
    leaf_paths(&user, "", &mut paths);
    if let Some(p) = paths.into_iter().find(|p| !has_path(&seen, p)) {
        return Err(SettingsError::UnknownKey(p));
    }
    Ok(cfg)
}
