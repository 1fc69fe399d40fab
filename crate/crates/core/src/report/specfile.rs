//! Sectioned `key = value` system files. See `docs/system-file.md`.

use std::path::Path;

use crate::error::{Error, Result};

/// A value with the line it came from, for error messages.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Line {
    pub line: usize,
    pub text: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Simulation {
    pub t0: Option<f64>,
    pub t1: Option<f64>,
    pub dt: Option<f64>,
    pub initial: Vec<(String, f64)>,
    pub eps: Option<Line>,
    pub lambda: Option<Line>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SystemSpec {
    pub name: String,
    pub coordinates: Vec<String>,
    pub momenta: Option<Vec<String>>,
    pub lagrangian: Line,
    pub constraints: Vec<Line>,
    pub hamiltonian: Option<Line>,
    pub symmetries: Vec<Line>,
    pub fields: Vec<Line>,
    pub simulation: Simulation,
}

const SECTIONS: &[&str] = &["system", "constraints", "hamiltonian", "symmetries", "fields", "simulation"];

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Spec { line, message: message.into() }
}

fn list(text: &str) -> Vec<String> {
    text.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

fn number(line: usize, key: &str, text: &str) -> Result<f64> {
    text.trim().parse().map_err(|_| err(line, format!("`{key}` expects a number, got `{text}`")))
}

/// Parses `k=v, k=v, ...`.
pub fn parse_assignments(line: usize, text: &str) -> Result<Vec<(String, f64)>> {
    list(text)
        .into_iter()
        .map(|item| {
            let (k, v) = item.split_once('=').ok_or_else(|| err(line, format!("expected name=value, got `{item}`")))?;
            Ok((k.trim().to_string(), number(line, k.trim(), v)?))
        })
        .collect()
}

impl SystemSpec {
    pub fn from_path(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = SystemSpec::default();
        let mut section: Option<&str> = None;
        let mut seen_lagrangian = false;
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| err(ln, "unterminated section header"))?.trim();
                section = Some(
                    SECTIONS.iter().find(|s| **s == name).ok_or_else(|| err(ln, format!("unknown section `{name}`")))?,
                );
                continue;
            }
            let sec = section.ok_or_else(|| err(ln, "entry before any section header"))?;
            let (key, value) = line.split_once('=').ok_or_else(|| err(ln, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            if value.is_empty() {
                return Err(err(ln, format!("`{key}` has an empty value")));
            }
            let entry = Line { line: ln, text: value.to_string() };
            let single = |slot: &mut Option<Line>| -> Result<()> {
                if slot.is_some() {
                    return Err(err(ln, format!("`{key}` given twice")));
                }
                *slot = Some(entry.clone());
                Ok(())
            };
            match (sec, key) {
                ("system", "name") => spec.name = value.to_string(),
                ("system", "coordinates") => spec.coordinates = list(value),
                ("system", "momenta") => spec.momenta = Some(list(value)),
                ("system", "lagrangian") => {
                    if seen_lagrangian {
                        return Err(err(ln, "`lagrangian` given twice"));
                    }
                    seen_lagrangian = true;
                    spec.lagrangian = entry;
                }
                ("constraints", "phi") => spec.constraints.push(entry),
                ("hamiltonian", "H") => single(&mut spec.hamiltonian)?,
                ("symmetries", "G") => spec.symmetries.push(entry),
                ("fields", "h") => spec.fields.push(entry),
                ("simulation", "t0") => spec.simulation.t0 = Some(number(ln, key, value)?),
                ("simulation", "t1") => spec.simulation.t1 = Some(number(ln, key, value)?),
                ("simulation", "dt") => spec.simulation.dt = Some(number(ln, key, value)?),
                ("simulation", "initial") => spec.simulation.initial = parse_assignments(ln, value)?,
                ("simulation", "eps") => single(&mut spec.simulation.eps)?,
                ("simulation", "lambda") => single(&mut spec.simulation.lambda)?,
                _ => return Err(err(ln, format!("unknown key `{key}` in [{sec}]"))),
            }
        }
        if spec.name.is_empty() {
            return Err(err(0, "[system] needs `name`"));
        }
        if spec.coordinates.is_empty() {
            return Err(err(0, "[system] needs `coordinates`"));
        }
        if !seen_lagrangian {
            return Err(err(0, "[system] needs `lagrangian`"));
        }
        Ok(spec)
    }
}

/// Splits a `;`-separated expression list.
pub fn expression_list(text: &str) -> Vec<String> {
    text.split(';').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_sections() {
        let s = SystemSpec::parse(
            "# demo\n[system]\nname = c\ncoordinates = x, lambda\nmomenta = p, pi\nlagrangian = dx^2/2\n\
             [constraints]\nphi = pi\n[hamiltonian]\nH = p^2/2\n[symmetries]\nG = H\nG = x\n\
             [fields]\nh = pi\n[simulation]\nt1 = 1\ndt = 0.1\ninitial = x=0, dx=1\nlambda = 0\n",
        )
        .unwrap();
        assert_eq!(s.coordinates, vec!["x", "lambda"]);
        assert_eq!(s.momenta.as_deref(), Some(&["p".to_string(), "pi".to_string()][..]));
        assert_eq!(s.constraints[0].text, "pi");
        assert_eq!(s.constraints[0].line, 8);
        assert_eq!(s.symmetries.len(), 2);
        assert_eq!(s.simulation.initial, vec![("x".into(), 0.0), ("dx".into(), 1.0)]);
        assert_eq!(s.simulation.t0, None);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(SystemSpec::parse("name = x"), Err(Error::Spec { line: 1, .. })));
        assert!(matches!(SystemSpec::parse("[nope]"), Err(Error::Spec { line: 1, .. })));
        assert!(matches!(
            SystemSpec::parse("[system]\nname = a\ncoordinates = q\n"),
            Err(Error::Spec { line: 0, .. })
        ));
        assert!(matches!(
            SystemSpec::parse("[system]\nname = a\ncoordinates = q\nlagrangian = dq\n[simulation]\ndt = fast\n"),
            Err(Error::Spec { line: 6, .. })
        ));
    }
}
