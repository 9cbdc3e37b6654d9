//! Parsing of the `--at "x=...;y=...;y2=..."` state selector.

use crate::error::{CliError, CliResult};

/// A state given on the command line; `y2` is optional and defaults to the
/// value on the extension of the trajectory through `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub y2: Option<Vec<f64>>,
}

fn parse_vector(key: &str, text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|c| {
            let c = c.trim();
            c.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Config(format!("--at: {key} component '{c}' is not a finite number")))
        })
        .collect()
}

impl std::str::FromStr for AtState {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let (mut x, mut y, mut y2) = (None, None, None);
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--at: expected key=values, got '{part}'")))?;
            let key = key.trim();
            let slot = match key {
                "x" => &mut x,
                "y" => &mut y,
                "y2" => &mut y2,
                _ => return Err(CliError::Config(format!("--at: unknown key '{key}' (expected x, y, y2)"))),
            };
            if slot.is_some() {
                return Err(CliError::Config(format!("--at: '{key}' given twice")));
            }
            *slot = Some(parse_vector(key, value)?);
        }
        let x = x.ok_or_else(|| CliError::Config("--at: missing x".into()))?;
        let y = y.ok_or_else(|| CliError::Config("--at: missing y".into()))?;
        if y.len() != x.len() || y2.as_ref().is_some_and(|v| v.len() != x.len()) {
            return Err(CliError::Config("--at: x, y and y2 must have equal length".into()));
        }
        Ok(AtState { x, y, y2 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_and_partial_states() {
        let s: AtState = "x=0.785, 0; y=0,1; y2=-0.25,0".parse().unwrap();
        assert_eq!(s.x, vec![0.785, 0.0]);
        assert_eq!(s.y2, Some(vec![-0.25, 0.0]));
        let s: AtState = "y=1,2;x=3,4".parse().unwrap();
        assert_eq!((s.x, s.y, s.y2), (vec![3.0, 4.0], vec![1.0, 2.0], None));
    }

    #[test]
    fn rejects_malformed_input() {
        for bad in ["x=1,2", "x=1,2;y=1", "x=1,2;y=1,a", "x=1;y=1;z=1", "x=1;x=2;y=1", "x 1;y=1", "x=1;y=nan"] {
            assert!(matches!(bad.parse::<AtState>(), Err(CliError::Config(_))), "{bad}");
        }
    }
}
