//! Optional TOML run configuration. Every key mirrors a command-line flag
//! and is overridden by it.

use std::path::Path;

use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub pattern: Option<String>,
    pub eps: Option<f64>,
    pub mu: Option<f64>,
    pub t_end: Option<f64>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub start: Option<[f64; 3]>,
    pub starts: Option<Vec<[f64; 3]>>,
    pub eps_min: Option<f64>,
    pub eps_max: Option<f64>,
    pub mu_min: Option<f64>,
    pub mu_max: Option<f64>,
    pub samples: Option<usize>,
    pub grid: Option<String>,
    pub t_transient: Option<f64>,
    pub t_window: Option<f64>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }
}

/// Parses `x,y,z` into a point.
pub fn parse_point(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected x,y,z but got '{s}'"));
    }
    let mut out = [0.0; 3];
    for (o, p) in out.iter_mut().zip(&parts) {
        *o = p.parse().map_err(|_| format!("'{p}' is not a number"))?;
    }
    Ok(out)
}

/// Parses `NxM` into `(n_eps, n_mu)`.
pub fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected NxM but got '{s}'"))?;
    let n = a
        .trim()
        .parse()
        .map_err(|_| format!("bad grid width '{a}'"))?;
    let m = b
        .trim()
        .parse()
        .map_err(|_| format!("bad grid height '{b}'"))?;
    Ok((n, m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_and_point_parsing() {
        assert_eq!(parse_grid("40x30"), Ok((40, 30)));
        assert!(parse_grid("40").is_err());
        assert_eq!(parse_point("0.2, 0.3,0.5"), Ok([0.2, 0.3, 0.5]));
        assert!(parse_point("0.2,0.3").is_err());
    }

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(toml::from_str::<FileConfig>("eps = 0.5\nmu = 0.1\n").is_ok());
        assert!(toml::from_str::<FileConfig>("epsilon = 0.5\n").is_err());
    }
}
