//! Sectioned key-value config files and their resolution into validated run
//! parameters.
//!
//! The format is flat INI-style text: `[section]` headers, `key = value`
//! lines, `#` comments. Lists are comma separated (`15, 17.5, 20`) and float
//! grids may use inclusive `start:step:stop` ranges (`15:2.5:40`). Every
//! diagnostic carries the config path and line number; `--set section.key=v`
//! overrides are applied before validation and reported as such.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use dmt_core::model::{ConfigBuilder, RateMode, SystemConfig};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Origin {
    Line(usize),
    Override,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "{n}"),
            Origin::Override => write!(f, "--set"),
        }
    }
}

#[derive(Clone, Debug)]
struct Entry {
    section: String,
    key: String,
    value: String,
    origin: Origin,
}

/// Parsed config file plus applied overrides, before semantic resolution.
#[derive(Clone, Debug)]
pub struct ConfigFile {
    name: String,
    entries: Vec<Entry>,
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("system", &["M", "N", "interferers", "xi", "xi_k"]),
    ("sweep", &["snr_db", "trials"]),
    ("rate", &["mode", "R", "r"]),
    ("rng", &["seed"]),
    ("fit", &["p_min", "p_max"]),
    ("surface", &["r", "xi"]),
    (
        "verify",
        &[
            "realizations",
            "woodbury_tol",
            "routes_tol",
            "sandwich_slack",
            "tail_samples",
            "tail_tol",
        ],
    ),
];

fn known_key(section: &str, key: &str) -> bool {
    SECTIONS
        .iter()
        .any(|(s, keys)| *s == section && keys.contains(&key))
}

fn known_section(section: &str) -> bool {
    SECTIONS.iter().any(|(s, _)| *s == section)
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&path.display().to_string(), &text)
    }

    pub fn parse(name: &str, text: &str) -> Result<Self, CliError> {
        let mut entries: Vec<Entry> = Vec::new();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(inner) = line.strip_prefix('[') {
                let Some(name) = inner.strip_suffix(']') else {
                    return Err(CliError::Parse(format!(
                        "{name}:{lineno}: malformed section header `{line}`"
                    )));
                };
                section = name.trim().to_string();
                if !known_section(&section) {
                    return Err(CliError::Parse(format!(
                        "{name}:{lineno}: unknown section [{section}]"
                    )));
                }
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Parse(format!(
                    "{name}:{lineno}: expected `key = value`, got `{line}`"
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if section.is_empty() {
                return Err(CliError::Parse(format!(
                    "{name}:{lineno}: `{key}` appears before any [section] header"
                )));
            }
            if !known_key(&section, &key) {
                return Err(CliError::Parse(format!(
                    "{name}:{lineno}: unknown key `{section}.{key}`"
                )));
            }
            if let Some(prev) = entries
                .iter()
                .find(|e| e.section == section && e.key == key)
            {
                return Err(CliError::Parse(format!(
                    "{name}:{lineno}: duplicate key `{section}.{key}` (first set at {})",
                    prev.origin
                )));
            }
            entries.push(Entry {
                section: section.clone(),
                key,
                value,
                origin: Origin::Line(lineno),
            });
        }
        Ok(ConfigFile {
            name: name.to_string(),
            entries,
        })
    }

    /// Applies one `--set section.key=value` override.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), CliError> {
        let Some((path, value)) = spec.split_once('=') else {
            return Err(CliError::Parse(format!(
                "--set expects `section.key=value`, got `{spec}`"
            )));
        };
        let Some((section, key)) = path.trim().split_once('.') else {
            return Err(CliError::Parse(format!(
                "--set key must be qualified as `section.key`, got `{path}`"
            )));
        };
        let (section, key, value) = (section.trim(), key.trim(), value.trim());
        if !known_key(section, key) {
            return Err(CliError::Parse(format!(
                "--set override names unknown key `{section}.{key}`"
            )));
        }
        if let Some(entry) = self
            .entries
            .iter_mut()
            .find(|e| e.section == section && e.key == key)
        {
            entry.value = value.to_string();
            entry.origin = Origin::Override;
        } else {
            self.entries.push(Entry {
                section: section.to_string(),
                key: key.to_string(),
                value: value.to_string(),
                origin: Origin::Override,
            });
        }
        Ok(())
    }

    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries
            .iter()
            .find(|e| e.section == section && e.key == key)
    }

    fn value_error(&self, entry: &Entry, what: &str) -> CliError {
        CliError::Validation(format!(
            "{}:{}: {}.{} = `{}`: {what}",
            self.name, entry.origin, entry.section, entry.key, entry.value
        ))
    }

    fn missing(&self, section: &str, key: &str) -> CliError {
        CliError::Validation(format!(
            "{}: missing required key `{section}.{key}`",
            self.name
        ))
    }

    fn get_u64(&self, section: &str, key: &str) -> Result<Option<u64>, CliError> {
        match self.get(section, key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<u64>()
                .map(Some)
                .map_err(|_| self.value_error(e, "expected a nonnegative integer")),
        }
    }

    fn get_usize(&self, section: &str, key: &str) -> Result<Option<usize>, CliError> {
        match self.get(section, key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<usize>()
                .map(Some)
                .map_err(|_| self.value_error(e, "expected a nonnegative integer")),
        }
    }

    fn get_f64(&self, section: &str, key: &str) -> Result<Option<f64>, CliError> {
        match self.get(section, key) {
            None => Ok(None),
            Some(e) => {
                let v = e
                    .value
                    .parse::<f64>()
                    .map_err(|_| self.value_error(e, "expected a number"))?;
                if !v.is_finite() {
                    return Err(self.value_error(e, "expected a finite number"));
                }
                Ok(Some(v))
            }
        }
    }

    fn get_str(&self, section: &str, key: &str) -> Option<&str> {
        self.get(section, key).map(|e| e.value.as_str())
    }

    /// Comma list or inclusive `start:step:stop` range of floats.
    fn get_grid(&self, section: &str, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        let Some(e) = self.get(section, key) else {
            return Ok(None);
        };
        parse_grid(&e.value)
            .map(Some)
            .map_err(|what| self.value_error(e, &what))
    }

    /// Validation errors for keys that only make sense in other modes.
    fn forbid(&self, section: &str, key: &str, why: &str) -> Result<(), CliError> {
        match self.get(section, key) {
            None => Ok(()),
            Some(e) => Err(self.value_error(e, why)),
        }
    }

    fn sections_present(&self) -> BTreeSet<&str> {
        self.entries.iter().map(|e| e.section.as_str()).collect()
    }
}

pub fn parse_grid(value: &str) -> Result<Vec<f64>, String> {
    if value.contains(':') {
        let parts: Vec<&str> = value.split(':').collect();
        if parts.len() != 3 {
            return Err("range must be start:step:stop".to_string());
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| "range bounds must be numbers".to_string())?;
        let (start, step, stop) = (nums[0], nums[1], nums[2]);
        if !step.is_finite() || step <= 0.0 || !start.is_finite() || !stop.is_finite() {
            return Err("range requires finite bounds and step > 0".to_string());
        }
        if stop < start {
            return Err("range stop must be >= start".to_string());
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        return Ok((0..=count).map(|i| start + step * i as f64).collect());
    }
    let vals: Vec<f64> = value
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| "expected a comma-separated list of numbers".to_string())?;
    if vals.is_empty() {
        return Err("list must not be empty".to_string());
    }
    Ok(vals)
}

/// Parameters for the verify property suite, with overridable tolerances.
#[derive(Clone, Debug)]
pub struct VerifyParams {
    pub realizations: u64,
    pub woodbury_tol: f64,
    pub routes_tol: f64,
    pub sandwich_slack: f64,
    pub tail_samples: u64,
    pub tail_tol: f64,
}

impl Default for VerifyParams {
    fn default() -> Self {
        VerifyParams {
            realizations: 1000,
            woodbury_tol: 1e-8,
            routes_tol: 1e-8,
            sandwich_slack: 1e-10,
            tail_samples: 200_000,
            tail_tol: 0.3,
        }
    }
}

/// Fully resolved sweep run: validated system plus the slope-fit window.
#[derive(Clone, Debug)]
pub struct SweepRun {
    pub system: SystemConfig,
    pub fit_window: (f64, f64),
    pub echo: Vec<(String, String)>,
}

/// Fully resolved DMT surface tabulation.
#[derive(Clone, Debug)]
pub struct SurfaceRun {
    pub m: usize,
    pub n: usize,
    pub r_grid: Vec<f64>,
    pub xi_grid: Vec<f64>,
    pub echo: Vec<(String, String)>,
}

/// Fully resolved verify run.
#[derive(Clone, Debug)]
pub struct VerifyRun {
    pub system: SystemConfig,
    pub params: VerifyParams,
    pub echo: Vec<(String, String)>,
}

fn format_list(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

impl ConfigFile {
    /// System parameters shared by every command. `grid_required` controls
    /// whether `[sweep]` must be present; verify falls back to a small
    /// default grid.
    fn resolve_system(&self, grid_required: bool) -> Result<SystemConfig, CliError> {
        let m = self
            .get_usize("system", "M")?
            .ok_or_else(|| self.missing("system", "M"))?;
        let n = self
            .get_usize("system", "N")?
            .ok_or_else(|| self.missing("system", "N"))?;
        let interferers = self.get_usize("system", "interferers")?.unwrap_or(0);
        let xi = self.get_f64("system", "xi")?;
        let xi_k = self.get_grid("system", "xi_k")?;

        let snr_grid = match self.get_grid("sweep", "snr_db")? {
            Some(grid) => grid,
            None if grid_required => return Err(self.missing("sweep", "snr_db")),
            None => vec![10.0, 20.0, 30.0],
        };
        let trials = match self.get_u64("sweep", "trials")? {
            Some(t) => t,
            None if grid_required => return Err(self.missing("sweep", "trials")),
            None => 1000,
        };

        let mode = match self.get_str("rate", "mode") {
            Some(mode) => mode,
            None if grid_required => return Err(self.missing("rate", "mode")),
            None => "fixed",
        };
        let rate_mode = match mode {
            "fixed" => {
                self.forbid("rate", "r", "rate.r is only valid with mode = scaling")?;
                let bits = match self.get_f64("rate", "R")? {
                    Some(b) => b,
                    None if grid_required => return Err(self.missing("rate", "R")),
                    None => 5.0,
                };
                RateMode::Fixed { bits }
            }
            "scaling" => {
                self.forbid("rate", "R", "rate.R is only valid with mode = fixed")?;
                let r = self
                    .get_f64("rate", "r")?
                    .ok_or_else(|| self.missing("rate", "r"))?;
                RateMode::Scaling { r }
            }
            other => {
                let e = self.get("rate", "mode").expect("mode entry exists");
                return Err(self.value_error(
                    e,
                    &format!("unknown mode `{other}`, expected fixed or scaling"),
                ));
            }
        };

        let seed = self.get_u64("rng", "seed")?.unwrap_or(0);

        let mut builder = ConfigBuilder::new(m, n, snr_grid, rate_mode)
            .trials(trials)
            .seed(seed);
        builder.num_interferers = interferers;
        builder.xi = xi;
        builder.xi_k = xi_k;
        builder
            .build()
            .map_err(|e| CliError::Validation(format!("{}: {e}", self.name)))
    }

    fn fit_window(&self) -> Result<(f64, f64), CliError> {
        let p_min = self
            .get_f64("fit", "p_min")?
            .unwrap_or(dmt_core::analysis::DEFAULT_FIT_WINDOW.0);
        let p_max = self
            .get_f64("fit", "p_max")?
            .unwrap_or(dmt_core::analysis::DEFAULT_FIT_WINDOW.1);
        if !(p_min > 0.0 && p_min < p_max && p_max <= 1.0) {
            return Err(CliError::Validation(format!(
                "{}: fit window requires 0 < p_min < p_max <= 1 (got [{p_min}, {p_max}])",
                self.name
            )));
        }
        Ok((p_min, p_max))
    }

    fn system_echo(&self, system: &SystemConfig) -> Vec<(String, String)> {
        let mut echo = vec![
            ("system.M".to_string(), system.m().to_string()),
            ("system.N".to_string(), system.n().to_string()),
            (
                "system.interferers".to_string(),
                system.num_interferers().to_string(),
            ),
            ("system.xi".to_string(), system.xi().to_string()),
        ];
        if system.num_interferers() > 0 {
            echo.push(("system.xi_k".to_string(), format_list(system.xi_k())));
        }
        echo.push((
            "sweep.snr_db".to_string(),
            format_list(system.snr_grid_db()),
        ));
        echo.push((
            "sweep.trials".to_string(),
            system.trials_per_point().to_string(),
        ));
        match system.rate_mode() {
            RateMode::Fixed { bits } => {
                echo.push(("rate.mode".to_string(), "fixed".to_string()));
                echo.push(("rate.R".to_string(), bits.to_string()));
            }
            RateMode::Scaling { r } => {
                echo.push(("rate.mode".to_string(), "scaling".to_string()));
                echo.push(("rate.r".to_string(), r.to_string()));
            }
        }
        echo.push(("rng.seed".to_string(), system.seed().to_string()));
        echo
    }

    pub fn resolve_sweep(&self) -> Result<SweepRun, CliError> {
        for section in self.sections_present() {
            if section == "surface" || section == "verify" {
                return Err(CliError::Validation(format!(
                    "{}: section [{section}] is not used by the sweep command",
                    self.name
                )));
            }
        }
        let system = self.resolve_system(true)?;
        let fit_window = self.fit_window()?;
        let mut echo = self.system_echo(&system);
        echo.push(("fit.p_min".to_string(), fit_window.0.to_string()));
        echo.push(("fit.p_max".to_string(), fit_window.1.to_string()));
        Ok(SweepRun {
            system,
            fit_window,
            echo,
        })
    }

    pub fn resolve_surface(&self) -> Result<SurfaceRun, CliError> {
        let m = self
            .get_usize("system", "M")?
            .ok_or_else(|| self.missing("system", "M"))?;
        let n = self
            .get_usize("system", "N")?
            .ok_or_else(|| self.missing("system", "N"))?;
        if m < 1 || n < m {
            return Err(CliError::Validation(format!(
                "{}: surface requires N >= M >= 1 (got M={m}, N={n})",
                self.name
            )));
        }
        let r_grid = match self.get_grid("surface", "r")? {
            Some(grid) => grid,
            None => parse_grid(&format!("0:0.05:{m}")).expect("default grid"),
        };
        let xi_grid = match self.get_grid("surface", "xi")? {
            Some(grid) => grid,
            None => parse_grid("0:0.05:0.95").expect("default grid"),
        };
        for &r in &r_grid {
            if r < 0.0 {
                return Err(CliError::Validation(format!(
                    "{}: surface.r entries must be >= 0 (got {r})",
                    self.name
                )));
            }
        }
        for &xi in &xi_grid {
            if !(0.0..1.0).contains(&xi) {
                return Err(CliError::Validation(format!(
                    "{}: surface.xi entries must lie in [0, 1) (got {xi})",
                    self.name
                )));
            }
        }
        let echo = vec![
            ("system.M".to_string(), m.to_string()),
            ("system.N".to_string(), n.to_string()),
            ("surface.r".to_string(), format_list(&r_grid)),
            ("surface.xi".to_string(), format_list(&xi_grid)),
        ];
        Ok(SurfaceRun {
            m,
            n,
            r_grid,
            xi_grid,
            echo,
        })
    }

    pub fn resolve_verify(&self) -> Result<VerifyRun, CliError> {
        let system = self.resolve_system(false)?;
        let defaults = VerifyParams::default();
        let params = VerifyParams {
            realizations: self
                .get_u64("verify", "realizations")?
                .unwrap_or(defaults.realizations)
                .max(1),
            woodbury_tol: self
                .get_f64("verify", "woodbury_tol")?
                .unwrap_or(defaults.woodbury_tol),
            routes_tol: self
                .get_f64("verify", "routes_tol")?
                .unwrap_or(defaults.routes_tol),
            sandwich_slack: self
                .get_f64("verify", "sandwich_slack")?
                .unwrap_or(defaults.sandwich_slack),
            tail_samples: self
                .get_u64("verify", "tail_samples")?
                .unwrap_or(defaults.tail_samples)
                .max(1000),
            tail_tol: self
                .get_f64("verify", "tail_tol")?
                .unwrap_or(defaults.tail_tol),
        };
        let mut echo = self.system_echo(&system);
        echo.push((
            "verify.realizations".to_string(),
            params.realizations.to_string(),
        ));
        echo.push((
            "verify.woodbury_tol".to_string(),
            params.woodbury_tol.to_string(),
        ));
        echo.push((
            "verify.routes_tol".to_string(),
            params.routes_tol.to_string(),
        ));
        echo.push((
            "verify.sandwich_slack".to_string(),
            params.sandwich_slack.to_string(),
        ));
        echo.push((
            "verify.tail_samples".to_string(),
            params.tail_samples.to_string(),
        ));
        echo.push(("verify.tail_tol".to_string(), params.tail_tol.to_string()));
        Ok(VerifyRun {
            system,
            params,
            echo,
        })
    }
}
