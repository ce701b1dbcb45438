//! Experiment configuration: flat `key = value` lines, `#` comments, and
//! `[domain N]` sections holding the material of domain N.
//!
//! ```text
//! experiment = convergence
//! geometry = two_cubes
//! kappa0 = 6
//! h = 0.25, 0.2, 0.15, 0.12
//! h_ref = 0.1
//!
//! [domain 1]
//! eps = 2
//! mu = 1
//! ```
//!
//! Complex material values are written `re` or `re, im`.

use composite_bem::formulations::QlOptions;
use composite_bem::geometry::SplitKind;
use composite_bem::krylov::GmresOptions;
use composite_bem::operators::{Material, Screening};
use composite_bem::C64;
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("missing key `{0}`")]
    Missing(String),
    #[error("key `{key}`: {msg}")]
    Invalid { key: String, msg: String },
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Mie,
    Convergence,
    Extinction,
    Iterations,
    Resonance,
    Identity,
    Delta,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Mie,
        Experiment::Convergence,
        Experiment::Extinction,
        Experiment::Iterations,
        Experiment::Resonance,
        Experiment::Identity,
        Experiment::Delta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Mie => "mie",
            Experiment::Convergence => "convergence",
            Experiment::Extinction => "extinction",
            Experiment::Iterations => "iterations",
            Experiment::Resonance => "resonance",
            Experiment::Identity => "identity",
            Experiment::Delta => "delta",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    TwoCubes,
    Sphere,
    SplitSphere(SplitKind),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub geometry: Geometry,
    pub kappa0: f64,
    /// (start, stop, count)
    pub kappa0_sweep: Option<(f64, f64, usize)>,
    /// Indexed by domain; domain 0 is the background.
    pub materials: Vec<Material>,
    pub h: Vec<f64>,
    pub h_ref: Option<f64>,
    /// Absolute screening lengths; when absent δ = delta_factor·h.
    pub delta: Option<Vec<f64>>,
    pub delta_factor: f64,
    pub cutoff_factor: f64,
    pub screening: Screening,
    pub identity_term: bool,
    pub gmres_tol: f64,
    pub gmres_maxit: usize,
    pub angles: usize,
    pub line_samples: usize,
    pub output: PathBuf,
}

const KEYS: [&str; 17] = [
    "experiment",
    "geometry",
    "kappa0",
    "kappa0_sweep",
    "h",
    "h_ref",
    "delta",
    "delta_factor",
    "cutoff_factor",
    "screening",
    "identity_term",
    "gmres_tol",
    "gmres_maxit",
    "angles",
    "line_samples",
    "output",
    "domains",
];

fn invalid(key: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.into(), msg: msg.into() }
}

fn number(key: &str, s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| invalid(key, format!("`{}` is not a number", s.trim())))
}

fn list(key: &str, s: &str) -> Result<Vec<f64>> {
    let v = s.split(',').map(|x| number(key, x)).collect::<Result<Vec<_>>>()?;
    if v.is_empty() {
        return Err(invalid(key, "empty list"));
    }
    Ok(v)
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(key, format!("must be positive, got {v}")))
    }
}

fn complex(key: &str, s: &str) -> Result<C64> {
    match list(key, s)?.as_slice() {
        [re] => Ok(C64::new(*re, 0.0)),
        [re, im] => Ok(C64::new(*re, *im)),
        _ => Err(invalid(key, "expected `re` or `re, im`")),
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut global: BTreeMap<String, String> = BTreeMap::new();
        let mut domains: BTreeMap<usize, BTreeMap<String, String>> = BTreeMap::new();
        let mut section: Option<usize> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            if let Some(inner) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let mut it = inner.split_whitespace();
                match (it.next(), it.next().and_then(|n| n.parse::<usize>().ok()), it.next()) {
                    (Some("domain"), Some(n), None) => section = Some(n),
                    _ => return Err(ConfigError::Syntax { line: i + 1, msg: format!("bad section header `{line}`") }),
                }
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError::Syntax { line: i + 1, msg: "expected `key = value`".into() });
            };
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            let map = match section {
                Some(d) => {
                    if k != "eps" && k != "mu" {
                        return Err(ConfigError::UnknownKey(format!("domain {d}.{k}")));
                    }
                    domains.entry(d).or_default()
                }
                None => {
                    if !KEYS.contains(&k.as_str()) {
                        return Err(ConfigError::UnknownKey(k));
                    }
                    &mut global
                }
            };
            if map.insert(k.clone(), v).is_some() {
                return Err(ConfigError::Syntax { line: i + 1, msg: format!("duplicate key `{k}`") });
            }
        }
        Self::from_maps(&global, &domains)
    }

    fn from_maps(g: &BTreeMap<String, String>, domains: &BTreeMap<usize, BTreeMap<String, String>>) -> Result<Self> {
        let get = |k: &str| g.get(k).map(String::as_str);
        let experiment = match get("experiment").ok_or_else(|| ConfigError::Missing("experiment".into()))? {
            name => Experiment::ALL
                .into_iter()
                .find(|e| e.name() == name)
                .ok_or_else(|| invalid("experiment", format!("unknown experiment `{name}`")))?,
        };
        let geometry = match get("geometry").unwrap_or(match experiment {
            Experiment::Mie => "split_sphere",
            _ => "two_cubes",
        }) {
            "two_cubes" => Geometry::TwoCubes,
            "sphere" => Geometry::Sphere,
            "split_sphere" => Geometry::SplitSphere(SplitKind::Half),
            "quadrant_sphere" => Geometry::SplitSphere(SplitKind::Quadrant),
            path => Geometry::File(PathBuf::from(path)),
        };

        if experiment == Experiment::Mie && !matches!(geometry, Geometry::Sphere | Geometry::SplitSphere(_)) {
            return Err(invalid("geometry", "the Mie comparison needs a sphere geometry"));
        }

        let kappa0 = positive("kappa0", get("kappa0").map_or(Ok(6.0), |s| number("kappa0", s))?)?;
        let kappa0_sweep = match get("kappa0_sweep") {
            None => None,
            Some(s) => match list("kappa0_sweep", s)?.as_slice() {
                &[a, b, n] if n >= 1.0 && n.fract() == 0.0 => {
                    positive("kappa0_sweep", a)?;
                    if b < a {
                        return Err(invalid("kappa0_sweep", "stop is below start"));
                    }
                    Some((a, b, n as usize))
                }
                _ => return Err(invalid("kappa0_sweep", "expected `start, stop, count`")),
            },
        };
        if experiment == Experiment::Resonance && kappa0_sweep.is_none() {
            return Err(ConfigError::Missing("kappa0_sweep".into()));
        }

        let h = match get("h") {
            Some(s) => list("h", s)?.into_iter().map(|v| positive("h", v)).collect::<Result<Vec<_>>>()?,
            None => return Err(ConfigError::Missing("h".into())),
        };
        let h_ref = get("h_ref").map(|s| number("h_ref", s).and_then(|v| positive("h_ref", v))).transpose()?;
        if experiment == Experiment::Convergence {
            match h_ref {
                None => return Err(ConfigError::Missing("h_ref".into())),
                Some(r) if h.iter().any(|&x| x <= r) => return Err(invalid("h_ref", "must be finer than every entry of `h`")),
                _ => {}
            }
        }
        let delta = get("delta")
            .map(|s| list("delta", s)?.into_iter().map(|v| positive("delta", v)).collect::<Result<Vec<_>>>())
            .transpose()?;
        let delta_factor = positive("delta_factor", get("delta_factor").map_or(Ok(1.0), |s| number("delta_factor", s))?)?;
        let cutoff_factor = positive("cutoff_factor", get("cutoff_factor").map_or(Ok(3.5), |s| number("cutoff_factor", s))?)?;
        let screening = match get("screening").unwrap_or("gaussian") {
            "gaussian" => Screening::Gaussian,
            "literal" => Screening::Literal,
            other => return Err(invalid("screening", format!("`{other}` is neither `gaussian` nor `literal`"))),
        };
        let identity_term = match get("identity_term").unwrap_or("true") {
            "true" => true,
            "false" => false,
            other => return Err(invalid("identity_term", format!("`{other}` is not a boolean"))),
        };
        let gmres_tol = positive("gmres_tol", get("gmres_tol").map_or(Ok(2e-5), |s| number("gmres_tol", s))?)?;
        let count = |k: &str, d: usize| -> Result<usize> {
            match get(k) {
                None => Ok(d),
                Some(s) => s.trim().parse::<usize>().ok().filter(|&n| n > 0).ok_or_else(|| invalid(k, "expected a positive integer")),
            }
        };
        let gmres_maxit = count("gmres_maxit", 2000)?;
        let angles = count("angles", 181)?;
        if angles < 2 {
            return Err(invalid("angles", "need at least two angles"));
        }
        let line_samples = count("line_samples", 101)?;

        let n_domains = match &geometry {
            Geometry::TwoCubes | Geometry::SplitSphere(_) => 3,
            Geometry::Sphere => 2,
            Geometry::File(_) => count("domains", 1 + domains.keys().next_back().copied().unwrap_or(0))?,
        };
        if let Some(&d) = domains.keys().find(|&&d| d >= n_domains) {
            return Err(invalid(&format!("domain {d}"), format!("geometry has {n_domains} domains")));
        }
        let mut materials = vec![Material::vacuum(); n_domains];
        for (&d, m) in domains {
            let eps = m.get("eps").map_or(Ok(C64::new(1.0, 0.0)), |s| complex(&format!("domain {d}.eps"), s))?;
            let mu = m.get("mu").map_or(Ok(C64::new(1.0, 0.0)), |s| complex(&format!("domain {d}.mu"), s))?;
            materials[d] = Material::new(eps, mu).map_err(|e| invalid(&format!("domain {d}"), e.to_string()))?;
        }
        if materials[0].eps_r.im != 0.0 || materials[0].mu_r.im != 0.0 {
            return Err(invalid("domain 0", "the background must be lossless"));
        }

        Ok(ExperimentConfig {
            experiment,
            geometry,
            kappa0,
            kappa0_sweep,
            materials,
            h,
            h_ref,
            delta,
            delta_factor,
            cutoff_factor,
            screening,
            identity_term,
            gmres_tol,
            gmres_maxit,
            angles,
            line_samples,
            output: PathBuf::from(get("output").unwrap_or("out")),
        })
    }

    /// Every parameter, defaults included, one `key = value` per line in a
    /// fixed order. This is what the CSV headers echo and what is hashed.
    pub fn echo(&self) -> Vec<String> {
        let fl = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(", ");
        let mut out = vec![
            format!("experiment = {}", self.experiment.name()),
            format!(
                "geometry = {}",
                match &self.geometry {
                    Geometry::TwoCubes => "two_cubes".to_string(),
                    Geometry::Sphere => "sphere".to_string(),
                    Geometry::SplitSphere(SplitKind::Half) => "split_sphere".to_string(),
                    Geometry::SplitSphere(SplitKind::Quadrant) => "quadrant_sphere".to_string(),
                    Geometry::File(p) => p.display().to_string(),
                }
            ),
            format!("kappa0 = {}", self.kappa0),
        ];
        if let Some((a, b, n)) = self.kappa0_sweep {
            out.push(format!("kappa0_sweep = {a}, {b}, {n}"));
        }
        out.push(format!("h = {}", fl(&self.h)));
        if let Some(r) = self.h_ref {
            out.push(format!("h_ref = {r}"));
        }
        match &self.delta {
            Some(d) => out.push(format!("delta = {}", fl(d))),
            None => out.push(format!("delta_factor = {}", self.delta_factor)),
        }
        out.push(format!("cutoff_factor = {}", self.cutoff_factor));
        out.push(format!(
            "screening = {}",
            match self.screening {
                Screening::Gaussian => "gaussian",
                Screening::Literal => "literal",
            }
        ));
        out.push(format!("identity_term = {}", self.identity_term));
        out.push(format!("gmres_tol = {}", self.gmres_tol));
        out.push(format!("gmres_maxit = {}", self.gmres_maxit));
        out.push(format!("angles = {}", self.angles));
        out.push(format!("line_samples = {}", self.line_samples));
        out.push(format!("output = {}", self.output.display()));
        for (d, m) in self.materials.iter().enumerate() {
            out.push(format!("domain {d}: eps = {}, {}; mu = {}, {}", m.eps_r.re, m.eps_r.im, m.mu_r.re, m.mu_r.im));
        }
        out
    }

    pub fn gmres(&self) -> GmresOptions {
        GmresOptions { tol: self.gmres_tol, maxit: self.gmres_maxit, ..Default::default() }
    }

    pub fn ql_options(&self, h: f64) -> QlOptions {
        let mut o = QlOptions::new(self.delta_factor * h);
        o.cutoff_factor = self.cutoff_factor;
        o.screening = self.screening;
        o.identity_term = self.identity_term;
        o
    }

    /// κ₀ values of the sweep, or the single κ₀.
    pub fn kappa0_values(&self) -> Vec<f64> {
        match self.kappa0_sweep {
            Some((a, _, 1)) => vec![a],
            Some((a, b, n)) => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
            None => vec![self.kappa0],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONVERGENCE: &str = "
        experiment = convergence   # trailing comment
        kappa0 = 6
        h = 0.25, 0.2
        h_ref = 0.1
        [domain 1]
        eps = 2
        [domain 2]
        eps = 4, -0.5
        mu = 1
    ";

    #[test]
    fn parses_sections_and_defaults() {
        let c = ExperimentConfig::parse(CONVERGENCE).unwrap();
        assert_eq!(c.experiment, Experiment::Convergence);
        assert_eq!(c.geometry, Geometry::TwoCubes);
        assert_eq!(c.h, vec![0.25, 0.2]);
        assert_eq!(c.materials[1].eps_r, C64::new(2.0, 0.0));
        assert_eq!(c.materials[2].eps_r, C64::new(4.0, -0.5));
        assert_eq!(c.materials[0], Material::vacuum());
        assert_eq!((c.cutoff_factor, c.gmres_tol, c.gmres_maxit, c.identity_term), (3.5, 2e-5, 2000, true));
        assert_eq!(c.ql_options(0.2).delta, 0.2);
        // the echo is stable and parses back to the same parameters
        assert_eq!(c.echo(), ExperimentConfig::parse(CONVERGENCE).unwrap().echo());
    }

    #[test]
    fn errors_name_the_key() {
        let bad = |s: &str| ExperimentConfig::parse(s).unwrap_err().to_string();
        assert!(bad("experiment = nonsense\nh = 0.2").contains("experiment"));
        assert!(bad("experiment = mie\nh = -0.2").contains("`h`"));
        assert!(bad("experiment = mie\nh = 0.2\nfoo = 1").contains("foo"));
        assert!(bad("experiment = mie").contains("`h`"));
        assert!(bad("experiment = convergence\nh = 0.2").contains("h_ref"));
        assert!(bad("experiment = convergence\nh = 0.2\nh_ref = 0.3").contains("h_ref"));
        assert!(bad("experiment = resonance\nh = 0.25").contains("kappa0_sweep"));
        assert!(bad("experiment = mie\nh = 0.2\n[domain 5]\neps = 2").contains("domain 5"));
        assert!(bad("experiment = mie\nh = 0.2\n[domain 1]\nsigma = 2").contains("sigma"));
        assert!(bad("experiment = mie\nh = 0.2\nh = 0.3").contains("duplicate"));
        assert!(bad("experiment = mie\nh = 0.2\nscreening = box").contains("screening"));
    }

    #[test]
    fn sweep_values() {
        let c = ExperimentConfig::parse("experiment = resonance\nh = 0.25\nkappa0_sweep = 5, 8, 31").unwrap();
        let k = c.kappa0_values();
        assert_eq!(k.len(), 31);
        assert_eq!((k[0], k[30]), (5.0, 8.0));
        assert!((k[1] - 5.1).abs() < 1e-12);
    }
}
