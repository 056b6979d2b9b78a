use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::experiments::{ExperimentId, ExperimentSpec};

/// Values that replace experiment defaults. Every field mirrors a flag.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Overrides {
    pub seed: Option<u64>,
    pub n_paths: Option<usize>,
    pub n_steps: Option<usize>,
    pub t: Option<f64>,
    pub mu: Option<f64>,
    pub x: Option<f64>,
    pub alpha: Option<f64>,
    pub u: Option<f64>,
    #[serde(rename = "truncation-T")]
    pub truncation_t: Option<f64>,
    pub marginals: Option<Vec<f64>>,
    pub family_alpha: Option<f64>,
    pub n_permutations: Option<usize>,
    pub energy_sample: Option<usize>,
    pub negative_control: Option<bool>,
}

impl Overrides {
    /// `self` wins wherever it is set.
    pub fn over(self, base: Overrides) -> Overrides {
        Overrides {
            seed: self.seed.or(base.seed),
            n_paths: self.n_paths.or(base.n_paths),
            n_steps: self.n_steps.or(base.n_steps),
            t: self.t.or(base.t),
            mu: self.mu.or(base.mu),
            x: self.x.or(base.x),
            alpha: self.alpha.or(base.alpha),
            u: self.u.or(base.u),
            truncation_t: self.truncation_t.or(base.truncation_t),
            marginals: self.marginals.or(base.marginals),
            family_alpha: self.family_alpha.or(base.family_alpha),
            n_permutations: self.n_permutations.or(base.n_permutations),
            energy_sample: self.energy_sample.or(base.energy_sample),
            negative_control: self.negative_control.or(base.negative_control),
        }
    }

    pub fn apply(&self, spec: &mut ExperimentSpec) {
        macro_rules! set {
            ($($src:ident => $dst:ident),*) => {
                $(if let Some(v) = &self.$src { spec.$dst = v.clone(); })*
            };
        }
        set!(seed => seed, n_paths => n_paths, n_steps => n_steps, t => t_horizon,
             mu => mu, x => x, alpha => alpha_or_x_weight, u => u_extension,
             truncation_t => truncation_t, marginals => marginal_times,
             family_alpha => family_alpha, n_permutations => n_permutations,
             energy_sample => energy_sample, negative_control => negative_control);
    }
}

/// Contents of a `--config` file: flat keys named after the flags.
#[derive(Debug, Clone, Default)]
pub struct FileConfig {
    pub id: Vec<String>,
    pub format: Option<String>,
    pub out: Option<String>,
    pub workers: Option<usize>,
    pub overrides: Overrides,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RunKeys {
    #[serde(default)]
    id: Vec<String>,
    format: Option<String>,
    out: Option<String>,
    workers: Option<usize>,
}

pub fn load_file(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    // underscores are accepted as well as dashes
    let table: toml::Table = text
        .parse()
        .map_err(|e| Error::Config(format!("invalid config {}: {e}", path.display())))?;
    let mut normalized: toml::Table = table
        .into_iter()
        .map(|(k, v)| {
            let k = if k.eq_ignore_ascii_case("truncation_t") || k.eq_ignore_ascii_case("truncation-t") {
                "truncation-T".to_string()
            } else {
                k.replace('_', "-")
            };
            let v = match (k.as_str(), v) {
                ("id", toml::Value::String(s)) => toml::Value::Array(vec![toml::Value::String(s)]),
                (_, v) => v,
            };
            (k, v)
        })
        .collect();
    let invalid = |e: toml::de::Error| Error::Config(format!("invalid config {}: {e}", path.display()));
    let mut run = toml::Table::new();
    for key in ["id", "format", "out", "workers"] {
        if let Some(v) = normalized.remove(key) {
            run.insert(key.to_string(), v);
        }
    }
    let run: RunKeys = run.try_into().map_err(invalid)?;
    let overrides: Overrides = normalized.try_into().map_err(invalid)?;
    Ok(FileConfig { id: run.id, format: run.format, out: run.out, workers: run.workers, overrides })
}

/// Expands `all` and rejects unknown ids.
pub fn resolve_ids(raw: &[String]) -> Result<Vec<ExperimentId>> {
    let mut ids = Vec::new();
    for r in raw {
        for part in r.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part.eq_ignore_ascii_case("all") {
                ids.extend(ExperimentId::ALL);
            } else {
                ids.push(part.parse()?);
            }
        }
    }
    if ids.is_empty() {
        return Err(Error::config("no experiment selected (use --id ID or --id all)"));
    }
    let mut seen = std::collections::HashSet::new();
    ids.retain(|id| seen.insert(*id));
    Ok(ids)
}

pub fn parse_marginals(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad fraction {p:?}: {e}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_keys_mirror_flags() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.toml");
        std::fs::write(
            &p,
            "id = \"THM_MAIN\"\nseed = 3\nn-paths = 2000\nn_steps = 64\ntruncation_T = 20.0\nmarginals = [0.5, 1.0]\n",
        )
        .unwrap();
        let c = load_file(&p).unwrap();
        assert_eq!(c.id, vec!["THM_MAIN"]);
        assert_eq!(c.overrides.seed, Some(3));
        assert_eq!(c.overrides.n_paths, Some(2000));
        assert_eq!(c.overrides.n_steps, Some(64));
        assert_eq!(c.overrides.truncation_t, Some(20.0));
        assert_eq!(c.overrides.marginals, Some(vec![0.5, 1.0]));
        std::fs::write(&p, "sed = 3\n").unwrap();
        assert!(load_file(&p).is_err());
    }

    #[test]
    fn flags_win_over_file() {
        let file = Overrides { seed: Some(1), mu: Some(2.0), ..Default::default() };
        let flags = Overrides { seed: Some(9), ..Default::default() };
        let merged = flags.over(file);
        assert_eq!(merged.seed, Some(9));
        assert_eq!(merged.mu, Some(2.0));
        let mut spec = ExperimentSpec::for_id(ExperimentId::CorMain);
        merged.apply(&mut spec);
        assert_eq!((spec.seed, spec.mu), (9, 2.0));
    }

    #[test]
    fn ids() {
        assert_eq!(resolve_ids(&["all".into()]).unwrap().len(), 19);
        assert_eq!(resolve_ids(&["QREV,qrev".into(), "BOUGEROL".into()]).unwrap().len(), 2);
        assert!(resolve_ids(&["NOPE".into()]).is_err());
        assert!(resolve_ids(&[]).is_err());
        assert_eq!(parse_marginals("0.2, 1").unwrap(), vec![0.2, 1.0]);
        assert!(parse_marginals("0.2,x").is_err());
    }
}
