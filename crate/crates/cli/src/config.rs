use std::path::{Path, PathBuf};

use indentfit::calibration::GaConfig;
use indentfit::constitutive::MaterialParams;
use indentfit::contact::{ForwardConfig, LoadSchedule, OliverPharrConfig, Profile, BERKOVICH_HALF_ANGLE};
use indentfit::doe::{FactorLevels, FactorialSpace};
use indentfit::surrogate::Kernel;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::failure::Failure;

/// Everything a study needs besides the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    /// Seed for every randomized stage. Required by those stages.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub material: Material,
    pub forward: Forward,
    pub conditions: Vec<Condition>,
    pub sensitivity: Sensitivity,
    pub surrogate: Surrogate,
    pub calibration: Calibration,
    pub analysis: OliverPharrConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Material {
    #[serde(rename = "E")]
    pub e: f64,
    pub nu: f64,
    #[serde(rename = "C_s")]
    pub c_s: f64,
    pub m_s: f64,
    #[serde(rename = "C_t")]
    pub c_t: f64,
    pub m_t: f64,
    pub t_eps: f64,
}

impl Default for Material {
    fn default() -> Self {
        let [e, nu, c_s, m_s, c_t, m_t, t_eps] = MaterialParams::epoxy_reference().to_array();
        Self { e, nu, c_s, m_s, c_t, m_t, t_eps }
    }
}

impl Material {
    pub fn params(&self) -> Result<MaterialParams, Failure> {
        Ok(MaterialParams::new(self.e, self.nu, self.c_s, self.m_s, self.c_t, self.m_t, self.t_eps)?)
    }

    pub fn design(&self) -> [f64; 6] {
        [self.e, self.c_s, self.m_s, self.c_t, self.m_t, self.t_eps]
    }
}

/// Scales of the representative-point model, fixed by an elastic reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Forward {
    /// GPa
    pub reference_e: f64,
    pub reference_nu: f64,
    /// mN
    pub reference_load: f64,
    /// degrees
    pub half_angle: f64,
    /// s
    pub max_dt: f64,
}

impl Default for Forward {
    fn default() -> Self {
        let r = MaterialParams::epoxy_reference();
        Self { reference_e: r.e, reference_nu: r.nu, reference_load: 1.0, half_angle: BERKOVICH_HALF_ANGLE, max_dt: 0.05 }
    }
}

impl Forward {
    pub fn config(&self) -> Result<ForwardConfig, Failure> {
        let reference = MaterialParams::new(self.reference_e, self.reference_nu, 0.0, 0.0, 0.0, 0.0, 1.0)?;
        if !(self.reference_load > 0.0 && self.half_angle > 0.0 && self.half_angle < 90.0 && self.max_dt > 0.0) {
            return Err(Failure::Config(format!(
                "[forward] needs reference_load > 0, 0 < half_angle < 90 and max_dt > 0; got {}, {}, {}",
                self.reference_load, self.half_angle, self.max_dt
            )));
        }
        let cfg = ForwardConfig::calibrated(&reference, self.reference_load, self.half_angle);
        Ok(ForwardConfig { max_dt: self.max_dt, ..cfg })
    }
}

/// One loading condition, optionally with its measured curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Condition {
    pub name: String,
    pub profile: Profile,
    /// mN
    pub p_max: f64,
    /// s
    pub t_load: f64,
    #[serde(default)]
    pub t_hold: f64,
    pub t_unload: f64,
    pub n_samples: usize,
    /// Measured curve for calibration, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<PathBuf>,
}

impl Condition {
    fn triangular(name: &str, t: f64) -> Self {
        Self {
            name: name.into(),
            profile: Profile::Triangular,
            p_max: 1.0,
            t_load: t,
            t_hold: 0.0,
            t_unload: t,
            n_samples: 100,
            experiment: None,
        }
    }

    pub fn schedule(&self) -> Result<LoadSchedule, Failure> {
        let s = LoadSchedule {
            profile: self.profile,
            p_max: self.p_max,
            t_load: self.t_load,
            t_hold: self.t_hold,
            t_unload: self.t_unload,
            n_samples: self.n_samples,
        };
        s.validate().map_err(|e| Failure::Config(format!("condition '{}': {e}", self.name)))?;
        Ok(s)
    }
}

/// Levels of the six design parameters, in design order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Levels {
    #[serde(rename = "E")]
    pub e: Vec<f64>,
    #[serde(rename = "C_s")]
    pub c_s: Vec<f64>,
    pub m_s: Vec<f64>,
    #[serde(rename = "C_t")]
    pub c_t: Vec<f64>,
    pub m_t: Vec<f64>,
    pub t_eps: Vec<f64>,
}

impl Levels {
    fn from_factors(levels: &FactorLevels) -> Self {
        let v: Vec<Vec<f64>> = levels.factors.iter().map(|f| f.levels.clone()).collect();
        Self {
            e: v[0].clone(),
            c_s: v[1].clone(),
            m_s: v[2].clone(),
            c_t: v[3].clone(),
            m_t: v[4].clone(),
            t_eps: v[5].clone(),
        }
    }

    fn named(&self) -> Vec<(&'static str, Vec<f64>)> {
        let cols = [&self.e, &self.c_s, &self.m_s, &self.c_t, &self.m_t, &self.t_eps];
        MaterialParams::DESIGN_NAMES.iter().zip(cols).map(|(n, l)| (*n, l.clone())).collect()
    }

    pub fn factor_levels(&self) -> Result<FactorLevels, Failure> {
        FactorLevels::new(self.named()).map_err(|e| Failure::Config(format!("design levels: {e}")))
    }

    pub fn space(&self) -> Result<FactorialSpace, Failure> {
        FactorialSpace::new(self.named()).map_err(|e| Failure::Config(format!("surrogate levels: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorMeasure {
    RmsRelative,
    Mse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sensitivity {
    pub array: String,
    /// Condition whose curve is compared across runs.
    pub condition: String,
    pub error: ErrorMeasure,
    /// Measured curve to compare against. Without it the comparison curve is
    /// the forward model at `[material]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<PathBuf>,
    pub levels: Levels,
}

impl Default for Sensitivity {
    fn default() -> Self {
        Self {
            array: "L27".into(),
            condition: "30s".into(),
            error: ErrorMeasure::RmsRelative,
            reference: None,
            levels: Levels::from_factors(&FactorLevels::burgers()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Surrogate {
    pub kernel: String,
    pub shape: f64,
    pub energy_threshold: f64,
    /// Relative snapshot noise amplitude; nonzero values need `seed`.
    pub noise: f64,
    /// Shape parameters to sweep against cell-centre validation points.
    pub shape_sweep: Vec<f64>,
    /// Training grid. Single-level factors are held fixed.
    pub levels: Levels,
}

impl Default for Surrogate {
    fn default() -> Self {
        Self {
            kernel: "mq".into(),
            shape: 0.5,
            energy_threshold: 0.99999,
            noise: 0.0,
            shape_sweep: Vec::new(),
            levels: Levels {
                e: vec![3.0, 3.25, 3.5],
                c_s: vec![0.02, 0.045, 0.07, 0.1],
                m_s: vec![0.15, 0.15 + 0.2 / 3.0, 0.15 + 0.4 / 3.0, 0.35],
                c_t: vec![0.15, 0.25, 0.35],
                m_t: vec![0.2, 0.8],
                t_eps: vec![0.25],
            },
        }
    }
}

impl Surrogate {
    pub fn kernel(&self) -> Result<Kernel, Failure> {
        self.kernel.parse().map_err(|e| Failure::Config(format!("[surrogate] kernel: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Calibration {
    /// Where trained surrogates are read from; defaults to the output directory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub surrogate_dir: Option<PathBuf>,
    pub ga: GaConfig,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            seed: None,
            material: Material::default(),
            forward: Forward::default(),
            conditions: [("30s", 30.0), ("45s", 45.0), ("60s", 60.0), ("240s", 240.0)]
                .iter()
                .map(|(n, t)| Condition::triangular(n, *t))
                .collect(),
            sensitivity: Sensitivity::default(),
            surrogate: Surrogate::default(),
            calibration: Calibration::default(),
            analysis: OliverPharrConfig::default(),
        }
    }
}

const SEED_NOTE: &str = "# Required by randomized stages (calibrate, noisy training).\n# seed = 1\n\n";

impl StudyConfig {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        let table: toml::Table = toml::from_str(text).map_err(|e| Failure::Config(e.to_string()))?;
        let ga_seed = table
            .get("calibration")
            .and_then(|c| c.get("ga"))
            .is_some_and(|g| g.get("rng_seed").is_some());
        if ga_seed {
            return Err(Failure::Config("set the GA seed with the top-level `seed`, not calibration.ga.rng_seed".into()));
        }
        let cfg: Self = table.try_into().map_err(|e: toml::de::Error| Failure::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Load `path`, resolving relative file references against its directory.
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            Failure::Config(m) => Failure::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for c in &mut cfg.conditions {
            if let Some(p) = c.experiment.as_mut() {
                resolve(p);
            }
        }
        if let Some(p) = cfg.sensitivity.reference.as_mut() {
            resolve(p);
        }
        if let Some(p) = cfg.calibration.surrogate_dir.as_mut() {
            resolve(p);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Failure> {
        if self.conditions.is_empty() {
            return Err(Failure::Config("at least one [[conditions]] entry is required".into()));
        }
        for (i, c) in self.conditions.iter().enumerate() {
            c.schedule()?;
            let safe = !c.name.is_empty() && c.name.chars().all(|ch| ch.is_ascii_alphanumeric() || "-_.".contains(ch));
            if !safe {
                return Err(Failure::Config(format!("condition name '{}' must be non-empty [A-Za-z0-9._-]", c.name)));
            }
            if self.conditions[..i].iter().any(|o| o.name == c.name) {
                return Err(Failure::Config(format!("duplicate condition name '{}'", c.name)));
            }
        }
        self.surrogate.kernel()?;
        self.surrogate.levels.space()?;
        self.sensitivity.levels.factor_levels()?;
        self.forward.config()?;
        let mut ga = self.calibration.ga.clone();
        ga.rng_seed = 0;
        ga.validate().map_err(|e| Failure::Config(format!("[calibration.ga] {e}")))?;
        Ok(())
    }

    pub fn condition(&self, name: &str) -> Result<&Condition, Failure> {
        self.conditions.iter().find(|c| c.name == name).ok_or_else(|| {
            let known: Vec<&str> = self.conditions.iter().map(|c| c.name.as_str()).collect();
            Failure::Config(format!("no condition named '{name}' (known: {})", known.join(", ")))
        })
    }

    pub fn require_seed(&self, stage: &str) -> Result<u64, Failure> {
        self.seed.ok_or_else(|| Failure::Config(format!("{stage} is randomized and needs `seed` in the config or --seed")))
    }

    fn table(&self) -> toml::Table {
        let mut table = toml::Table::try_from(self).expect("config serializes");
        if let Some(ga) = table.get_mut("calibration").and_then(|c| c.get_mut("ga")).and_then(|g| g.as_table_mut()) {
            ga.remove("rng_seed");
        }
        table
    }

    /// Canonical TOML of the effective configuration.
    pub fn to_toml(&self) -> String {
        toml::to_string(&self.table()).expect("config serializes")
    }

    /// Defaults as a commented, loadable file.
    pub fn defaults_text() -> String {
        format!("{SEED_NOTE}{}", Self::default().to_toml())
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }
}
