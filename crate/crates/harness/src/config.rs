//! Experiment configuration, read from a TOML file.
//!
//! See `configs/README.md` for the grammar.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::HarnessError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: Option<String>,
    #[serde(default)]
    pub seed: u64,
    pub domain: DomainSpec,
    #[serde(default)]
    pub norm: NormSpec,
    pub young: YoungSpec,
    #[serde(default)]
    pub bc: Bc,
    pub source: SourceSpec,
    pub mesh: MeshSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, rename = "assert")]
    pub asserts: Vec<AssertSpec>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Disk { r: f64 },
    Ellipse { a: f64, b: f64 },
    Superellipse { a: f64, b: f64, m: f64 },
    Stadium { r: f64, l: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NormSpec {
    #[default]
    Euclidean,
    Gauge {
        matrix: [[f64; 2]; 2],
    },
    PowerSum {
        p: f64,
        q: f64,
        #[serde(default = "one")]
        alpha: f64,
        #[serde(default = "one")]
        beta: f64,
    },
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum YoungSpec {
    Power {
        p: f64,
    },
    PowerSum {
        p: f64,
        q: f64,
        #[serde(default = "one")]
        alpha: f64,
        #[serde(default = "one")]
        beta: f64,
    },
    Tabulated {
        grid: Vec<f64>,
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Bc {
    #[default]
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Exact {
    /// `φ²` with `φ = 1 − (x/a)² − (y/b)²`.
    Bump,
    /// `φ / 4`.
    Paraboloid,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSpec {
    Constant {
        #[serde(default = "one")]
        value: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// `scale · |x − c|^(−exponent)` about the domain center.
    RadialPower {
        exponent: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// `scale · k² χ_{B(c, 1/k)}`.
    Concentrating {
        k: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    Manufactured {
        solution: Exact,
    },
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    pub sizes: Vec<f64>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub schedule: Option<Vec<f64>>,
    #[serde(default)]
    pub kappa: f64,
    pub tol: Option<f64>,
    #[serde(default)]
    pub linear: LinearSpec,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum LinearSpec {
    #[default]
    Auto,
    Direct,
    Cg,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: Parameter,
    pub values: Vec<f64>,
}

/// Parameters a sweep may vary.
#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
pub enum Parameter {
    #[serde(rename = "young.p")]
    YoungP,
    #[serde(rename = "source.scale")]
    SourceScale,
    #[serde(rename = "source.k")]
    SourceK,
    #[serde(rename = "source.exponent")]
    SourceExponent,
    #[serde(rename = "kappa")]
    Kappa,
}

impl Parameter {
    pub fn name(self) -> &'static str {
        match self {
            Parameter::YoungP => "young.p",
            Parameter::SourceScale => "source.scale",
            Parameter::SourceK => "source.k",
            Parameter::SourceExponent => "source.exponent",
            Parameter::Kappa => "kappa",
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    /// Column plotted against the sweep value; defaults to `grad_ratio`.
    pub plot: Option<String>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AssertSpec {
    /// `grad_sup` on the finest mesh of every instance is within `rel_tol` of `target`.
    GradSup { target: f64, rel_tol: f64 },
    /// The column decreases across meshes with fitted order at least `min_rate` in `h`.
    Convergence {
        #[serde(default = "grad_err")]
        column: String,
        min_rate: f64,
    },
    /// Every value of the column is finite and at most `max`.
    Bounded { column: String, max: f64 },
    /// Relative change of the column between the two finest meshes is at most `rel_tol`.
    Stable { column: String, rel_tol: f64 },
    /// On the finest mesh, the log-log slope of the column against the sweep value
    /// lies within `±max_abs_slope`.
    Trend { column: String, max_abs_slope: f64 },
}

fn one() -> f64 {
    1.0
}

fn grad_err() -> String {
    "grad_err".into()
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&text).map_err(|e| match e {
            HarnessError::Config(msg) => HarnessError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.mesh.sizes.is_empty() || self.mesh.sizes.iter().any(|h| !(*h > 0.0)) {
            return bad("mesh.sizes must be a non-empty list of positive numbers".into());
        }
        if let SourceSpec::Manufactured { solution } = &self.source {
            if !matches!(self.domain, DomainSpec::Disk { .. } | DomainSpec::Ellipse { .. }) {
                return bad("manufactured sources need a disk or ellipse domain".into());
            }
            if *solution == Exact::Paraboloid && self.bc == Bc::Neumann {
                return bad("the paraboloid solution does not satisfy the Neumann condition".into());
            }
        }
        if let Some(sw) = &self.sweep {
            if sw.values.is_empty() {
                return bad("sweep.values is empty".into());
            }
            let ok = match sw.parameter {
                Parameter::YoungP => matches!(self.young, YoungSpec::Power { .. }),
                Parameter::SourceScale => !matches!(self.source, SourceSpec::Manufactured { .. }),
                Parameter::SourceK => matches!(self.source, SourceSpec::Concentrating { .. }),
                Parameter::SourceExponent => matches!(self.source, SourceSpec::RadialPower { .. }),
                Parameter::Kappa => true,
            };
            if !ok {
                return bad(format!(
                    "sweep parameter {} does not apply to this configuration",
                    sw.parameter.name()
                ));
            }
            for v in &sw.values {
                self.with_parameter(sw.parameter, *v).validate_leaf()?;
            }
        } else {
            self.validate_leaf()?;
        }
        let trend = self.asserts.iter().any(|a| matches!(a, AssertSpec::Trend { .. }));
        if trend && self.sweep.is_none() {
            return bad("trend assertions need a sweep".into());
        }
        Ok(())
    }

    // checks that depend on swept values
    fn validate_leaf(&self) -> Result<(), HarnessError> {
        if self.solver.kappa != 0.0 && !matches!(self.young, YoungSpec::Power { .. }) {
            return Err(HarnessError::Config("kappa != 0 needs a power Young function".into()));
        }
        if self.solver.kappa != 0.0 && self.bc != Bc::Dirichlet {
            return Err(HarnessError::Config("kappa != 0 needs Dirichlet conditions".into()));
        }
        Ok(())
    }

    /// A copy of the configuration with one parameter replaced.
    pub fn with_parameter(&self, p: Parameter, v: f64) -> Self {
        let mut c = self.clone();
        match (p, &mut c.young, &mut c.source) {
            (Parameter::YoungP, YoungSpec::Power { p }, _) => *p = v,
            (Parameter::SourceScale, _, SourceSpec::Constant { scale, .. })
            | (Parameter::SourceScale, _, SourceSpec::RadialPower { scale, .. })
            | (Parameter::SourceScale, _, SourceSpec::Concentrating { scale, .. }) => *scale = v,
            (Parameter::SourceK, _, SourceSpec::Concentrating { k, .. }) => *k = v,
            (Parameter::SourceExponent, _, SourceSpec::RadialPower { exponent, .. }) => *exponent = v,
            (Parameter::Kappa, _, _) => c.solver.kappa = v,
            _ => {}
        }
        c
    }

    /// `(label, value, config)` for each sweep instance, in declared order.
    pub fn instances(&self) -> Vec<(Option<f64>, ExperimentConfig)> {
        match &self.sweep {
            None => vec![(None, self.clone())],
            Some(sw) => sw
                .values
                .iter()
                .map(|v| (Some(*v), self.with_parameter(sw.parameter, *v)))
                .collect(),
        }
    }

    pub fn sorted_sizes(&self) -> Vec<f64> {
        let mut s = self.mesh.sizes.clone();
        s.sort_by(|a, b| b.total_cmp(a));
        s.dedup();
        s
    }
}
