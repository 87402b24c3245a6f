//! Declarative experiment configuration: one TOML document per run.
//! Unknown keys are rejected, tolerances must be positive, and referenced
//! files must exist at load time.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use dynloc_core::action::{ActionSpec, EdgeStiffness, Path as CorePath, Potential};
use dynloc_core::field::FieldConfig;
use dynloc_core::mesh::Mesh;
use dynloc_core::metric::SuperMetric;
use dynloc_core::region::RegionDecomposition;

use crate::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Annulus,
    CircleWave,
    NonlocalSource,
    Localization,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnulusSection {
    #[serde(default = "default_n_r")]
    pub n_r: usize,
    #[serde(default = "default_n_theta")]
    pub n_theta: usize,
}

fn default_n_r() -> usize {
    33
}

fn default_n_theta() -> usize {
    128
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleWaveSection {
    /// `[num, den]` for the exact ratio `[O]/[M]`.
    pub ratio: Option<[u64; 2]>,
    #[serde(default)]
    pub irrational: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlocalSourceSection {
    #[serde(default = "default_amplitudes")]
    pub amplitudes: Vec<f64>,
}

fn default_amplitudes() -> Vec<f64> {
    vec![0.0, 0.5, 1.0]
}

/// Endpoint profile for declarative localization runs.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
#[derive(Default)]
pub enum ProfileSpec {
    #[default]
    Zero,
    Constant {
        value: f64,
    },
    /// `amplitude · sin(wavenumber · θ)`.
    Sine {
        amplitude: f64,
        wavenumber: f64,
    },
}

impl ProfileSpec {
    pub fn build(&self, mesh: &Arc<Mesh>) -> FieldConfig {
        match self {
            ProfileSpec::Zero => FieldConfig::zeros(mesh.clone()),
            ProfileSpec::Constant { value } => FieldConfig::constant(mesh.clone(), *value),
            ProfileSpec::Sine {
                amplitude,
                wavenumber,
            } => FieldConfig::from_fn(mesh.clone(), |_, p| amplitude * (wavenumber * p[0]).sin()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    None,
    EdgeQuadratic,
    SiteQuadratic,
    InverseLaplacian,
    KernelCsv,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalizationSection {
    #[serde(default = "default_n_sites")]
    pub n_sites: usize,
    #[serde(default = "default_circumference")]
    pub circumference: f64,
    /// O is the arc `θ < 2π·arc_fraction`.
    #[serde(default = "default_arc_fraction")]
    pub arc_fraction: f64,
    #[serde(default = "default_time_steps")]
    pub time_steps: usize,
    #[serde(default = "default_total_time")]
    pub total_time: f64,
    pub potential: PotentialKind,
    #[serde(default = "one")]
    pub stiffness: f64,
    #[serde(default)]
    pub cut_at_boundary: bool,
    #[serde(default = "one")]
    pub site_coefficient: f64,
    pub kernel_csv: Option<PathBuf>,
    #[serde(default)]
    pub source_amplitude: f64,
    /// Half-open site-id window carrying the source.
    pub source_window: Option<[usize; 2]>,
    /// Localization threshold; omitted means 10x the calibrated
    /// discretization error.
    pub epsilon: Option<f64>,
    #[serde(default = "default_tol")]
    pub solver_tol: f64,
    #[serde(default)]
    pub initial: ProfileSpec,
    #[serde(default, rename = "final")]
    pub final_profile: ProfileSpec,
    /// Extra eigenmode-perturbed seeds per enumeration.
    #[serde(default)]
    pub mode_seeds: usize,
    #[serde(default = "half")]
    pub seed_amplitude: f64,
}

fn default_n_sites() -> usize {
    64
}

fn default_circumference() -> f64 {
    2.0 * std::f64::consts::PI
}

fn default_arc_fraction() -> f64 {
    0.25
}

fn default_time_steps() -> usize {
    64
}

fn default_total_time() -> f64 {
    1.0
}

fn default_tol() -> f64 {
    1e-10
}

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub name: Option<String>,
    #[serde(default)]
    pub output: OutputSection,
    pub annulus: Option<AnnulusSection>,
    pub circle_wave: Option<CircleWaveSection>,
    pub nonlocal_source: Option<NonlocalSourceSection>,
    pub localization: Option<LocalizationSection>,
}

impl ExperimentConfig {
    /// Parse and validate a config document. Parse errors carry the TOML
    /// line/column.
    pub fn load(path: &Path) -> Result<ExperimentConfig, LabError> {
        let body = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        let cfg: ExperimentConfig = toml::from_str(&body)
            .map_err(|e| LabError::Parse(format!("{}: {e}", path.display())))?;
        cfg.validate(path.parent().unwrap_or(Path::new(".")))?;
        Ok(cfg)
    }

    pub fn validate(&self, base_dir: &Path) -> Result<(), LabError> {
        match self.kind {
            ExperimentKind::Annulus => {
                let s = self
                    .annulus
                    .as_ref()
                    .ok_or_else(|| LabError::Parse("missing [annulus] section".into()))?;
                if s.n_r < 17 || s.n_theta < 64 {
                    return Err(LabError::Config(format!(
                        "annulus grid must be at least (17, 64), got ({}, {})",
                        s.n_r, s.n_theta
                    )));
                }
            }
            ExperimentKind::CircleWave => {
                let s = self
                    .circle_wave
                    .as_ref()
                    .ok_or_else(|| LabError::Parse("missing [circle_wave] section".into()))?;
                match (s.ratio, s.irrational) {
                    (Some(_), false) | (None, true) => {}
                    _ => {
                        return Err(LabError::Config(
                            "circle_wave needs exactly one of `ratio` or `irrational = true`"
                                .into(),
                        ))
                    }
                }
                if let Some([num, den]) = s.ratio {
                    if num == 0 || num >= den {
                        return Err(LabError::Config(format!(
                            "ratio must satisfy 0 < num/den < 1, got {num}/{den}"
                        )));
                    }
                }
            }
            ExperimentKind::NonlocalSource => {
                let s = self
                    .nonlocal_source
                    .as_ref()
                    .ok_or_else(|| LabError::Parse("missing [nonlocal_source] section".into()))?;
                if s.amplitudes.is_empty() {
                    return Err(LabError::Config("amplitudes must be nonempty".into()));
                }
                if s.amplitudes.iter().any(|a| !a.is_finite() || *a < 0.0) {
                    return Err(LabError::Config(
                        "amplitudes must be finite and >= 0".into(),
                    ));
                }
            }
            ExperimentKind::Localization => {
                let s = self
                    .localization
                    .as_ref()
                    .ok_or_else(|| LabError::Parse("missing [localization] section".into()))?;
                if !(s.solver_tol > 0.0) {
                    return Err(LabError::Config("solver_tol must be positive".into()));
                }
                if let Some(eps) = s.epsilon {
                    if !(eps > 0.0) {
                        return Err(LabError::Config("epsilon must be positive".into()));
                    }
                }
                if !(s.arc_fraction > 0.0 && s.arc_fraction < 1.0) {
                    return Err(LabError::Config("arc_fraction must be in (0, 1)".into()));
                }
                if s.potential == PotentialKind::KernelCsv {
                    let rel = s.kernel_csv.as_ref().ok_or_else(|| {
                        LabError::Config("potential = \"kernel_csv\" needs kernel_csv".into())
                    })?;
                    let path = base_dir.join(rel);
                    if !path.exists() {
                        return Err(LabError::Config(format!(
                            "kernel file not found: {}",
                            path.display()
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Everything a declarative localization run needs, assembled from its
/// config section.
pub struct LocalizationSetup {
    pub spec: ActionSpec,
    pub dec: RegionDecomposition,
    pub phi_i: FieldConfig,
    pub phi_f: FieldConfig,
    pub seeds_global: Vec<CorePath>,
    pub seeds_intrinsic: Vec<CorePath>,
    pub epsilon: Option<f64>,
    pub solver_tol: f64,
}

pub fn build_localization(
    s: &LocalizationSection,
    base_dir: &Path,
) -> Result<LocalizationSetup, LabError> {
    let mesh = Arc::new(Mesh::circle(s.n_sites, s.circumference)?);
    let split_angle = 2.0 * std::f64::consts::PI * s.arc_fraction;
    let dec = RegionDecomposition::decompose(mesh.clone(), |p| p[0] < split_angle)?;
    let potential = match s.potential {
        PotentialKind::None => Potential::None,
        PotentialKind::EdgeQuadratic => {
            let st = EdgeStiffness::uniform(&mesh, s.stiffness);
            let st = if s.cut_at_boundary {
                st.cut_at_sites(&mesh, dec.boundary())
            } else {
                st
            };
            Potential::EdgeQuadratic(st)
        }
        PotentialKind::SiteQuadratic => {
            Potential::site_quadratic(vec![s.site_coefficient; s.n_sites])
        }
        PotentialKind::InverseLaplacian => {
            Potential::Nonlocal(Potential::inverse_laplacian_kernel(&mesh))
        }
        PotentialKind::KernelCsv => {
            let path = base_dir.join(s.kernel_csv.as_ref().expect("validated"));
            let mat = crate::report::read_matrix_csv(&path)?;
            let n = mat.rows.len();
            if n != s.n_sites {
                return Err(LabError::Config(format!(
                    "kernel is {n}x{n} but the mesh has {} sites",
                    s.n_sites
                )));
            }
            let mut kernel = nalgebra_matrix(n);
            for (i, row) in mat.rows.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    kernel[(i, j)] = *v;
                }
            }
            Potential::Nonlocal(kernel)
        }
    };
    let mut spec = ActionSpec::new(
        mesh.clone(),
        SuperMetric::FlatL2,
        potential,
        s.time_steps,
        s.total_time,
    )?;
    if s.source_amplitude != 0.0 {
        let [lo, hi] = s
            .source_window
            .ok_or_else(|| LabError::Config("source_amplitude needs a source_window".into()))?;
        if hi > s.n_sites || lo >= hi {
            return Err(LabError::Config(format!(
                "source_window [{lo}, {hi}) out of range"
            )));
        }
        let j: Vec<f64> = (0..s.n_sites)
            .map(|x| {
                if (lo..hi).contains(&x) {
                    s.source_amplitude
                } else {
                    0.0
                }
            })
            .collect();
        spec = spec.with_source(j)?;
    }
    let phi_i = s.initial.build(&mesh);
    let phi_f = s.final_profile.build(&mesh);
    let line = CorePath::linear(&phi_i, &phi_f, s.time_steps, s.total_time)?;
    let mut seeds_global = vec![line.clone()];
    let pi = dec.project_o(&phi_i)?;
    let pf = dec.project_o(&phi_f)?;
    let iline = CorePath::linear(&pi, &pf, s.time_steps, s.total_time)?;
    let mut seeds_intrinsic = vec![iline.clone()];
    if s.mode_seeds > 0 {
        let gbasis = dynloc_core::modes::eigenmodes(
            &mesh,
            dynloc_core::modes::BoundaryKind::Periodic,
            s.mode_seeds + 1,
        )?;
        for v in gbasis.eigenvectors.iter().skip(1) {
            seeds_global.push(dynloc_core::solve::seeds::mode_perturbed(
                &line,
                v,
                s.seed_amplitude,
            )?);
        }
        let sub = dec.subregion(dynloc_core::region::Side::O).mesh();
        let ibasis = dynloc_core::modes::eigenmodes(
            sub,
            dynloc_core::modes::BoundaryKind::Dirichlet,
            s.mode_seeds.min(sub.n_free()),
        )?;
        for v in &ibasis.eigenvectors {
            seeds_intrinsic.push(dynloc_core::solve::seeds::mode_perturbed(
                &iline,
                v,
                s.seed_amplitude,
            )?);
        }
    }
    Ok(LocalizationSetup {
        spec,
        dec,
        phi_i,
        phi_f,
        seeds_global,
        seeds_intrinsic,
        epsilon: s.epsilon,
        solver_tol: s.solver_tol,
    })
}

fn nalgebra_matrix(n: usize) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::zeros(n, n)
}
