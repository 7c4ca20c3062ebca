//! Run configuration: JSON file merged with command-line overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use isoflat::{Grid, TurningAngle};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Where the input data comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Source {
    /// Circular cylinder, `x` the angle, `y` along the axis.
    Cylinder { radius: f64 },
    Plane,
    /// Surface of revolution with the given meridian turning angle.
    Meridian {
        theta: TurningAngle,
        #[serde(default = "one")]
        r_init: f64,
    },
    /// Isothermic patch JSON (`grid`, `u`, `k1`, `k2`).
    PatchFile { path: PathBuf },
    /// Calapso potential as a scalar-field CSV.
    KFile { path: PathBuf },
    /// `k = a + b x + c y + d x y`.
    KBilinear {
        a: f64,
        #[serde(default)]
        b: f64,
        #[serde(default)]
        c: f64,
        #[serde(default)]
        d: f64,
    },
    /// Conformal factor of the central sphere congruence of a meridian.
    KMeridian {
        theta: TurningAngle,
        #[serde(default = "one")]
        r_init: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl Source {
    pub fn is_patch(&self) -> bool {
        matches!(self, Self::Cylinder { .. } | Self::Plane | Self::Meridian { .. } | Self::PatchFile { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Cylinder { .. } => "cylinder",
            Self::Plane => "plane",
            Self::Meridian { .. } => "meridian",
            Self::PatchFile { .. } => "patch_file",
            Self::KFile { .. } => "k_file",
            Self::KBilinear { .. } => "k_bilinear",
            Self::KMeridian { .. } => "k_meridian",
        }
    }
}

fn default_tol_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub source: Source,
    #[serde(default)]
    pub grid: Option<Grid>,
    /// Spectral parameters. Patch commands default to `[1]`; the Calapso
    /// command uses the first entry, defaulting to `1/√2`.
    #[serde(default)]
    pub lambda: Option<Vec<f64>>,
    /// Integration constant of `u` for the Calapso route; defaults to
    /// `λ^2 - k(origin)^2`.
    #[serde(default)]
    pub u0: Option<f64>,
    /// Multiplies every tolerance.
    #[serde(default = "default_tol_scale")]
    pub tol_scale: f64,
    /// Per-check tolerance overrides, by check name.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

/// Overrides taken from the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub grid: Option<Grid>,
    pub lambda: Option<Vec<f64>>,
    pub tol_scale: Option<f64>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(source: Source) -> Self {
        Self {
            source,
            grid: None,
            lambda: None,
            u0: None,
            tol_scale: 1.0,
            tolerances: BTreeMap::new(),
            out: None,
        }
    }

    /// Reads a config file; relative data paths are taken relative to the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: Self = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let dir = path.parent().unwrap_or(Path::new(""));
        match &mut cfg.source {
            Source::PatchFile { path } | Source::KFile { path } if path.is_relative() => *path = dir.join(&*path),
            _ => {}
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, o: Overrides) {
        if o.grid.is_some() {
            self.grid = o.grid;
        }
        if o.lambda.is_some() {
            self.lambda = o.lambda;
        }
        if let Some(t) = o.tol_scale {
            self.tol_scale = t;
        }
        if o.out.is_some() {
            self.out = o.out;
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(g) = &self.grid {
            g.validate().map_err(|e| CliError::Config(format!("grid: {e}")))?;
        }
        let lambda = self.lambda.as_deref().unwrap_or_default();
        if self.lambda.is_some() && lambda.is_empty() {
            return Err(CliError::Config("lambda: list must not be empty".into()));
        }
        if let Some(l) = lambda.iter().find(|l| !l.is_finite()) {
            return Err(CliError::Config(format!("lambda: entry {l} is not finite")));
        }
        if !(self.tol_scale > 0.0 && self.tol_scale.is_finite()) {
            return Err(CliError::Config(format!("tol_scale: must be positive, got {}", self.tol_scale)));
        }
        for (name, t) in &self.tolerances {
            if !(*t > 0.0 && t.is_finite()) {
                return Err(CliError::Config(format!("tolerances.{name}: must be positive, got {t}")));
            }
        }
        match self.source {
            Source::Cylinder { radius } if !(radius > 0.0 && radius.is_finite()) => {
                Err(CliError::Config(format!("source.radius: must be positive, got {radius}")))
            }
            Source::Meridian { r_init, .. } | Source::KMeridian { r_init, .. } if !(r_init > 0.0 && r_init.is_finite()) => {
                Err(CliError::Config(format!("source.r_init: must be positive, got {r_init}")))
            }
            _ => Ok(()),
        }
    }

    /// Spectral parameters for the patch commands.
    pub fn lambdas(&self) -> Vec<f64> {
        self.lambda.clone().unwrap_or_else(|| vec![1.0])
    }

    /// Spectral parameter for the Calapso route.
    pub fn calapso_lambda(&self) -> f64 {
        self.lambda.as_ref().map_or(isoflat::SURFACE_LAMBDA, |l| l[0])
    }

    /// The grid, required for every source that does not carry its own.
    pub fn require_grid(&self) -> Result<Grid, CliError> {
        self.grid.ok_or_else(|| CliError::Config(format!("grid: required for source `{}`", self.source.name())))
    }

    /// Tolerance for a named check on `grid`, times `tol_scale`. An entry in
    /// `tolerances` replaces the default and is taken as absolute.
    pub fn tolerance(&self, name: &str, grid: &Grid) -> f64 {
        let base = match self.tolerances.get(name) {
            Some(t) => *t,
            None => default_tolerance(name).resolve(grid),
        };
        base * self.tol_scale
    }
}

/// Default tolerance of a check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    Absolute(f64),
    /// `c * h^2` with `h = max(hx, hy)`, for finite-difference quantities.
    PerH2(f64),
}

impl Tolerance {
    pub fn resolve(self, grid: &Grid) -> f64 {
        match self {
            Self::Absolute(t) => t,
            Self::PerH2(c) => c * grid.hx.max(grid.hy).powi(2),
        }
    }
}

use Tolerance::{Absolute, PerH2};

/// Default tolerances by check name.
pub const DEFAULT_TOLERANCES: &[(&str, Tolerance)] = &[
    ("gauss_codazzi", PerH2(2.0)),
    ("algebra_defect", Absolute(1e-12)),
    ("curved_flat", Absolute(1e-12)),
    ("zero_curvature", PerH2(1.0)),
    ("path_independence", PerH2(1.0)),
    ("orthogonality", Absolute(1e-10)),
    ("triple_pairing", Absolute(1e-10)),
    ("envelope", PerH2(2.0)),
    ("diagonality", PerH2(1.0)),
    ("cross_route", PerH2(0.1)),
    ("sym_closedness", PerH2(1.0)),
    ("first_form", PerH2(2.0)),
    ("second_form", PerH2(2.0)),
    ("dual_closedness", PerH2(1.0)),
    ("dual_first_form", PerH2(5.0)),
    ("dual_second_form", PerH2(2.0)),
    ("dual_involution", Absolute(1e-8)),
    ("dual_vs_sym", PerH2(1.0)),
    ("calapso_residual", Absolute(1e-8)),
    ("compatibility", Absolute(1e-8)),
    ("u_closed_form", Absolute(1e-10)),
    ("chart_conformality", PerH2(20.0)),
    ("revolution_match", PerH2(0.1)),
];

pub fn default_tolerance(name: &str) -> Tolerance {
    DEFAULT_TOLERANCES.iter().find(|(n, _)| *n == name).map_or(Absolute(1e-8), |(_, t)| *t)
}

/// Parses `nx,ny,hx,hy[,x0,y0]`.
pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 && parts.len() != 6 {
        return Err(format!("expected nx,ny,hx,hy[,x0,y0], got `{s}`"));
    }
    let int = |k: usize, name: &str| parts[k].parse::<usize>().map_err(|_| format!("{name}: not an integer: `{}`", parts[k]));
    let real = |k: usize, name: &str| parts[k].parse::<f64>().map_err(|_| format!("{name}: not a number: `{}`", parts[k]));
    let (x0, y0) = if parts.len() == 6 { (real(4, "x0")?, real(5, "y0")?) } else { (0.0, 0.0) };
    Grid::new(int(0, "nx")?, int(1, "ny")?, real(2, "hx")?, real(3, "hy")?, x0, y0).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spec() {
        let g = parse_grid("33,17,0.1,0.2").unwrap();
        assert_eq!((g.nx, g.ny, g.hx, g.hy, g.x0, g.y0), (33, 17, 0.1, 0.2, 0.0, 0.0));
        let g = parse_grid("9,9,0.5,0.5,-1,2").unwrap();
        assert_eq!((g.x0, g.y0), (-1.0, 2.0));
        assert!(parse_grid("9,9,0.5").is_err());
        assert!(parse_grid("9,x,0.5,0.5").is_err());
        assert!(parse_grid("0,0,0.5,0.5").is_err());
        assert!(parse_grid("9,9,-0.5,0.5").is_err());
    }

    #[test]
    fn config_json() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"source": {"kind": "meridian", "theta": {"kind": "sine", "base": 1.5707963267948966, "amplitude": 0.3}},
                "grid": {"nx": 33, "ny": 33, "hx": 0.1, "hy": 0.1}, "lambda": [0, 1]}"#,
        )
        .unwrap();
        assert!(cfg.source.is_patch());
        assert_eq!(cfg.lambdas(), vec![0.0, 1.0]);
        cfg.validate().unwrap();
        assert!(serde_json::from_str::<RunConfig>(r#"{"source": {"kind": "cylinder", "radius": 1}, "bogus": 1}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"source": {"kind": "cylinder", "radius": 1}, "lambda": ["a"]}"#).is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = RunConfig::new(Source::Cylinder { radius: 1.0 });
        cfg.validate().unwrap();
        assert!(cfg.require_grid().is_err());
        assert_eq!(cfg.lambdas(), vec![1.0]);
        assert_eq!(cfg.calapso_lambda(), isoflat::SURFACE_LAMBDA);
        cfg.lambda = Some(Vec::new());
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::new(Source::Cylinder { radius: -1.0 });
        assert!(cfg.validate().is_err());
        cfg.source = Source::Plane;
        cfg.tol_scale = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn tolerance_lookup() {
        let g = Grid::new(9, 9, 0.5, 0.25, 0.0, 0.0).unwrap();
        let mut cfg = RunConfig::new(Source::Plane);
        assert_eq!(cfg.tolerance("curved_flat", &g), 1e-12);
        assert_eq!(cfg.tolerance("zero_curvature", &g), 0.25);
        cfg.tol_scale = 10.0;
        cfg.tolerances.insert("curved_flat".into(), 1e-6);
        assert!((cfg.tolerance("curved_flat", &g) - 1e-5).abs() < 1e-20);
        assert!((cfg.tolerance("unknown", &g) - 1e-7).abs() < 1e-20);
    }
}
