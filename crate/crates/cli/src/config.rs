//! Run configuration: one flat JSON document.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use prandtl4_core::datum::bump;
use prandtl4_core::diagnostics::DEFAULT_BETA;
use prandtl4_core::solver::{BlowupThreshold, SolverConfig, DEFAULT_BLOWUP_FACTOR};
use prandtl4_core::{Grid, KernelKind, Profile, QuadratureSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum DatumKind {
    Bump,
    File,
    Zero,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct RunConfig {
    /// Domain length `L`; per-command default when absent.
    pub length: Option<f64>,
    /// Grid points `N`; per-command default when absent.
    pub points: Option<usize>,

    /// Wavenumber truncation; derived from `absTol` when absent.
    pub s_max: Option<f64>,
    pub abs_tol: f64,
    pub panels_per_wavelength: usize,
    pub max_subdivisions: usize,

    pub dt_initial: f64,
    pub dt_min: f64,
    pub picard_iters: usize,
    pub picard_tol: f64,
    /// Absolute sup-norm ceiling; overrides `blowupFactor`.
    pub blowup_threshold: Option<f64>,
    /// Ceiling as a multiple of the datum sup norm; per-command default when absent.
    pub blowup_factor: Option<f64>,
    pub snapshot_factor: f64,
    pub max_steps: usize,
    pub advection_cfl: f64,
    pub compat_tol: f64,
    pub t_end: f64,

    pub datum: DatumKind,
    pub amplitude: f64,
    pub center: f64,
    pub half_width: f64,
    /// CSV with `y,a` columns on a uniform grid starting at 0.
    pub datum_path: Option<PathBuf>,

    pub beta: f64,
    pub output_dir: PathBuf,

    /// Sweep for `kernel-table`.
    pub t_list: Vec<f64>,
    pub x_list: Vec<f64>,
    /// Kernel second arguments for `kernel-table`; defaults to `xList`.
    pub y_list: Option<Vec<f64>>,
    pub m: usize,
    pub kind: String,

    /// Times for the smoothing-rate fits in `verify`.
    pub smoothing_times: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let solver = SolverConfig::default();
        let quad = QuadratureSpec::default();
        Self {
            length: None,
            points: None,
            s_max: None,
            abs_tol: quad.abs_tol(),
            panels_per_wavelength: quad.panels_per_wavelength(),
            max_subdivisions: quad.max_subdivisions(),
            dt_initial: solver.dt_initial,
            dt_min: solver.dt_min,
            picard_iters: solver.picard_iters,
            picard_tol: solver.picard_tol,
            blowup_threshold: None,
            blowup_factor: None,
            snapshot_factor: solver.snapshot_factor,
            max_steps: solver.max_steps,
            advection_cfl: solver.advection_cfl,
            compat_tol: solver.compat_tol,
            t_end: 1.0,
            datum: DatumKind::Bump,
            amplitude: 10.0,
            center: 20.0,
            half_width: 10.0,
            datum_path: None,
            beta: DEFAULT_BETA,
            output_dir: PathBuf::from("out"),
            t_list: vec![1e-4, 1e-3, 1e-2, 1e-1, 1.0],
            x_list: vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
            y_list: None,
            m: 0,
            kind: "K".into(),
            smoothing_times: vec![1e-4, 1.78e-4, 3.16e-4, 5.62e-4, 1e-3, 1.78e-3, 3.16e-3, 5.62e-3, 1e-2],
        }
    }
}

/// Defaults that differ between subcommands.
#[derive(Debug, Clone, Copy)]
pub struct CommandDefaults {
    pub length: f64,
    pub points: usize,
    pub blowup_factor: f64,
}

impl CommandDefaults {
    pub const STANDARD: Self = Self {
        length: 60.0,
        points: 1024,
        blowup_factor: DEFAULT_BLOWUP_FACTOR,
    };

    /// The long domain keeps the rightward-moving profile inside `[0, L]`
    /// through four doublings.
    pub const FIGURE1: Self = Self {
        length: 160.0,
        points: 1024,
        blowup_factor: 24.0,
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let cfg: Self = serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let positive = [
            ("absTol", self.abs_tol),
            ("dtInitial", self.dt_initial),
            ("dtMin", self.dt_min),
            ("picardTol", self.picard_tol),
            ("advectionCfl", self.advection_cfl),
            ("tEnd", self.t_end),
            ("halfWidth", self.half_width),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                bail!("{name} must be positive, got {v}");
            }
        }
        if self.compat_tol < 0.0 {
            bail!("compatTol must be nonnegative, got {}", self.compat_tol);
        }
        if self.datum == DatumKind::File && self.datum_path.is_none() {
            bail!("datum \"file\" needs datumPath");
        }
        self.kind()?;
        Ok(())
    }

    pub fn kind(&self) -> anyhow::Result<KernelKind> {
        self.kind.parse().map_err(|e| anyhow::anyhow!("{e}"))
    }

    pub fn quadrature(&self) -> anyhow::Result<QuadratureSpec> {
        let q = match self.s_max {
            Some(s) => {
                QuadratureSpec::with_truncation(s, self.panels_per_wavelength, self.abs_tol, self.max_subdivisions)
            }
            None => QuadratureSpec::new(self.abs_tol, self.panels_per_wavelength, self.max_subdivisions),
        };
        Ok(q?)
    }

    pub fn grid(&self, defaults: CommandDefaults) -> anyhow::Result<Grid> {
        Ok(Grid::new(
            self.length.unwrap_or(defaults.length),
            self.points.unwrap_or(defaults.points),
        )?)
    }

    pub fn solver(&self, defaults: CommandDefaults) -> SolverConfig {
        let blowup_threshold = match self.blowup_threshold {
            Some(v) => BlowupThreshold::Absolute(v),
            None => BlowupThreshold::Relative(self.blowup_factor.unwrap_or(defaults.blowup_factor)),
        };
        SolverConfig {
            dt_initial: self.dt_initial,
            dt_min: self.dt_min,
            picard_iters: self.picard_iters,
            picard_tol: self.picard_tol,
            blowup_threshold,
            snapshot_factor: self.snapshot_factor,
            max_steps: self.max_steps,
            advection_cfl: self.advection_cfl,
            compat_tol: self.compat_tol,
            beta: self.beta,
        }
    }

    /// The initial profile; a file datum brings its own grid.
    pub fn datum(&self, defaults: CommandDefaults) -> anyhow::Result<Profile> {
        match self.datum {
            DatumKind::Bump => Ok(bump(
                &self.grid(defaults)?,
                self.amplitude,
                self.center,
                self.half_width,
            )),
            DatumKind::Zero => Ok(self.grid(defaults)?.zeros()),
            DatumKind::File => read_datum(self.datum_path.as_deref().expect("validated")),
        }
    }
}

fn read_datum(path: &Path) -> anyhow::Result<Profile> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("opening datum {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .with_context(|| format!("datum file {} has no `{name}` column", path.display()))
    };
    let (iy, ia) = (col("y")?, col("a")?);
    let mut ys = Vec::new();
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record?;
        ys.push(record[iy].trim().parse::<f64>()?);
        values.push(record[ia].trim().parse::<f64>()?);
    }
    let n = ys.len();
    if n < 2 || ys[0] != 0.0 {
        bail!(
            "datum file {} must start at y = 0 and hold at least two rows",
            path.display()
        );
    }
    let grid = Grid::new(ys[n - 1], n)?;
    for (i, y) in ys.iter().enumerate() {
        if (y - grid.node(i)).abs() > 1e-9 * grid.length() {
            bail!(
                "datum file {} is not on a uniform grid (row {i}, y = {y})",
                path.display()
            );
        }
    }
    Ok(Profile::new(grid, values)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg: RunConfig = serde_json::from_str("{}").unwrap();
        cfg.validate().unwrap();
        let grid = cfg.grid(CommandDefaults::STANDARD).unwrap();
        assert_eq!((grid.length(), grid.points()), (60.0, 1024));
        let grid = cfg.grid(CommandDefaults::FIGURE1).unwrap();
        assert_eq!(grid.length(), 160.0);
        assert_eq!(
            cfg.solver(CommandDefaults::FIGURE1).blowup_threshold,
            BlowupThreshold::Relative(24.0)
        );
    }

    #[test]
    fn flat_keys_override_defaults() {
        let cfg: RunConfig =
            serde_json::from_str(r#"{"points": 256, "blowupThreshold": 50, "kind": "Kb", "datum": "zero"}"#).unwrap();
        assert_eq!(cfg.grid(CommandDefaults::STANDARD).unwrap().points(), 256);
        assert_eq!(
            cfg.solver(CommandDefaults::STANDARD).blowup_threshold,
            BlowupThreshold::Absolute(50.0)
        );
        assert_eq!(cfg.kind().unwrap(), KernelKind::Kb);
        assert_eq!(cfg.datum(CommandDefaults::STANDARD).unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn invalid_documents_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"nested": {"points": 3}}"#).is_err());
        let cfg: RunConfig = serde_json::from_str(r#"{"kind": "Kz"}"#).unwrap();
        assert!(cfg.validate().is_err());
        let cfg: RunConfig = serde_json::from_str(r#"{"datum": "file"}"#).unwrap();
        assert!(cfg.validate().is_err());
        let cfg: RunConfig = serde_json::from_str(r#"{"dtInitial": -1}"#).unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn datum_file_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        let grid = Grid::new(30.0, 128).unwrap();
        let a = bump(&grid, 2.0, 15.0, 5.0);
        let mut text = String::from("y,a\n");
        for (i, v) in a.values().iter().enumerate() {
            text += &format!("{:.16e},{v:.16e}\n", grid.node(i));
        }
        std::fs::write(&path, text).unwrap();
        let b = read_datum(&path).unwrap();
        assert_eq!(b.grid().points(), 128);
        assert!((b.grid().length() - 30.0).abs() < 1e-12);
        assert_eq!(a.values(), b.values());

        std::fs::write(&path, "y,a\n0,0\n1,0\n3,0\n").unwrap();
        assert!(read_datum(&path).is_err());
    }
}
