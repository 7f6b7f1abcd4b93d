//! Convergence studies: sequences of solves with error tables.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::forms::{assemble_system, StabilizationParams};
use crate::mesh::{
    build_face_topology, build_uniform_quad, build_uniform_tet, build_uniform_tri, read_mesh, refine_red, Mesh,
};
use crate::solve::solve_saddle;
use crate::spaces::build_dofmap;
use crate::verify::{case_by_name, error_energy, error_l2, observed_orders, ManufacturedCase};

#[derive(Clone, Debug, PartialEq)]
pub enum MeshSpec {
    TriUniform,
    QuadUniform,
    TetUniform,
    File(PathBuf),
}

impl std::str::FromStr for MeshSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tri-uniform" => Ok(Self::TriUniform),
            "quad-uniform" => Ok(Self::QuadUniform),
            "tet-uniform" => Ok(Self::TetUniform),
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(Self::File(PathBuf::from(p))),
                _ => Err(Error::InvalidInput(format!(
                    "unknown mesh '{s}' (tri-uniform, quad-uniform, tet-uniform, file:<path>)"
                ))),
            },
        }
    }
}

/// A level count, or explicit cells-per-axis values (refinement counts for
/// file meshes).
#[derive(Clone, Debug, PartialEq)]
pub enum Levels {
    Count(usize),
    List(Vec<usize>),
}

impl std::str::FromStr for Levels {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("levels must be a count or a comma-separated list, got '{s}'"));
        if s.contains(',') {
            let v: std::result::Result<Vec<usize>, _> = s.split(',').map(|p| p.trim().parse()).collect();
            return v.map(Self::List).map_err(|_| bad());
        }
        s.trim().parse().map(Self::Count).map_err(|_| bad())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Markdown,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "md" | "markdown" => Ok(Self::Markdown),
            _ => Err(Error::InvalidInput(format!("unknown format '{s}' (csv, md)"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub problem: String,
    pub mesh: MeshSpec,
    pub levels: Levels,
    pub k: usize,
    pub l: usize,
    pub stab: StabilizationParams,
    pub format: Format,
    /// Largest cells-per-axis allowed for 3D meshes.
    pub max_n_3d: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: "elas2d_poly".into(),
            mesh: MeshSpec::TriUniform,
            levels: Levels::Count(4),
            k: 1,
            l: 1,
            stab: StabilizationParams::default(),
            format: Format::Csv,
            max_n_3d: 8,
        }
    }
}

impl RunConfig {
    pub fn case(&self) -> Result<ManufacturedCase> {
        case_by_name(&self.problem)
    }

    /// Per-level mesh parameters: cells per axis, or refinements of a file mesh.
    pub fn level_values(&self) -> Vec<usize> {
        match &self.levels {
            Levels::Count(n) => match self.mesh {
                MeshSpec::File(_) => (0..*n).collect(),
                _ => (0..*n).map(|i| 2usize << i).collect(),
            },
            Levels::List(v) => v.clone(),
        }
    }

    /// Checks everything that can be checked without building meshes.
    pub fn validate(&self) -> Result<()> {
        let case = self.case()?;
        self.stab.validate()?;
        if self.k.abs_diff(self.l) > 1 {
            return Err(Error::DegreeMismatch { k: self.k, l: self.l });
        }
        let mesh_dim = match self.mesh {
            MeshSpec::TriUniform | MeshSpec::QuadUniform => Some(2),
            MeshSpec::TetUniform => Some(3),
            MeshSpec::File(_) => None,
        };
        if let Some(d) = mesh_dim {
            if d != case.dim {
                return Err(Error::InvalidInput(format!(
                    "problem {} is {}D but the mesh family is {d}D",
                    case.name, case.dim
                )));
            }
        }
        let values = self.level_values();
        if values.is_empty() {
            return Err(Error::InvalidInput("at least one level is required".into()));
        }
        if !matches!(self.mesh, MeshSpec::File(_)) {
            if values.contains(&0) {
                return Err(Error::InvalidInput("cells per axis must be at least 1".into()));
            }
            if case.dim == 3 {
                if let Some(&n) = values.iter().find(|&&n| n > self.max_n_3d) {
                    return Err(Error::InvalidInput(format!(
                        "3D level with n={n} exceeds the cap n={}; raise --max-level-3d to run it",
                        self.max_n_3d
                    )));
                }
            }
        }
        Ok(())
    }

    fn build_meshes(&self, case: &ManufacturedCase) -> Result<Vec<Mesh>> {
        let values = self.level_values();
        match &self.mesh {
            MeshSpec::File(path) => {
                let text = std::fs::read_to_string(path)?;
                let mut mesh = read_mesh(&text)?;
                if mesh.dim() != case.dim {
                    return Err(Error::InvalidInput(format!(
                        "mesh file is {}D but problem {} is {}D",
                        mesh.dim(),
                        case.name,
                        case.dim
                    )));
                }
                let max = values.iter().copied().max().unwrap_or(0);
                let mut all = Vec::with_capacity(max + 1);
                for _ in 0..max {
                    let next = refine_red(&mesh)?;
                    all.push(mesh);
                    mesh = next;
                }
                all.push(mesh);
                Ok(values.iter().map(|&r| all[r].clone()).collect())
            }
            spec => values
                .iter()
                .map(|&n| match spec {
                    MeshSpec::TriUniform => build_uniform_tri(n, case.domain),
                    MeshSpec::QuadUniform => build_uniform_quad(n, case.domain),
                    _ => build_uniform_tet(n, case.domain),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelResult {
    /// Cells per axis, refinement count, or degree for p-sweeps.
    pub level: usize,
    pub h: f64,
    pub dofs: usize,
    pub err_l2: f64,
    pub err_energy: f64,
    pub residual: f64,
    pub seconds: f64,
}

/// One solve on `mesh` with degrees `(k, l)`, returning both errors.
pub fn solve_level(
    mesh: &Mesh,
    case: &ManufacturedCase,
    k: usize,
    l: usize,
    stab: &StabilizationParams,
) -> Result<LevelResult> {
    let start = Instant::now();
    let topo = build_face_topology(mesh)?;
    let dofmap = build_dofmap(mesh, k, l)?;
    let system = assemble_system(mesh, &topo, &dofmap, &case.mat, stab, |x| case.f(x))?;
    let (coeffs, report) = solve_saddle(&system)?;
    Ok(LevelResult {
        level: 0,
        h: mesh.max_diameter(),
        dofs: dofmap.total_dofs(),
        err_l2: error_l2(mesh, &dofmap, &coeffs, case)?,
        err_energy: error_energy(mesh, &topo, &dofmap, &coeffs, case, stab)?,
        residual: report.relative_residual,
        seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum SweepKind {
    H,
    P,
}

#[derive(Clone, Debug)]
pub struct ErrorReport {
    pub kind: SweepKind,
    pub rows: Vec<LevelResult>,
    /// `order_l2[i]` relates rows `i - 1` and `i`; `None` on the first row.
    pub order_l2: Vec<Option<f64>>,
    pub order_energy: Vec<Option<f64>>,
}

impl ErrorReport {
    pub fn last_order_l2(&self) -> Option<f64> {
        self.order_l2.last().copied().flatten()
    }

    pub fn last_order_energy(&self) -> Option<f64> {
        self.order_energy.last().copied().flatten()
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.render_csv(),
            Format::Markdown => self.render_markdown(),
        }
    }

    fn cells(&self, i: usize) -> [String; 7] {
        let r = &self.rows[i];
        let ord = |o: Option<f64>| o.map(|v| format!("{v:.2}")).unwrap_or_default();
        let second = match self.kind {
            SweepKind::H => format!("{:.6e}", r.h),
            SweepKind::P => r.level.to_string(),
        };
        [
            i.to_string(),
            second,
            r.dofs.to_string(),
            format!("{:.6e}", r.err_l2),
            ord(self.order_l2[i]),
            format!("{:.6e}", r.err_energy),
            ord(self.order_energy[i]),
        ]
    }

    fn header(&self) -> [&'static str; 7] {
        let second = if self.kind == SweepKind::H { "h" } else { "k" };
        ["level", second, "dofs", "err_l2", "order_l2", "err_energy", "order_energy"]
    }

    pub fn render_csv(&self) -> String {
        let mut out = self.header().join(",");
        out.push('\n');
        for i in 0..self.rows.len() {
            out.push_str(&self.cells(i).join(","));
            out.push('\n');
        }
        out
    }

    pub fn render_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "| {} |", self.header().join(" | "));
        let _ = writeln!(out, "|{}", "---|".repeat(7));
        for i in 0..self.rows.len() {
            let _ = writeln!(out, "| {} |", self.cells(i).join(" | "));
        }
        out
    }
}

fn with_orders(kind: SweepKind, rows: Vec<LevelResult>) -> ErrorReport {
    let mut order_l2 = vec![None; rows.len()];
    let mut order_energy = vec![None; rows.len()];
    if kind == SweepKind::H {
        // Pairs that do not halve h get no order.
        for i in 1..rows.len() {
            let (a, b) = (&rows[i - 1], &rows[i]);
            if let Ok(o) = observed_orders(&[(a.h, a.err_l2), (b.h, b.err_l2)]) {
                order_l2[i] = o.first().copied();
            }
            if let Ok(o) = observed_orders(&[(a.h, a.err_energy), (b.h, b.err_energy)]) {
                order_energy[i] = o.first().copied();
            }
        }
    }
    ErrorReport { kind, rows, order_l2, order_energy }
}

/// Fixed degrees, one solve per level.
pub fn run_h_sweep(config: &RunConfig) -> Result<ErrorReport> {
    config.validate()?;
    let case = config.case()?;
    let meshes = config.build_meshes(&case)?;
    let values = config.level_values();
    let mut rows = Vec::with_capacity(meshes.len());
    for (mesh, &value) in meshes.iter().zip(&values) {
        let mut r = solve_level(mesh, &case, config.k, config.l, &config.stab)
            .map_err(|e| Error::AtLevel { level: value, source: Box::new(e) })?;
        r.level = value;
        rows.push(r);
    }
    Ok(with_orders(SweepKind::H, rows))
}

/// Fixed mesh, `k = l` over `degrees`; errors are reported scaled by
/// `p^{k+1}` (L²) and `p^s` (energy) with `p = k + 1`, where `s = k + 1/2`
/// for `C22 = O(1)` and `s = k` for `C22 = O(1/p)`.
pub fn run_p_sweep(config: &RunConfig, degrees: &[usize]) -> Result<ErrorReport> {
    let mut base = config.clone();
    if let Some(&k) = degrees.first() {
        base.k = k;
        base.l = k;
    }
    base.validate()?;
    let values = base.level_values();
    if values.len() != 1 {
        return Err(Error::InvalidInput(format!("a p-sweep runs on one mesh, got {} levels", values.len())));
    }
    if degrees.is_empty() {
        return Err(Error::InvalidInput("a p-sweep needs at least one degree".into()));
    }
    let case = base.case()?;
    let mesh = base.build_meshes(&case)?.remove(0);
    let mut rows = Vec::with_capacity(degrees.len());
    for &k in degrees {
        let mut r = solve_level(&mesh, &case, k, k, &base.stab)
            .map_err(|e| Error::AtLevel { level: k, source: Box::new(e) })?;
        let p = (k + 1) as f64;
        let s = if base.stab.beta2 > 0.0 { k as f64 } else { k as f64 + 0.5 };
        r.level = k;
        r.err_l2 *= p.powi(k as i32 + 1);
        r.err_energy *= p.powf(s);
        rows.push(r);
    }
    Ok(with_orders(SweepKind::P, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_specs() {
        assert_eq!("tri-uniform".parse::<MeshSpec>().unwrap(), MeshSpec::TriUniform);
        assert_eq!("file:a.mesh".parse::<MeshSpec>().unwrap(), MeshSpec::File("a.mesh".into()));
        assert!("file:".parse::<MeshSpec>().is_err());
        assert_eq!("3".parse::<Levels>().unwrap(), Levels::Count(3));
        assert_eq!("2,4, 8".parse::<Levels>().unwrap(), Levels::List(vec![2, 4, 8]));
        assert!("x".parse::<Levels>().is_err());
        assert_eq!("md".parse::<Format>().unwrap(), Format::Markdown);
    }

    #[test]
    fn level_values_and_caps() {
        let c = RunConfig { levels: Levels::Count(3), ..Default::default() };
        assert_eq!(c.level_values(), vec![2, 4, 8]);
        let c = RunConfig {
            problem: "elas3d_sine".into(),
            mesh: MeshSpec::TetUniform,
            levels: Levels::Count(4),
            ..Default::default()
        };
        assert!(c.validate().is_err());
        assert!(RunConfig { max_n_3d: 16, ..c.clone() }.validate().is_ok());
        assert!(RunConfig { mesh: MeshSpec::TriUniform, ..c }.validate().is_err());
        assert!(RunConfig { k: 0, l: 2, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn single_level_has_empty_orders() {
        let c = RunConfig { levels: Levels::List(vec![2]), ..Default::default() };
        let rep = run_h_sweep(&c).unwrap();
        assert_eq!(rep.rows.len(), 1);
        let csv = rep.render_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "level,h,dofs,err_l2,order_l2,err_energy,order_energy");
        assert!(lines[1].ends_with(','));
        assert_eq!(lines[1].split(',').nth(4), Some(""));
    }
}
