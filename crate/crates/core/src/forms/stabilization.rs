//! The face coefficient family `C11 = ζ h^α₁ / p^α₂`, `C22 = η h^β₁ / p^β₂`.

use std::fmt;

use crate::error::{Error, Result};
use crate::mesh::{Face, Mesh};
use crate::spaces::DofMap;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilizationParams {
    pub zeta: f64,
    pub eta: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
    /// The local DG case: no stress-jump penalty at all.
    pub c22_zero: bool,
    /// Skip the exponent range checks.
    pub allow_out_of_theory: bool,
}

/// Named flux families.
pub const FLUX_ALIASES: [&str; 8] = [
    "c11=hinv,c22=0",
    "c11=hinv,c22=1",
    "c11=hinv,c22=h",
    "c11=1,c22=1",
    "c11=1,c22=h",
    "c11=p,c22=1",
    "c11=p,c22=1/p",
    "c11=1,c22=1/p",
];

impl Default for StabilizationParams {
    fn default() -> Self {
        Self {
            zeta: 1.0,
            eta: 1.0,
            alpha1: -1.0,
            alpha2: 0.0,
            beta1: 1.0,
            beta2: 0.0,
            c22_zero: false,
            allow_out_of_theory: false,
        }
    }
}

impl StabilizationParams {
    /// Parses `c11=<hinv|1|p>,c22=<0|1|h|1/p>` with `ζ = η = 1`.
    pub fn from_alias(alias: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("unknown flux alias '{alias}'; known: {}", FLUX_ALIASES.join(" ")));
        let mut s = Self { alpha1: 0.0, beta1: 0.0, ..Self::default() };
        let mut seen = (false, false);
        for part in alias.split(',') {
            let (key, value) = part.trim().split_once('=').ok_or_else(bad)?;
            match (key.trim(), value.trim()) {
                ("c11", "hinv") => s.alpha1 = -1.0,
                ("c11", "1") => {}
                ("c11", "p") => s.alpha2 = -1.0,
                ("c22", "0") => {
                    s.eta = 0.0;
                    s.c22_zero = true;
                }
                ("c22", "1") => {}
                ("c22", "h") => s.beta1 = 1.0,
                ("c22", "1/p") => s.beta2 = 1.0,
                _ => return Err(bad()),
            }
            match key.trim() {
                "c11" => seen.0 = true,
                _ => seen.1 = true,
            }
        }
        if seen != (true, true) {
            return Err(bad());
        }
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.zeta, self.eta, self.alpha1, self.alpha2, self.beta1, self.beta2];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("stabilization parameters must be finite".into()));
        }
        if self.zeta <= 0.0 {
            return Err(Error::InvalidInput(format!("zeta must be positive, got {}", self.zeta)));
        }
        if self.eta < 0.0 {
            return Err(Error::InvalidInput(format!("eta must be nonnegative, got {}", self.eta)));
        }
        if self.allow_out_of_theory {
            return Ok(());
        }
        let check = |name: &str, v: f64, lo: f64, hi: f64| {
            if (lo..=hi).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!(
                    "{name}={v} outside [{lo}, {hi}]; use --allow-out-of-theory to run it anyway"
                )))
            }
        };
        check("alpha1", self.alpha1, -1.0, 0.0)?;
        check("alpha2", self.alpha2, -1.0, 0.0)?;
        check("beta1", self.beta1, 0.0, 1.0)?;
        check("beta2", self.beta2, 0.0, 1.0)
    }

    /// True when every stress-jump coefficient vanishes.
    pub fn is_ldg(&self) -> bool {
        self.c22_zero || self.eta == 0.0
    }

    fn local_c11(&self, h: f64, p: usize) -> f64 {
        h.powf(self.alpha1) / (p as f64).powf(self.alpha2)
    }

    fn local_c22(&self, h: f64, p: usize) -> f64 {
        h.powf(self.beta1) / (p as f64).powf(self.beta2)
    }
}

impl fmt::Display for StabilizationParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "zeta={} eta={} alpha=({}, {}) beta=({}, {})",
            self.zeta, self.eta, self.alpha1, self.alpha2, self.beta1, self.beta2
        )
    }
}

pub fn c11_on_face(face: &Face, mesh: &Mesh, dofmap: &DofMap, stab: &StabilizationParams) -> f64 {
    let side = |c: usize| stab.local_c11(mesh.cell_diameter(c), dofmap.p(c));
    let mut v = side(face.plus_cell);
    if let Some(m) = face.minus_cell {
        v = v.min(side(m));
    }
    stab.zeta * v
}

/// Only defined on interior faces.
pub fn c22_on_face(face: &Face, mesh: &Mesh, dofmap: &DofMap, stab: &StabilizationParams) -> Result<f64> {
    let Some(minus) = face.minus_cell else {
        return Err(Error::InvalidInput("C22 is only defined on interior faces".into()));
    };
    if stab.is_ldg() {
        return Ok(0.0);
    }
    let side = |c: usize| stab.local_c22(mesh.cell_diameter(c), dofmap.p(c));
    Ok(stab.eta * side(face.plus_cell).min(side(minus)))
}

/// `(C11, C22)` for every face, `C22 = 0` on the boundary.
pub fn face_coefficients(
    topo: &crate::mesh::FaceTopology,
    mesh: &Mesh,
    dofmap: &DofMap,
    stab: &StabilizationParams,
) -> Vec<(f64, f64)> {
    topo.faces
        .iter()
        .map(|f| {
            let c22 = if f.is_interior() { c22_on_face(f, mesh, dofmap, stab).unwrap_or(0.0) } else { 0.0 };
            (c11_on_face(f, mesh, dofmap, stab), c22)
        })
        .collect()
}
