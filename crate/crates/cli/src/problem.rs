//! JSON problem files: kernel, quadratic/affine components, starting point
//! and an optional Slater point.

use std::path::Path;

use multiprox::kernels::{NlpKernel, SeparableKernel};
use multiprox::{Component, Kernel, Map, Problem, Prox};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Smallest eigenvalue accepted for a quadratic form.
const PSD_FLOOR: f64 = -1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub kernel: KernelSpec,
    /// For `nlp` the first component is the objective and the rest are the
    /// constraints `f_i ≤ 0`; `separable` takes exactly one component.
    pub components: Vec<ComponentSpec>,
    pub x0: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xbar: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum KernelSpec {
    Max,
    Nlp {
        #[serde(default)]
        prox: ProxSpec,
    },
    Separable {
        #[serde(default)]
        prox: ProxSpec,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProxSpec {
    #[default]
    Zero,
    L1 {
        weight: f64,
    },
    Box {
        lo: f64,
        hi: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ComponentSpec {
    /// `xᵀQx + bᵀx + c`; `L` defaults to `2 λ_max(Q)`.
    Quadratic {
        q: Vec<Vec<f64>>,
        b: Vec<f64>,
        #[serde(default)]
        c: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lipschitz: Option<f64>,
    },
    Affine {
        b: Vec<f64>,
        #[serde(default)]
        c: f64,
    },
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

fn check_finite(what: &str, v: &[f64]) -> Result<(), CliError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(invalid(format!("{what} has a non-finite entry")))
    }
}

impl ProxSpec {
    fn to_prox(self) -> Result<Prox, CliError> {
        match self {
            ProxSpec::Zero => Ok(Prox::Zero),
            ProxSpec::L1 { weight } if weight.is_finite() && weight >= 0.0 => Ok(Prox::l1(weight)),
            ProxSpec::Box { lo, hi } if lo <= hi && !lo.is_nan() && !hi.is_nan() => Ok(Prox::boxed(lo, hi)),
            other => Err(invalid(format!("bad prox term {other:?}"))),
        }
    }
}

/// Symmetry, PSD and `L ≥ 2 λ_max(Q)` checks; returns the curvature to declare.
fn quadratic_curvature(i: usize, q: &[Vec<f64>], n: usize, declared: Option<f64>) -> Result<f64, CliError> {
    if q.len() != n || q.iter().any(|r| r.len() != n) {
        return Err(invalid(format!("component {i}: Q must be {n} × {n}")));
    }
    for row in q {
        check_finite(&format!("component {i} Q"), row)?;
    }
    let scale = q.iter().flatten().fold(1.0_f64, |a, v| a.max(v.abs()));
    for r in 0..n {
        for c in 0..r {
            if (q[r][c] - q[c][r]).abs() > 1e-12 * scale {
                return Err(invalid(format!("component {i}: Q is not symmetric at ({r}, {c})")));
            }
        }
    }
    let eig = DMatrix::from_fn(n, n, |r, c| q[r][c]).symmetric_eigenvalues();
    let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo < PSD_FLOOR {
        return Err(invalid(format!("component {i}: Q has eigenvalue {lo:e} < 0")));
    }
    let l = 2.0 * hi.max(0.0);
    match declared {
        None => Ok(l),
        Some(d) if d.is_finite() && d >= l * (1.0 - 1e-10) => Ok(d),
        Some(d) => Err(invalid(format!("component {i}: declared L = {d} is below 2 λ_max(Q) = {l}"))),
    }
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: ProblemFile = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        file.validate()?;
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files serialize")
    }

    pub fn to_json_compact(&self) -> String {
        serde_json::to_string(self).expect("problem files serialize")
    }

    /// Hex SHA-256 of the compact serialization, so formatting does not
    /// change the identity of a problem.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("problem files serialize");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.curvatures().map(|_| ())
    }

    /// Declared (or computed) `L_i` of every listed component.
    pub fn curvatures(&self) -> Result<Vec<f64>, CliError> {
        let n = self.dim();
        if n == 0 {
            return Err(invalid("x0 is empty"));
        }
        check_finite("x0", &self.x0)?;
        if let Some(xb) = &self.xbar {
            if xb.len() != n {
                return Err(invalid(format!("xbar has length {}, expected {n}", xb.len())));
            }
            check_finite("xbar", xb)?;
        }
        match (&self.kernel, self.components.len()) {
            (_, 0) => return Err(invalid("no components")),
            (KernelSpec::Separable { .. }, m) if m != 1 => {
                return Err(invalid(format!("separable kernel takes one component, got {m}")))
            }
            _ => {}
        }
        if let KernelSpec::Nlp { prox } | KernelSpec::Separable { prox } = &self.kernel {
            prox.to_prox()?;
        }
        self.components
            .iter()
            .enumerate()
            .map(|(i, c)| match c {
                ComponentSpec::Quadratic { q, b, c, lipschitz } => {
                    if b.len() != n {
                        return Err(invalid(format!("component {i}: b has length {}, expected {n}", b.len())));
                    }
                    check_finite(&format!("component {i} b"), b)?;
                    check_finite(&format!("component {i} c"), &[*c])?;
                    quadratic_curvature(i, q, n, *lipschitz)
                }
                ComponentSpec::Affine { b, c } => {
                    if b.len() != n {
                        return Err(invalid(format!("component {i}: b has length {}, expected {n}", b.len())));
                    }
                    check_finite(&format!("component {i} b"), b)?;
                    check_finite(&format!("component {i} c"), &[*c])?;
                    Ok(0.0)
                }
            })
            .collect()
    }

    /// The composite problem, with the identity block appended when the
    /// kernel carries a prox term.
    pub fn build(&self) -> Result<Problem, CliError> {
        let n = self.dim();
        let ls = self.curvatures()?;
        let comps: Vec<Component> = self
            .components
            .iter()
            .zip(&ls)
            .map(|(c, &l)| match c {
                ComponentSpec::Quadratic { q, b, c, .. } => {
                    Component::quadratic(q.iter().flatten().copied().collect(), b.clone(), *c, Some(l))
                }
                ComponentSpec::Affine { b, c } => Component::affine(b.clone(), *c),
            })
            .collect();
        let m = comps.len();
        let map = Map::new(n, comps).map_err(crate::classify)?;
        let (map, kernel) = match self.kernel {
            KernelSpec::Max => (map, Kernel::max(m)),
            KernelSpec::Nlp { prox } => {
                let prox = prox.to_prox()?;
                if prox.is_zero() {
                    (map, Kernel::Nlp(NlpKernel::new(m - 1, prox, 0)))
                } else {
                    (map.with_identity_block(), Kernel::Nlp(NlpKernel::new(m - 1, prox, n)))
                }
            }
            KernelSpec::Separable { prox } => (
                map.with_identity_block(),
                Kernel::Separable(SeparableKernel::new(n, prox.to_prox()?)),
            ),
        };
        Problem::new(map, kernel).map_err(crate::classify)
    }

    /// Pads per-listed-component values with zeros for the identity block.
    pub fn pad_to_problem(&self, problem: &Problem, values: &[f64]) -> Result<Vec<f64>, CliError> {
        if values.len() != self.components.len() {
            return Err(invalid(format!(
                "expected {} values (one per component), got {}",
                self.components.len(),
                values.len()
            )));
        }
        let mut out = values.to_vec();
        out.resize(problem.smooth().len(), 0.0);
        Ok(out)
    }

    pub fn kernel_name(&self) -> &'static str {
        match self.kernel {
            KernelSpec::Max => "max",
            KernelSpec::Nlp { .. } => "nlp",
            KernelSpec::Separable { .. } => "separable",
        }
    }
}

impl From<&multiprox_bench::MinMaxInstance> for ProblemFile {
    fn from(inst: &multiprox_bench::MinMaxInstance) -> Self {
        let n = inst.n;
        let mut components: Vec<ComponentSpec> = (0..inst.m - 1)
            .map(|i| ComponentSpec::Quadratic {
                q: inst.q[i].chunks(n).map(<[f64]>::to_vec).collect(),
                b: inst.b[i].clone(),
                c: inst.c[i],
                lipschitz: Some(inst.lipschitz[i]),
            })
            .collect();
        components.push(ComponentSpec::Affine {
            b: inst.b[inst.m - 1].clone(),
            c: inst.c[inst.m - 1],
        });
        ProblemFile {
            kernel: KernelSpec::Max,
            components,
            x0: inst.origin(),
            xbar: None,
        }
    }
}
