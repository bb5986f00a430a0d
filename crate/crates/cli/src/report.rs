use serde::Serialize;

use liepert_core::detsolve::{Ansatz, ClassifiedGenerator, Stability, SymmetryReport};
use liepert_core::jet::{Generator, OdeProblem};
use liepert_core::symexpr::{q, EpsSeries, Names, NormalForm, Q};

/// One result document per run. Expressions use the input grammar so the
/// file can be read back by `verify`.
#[derive(Serialize, Debug, Default)]
pub struct Report {
    pub command: String,
    pub kind: String,
    #[serde(skip_serializing_if = "ProblemInfo::is_empty")]
    pub problem: ProblemInfo,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub ansatz: Vec<AnsatzInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inputs: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub exact_basis: Vec<GeneratorEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub basis: Vec<GeneratorEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub series: Vec<SeriesEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stability: Option<StabilityInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub numeric: Option<serde_json::Value>,
    pub diagnostics: serde_json::Map<String, serde_json::Value>,
}

#[derive(Serialize, Debug, Default)]
pub struct ProblemInfo {
    pub name: String,
    pub independent: String,
    pub dependent: String,
    pub order: u32,
    pub f0: String,
    pub f1: String,
}

impl ProblemInfo {
    pub fn is_empty(&self) -> bool {
        self.order == 0
    }

    pub fn new(name: &str, p: &OdeProblem) -> Self {
        ProblemInfo {
            name: name.to_string(),
            independent: p.names.indep.clone(),
            dependent: p.names.dep.clone(),
            order: p.order,
            f0: p.f0.render(&p.names),
            f1: p.f1.render(&p.names),
        }
    }
}

#[derive(Serialize, Debug)]
pub struct RangeInfo {
    pub arg: String,
    pub min: i32,
    pub max: i32,
}

#[derive(Serialize, Debug)]
pub struct AnsatzInfo {
    pub role: String,
    pub ranges: Vec<RangeInfo>,
    pub kernels: Vec<String>,
    pub kernel_degree: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_degree: Option<i32>,
    pub size: usize,
}

impl AnsatzInfo {
    pub fn new(role: &str, a: &Ansatz, names: &Names) -> liepert_core::Result<Self> {
        Ok(AnsatzInfo {
            role: role.to_string(),
            ranges: a
                .ranges
                .iter()
                .map(|(s, lo, hi)| RangeInfo {
                    arg: names.render(s),
                    min: *lo,
                    max: *hi,
                })
                .collect(),
            kernels: a.kernels.iter().map(|k| k.render(names)).collect(),
            kernel_degree: a.kernel_degree,
            total_degree: a.total_degree,
            size: a.len()?,
        })
    }
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct GeneratorEntry {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi0: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta0: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi1: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta1: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta0: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta1: Option<String>,
    pub class: String,
}

impl GeneratorEntry {
    pub fn new(g: &Generator, class: &str, names: &Names) -> Self {
        let r = |s: &NormalForm| Some(s.render(names));
        let mut e = GeneratorEntry {
            xi0: None,
            eta0: None,
            xi1: None,
            eta1: None,
            zeta0: None,
            zeta1: None,
            class: class.to_string(),
        };
        match g {
            Generator::Point(p) => {
                e.xi0 = r(&p.xi.e0);
                e.eta0 = r(&p.eta.e0);
                e.xi1 = r(&p.xi.e1);
                e.eta1 = r(&p.eta.e1);
            }
            Generator::Evol(z) => {
                e.zeta0 = r(&z.zeta.e0);
                e.zeta1 = r(&z.zeta.e1);
            }
        }
        e
    }

    pub fn classified(g: &ClassifiedGenerator, names: &Names) -> Self {
        Self::new(&g.generator, g.class.name(), names)
    }
}

#[derive(Serialize, Debug, Clone)]
pub struct SeriesEntry {
    pub e0: String,
    pub e1: String,
    pub role: String,
}

impl SeriesEntry {
    pub fn new(s: &EpsSeries, role: &str, names: &Names) -> Self {
        SeriesEntry {
            e0: s.e0.render(names),
            e1: s.e1.render(names),
            role: role.to_string(),
        }
    }
}

#[derive(Serialize, Debug)]
pub struct StabilityInfo {
    pub stable_dim: usize,
    /// Linear forms in the exact-basis constants `C1..Cm`, each equal to zero.
    pub constraints: Vec<String>,
    pub stable: Vec<String>,
    pub unstable: Vec<String>,
}

fn linear_form(v: &[Q], prefix: &str) -> String {
    let terms: Vec<(usize, &Q)> = v.iter().enumerate().filter(|(_, c)| **c != q(0)).collect();
    let mut s = String::new();
    for (k, (i, c)) in terms.iter().enumerate() {
        let neg = **c < q(0);
        let mag = if neg { -(*c).clone() } else { (*c).clone() };
        if k == 0 {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        if mag != q(1) {
            s.push_str(&format!("{}*", mag));
        }
        s.push_str(&format!("{}{}", prefix, i + 1));
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

impl StabilityInfo {
    pub fn new(st: &Stability) -> Self {
        StabilityInfo {
            stable_dim: st.stable_dim(),
            constraints: st.constraints.iter().map(|v| linear_form(v, "C")).collect(),
            stable: st.stable.iter().map(|v| linear_form(v, "X")).collect(),
            unstable: st.unstable.iter().map(|v| linear_form(v, "X")).collect(),
        }
    }
}

pub fn symmetry_basis(r: &SymmetryReport, names: &Names) -> Vec<GeneratorEntry> {
    r.generators.iter().map(|g| GeneratorEntry::classified(g, names)).collect()
}

/// Short human-readable summary.
pub fn summary(r: &Report) -> String {
    let mut out = format!("{} {}\n", r.command, r.problem.name);
    out.push_str(&format!(
        "  {}^({}) = {} + eps*({})\n",
        r.problem.dependent, r.problem.order, r.problem.f0, r.problem.f1
    ));
    if let Some(d) = r.dimension {
        out.push_str(&format!("  dimension {}\n", d));
    }
    for g in &r.basis {
        let body = match (&g.zeta0, &g.xi0) {
            (Some(z0), _) => format!("({}) + eps*({}) d/dy", z0, g.zeta1.as_deref().unwrap_or("0")),
            (None, Some(x0)) => format!(
                "xi = {} + eps*({}), eta = {} + eps*({})",
                x0,
                g.xi1.as_deref().unwrap_or("0"),
                g.eta0.as_deref().unwrap_or("0"),
                g.eta1.as_deref().unwrap_or("0")
            ),
            _ => String::new(),
        };
        out.push_str(&format!("  [{}] {}\n", g.class, body));
    }
    for s in &r.series {
        out.push_str(&format!("  [{}] {} + eps*({})\n", s.role, s.e0, s.e1));
    }
    if let Some(st) = &r.stability {
        out.push_str(&format!("  stable dimension {}\n", st.stable_dim));
        for c in &st.constraints {
            out.push_str(&format!("  constraint {} = 0\n", c));
        }
    }
    if let Some(n) = &r.numeric {
        out.push_str(&format!("  {}\n", n));
    }
    out
}
