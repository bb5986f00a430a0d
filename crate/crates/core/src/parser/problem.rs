use std::collections::BTreeMap;

use super::expr::{parse_expr_at, ParseContext};
use crate::error::{Error, Result};
use crate::jet::OdeProblem;
use crate::detsolve::Ansatz;
use crate::symexpr::{Expr, Names, NormalForm, Symbol};

/// Exponent bounds and kernel choice for one undetermined function.
///
/// Keys other than the listed options name an argument (`x`, `y`, `y'`, ...)
/// and give its exponent range `lo..hi`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AnsatzSpec {
    pub ranges: Vec<(String, i32, i32)>,
    pub degree: Option<i32>,
    pub laurent: Option<(i32, i32)>,
    pub order: Option<u32>,
    pub kernels: Option<Vec<Expr>>,
    pub kernel_degree: Option<u32>,
    pub total: Option<i32>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifySpec {
    pub eps: Option<Vec<f64>>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub h: Option<f64>,
    pub xspan: Option<(f64, f64)>,
    pub solution: Option<Expr>,
    pub ics: Option<Vec<Expr>>,
}

#[derive(Clone, Debug)]
pub struct ProblemFile {
    pub name: String,
    pub problem: OdeProblem,
    pub kernels: Vec<Expr>,
    pub kernel_degree: u32,
    pub point: Option<AnsatzSpec>,
    pub local: Option<AnsatzSpec>,
    pub mu: Option<AnsatzSpec>,
    pub verify: VerifySpec,
    pub context: ParseContext,
}

struct Entry {
    value: String,
    line: usize,
    column: usize,
}

type Sections = BTreeMap<String, BTreeMap<String, Entry>>;

const SECTIONS: &[&str] = &[
    "problem",
    "ansatz.point",
    "ansatz.local",
    "ansatz.mu",
    "kernels",
    "verify",
];

fn split_sections(text: &str) -> Result<Sections> {
    let mut out: Sections = BTreeMap::new();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| Error::SyntaxError {
                line: line_no,
                column: raw.len(),
                message: "unterminated section header".into(),
            })?;
            let name = name.trim().to_string();
            if !SECTIONS.contains(&name.as_str()) {
                return Err(Error::ValidationError(format!(
                    "unknown section [{}] at line {}",
                    name, line_no
                )));
            }
            out.entry(name.clone()).or_default();
            current = Some(name);
            continue;
        }
        let eq = line.find('=').ok_or_else(|| Error::SyntaxError {
            line: line_no,
            column: line.len() - line.trim_start().len(),
            message: "expected `key = value`".into(),
        })?;
        let section = current.clone().ok_or_else(|| Error::SyntaxError {
            line: line_no,
            column: 0,
            message: "key outside of any section".into(),
        })?;
        let key = line[..eq].trim().to_string();
        let after = &line[eq + 1..];
        let value = after.trim().to_string();
        let column = eq + 1 + (after.len() - after.trim_start().len());
        out.get_mut(&section).unwrap().insert(
            key,
            Entry {
                value,
                line: line_no,
                column,
            },
        );
    }
    Ok(out)
}

fn expr_at(e: &Entry, ctx: &ParseContext) -> Result<Expr> {
    parse_expr_at(&e.value, ctx, e.line).map_err(|err| match err {
        Error::SyntaxError {
            line,
            column,
            message,
        } => Error::SyntaxError {
            line,
            column: column + e.column,
            message,
        },
        other => other,
    })
}

fn list_at(e: &Entry, ctx: &ParseContext) -> Result<Vec<Expr>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0usize;
    let chars: Vec<char> = e.value.chars().collect();
    for (i, c) in chars.iter().enumerate() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                let part: String = chars[start..i].iter().collect();
                out.push(piece(e, &part, start, ctx)?);
                start = i + 1;
            }
            _ => {}
        }
    }
    let part: String = chars[start..].iter().collect();
    if !part.trim().is_empty() {
        out.push(piece(e, &part, start, ctx)?);
    }
    Ok(out)
}

fn piece(e: &Entry, part: &str, offset: usize, ctx: &ParseContext) -> Result<Expr> {
    let lead = part.len() - part.trim_start().len();
    let sub = Entry {
        value: part.trim().to_string(),
        line: e.line,
        column: e.column + offset + lead,
    };
    expr_at(&sub, ctx)
}

fn parse_int<T: std::str::FromStr>(e: &Entry, key: &str) -> Result<T> {
    e.value
        .parse()
        .map_err(|_| Error::ValidationError(format!("`{}` must be an integer (line {})", key, e.line)))
}

fn parse_float(s: &str, key: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::ValidationError(format!("`{}` must be a number (line {})", key, line)))
}

/// `lo..hi` with possibly negative bounds.
pub fn parse_range(s: &str) -> Option<(i32, i32)> {
    let (a, b) = s.split_once("..")?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

fn ansatz_section(map: &BTreeMap<String, Entry>, ctx: &ParseContext) -> Result<AnsatzSpec> {
    let mut spec = AnsatzSpec::default();
    for (key, e) in map {
        match key.as_str() {
            "degree" => spec.degree = Some(parse_int(e, key)?),
            "order" => spec.order = Some(parse_int(e, key)?),
            "total" => spec.total = Some(parse_int(e, key)?),
            "kernel_degree" => spec.kernel_degree = Some(parse_int(e, key)?),
            "laurent" => {
                spec.laurent = Some(parse_range(&e.value).ok_or_else(|| {
                    Error::ValidationError(format!("bad range `{}` (line {})", e.value, e.line))
                })?)
            }
            "kernels" => {
                spec.kernels = Some(if e.value == "none" {
                    Vec::new()
                } else {
                    list_at(e, ctx)?
                })
            }
            _ => {
                let (lo, hi) = parse_range(&e.value).ok_or_else(|| {
                    Error::ValidationError(format!("bad range `{}` (line {})", e.value, e.line))
                })?;
                spec.ranges.push((key.clone(), lo, hi));
            }
        }
    }
    Ok(spec)
}

/// Parse just the `[problem]` section into an equation.
pub fn parse_problem(text: &str) -> Result<OdeProblem> {
    Ok(parse_problem_file(text)?.problem)
}

pub fn parse_problem_file(text: &str) -> Result<ProblemFile> {
    let sections = split_sections(text)?;
    let prob = sections
        .get("problem")
        .ok_or_else(|| Error::MissingKey("[problem]".into()))?;
    let get = |k: &str| prob.get(k);
    let indep = get("independent").map(|e| e.value.clone()).unwrap_or_else(|| "x".into());
    let dep = get("dependent").map(|e| e.value.clone()).unwrap_or_else(|| "y".into());
    let mut ctx = ParseContext::with_names(&indep, &dep);
    if let Some(e) = get("params") {
        ctx.params = e
            .value
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
    }
    let order: u32 = parse_int(
        get("order").ok_or_else(|| Error::MissingKey("order".into()))?,
        "order",
    )?;
    let f0e = expr_at(get("f0").ok_or_else(|| Error::MissingKey("f0".into()))?, &ctx)?;
    let f1e = match get("f1") {
        Some(e) => expr_at(e, &ctx)?,
        None => Expr::int(0),
    };
    let f0 = f0e.normalize()?;
    let f1 = f1e.normalize()?;
    let max_order = match get("max_order") {
        Some(e) => parse_int(e, "max_order")?,
        None => 2 * order,
    };
    let problem = OdeProblem {
        order,
        f0,
        f1,
        names: Names {
            indep,
            dep,
        },
        params: ctx.params.clone(),
        max_order,
    };
    problem.validate()?;

    let mut kernels = Vec::new();
    let mut kernel_degree = 1;
    if let Some(k) = sections.get("kernels") {
        if let Some(e) = k.get("atoms") {
            kernels = list_at(e, &ctx)?;
        }
        if let Some(e) = k.get("degree") {
            kernel_degree = parse_int(e, "degree")?;
        }
    }
    for k in &kernels {
        let nf: NormalForm = k.normalize()?;
        let single = nf.single_term().is_some_and(|(t, _)| t.kernels().len() == 1 && t.mono().is_empty());
        if !single {
            return Err(Error::ValidationError(format!("`{}` is not a kernel atom", k)));
        }
    }

    let point = sections.get("ansatz.point").map(|m| ansatz_section(m, &ctx)).transpose()?;
    let local = sections.get("ansatz.local").map(|m| ansatz_section(m, &ctx)).transpose()?;
    let mu = sections.get("ansatz.mu").map(|m| ansatz_section(m, &ctx)).transpose()?;

    let mut verify = VerifySpec::default();
    if let Some(v) = sections.get("verify") {
        for (key, e) in v {
            match key.as_str() {
                "eps" => {
                    verify.eps = Some(
                        e.value
                            .split(',')
                            .map(|s| parse_float(s, key, e.line))
                            .collect::<Result<_>>()?,
                    )
                }
                "samples" => verify.samples = Some(parse_int(e, key)?),
                "seed" => verify.seed = Some(parse_int(e, key)?),
                "h" => verify.h = Some(parse_float(&e.value, key, e.line)?),
                "xspan" => {
                    let (a, b) = e.value.split_once("..").ok_or_else(|| {
                        Error::ValidationError(format!("bad xspan `{}` (line {})", e.value, e.line))
                    })?;
                    verify.xspan = Some((parse_float(a, key, e.line)?, parse_float(b, key, e.line)?));
                }
                "solution" => verify.solution = Some(expr_at(e, &ctx)?),
                "ics" => verify.ics = Some(list_at(e, &ctx)?),
                other => {
                    return Err(Error::ValidationError(format!(
                        "unknown key `{}` in [verify] (line {})",
                        other, e.line
                    )))
                }
            }
        }
    }

    let name = get("name").map(|e| e.value.clone()).unwrap_or_default();
    Ok(ProblemFile {
        name,
        problem,
        kernels,
        kernel_degree,
        point,
        local,
        mu,
        verify,
        context: ctx,
    })
}

fn argument_symbol(name: &str, names: &Names) -> Result<Symbol> {
    if name == names.indep {
        return Ok(Symbol::X);
    }
    let base = name.trim_end_matches('\'');
    if base == names.dep {
        return Ok(Symbol::Jet((name.len() - base.len()) as u32));
    }
    Err(Error::UnknownSymbol(name.to_string()))
}

impl AnsatzSpec {
    /// Fields set in `over` replace those in `self`; explicit ranges are
    /// concatenated so later entries win.
    pub fn merged(&self, over: &AnsatzSpec) -> AnsatzSpec {
        let mut ranges = self.ranges.clone();
        ranges.extend(over.ranges.iter().cloned());
        AnsatzSpec {
            ranges,
            degree: over.degree.or(self.degree),
            laurent: over.laurent.or(self.laurent),
            order: over.order.or(self.order),
            kernels: over.kernels.clone().or_else(|| self.kernels.clone()),
            kernel_degree: over.kernel_degree.or(self.kernel_degree),
            total: over.total.or(self.total),
        }
    }

    /// Adjust `base`: `degree` rewrites the polynomial arguments (lower
    /// bound 0), `laurent` the ones already allowing negative powers, then
    /// explicit per-argument ranges are applied.
    pub fn apply(&self, base: Ansatz, names: &Names) -> Result<Ansatz> {
        let mut a = base;
        for r in a.ranges.iter_mut() {
            match (r.1 < 0, self.degree, self.laurent) {
                (false, Some(d), _) => r.2 = d,
                (true, _, Some((lo, hi))) => {
                    r.1 = lo;
                    r.2 = hi;
                }
                _ => {}
            }
        }
        for (name, lo, hi) in &self.ranges {
            a = a.with_range(argument_symbol(name, names)?, *lo, *hi);
        }
        if let Some(ks) = &self.kernels {
            a.kernels = ks.iter().map(Expr::normalize).collect::<Result<_>>()?;
        }
        if let Some(d) = self.kernel_degree {
            a.kernel_degree = d;
        }
        if let Some(t) = self.total {
            a.total_degree = Some(t);
        }
        Ok(a)
    }
}

impl ProblemFile {
    pub fn kernel_forms(&self) -> Result<Vec<NormalForm>> {
        self.kernels.iter().map(Expr::normalize).collect()
    }
}
