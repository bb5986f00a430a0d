use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use thiserror::Error;

use liepert_core::detsolve::{
    approx_symmetries_with, approximate_invariant, default_local, default_mu, default_phi, determining_residual,
    exact_symmetries, first_integral, first_integral_residual, higher_order_correction, integrating_factor,
    jet_args, Ansatz, GeneratorAnsatz, SeriesSpace,
};
use liepert_core::jet::{apply_generator, EvolGenerator, Generator, JetSpace, OdeProblem, OnSolution, PointGenerator};
use liepert_core::numverify::{
    circle_level, compare_solution, lie_flow, perturbed_circle_flow, rk4, ode_rhs, symmetry_residual,
    transform_curve, write_csv, FlowMode, VectorField, DEFAULT_H,
};
use liepert_core::parser::{parse_expr_with, parse_problem_file, AnsatzSpec, ProblemFile};
use liepert_core::symexpr::{eps_truncate, EpsSeries, NormalForm, Symbol};
use liepert_core::Error;

use crate::report::{
    summary, symmetry_basis, AnsatzInfo, GeneratorEntry, ProblemInfo, Report, SeriesEntry, StabilityInfo,
};
use crate::{AnsatzFlags, Command, Mode, NumericFlags, OutFlags, PlotKind};

const MIN_SLOPE: f64 = 1.9;
const DEFAULT_EPS: [f64; 3] = [1e-2, 1e-3, 1e-4];
const DEFAULT_SAMPLES: usize = 50;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] Error),
    #[error("invalid argument: {0}")]
    Usage(String),
    #[error("malformed result file: {0}")]
    ResultFile(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_split_failure() => 2,
            CliError::Core(
                Error::Inconsistent(_) | Error::ZeroCharacteristic | Error::NotASymmetry | Error::ZeroGradient,
            ) => 3,
            CliError::Core(Error::InconsistentICs(_) | Error::NonFiniteState(_)) => 4,
            CliError::Verification(_) => 4,
            _ => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(io_err(path))
}

struct Loaded {
    pf: ProblemFile,
    stem: String,
}

impl Loaded {
    fn open(path: &Path) -> Result<Self> {
        let pf = parse_problem_file(&read(path)?)?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "problem".into());
        Ok(Loaded { pf, stem })
    }

    fn problem(&self) -> &OdeProblem {
        &self.pf.problem
    }

    fn names(&self) -> &liepert_core::symexpr::Names {
        &self.pf.problem.names
    }

    fn nf(&self, text: &str) -> Result<NormalForm> {
        Ok(parse_expr_with(text, &self.pf.context)?.normalize()?)
    }

    fn series(&self, text: &str) -> Result<EpsSeries> {
        Ok(eps_truncate(&self.nf(text)?)?)
    }

    fn info(&self) -> ProblemInfo {
        let name = if self.pf.name.is_empty() { &self.stem } else { &self.pf.name };
        ProblemInfo::new(name, self.problem())
    }

    fn kernels(&self) -> Result<Vec<NormalForm>> {
        Ok(self.pf.kernel_forms()?)
    }

    /// File section, then command-line overrides, applied to `base`.
    fn ansatz(&self, section: Option<&AnsatzSpec>, flags: &AnsatzFlags, base: Ansatz) -> Result<Ansatz> {
        let mut base = base;
        base.kernel_degree = self.pf.kernel_degree;
        let spec = section.cloned().unwrap_or_default().merged(&self.flag_spec(flags)?);
        Ok(spec.apply(base, self.names())?)
    }

    fn flag_spec(&self, flags: &AnsatzFlags) -> Result<AnsatzSpec> {
        let laurent = match (flags.laurent_min, flags.laurent_max) {
            (None, None) => None,
            (lo, hi) => Some((lo.unwrap_or(-2), hi.unwrap_or(3))),
        };
        let kernels = match flags.kernels.as_deref() {
            None => None,
            Some("none") => Some(Vec::new()),
            Some(list) => Some(
                split_list(list)
                    .iter()
                    .map(|k| parse_expr_with(k, &self.pf.context))
                    .collect::<std::result::Result<_, _>>()?,
            ),
        };
        Ok(AnsatzSpec {
            degree: flags.ansatz_degree,
            laurent,
            kernels,
            order: flags.order,
            ..Default::default()
        })
    }

    fn report(&self, command: &str, kind: &str) -> Report {
        Report {
            command: command.to_string(),
            kind: kind.to_string(),
            problem: self.info(),
            ..Default::default()
        }
    }
}

/// Split on commas outside parentheses.
fn split_list(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

fn floats(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("{} `{}` is not a number", what, t.trim())))
        })
        .collect()
}

fn emit(report: &Report, stem: &str, out: &OutFlags) -> Result<()> {
    let text = serde_json::to_string_pretty(report).expect("report serializes") + "\n";
    match &out.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
            let path = dir.join(format!("{}.{}.json", stem, report.command));
            fs::write(&path, text).map_err(io_err(&path))?;
            print!("{}", summary(report));
            println!("  wrote {}", path.display());
        }
        None => print!("{}", text),
    }
    Ok(())
}

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Exact { problem, ansatz, out } => cmd_exact(&problem, &ansatz, &out),
        Command::Approx { problem, ansatz, out } => cmd_approx(&problem, &ansatz, &out),
        Command::Local { problem, ansatz, out } => cmd_local(&problem, &ansatz, &out),
        Command::Correct {
            problem,
            zeta0,
            ansatz,
            out,
        } => cmd_correct(&problem, &zeta0, &ansatz, &out),
        Command::Mu { problem, ansatz, out } => cmd_mu(&problem, &ansatz, &out),
        Command::Reduce {
            problem,
            mu,
            ansatz,
            out,
        } => cmd_reduce(&problem, &mu, &ansatz, &out),
        Command::Invariant {
            problem,
            zeta,
            xi,
            eta,
            ansatz,
            out,
        } => cmd_invariant(&problem, zeta, xi, eta, &ansatz, &out),
        Command::Verify {
            problem,
            result,
            numeric,
            out,
        } => cmd_verify(&problem, &result, &numeric, &out),
        Command::Flow {
            xi,
            eta,
            point,
            a,
            mode,
            numeric,
            out,
        } => cmd_flow(&xi, &eta, &point, &a, mode, &numeric, &out),
        Command::Compare {
            problem,
            solution,
            ics,
            xspan,
            min_slope,
            numeric,
            out,
        } => cmd_compare(&problem, solution, ics, xspan, min_slope, &numeric, &out),
        Command::Plotdata {
            kind,
            problem,
            a,
            k,
            numeric,
            out,
        } => cmd_plotdata(kind, problem.as_deref(), a, k, &numeric, &out),
    }
}

fn point_ansatz(l: &Loaded, flags: &AnsatzFlags) -> Result<Ansatz> {
    let base = Ansatz::polynomial(&jet_args(0), 3).with_kernels(l.kernels()?, 1);
    l.ansatz(l.pf.point.as_ref(), flags, base)
}

fn cmd_exact(path: &Path, flags: &AnsatzFlags, out: &OutFlags) -> Result<()> {
    let l = Loaded::open(path)?;
    let a = point_ansatz(&l, flags)?;
    let r = exact_symmetries(l.problem(), &GeneratorAnsatz::point(a.clone()))?;
    let mut rep = l.report("exact", "symmetries");
    rep.ansatz = vec![AnsatzInfo::new("point", &a, l.names())?];
    rep.dimension = Some(r.dimension());
    rep.basis = symmetry_basis(&r, l.names());
    rep.diagnostics.insert("equations".into(), json!(r.rows));
    emit(&rep, &l.stem, out)
}

fn approximate_report(
    l: &Loaded,
    command: &str,
    roles: (&str, &Ansatz),
    ga: &GeneratorAnsatz,
) -> Result<Report> {
    let exact = exact_symmetries(l.problem(), ga)?;
    let stage1: Vec<Generator> = exact.generators.iter().map(|g| g.generator.clone()).collect();
    let r = approx_symmetries_with(l.problem(), &stage1, ga)?;
    let mut rep = l.report(command, "symmetries");
    rep.ansatz = vec![AnsatzInfo::new(roles.0, roles.1, l.names())?];
    rep.dimension = Some(r.dimension());
    rep.exact_basis = stage1
        .iter()
        .map(|g| GeneratorEntry::new(g, "exact", l.names()))
        .collect();
    rep.basis = symmetry_basis(&r, l.names());
    rep.stability = r.stability.as_ref().map(StabilityInfo::new);
    rep.diagnostics.insert("exact_dimension".into(), json!(exact.dimension()));
    rep.diagnostics.insert("equations".into(), json!(r.rows));
    Ok(rep)
}

fn cmd_approx(path: &Path, flags: &AnsatzFlags, out: &OutFlags) -> Result<()> {
    let l = Loaded::open(path)?;
    let a = point_ansatz(&l, flags)?;
    let rep = approximate_report(&l, "approx", ("point", &a), &GeneratorAnsatz::point(a.clone()))?;
    emit(&rep, &l.stem, out)
}

fn local_ansatz(l: &Loaded, flags: &AnsatzFlags, default_order: u32) -> Result<(u32, Ansatz)> {
    let section = l.pf.local.as_ref();
    let s = flags
        .order
        .or(section.and_then(|s| s.order))
        .unwrap_or(default_order)
        .max(1);
    let GeneratorAnsatz::Evol { zeta } = default_local(s, &l.kernels()?) else {
        unreachable!("local ansatz is evolutionary")
    };
    Ok((s, l.ansatz(section, flags, zeta)?))
}

fn cmd_local(path: &Path, flags: &AnsatzFlags, out: &OutFlags) -> Result<()> {
    let l = Loaded::open(path)?;
    let n = l.problem().order;
    let (s, a) = local_ansatz(&l, flags, n.saturating_sub(2))?;
    let ga = GeneratorAnsatz::evolutionary(a.clone());
    let mut rep = approximate_report(&l, "local", ("local", &a), &ga)?;
    rep.inputs = Some(json!({ "order": s }));
    emit(&rep, &l.stem, out)
}

fn cmd_correct(path: &Path, zeta0: &str, flags: &AnsatzFlags, out: &OutFlags) -> Result<()> {
    let l = Loaded::open(path)?;
    let n = l.problem().order;
    let (s, a) = local_ansatz(&l, flags, n - 1)?;
    let z0 = l.nf(zeta0)?;
    let c = higher_order_correction(l.problem(), &z0, &a)?;
    let mut rep = l.report("correct", "correction");
    rep.ansatz = vec![AnsatzInfo::new("correction", &a, l.names())?];
    rep.inputs = Some(json!({ "zeta0": z0.render(l.names()), "order": s }));
    rep.dimension = Some(c.space.dim());
    rep.basis = vec![GeneratorEntry::new(&c.generator(), "particular", l.names())];
    for v in c.nullspace() {
        let g = Generator::Evol(EvolGenerator::new(EpsSeries::new(NormalForm::zero(), v)));
        rep.basis.push(GeneratorEntry::new(&g, "trivial", l.names()));
    }
    rep.diagnostics
        .insert("source".into(), json!(c.source.render(l.names())));
    emit(&rep, &l.stem, out)
}

fn series_entries(s: &SeriesSpace, names: &liepert_core::symexpr::Names) -> Vec<SeriesEntry> {
    let (primary, trivial) = s.primary_and_trivial();
    let mut v: Vec<SeriesEntry> = primary.iter().map(|p| SeriesEntry::new(p, "primary", names)).collect();
    v.extend(trivial.iter().map(|p| SeriesEntry::new(p, "trivial", names)));
    v
}

fn cmd_mu(path: &Path, flags: &AnsatzFlags, out: &OutFlags) -> Result<()> {
    let l = Loaded::open(path)?;
    let base = default_mu(l.problem(), &l.kernels()?);
    let a = l.ansatz(l.pf.mu.as_ref(), flags, base)?;
    let s = integrating_factor(l.problem(), &a)?;
    let mut rep = l.report("mu", "integrating-factor");
    rep.ansatz = vec![AnsatzInfo::new("mu", &a, l.names())?];
    rep.dimension = Some(s.dim());
    rep.series = series_entries(&s, l.names());
    emit(&rep, &l.stem, out)
}

fn cmd_reduce(path: &Path, mu: &str, flags: &AnsatzFlags, out: &OutFlags) -> Result<()> {
    let l = Loaded::open(path)?;
    let mu = l.series(mu)?;
    let mut kernel_only = AnsatzSpec::default();
    if let Some(m) = &l.pf.mu {
        kernel_only.kernels = m.kernels.clone();
    }
    let base = default_phi(l.problem(), &l.kernels()?);
    let a = l.ansatz(Some(&kernel_only), flags, base)?;
    let s = first_integral(l.problem(), &mu, &a)?;
    let mut rep = l.report("reduce", "first-integral");
    rep.ansatz = vec![AnsatzInfo::new("phi", &a, l.names())?];
    rep.inputs = Some(json!({ "mu": SeriesEntry::new(&mu, "mu", l.names()) }));
    rep.dimension = Some(s.dim());
    rep.series = vec![SeriesEntry::new(&s.particular(), "integral", l.names())];
    rep.series
        .extend(s.nullspace().iter().map(|c| SeriesEntry::new(c, "constant", l.names())));
    emit(&rep, &l.stem, out)
}

fn generator_from_flags(l: &Loaded, zeta: Option<String>, xi: Option<String>, eta: Option<String>) -> Result<Generator> {
    match (zeta, xi, eta) {
        (Some(z), None, None) => Ok(Generator::Evol(EvolGenerator::new(l.series(&z)?))),
        (None, xi, eta) if xi.is_some() || eta.is_some() => {
            let xi = l.series(xi.as_deref().unwrap_or("0"))?;
            let eta = l.series(eta.as_deref().unwrap_or("0"))?;
            Ok(Generator::Point(PointGenerator::new(xi, eta)))
        }
        _ => Err(CliError::Usage("give either --zeta or --xi/--eta".into())),
    }
}

fn cmd_invariant(
    path: &Path,
    zeta: Option<String>,
    xi: Option<String>,
    eta: Option<String>,
    flags: &AnsatzFlags,
    out: &OutFlags,
) -> Result<()> {
    let l = Loaded::open(path)?;
    let g = generator_from_flags(&l, zeta, xi, eta)?;
    let k = flags.order.unwrap_or(1);
    let mut base = Ansatz::polynomial(&jet_args(k), 3);
    for j in 1..=k {
        base = base.with_range(Symbol::Jet(j), -2, 2);
    }
    let base = base.with_kernels(l.kernels()?, 1);
    let a = l.ansatz(None, flags, base)?;
    let s = approximate_invariant(l.problem(), &g, k, &a)?;
    let mut rep = l.report("invariant", "invariant");
    rep.ansatz = vec![AnsatzInfo::new("invariant", &a, l.names())?];
    rep.inputs = Some(json!({
        "generator": GeneratorEntry::new(&g, "input", l.names()),
        "order": k,
    }));
    rep.dimension = Some(s.dim());
    rep.series = series_entries(&s, l.names());
    emit(&rep, &l.stem, out)
}

fn field(v: &Value, key: &str) -> Option<String> {
    v.get(key).and_then(Value::as_str).map(str::to_string)
}

fn entry_generator(l: &Loaded, v: &Value) -> Result<Generator> {
    let s = |k0: &str, k1: &str| -> Result<EpsSeries> {
        let e0 = l.nf(&field(v, k0).unwrap_or_else(|| "0".into()))?;
        let e1 = l.nf(&field(v, k1).unwrap_or_else(|| "0".into()))?;
        Ok(EpsSeries::new(e0, e1))
    };
    if v.get("zeta0").is_some() {
        Ok(Generator::Evol(EvolGenerator::new(s("zeta0", "zeta1")?)))
    } else if v.get("xi0").is_some() || v.get("eta0").is_some() {
        Ok(Generator::Point(PointGenerator::new(s("xi0", "xi1")?, s("eta0", "eta1")?)))
    } else {
        Err(CliError::ResultFile("basis entry has no generator components".into()))
    }
}

fn entry_series(l: &Loaded, v: &Value) -> Result<EpsSeries> {
    let e0 = l.nf(&field(v, "e0").ok_or_else(|| CliError::ResultFile("series entry without e0".into()))?)?;
    let e1 = l.nf(&field(v, "e1").unwrap_or_else(|| "0".into()))?;
    Ok(EpsSeries::new(e0, e1))
}

fn eps_grid(l: Option<&Loaded>, flags: &NumericFlags) -> Result<Vec<f64>> {
    match &flags.eps {
        Some(s) => floats(s, "eps"),
        None => Ok(l
            .and_then(|l| l.pf.verify.eps.clone())
            .unwrap_or_else(|| DEFAULT_EPS.to_vec())),
    }
}

fn cmd_verify(path: &Path, result: &Path, flags: &NumericFlags, out: &OutFlags) -> Result<()> {
    let l = Loaded::open(path)?;
    let doc: Value =
        serde_json::from_str(&read(result)?).map_err(|e| CliError::ResultFile(e.to_string()))?;
    let command = doc.get("command").and_then(Value::as_str).unwrap_or("");
    let kind = doc
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| CliError::ResultFile("missing `kind`".into()))?;
    let p = l.problem();
    let eps = eps_grid(Some(&l), flags)?;
    let samples = flags.samples.or(l.pf.verify.samples).unwrap_or(DEFAULT_SAMPLES);
    let seed = flags.seed.or(l.pf.verify.seed).unwrap_or(0);
    let list = |key: &str| doc.get(key).and_then(Value::as_array).cloned().unwrap_or_default();
    let mut checks = Vec::new();
    let mut failures = Vec::new();
    let mut record = |what: String, ok: bool, detail: Value| {
        if !ok {
            failures.push(what.clone());
        }
        checks.push(json!({ "item": what, "ok": ok, "detail": detail }));
    };
    match kind {
        "symmetries" | "correction" => {
            let exact_only = command == "exact";
            let target = if exact_only { p.unperturbed() } else { p.clone() };
            for (i, e) in list("basis").iter().enumerate() {
                let g = entry_generator(&l, e)?;
                let r = determining_residual(&target, &g)?;
                let sym_ok = r.e0.is_zero() && (exact_only || r.e1.is_zero());
                let mut detail = json!({ "symbolic": sym_ok });
                let mut ok = sym_ok;
                if !exact_only && p.is_perturbed() {
                    let rep = symmetry_residual(p, &g, &eps, samples, seed)?;
                    ok &= rep.passes(MIN_SLOPE);
                    detail["slope"] = slope_value(rep.slope);
                    detail["max_residual"] = json!(rep.max_residual);
                }
                record(format!("basis[{}]", i), ok, detail);
            }
            for (i, e) in list("exact_basis").iter().enumerate() {
                let g = entry_generator(&l, e)?;
                let r = determining_residual(&p.unperturbed(), &g)?;
                record(format!("exact_basis[{}]", i), r.e0.is_zero(), json!({ "symbolic": r.e0.is_zero() }));
            }
        }
        "integrating-factor" => {
            let jet = JetSpace::new(p.max_order.max(2 * p.order));
            for (i, e) in list("series").iter().enumerate() {
                let mu = entry_series(&l, e)?;
                let m = mu.mul(&p.delta())?;
                let ok = jet.euler_operator(&m.e0)?.is_zero() && jet.euler_operator(&m.e1)?.is_zero();
                record(format!("series[{}]", i), ok, json!({ "symbolic": ok }));
            }
        }
        "first-integral" => {
            let mu_v = doc
                .pointer("/inputs/mu")
                .ok_or_else(|| CliError::ResultFile("missing inputs.mu".into()))?;
            let mu = entry_series(&l, mu_v)?;
            for (i, e) in list("series").iter().enumerate() {
                let phi = entry_series(&l, e)?;
                let integral = e.get("role").and_then(Value::as_str) == Some("integral");
                let r = if integral {
                    first_integral_residual(p, &mu, &phi)?
                } else {
                    first_integral_residual(p, &EpsSeries::zero(), &phi)?
                };
                record(format!("series[{}]", i), r.is_zero(), json!({ "symbolic": r.is_zero() }));
            }
        }
        "invariant" => {
            let gv = doc
                .pointer("/inputs/generator")
                .ok_or_else(|| CliError::ResultFile("missing inputs.generator".into()))?;
            let g = entry_generator(&l, gv)?;
            for (i, e) in list("series").iter().enumerate() {
                let w = entry_series(&l, e)?;
                let r = OnSolution::new(p).apply_series(&apply_generator(&p.jet(), &g, &w)?)?;
                record(format!("series[{}]", i), r.is_zero(), json!({ "symbolic": r.is_zero() }));
            }
        }
        other => return Err(CliError::ResultFile(format!("cannot verify results of kind `{}`", other))),
    }
    let mut rep = l.report("verify", "verification");
    rep.inputs = Some(json!({ "result": result.display().to_string(), "checked_kind": kind }));
    rep.numeric = Some(json!({ "eps": eps, "samples": samples, "seed": seed, "min_slope": MIN_SLOPE }));
    rep.diagnostics.insert("checks".into(), Value::Array(checks));
    emit(&rep, &l.stem, out)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failures.join(", ")))
    }
}

fn slope_value(s: f64) -> Value {
    if s.is_finite() {
        json!(s)
    } else {
        json!("inf")
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_flow(
    xi: &str,
    eta: &str,
    point: &str,
    a: &str,
    mode: Mode,
    flags: &NumericFlags,
    out: &OutFlags,
) -> Result<()> {
    let ctx = Default::default();
    let parse = |t: &str| -> Result<EpsSeries> { Ok(eps_truncate(&parse_expr_with(t, &ctx)?.normalize()?)?) };
    let g = PointGenerator::new(parse(xi)?, parse(eta)?);
    let p0 = floats(point, "point")?;
    if p0.len() != 2 {
        return Err(CliError::Usage("--point takes `x,y`".into()));
    }
    let eps = match &flags.eps {
        Some(s) => floats(s, "eps")?.first().copied().unwrap_or(0.0),
        None => 0.0,
    };
    let h = flags.h.unwrap_or(DEFAULT_H);
    let field = VectorField::from_point(&g);
    let modes: &[(FlowMode, &str)] = match mode {
        Mode::Exact => &[(FlowMode::Exact, "exact")],
        Mode::Approx => &[(FlowMode::Approximate, "approximate")],
        Mode::Both => &[(FlowMode::Exact, "exact"), (FlowMode::Approximate, "approximate")],
    };
    let mut rows = Vec::new();
    for av in floats(a, "a")? {
        for (m, name) in modes {
            let r = lie_flow(&field, &p0, av, eps, *m, h)?;
            let mut row = json!({ "a": av, "mode": name, "point": r.point, "steps": r.steps });
            if let Some((f0, f1)) = r.parts {
                row["f0"] = json!(f0);
                row["f1"] = json!(f1);
            }
            rows.push(row);
        }
    }
    let names = Default::default();
    let rep = Report {
        command: "flow".into(),
        kind: "flow".into(),
        inputs: Some(json!({
            "generator": GeneratorEntry::new(&Generator::Point(g), "input", &names),
            "point": p0,
            "eps": eps,
            "h": h,
        })),
        numeric: Some(Value::Array(rows)),
        ..Default::default()
    };
    emit(&rep, "flow", out)
}

fn solution_text(l: &Loaded, given: Option<String>) -> Result<NormalForm> {
    match given {
        Some(s) => {
            let p = PathBuf::from(&s);
            let text = if p.is_file() { read(&p)? } else { s };
            l.nf(text.trim())
        }
        None => match &l.pf.verify.solution {
            Some(e) => Ok(e.normalize()?),
            None => Err(CliError::Usage("no --solution and no `solution` in [verify]".into())),
        },
    }
}

fn xspan_of(l: &Loaded, given: Option<String>) -> Result<(f64, f64)> {
    match given {
        Some(s) => {
            let (a, b) = s
                .split_once("..")
                .ok_or_else(|| CliError::Usage(format!("--xspan `{}` is not `a..b`", s)))?;
            Ok((floats(a, "xspan")?[0], floats(b, "xspan")?[0]))
        }
        None => Ok(l.pf.verify.xspan.unwrap_or((0.0, 10.0))),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_compare(
    path: &Path,
    solution: Option<String>,
    ics: Option<String>,
    xspan: Option<String>,
    min_slope: f64,
    flags: &NumericFlags,
    out: &OutFlags,
) -> Result<()> {
    let l = Loaded::open(path)?;
    let sol = solution_text(&l, solution)?;
    let ics: Option<Vec<NormalForm>> = match ics {
        Some(s) => Some(split_list(&s).iter().map(|t| l.nf(t)).collect::<Result<_>>()?),
        None => l
            .pf
            .verify
            .ics
            .as_ref()
            .map(|v| v.iter().map(|e| e.normalize()).collect::<std::result::Result<_, _>>())
            .transpose()?,
    };
    let eps = eps_grid(Some(&l), flags)?;
    let span = xspan_of(&l, xspan)?;
    let h = flags.h.or(l.pf.verify.h).unwrap_or(DEFAULT_H);
    let r = compare_solution(l.problem(), &sol, ics.as_deref(), &eps, span, h)?;
    let mut rep = l.report("compare", "comparison");
    rep.inputs = Some(json!({
        "solution": sol.render(l.names()),
        "ics": ics.as_ref().map(|v| v.iter().map(|e| e.render(l.names())).collect::<Vec<_>>()),
        "xspan": [span.0, span.1],
        "h": h,
    }));
    rep.numeric = Some(json!({
        "eps": r.eps,
        "errors": r.errors,
        "slope": slope_value(r.slope),
        "steps": r.steps,
    }));
    emit(&rep, &l.stem, out)?;
    let positive = eps.iter().filter(|e| **e > 0.0).count();
    if positive >= 2 && r.slope < min_slope {
        return Err(CliError::Verification(format!(
            "error slope {:.3} below {}",
            r.slope, min_slope
        )));
    }
    Ok(())
}

fn polar(r: f64, t: f64) -> (f64, f64) {
    (r * t.cos(), r * t.sin())
}

fn cmd_plotdata(
    kind: PlotKind,
    problem: Option<&Path>,
    a: f64,
    k: f64,
    flags: &NumericFlags,
    out: &OutFlags,
) -> Result<()> {
    let tau = std::f64::consts::TAU;
    let h = flags.h.unwrap_or(DEFAULT_H);
    let (name, header, rows): (&str, Vec<&str>, Vec<Vec<f64>>) = match kind {
        PlotKind::Circles | PlotKind::Lines => {
            let r = Symbol::var("r");
            let shear = VectorField::new(
                vec![r.clone(), Symbol::var("t")],
                vec![EpsSeries::zero(), EpsSeries::exact(NormalForm::symbol(r))],
            )?;
            let mut curves: Vec<(f64, Vec<Vec<f64>>)> = Vec::new();
            if kind == PlotKind::Circles {
                for c in 1..=4 {
                    let pts = (0..=120).map(|i| vec![c as f64, tau * i as f64 / 120.0]).collect();
                    curves.push((c as f64, pts));
                }
            } else {
                for j in 0..8 {
                    let t = tau * j as f64 / 8.0;
                    let pts = (0..=80).map(|i| vec![0.05 * (i + 1) as f64, t]).collect();
                    curves.push((j as f64, pts));
                }
            }
            let mut rows = Vec::new();
            for (id, pts) in curves {
                let moved = transform_curve(&pts, |p| Ok(lie_flow(&shear, p, a, 0.0, FlowMode::Exact, h)?.point))?;
                for (p, q) in pts.iter().zip(&moved) {
                    let (x, y) = polar(p[0], p[1]);
                    let (xs, ys) = polar(q[0], q[1]);
                    rows.push(vec![id, p[1], p[0], q[1], q[0], x, y, xs, ys]);
                }
            }
            let name = if kind == PlotKind::Circles { "circles" } else { "lines" };
            (name, vec!["curve", "theta", "r", "theta_star", "r_star", "x", "y", "x_star", "y_star"], rows)
        }
        PlotKind::PerturbedCircles => {
            let eps = eps_grid(None, flags)?.first().copied().unwrap_or(0.3);
            let eps = if flags.eps.is_some() { eps } else { 0.3 };
            let mut rows = Vec::new();
            for c in 1..=4 {
                let c = c as f64;
                let pts: Vec<Vec<f64>> = (0..=120)
                    .map(|i| {
                        let t = tau * i as f64 / 120.0;
                        vec![c - eps * (-k * t).exp(), t]
                    })
                    .collect();
                let moved = transform_curve(&pts, |p| {
                    let (rs, ts) = perturbed_circle_flow(p[0], p[1], a, k, eps);
                    Ok(vec![rs, ts])
                })?;
                for (p, q) in pts.iter().zip(&moved) {
                    let (x, y) = polar(p[0], p[1]);
                    let (xs, ys) = polar(q[0], q[1]);
                    rows.push(vec![c, p[1], p[0], q[1], q[0], x, y, xs, ys, circle_level(q[0], q[1], k, eps)]);
                }
            }
            (
                "perturbed-circles",
                vec!["level", "theta", "r", "theta_star", "r_star", "x", "y", "x_star", "y_star", "level_star"],
                rows,
            )
        }
        PlotKind::Solution => {
            let path = problem.ok_or_else(|| CliError::Usage("`solution` plots need a problem file".into()))?;
            let l = Loaded::open(path)?;
            let sol = solution_text(&l, None)?;
            let eps = eps_grid(Some(&l), flags)?;
            let span = xspan_of(&l, None)?;
            let h = flags.h.or(l.pf.verify.h).unwrap_or(DEFAULT_H);
            let n = l.problem().order as usize;
            let mut derivs = vec![sol.clone()];
            for i in 1..n {
                let d = derivs[i - 1].diff(&Symbol::X)?;
                derivs.push(d);
            }
            let mut rows = Vec::new();
            for &e in &eps {
                let at = |f: &NormalForm, x: f64| {
                    f.eval(&|s: &Symbol| match s {
                        Symbol::X => Some(x),
                        Symbol::Eps => Some(e),
                        _ => None,
                    })
                };
                let y0: Vec<f64> = derivs.iter().map(|d| at(d, span.0)).collect::<std::result::Result<_, _>>()?;
                let traj = rk4(ode_rhs(l.problem(), e)?, &y0, span, h)?;
                let stride = (traj.len() / 500).max(1);
                for (i, (x, s)) in traj.xs.iter().zip(&traj.states).enumerate() {
                    if i % stride == 0 || i + 1 == traj.len() {
                        let ya = at(&sol, *x)?;
                        rows.push(vec![e, *x, ya, s[0], (ya - s[0]).abs()]);
                    }
                }
            }
            ("solution", vec!["eps", "x", "approx", "numeric", "error"], rows)
        }
    };
    match &out.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
            let path = dir.join(format!("{}.csv", name));
            let f = fs::File::create(&path).map_err(io_err(&path))?;
            write_csv(std::io::BufWriter::new(f), &header, &rows)?;
            println!("wrote {} ({} rows)", path.display(), rows.len());
        }
        None => write_csv(std::io::stdout().lock(), &header, &rows)?,
    }
    Ok(())
}
