use std::fs;
use std::io::Write;

use serde_json::json;

use fullcorr::analytic::{
    diew_bound_binary, svetlichny_bound_closed, svetlichny_bound_f_i, tsirelson_bound_binary,
    tsirelson_bound_recursive,
};
use fullcorr::catalogue::known_bound_table;
use fullcorr::combinatorial::{g_group_bound_with, local_bound_with, svetlichny_bound_with};
use fullcorr::quantum::optimize_phases;
use fullcorr::reduction::{
    bkp_form_tensor, reduce_to_bkp, reduce_to_svetlichny_cglmp, svetlichny_cglmp_form_tensor,
};
use fullcorr::{
    classify, BellExpression, Behavior, BoundKind, BoundOptions, BoundReport, BoundValue, Method,
    Scenario,
};

use crate::args::{
    BoundsArgs, ClassifyArgs, Cli, Command, ExprArgs, Family, Format, GhzArgs, ReduceArgs, TableArgs,
};
use crate::fspec::FSpec;
use crate::render::{columns, csv, exact_value, fixed, human_value};
use crate::CliError;

type Res<T> = Result<T, CliError>;

pub fn run(cli: &Cli) -> Res<()> {
    match &cli.command {
        Command::Build { expr, expand } => emit(cli, build(cli, expr, *expand)?),
        Command::Bounds(a) => emit(cli, bounds(cli, a)?),
        Command::ReduceCheck(a) => {
            let (text, verdict) = reduce_check(cli, a)?;
            emit(cli, text)?;
            verdict
        }
        Command::GhzOpt(a) => emit(cli, ghz_opt(cli, a)?),
        Command::Classify(a) => emit(cli, classify_cmd(cli, a)?),
        Command::Table(a) => emit(cli, table(cli, a)?),
    }
}

fn emit(cli: &Cli, text: String) -> Res<()> {
    match &cli.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Usage(format!("cannot write output: {e}")))
        }
    }
}

fn format(cli: &Cli, default: Format) -> Format {
    cli.format.unwrap_or(default)
}

fn options(cli: &Cli) -> BoundOptions {
    cli.guard.map_or_else(BoundOptions::default, |guard| BoundOptions { guard: guard.into() })
}

fn expression(args: &ExprArgs) -> Res<(FSpec, BellExpression)> {
    let spec = FSpec::parse(&args.f)?;
    let expr = spec.expression(Scenario::new(args.n, args.m, args.k)?)?;
    Ok((spec, expr))
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("output serializes");
    s.push('\n');
    s
}

fn build(cli: &Cli, args: &ExprArgs, expand: bool) -> Res<String> {
    let (_, expr) = expression(args)?;
    let tensor_guard = cli.guard.map_or(fullcorr::scenario::DEFAULT_EXPAND_GUARD, u128::from);
    match format(cli, Format::Json) {
        Format::Json if expand => Ok(expr.expand_with_guard(tensor_guard)?.to_json() + "\n"),
        Format::Json => Ok(expr.to_json() + "\n"),
        Format::Csv => {
            let tensor = expr.expand_with_guard(tensor_guard)?;
            let n = expr.scenario().parties();
            let mut header: Vec<String> = (1..=n).map(|i| format!("s{i}")).collect();
            header.extend(["r".into(), "c".into()]);
            let rows: Vec<Vec<String>> = tensor
                .entries()
                .map(|e| {
                    let mut row: Vec<String> = e.s.iter().map(usize::to_string).collect();
                    row.push(e.r.to_string());
                    row.push(format!("{:?}", e.c));
                    row
                })
                .collect();
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            Ok(csv(&header, &rows))
        }
        Format::Table => {
            let f = expr.function();
            let mut header = vec!["s".to_string()];
            header.extend((0..f.outcomes()).map(|r| format!("r={r}")));
            let rows: Vec<Vec<String>> = f
                .rows()
                .iter()
                .enumerate()
                .map(|(s, row)| {
                    std::iter::once(s.to_string()).chain(row.iter().map(|&v| fixed(v))).collect()
                })
                .collect();
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            Ok(format!("expression {}\n{}", expr.scenario(), columns(&header, &rows)))
        }
    }
}

/// Svetlichny bound from the bipartite local bound of the same coefficient function.
fn svetlichny_closed(expr: &BellExpression, spec: &FSpec, opts: &BoundOptions) -> Res<BoundValue> {
    let scenario = expr.scenario();
    if spec.is_f_i() {
        if let Some(v) = svetlichny_bound_f_i(&scenario) {
            return Ok(BoundValue::Integer(v));
        }
    }
    let bipartite = BellExpression::general(scenario.with_parties(2)?, expr.function().clone())?;
    let local = local_bound_with(&bipartite, opts)?.value;
    let factor = (scenario.settings() as i64).checked_pow(scenario.parties() as u32 - 2);
    Ok(match (local, factor) {
        (BoundValue::Integer(v), Some(f)) if f.checked_mul(v).is_some() => BoundValue::Integer(f * v),
        _ => BoundValue::Real(svetlichny_bound_closed(&scenario, local.as_f64())),
    })
}

fn diew(expr: &BellExpression) -> Res<f64> {
    let s = expr.scenario();
    if s.parties() < 3 {
        return Err(CliError::Usage("biseparable bound needs n >= 3".into()));
    }
    if s.outcomes() != 2 {
        return Err(CliError::Usage(format!("biseparable bound needs k=2, got k={}", s.outcomes())));
    }
    let g = expr
        .function()
        .product_weights()
        .ok_or_else(|| CliError::Usage("biseparable bound needs f = g(s) * r".into()))?;
    Ok(diew_bound_binary(s.parties(), s.settings(), &g)?)
}

fn tsirelson(expr: &BellExpression, spec: &FSpec, bipartite: Option<f64>) -> Res<f64> {
    let s = expr.scenario();
    if let Some(b) = bipartite {
        return Ok(tsirelson_bound_recursive(&s, b));
    }
    if !spec.is_f_i() || s.outcomes() != 2 {
        return Err(CliError::Usage(
            "closed-form Tsirelson bound needs f=fI and k=2; pass --bipartite-quantum otherwise".into(),
        ));
    }
    Ok(tsirelson_bound_binary(s.parties(), s.settings())?)
}

fn bounds(cli: &Cli, a: &BoundsArgs) -> Res<String> {
    let (spec, expr) = expression(&a.expr)?;
    let scenario = expr.scenario();
    let (n, k) = (scenario.parties(), scenario.outcomes());
    let opts = options(cli);
    let picked = a.local || a.svetlichny || !a.g_group.is_empty() || a.diew || a.tsirelson;
    if !picked && !a.all {
        return Err(CliError::Usage(
            "choose bounds with --local, --svetlichny, --g-group, --diew, --tsirelson or --all".into(),
        ));
    }
    let product = expr.function().product_weights().is_some();

    let mut reports = Vec::new();
    if a.local || a.all {
        reports.push(local_bound_with(&expr, &opts)?);
    }
    if a.svetlichny || (a.all && n >= 3) {
        reports.push(svetlichny_bound_with(&expr, &opts)?);
        reports.push(BoundReport::new(
            BoundKind::Svetlichny,
            svetlichny_closed(&expr, &spec, &opts)?,
            Method::ClosedForm,
        ));
    }
    for &g in &a.g_group {
        reports.push(g_group_bound_with(&expr, g, &opts)?);
    }
    if a.diew || (a.all && n >= 3 && k == 2 && product) {
        reports.push(BoundReport::new(BoundKind::Biseparable, BoundValue::Real(diew(&expr)?), Method::ClosedForm));
    }
    if a.tsirelson || (a.all && k == 2 && (spec.is_f_i() || a.bipartite_quantum.is_some())) {
        let v = tsirelson(&expr, &spec, a.bipartite_quantum)?;
        reports.push(BoundReport::new(BoundKind::Tsirelson, BoundValue::Real(v), Method::ClosedForm));
    }

    Ok(match format(cli, Format::Table) {
        Format::Json => to_json(&reports),
        Format::Csv => {
            let rows = reports.iter().map(|r| bound_row(&scenario, r, exact_value(&r.value))).collect::<Vec<_>>();
            csv(&["n", "m", "k", "bound_kind", "method", "value"], &rows)
        }
        Format::Table => {
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|r| vec![r.kind.to_string(), r.method.to_string(), human_value(&r.value)])
                .collect();
            format!("bounds for {scenario} f={}\n{}", a.expr.f, columns(&["kind", "method", "value"], &rows))
        }
    })
}

fn bound_row(s: &Scenario, r: &BoundReport, value: String) -> Vec<String> {
    vec![
        s.parties().to_string(),
        s.settings().to_string(),
        s.outcomes().to_string(),
        r.kind.to_string(),
        r.method.to_string(),
        value,
    ]
}

fn reduce_check(cli: &Cli, a: &ReduceArgs) -> Res<(String, Res<()>)> {
    let spec = FSpec::parse(&a.f)?;
    let (name, scenario) = match a.family {
        Family::Bkp => {
            let n = a.n.unwrap_or(2);
            if n != 2 {
                return Err(CliError::Usage(format!("bkp reduction requires n=2, got n={n}")));
            }
            let m = a.m.ok_or_else(|| CliError::Usage("bkp reduction needs -m".into()))?;
            ("bkp", Scenario::new(2, m, a.k)?)
        }
        Family::SvetCglmp => {
            let m = a.m.unwrap_or(2);
            if m != 2 {
                return Err(CliError::Usage(format!("svet-cglmp reduction requires m=2, got m={m}")));
            }
            let n = a.n.ok_or_else(|| CliError::Usage("svet-cglmp reduction needs -n".into()))?;
            ("svet-cglmp", Scenario::new(n, 2, a.k)?)
        }
    };
    let expr = spec.expression(scenario)?;
    if let Some(guard) = cli.guard {
        expr.expand_with_guard(guard.into())?;
    }
    let (got, want) = match a.family {
        Family::Bkp => (reduce_to_bkp(&expr)?, bkp_form_tensor(scenario.settings(), scenario.outcomes())?),
        Family::SvetCglmp => (
            reduce_to_svetlichny_cglmp(&expr)?,
            svetlichny_cglmp_form_tensor(scenario.parties(), scenario.outcomes())?,
        ),
    };
    let matched = got == want;
    let diff = got.max_abs_diff(&want).unwrap_or(f64::INFINITY);
    let text = match format(cli, Format::Table) {
        Format::Json => to_json(&json!({
            "family": name,
            "n": scenario.parties(),
            "m": scenario.settings(),
            "k": scenario.outcomes(),
            "entries": got.len(),
            "match": matched,
            "max_abs_diff": diff,
        })),
        Format::Csv => csv(
            &["family", "n", "m", "k", "entries", "match", "max_abs_diff"],
            &[vec![
                name.into(),
                scenario.parties().to_string(),
                scenario.settings().to_string(),
                scenario.outcomes().to_string(),
                got.len().to_string(),
                matched.to_string(),
                format!("{diff:?}"),
            ]],
        ),
        Format::Table if matched => format!("{name} {scenario}: match ({} entries)\n", got.len()),
        Format::Table => format!("{name} {scenario}: mismatch (max |diff| {})\n", fixed(diff)),
    };
    let verdict = if matched {
        Ok(())
    } else {
        Err(CliError::Mismatch(format!("{name} tensors differ at {scenario}")))
    };
    Ok((text, verdict))
}

fn ghz_opt(cli: &Cli, a: &GhzArgs) -> Res<String> {
    if a.k != 2 {
        return Err(CliError::Usage(format!("ghz-opt requires k=2, got k={}", a.k)));
    }
    let spec = FSpec::parse(&a.f)?;
    let expr = spec.expression(Scenario::new(a.n, a.m, 2)?)?;
    let mut report = optimize_phases(&expr, cli.seed, a.restarts, a.max_iters)?;
    if let Some(t) = a.target {
        report = report.with_target(t);
    }
    if let Some(path) = &a.angles_out {
        fs::write(path, report.angles.to_json() + "\n")
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
    }
    let opt = |x: Option<f64>, f: fn(f64) -> String| x.map_or_else(|| "-".to_string(), f);
    Ok(match format(cli, Format::Table) {
        Format::Json => report.to_json() + "\n",
        Format::Csv => csv(
            &["n", "m", "value", "target_bound", "gap"],
            &[vec![
                a.n.to_string(),
                a.m.to_string(),
                format!("{:?}", report.value),
                opt(report.target_bound, |v| format!("{v:?}")),
                opt(report.gap, |v| format!("{v:?}")),
            ]],
        ),
        Format::Table => {
            let mut out = format!(
                "value   {}\ntarget  {}\ngap     {}\nangles\n",
                fixed(report.value),
                opt(report.target_bound, fixed),
                opt(report.gap, fixed)
            );
            for (i, row) in report.angles.phases().iter().enumerate() {
                let cells: Vec<String> = row.iter().map(|&v| fixed(v)).collect();
                out.push_str(&format!("  party {}: {}\n", i + 1, cells.join(" ")));
            }
            out
        }
    })
}

fn default_bounds(spec: &FSpec, expr: &BellExpression, opts: &BoundOptions) -> Res<Vec<BoundReport>> {
    let scenario = expr.scenario();
    if let Some(name) = spec.catalogue_name() {
        return Ok(known_bound_table(&scenario, name)?);
    }
    let mut out = vec![local_bound_with(expr, opts)?];
    if scenario.parties() >= 3 {
        out.push(svetlichny_bound_with(expr, opts)?);
    }
    Ok(out)
}

fn classify_cmd(cli: &Cli, a: &ClassifyArgs) -> Res<String> {
    let (spec, expr) = expression(&a.expr)?;
    let behavior = Behavior::ingest(&a.behavior)
        .map_err(|e| CliError::Usage(format!("{}: {e}", a.behavior.display())))?;
    let bounds = match &a.bounds {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<Vec<BoundReport>>(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
        }
        None => default_bounds(&spec, &expr, &options(cli))?,
    };
    let report = classify(&expr, &behavior, &bounds)?;
    Ok(match format(cli, Format::Table) {
        Format::Json => to_json(&report),
        Format::Csv => {
            let rows: Vec<Vec<String>> = report
                .verdicts
                .iter()
                .map(|v| {
                    vec![
                        v.kind.to_string(),
                        format!("{:?}", v.bound),
                        format!("{:?}", report.value),
                        format!("{:?}", v.margin),
                        v.violated.to_string(),
                    ]
                })
                .collect();
            csv(&["bound_kind", "bound", "value", "margin", "violated"], &rows)
        }
        Format::Table => format!("{report}\n"),
    })
}

fn parse_range(flag: &str, text: &str) -> Res<Vec<usize>> {
    let bad = || CliError::Usage(format!("--{flag} {text}: expected A..B, A or a comma list"));
    let text = text.trim();
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        return Ok((lo..=hi).collect());
    }
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect()
}

enum Cell {
    Value(BoundValue),
    Skipped,
}

fn table(cli: &Cli, a: &TableArgs) -> Res<String> {
    let ns = parse_range("n", &a.n)?;
    let ms = parse_range("m", &a.m)?;
    let ks = parse_range("k", &a.k)?;
    let kinds: Vec<BoundKind> = a
        .kinds
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse().map_err(CliError::Usage))
        .collect::<Res<_>>()?;
    let spec = FSpec::parse(&a.f)?;
    let opts = options(cli);

    let mut rows: Vec<(Scenario, BoundKind, Method, Cell)> = Vec::new();
    for &n in &ns {
        for &m in &ms {
            for &k in &ks {
                let expr = spec.expression(Scenario::new(n, m, k)?)?;
                for &kind in &kinds {
                    table_cell(&mut rows, &expr, &spec, kind, a, &opts)?;
                }
            }
        }
    }

    let header = ["n", "m", "k", "bound_kind", "method", "value"];
    Ok(match format(cli, Format::Csv) {
        Format::Json => {
            let docs: Vec<_> = rows
                .iter()
                .map(|(s, kind, method, cell)| {
                    let value = match cell {
                        Cell::Value(v) => serde_json::to_value(v).expect("value serializes"),
                        Cell::Skipped => json!("skipped"),
                    };
                    json!({
                        "n": s.parties(), "m": s.settings(), "k": s.outcomes(),
                        "bound_kind": kind.to_string(), "method": method.to_string(), "value": value,
                    })
                })
                .collect();
            to_json(&docs)
        }
        fmt => {
            let render = if fmt == Format::Csv { exact_value } else { human_value };
            let lines: Vec<Vec<String>> = rows
                .iter()
                .map(|(s, kind, method, cell)| {
                    let value = match cell {
                        Cell::Value(v) => render(v),
                        Cell::Skipped => "skipped".into(),
                    };
                    let r = BoundReport::new(*kind, BoundValue::Integer(0), *method);
                    bound_row(s, &r, value)
                })
                .collect();
            if fmt == Format::Csv { csv(&header, &lines) } else { columns(&header, &lines) }
        }
    })
}

fn table_cell(
    rows: &mut Vec<(Scenario, BoundKind, Method, Cell)>,
    expr: &BellExpression,
    spec: &FSpec,
    kind: BoundKind,
    a: &TableArgs,
    opts: &BoundOptions,
) -> Res<()> {
    let s = expr.scenario();
    let (n, k) = (s.parties(), s.outcomes());
    let closed = |v: BoundValue| (s, kind, Method::ClosedForm, Cell::Value(v));
    match kind {
        BoundKind::Local if n == 2 && spec.is_f_i() => {
            rows.push(closed(BoundValue::Integer(k as i64 - 1)));
        }
        BoundKind::Svetlichny if n >= 3 => rows.push(closed(svetlichny_closed(expr, spec, opts)?)),
        BoundKind::Biseparable if n >= 3 && k == 2 && expr.function().product_weights().is_some() => {
            rows.push(closed(BoundValue::Real(diew(expr)?)));
        }
        BoundKind::Tsirelson if k == 2 && spec.is_f_i() => {
            rows.push(closed(BoundValue::Real(tsirelson(expr, spec, None)?)));
        }
        _ => {}
    }
    if !a.exact {
        return Ok(());
    }
    let exact = match kind {
        BoundKind::Local => local_bound_with(expr, opts),
        BoundKind::Svetlichny if n >= 3 => svetlichny_bound_with(expr, opts),
        BoundKind::GGroup(g) if (2..=n).contains(&g) => g_group_bound_with(expr, g, opts),
        _ => return Ok(()),
    };
    let cell = match exact {
        Ok(r) => Cell::Value(r.value),
        Err(e @ (fullcorr::Error::EnumerationGuardExceeded { .. } | fullcorr::Error::SizeGuardExceeded { .. }))
            if !a.skip_infeasible =>
        {
            return Err(CliError::from(e));
        }
        Err(fullcorr::Error::EnumerationGuardExceeded { .. } | fullcorr::Error::SizeGuardExceeded { .. }) => {
            Cell::Skipped
        }
        Err(e) => return Err(e.into()),
    };
    rows.push((s, kind, Method::CombinatorialExact, cell));
    Ok(())
}
