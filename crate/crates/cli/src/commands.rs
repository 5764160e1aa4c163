use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context as _};
use chrono::{DateTime, FixedOffset, Utc};
use eaa_core::canonical::canonical_pretty;
use eaa_core::diag::{Diagnostic, ValidationReport};
use eaa_core::equilibrium::{EventKind, Party, PartyRole, SessionState};
use eaa_core::matrices::{analyze, Flag, FlagStatus, Matrices, MatrixAnalysis, ResolutionAnnotation};
use eaa_core::pattern::{builtin_pattern, check_instantiation, instantiate, BindingDoc, Pattern};
use eaa_core::render::{matrices_csv, to_dot, to_html_report, RenderFormat, RenderOptions};
use eaa_core::storage::{
    read_json, resolve_env, write_atomic, CaseFiles, StorageError, SummariesDoc, CASE_DIR_VAR,
};
use eaa_core::validator::validate;

use crate::workspace::{Workspace, WorkspaceError};
use crate::{serve, Cli, Command, ExitStatus, Format, MatricesAction, SessionAction};

type Outcome = anyhow::Result<ExitStatus>;

pub(crate) fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> ExitStatus {
    let json = cli.json;
    let result = match cli.command {
        Command::Check { file } => check(&file, json, out, err),
        Command::Instantiate {
            pattern,
            bindings,
            out: target,
        } => run_instantiate(&pattern, &bindings, &target, json, out, err),
        Command::Matrices {
            action: MatricesAction::Check { file },
        } => matrices_check(&file, json, out, err),
        Command::Matrices {
            action: MatricesAction::Propose { file, out: target },
        } => matrices_propose(&file, target.as_deref(), json, out, err),
        Command::Justice { file, annotations } => justice(&file, annotations.as_deref(), json, out, err),
        Command::Render {
            file,
            format,
            out: target,
            no_matrices,
            no_flags,
        } => render(&file, format, target.as_deref(), !no_matrices, !no_flags, json, out, err),
        Command::Session { file, action } => session(&file, action, json, out, err),
        Command::Serve { file, port } => run_serve(&file, port, json, out, err),
    };
    match result {
        Ok(status) => status,
        Err(e) => {
            let _ = writeln!(err, "eaa: {e:#}");
            ExitStatus::Failure
        }
    }
}

fn print_report(report: &ValidationReport, json: bool, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<()> {
    if json {
        writeln!(out, "{}", report.to_json())?;
    } else {
        write!(out, "{}", report.to_text())?;
        writeln!(
            err,
            "{} error(s), {} warning(s)",
            report.summary.errors, report.summary.warnings
        )?;
    }
    Ok(())
}

fn status_of(report: &ValidationReport) -> ExitStatus {
    if report.has_errors() {
        ExitStatus::Findings
    } else {
        ExitStatus::Clean
    }
}

/// Loads a workspace. Syntax and decode errors in the case are findings and
/// are printed; `None` then tells the caller to stop with exit status 1.
fn load(path: &Path, json: bool, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<Option<Workspace>> {
    match Workspace::load(path) {
        Ok(ws) => Ok(Some(ws)),
        Err(WorkspaceError::Storage(StorageError::Parse { diagnostics, .. })) => {
            print_report(&ValidationReport::new(diagnostics), json, out, err)?;
            Ok(None)
        }
        Err(WorkspaceError::Storage(StorageError::Decode { path, source })) => {
            let d = Diagnostic::error("E-DECODE", source.to_string()).with_subject(path.display().to_string());
            print_report(&ValidationReport::new(vec![d]), json, out, err)?;
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

fn check(file: &Path, json: bool, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let Some(ws) = load(file, json, out, err)? else {
        return Ok(ExitStatus::Findings);
    };
    let report = ValidationReport::merge([validate(&ws.case), check_instantiation(&ws.case)]);
    print_report(&report, json, out, err)?;
    Ok(status_of(&report))
}

fn load_bindings(path: &Path) -> anyhow::Result<BindingDoc> {
    if path.extension().is_some_and(|e| e == "json") {
        return Ok(read_json(&resolve_env(path)?)?);
    }
    let dir = std::env::var_os(CASE_DIR_VAR).map(PathBuf::from);
    let mut candidates = Vec::new();
    if let Some(d) = dir.filter(|_| path.is_relative()) {
        candidates.push(d.join(path));
    }
    candidates.push(path.to_path_buf());
    let files = candidates
        .iter()
        .map(|p| CaseFiles::new(p))
        .find(|f| f.sidecar("stakeholders.json").is_file())
        .ok_or_else(|| anyhow!("{}: no stakeholders sidecar for this stem", path.display()))?;
    let side = files.load_sidecars()?;
    let meta_path = files.sidecar("meta.json");
    let meta = if meta_path.is_file() { Some(read_json(&meta_path)?) } else { None };
    Ok(BindingDoc {
        meta,
        stakeholders: side.stakeholders,
        matrices: side.matrices,
    })
}

fn run_instantiate(
    pattern: &str,
    bindings: &Path,
    target: &Path,
    json: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    let pattern = if pattern == "builtin" {
        builtin_pattern()
    } else {
        let path = resolve_env(Path::new(pattern))?;
        let text = fs::read_to_string(&path).with_context(|| path.display().to_string())?;
        Pattern::parse(&text).map_err(|e| anyhow!("{}: {e}", path.display()))?
    };
    let doc = load_bindings(bindings)?;
    let result = match instantiate(&pattern, &doc) {
        Ok(r) => r,
        Err(e) => {
            let report = ValidationReport::new(vec![Diagnostic::error("E-BINDING", e.to_string())]);
            print_report(&report, json, out, err)?;
            return Ok(ExitStatus::Findings);
        }
    };
    CaseFiles::new(target).save_all(&result.case)?;
    let report = ValidationReport::new(result.warnings);
    if json {
        print_report(&report, true, out, err)?;
    } else {
        write!(err, "{}", report.to_text())?;
        writeln!(
            out,
            "wrote {} ({} nodes, {} edges)",
            target.display(),
            result.case.node_count(),
            result.case.edge_count()
        )?;
    }
    Ok(ExitStatus::Clean)
}

fn matrices_check(file: &Path, json: bool, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let Some(ws) = load(file, json, out, err)? else {
        return Ok(ExitStatus::Findings);
    };
    let report = ValidationReport::new(ws.analysis().diagnostics);
    print_report(&report, json, out, err)?;
    Ok(status_of(&report))
}

fn matrices_propose(
    file: &Path,
    target: Option<&Path>,
    json: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    let Some(ws) = load(file, json, out, err)? else {
        return Ok(ExitStatus::Findings);
    };
    let bare = Matrices {
        benefit_summaries: Vec::new(),
        risk_summaries: Vec::new(),
        ..ws.case.matrices.clone()
    };
    let analysis = analyze(&ws.case.stakeholders, &bare, &[]);
    let doc = SummariesDoc {
        benefits: analysis.benefit_summaries,
        risks: analysis.risk_summaries,
        rules: bare.rules,
    };
    emit(&canonical_pretty(&doc), target, out)?;
    Ok(ExitStatus::Clean)
}

fn emit(text: &str, target: Option<&Path>, out: &mut dyn Write) -> anyhow::Result<()> {
    match target {
        Some(path) => write_atomic(path, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

pub(crate) fn flag_diagnostic(flag: &Flag) -> Diagnostic {
    let d = match flag.severity {
        eaa_core::Severity::Error => Diagnostic::error(flag.rule.code(), flag.message.clone()),
        eaa_core::Severity::Warning => Diagnostic::warning(flag.rule.code(), flag.message.clone()),
    };
    d.with_subject(flag.stakeholder.as_str())
}

/// Matrix diagnostics plus every open flag.
pub(crate) fn justice_report(analysis: &MatrixAnalysis) -> ValidationReport {
    let mut all = analysis.diagnostics.clone();
    all.extend(
        analysis
            .flags
            .iter()
            .filter(|f| f.status == FlagStatus::Open)
            .map(flag_diagnostic),
    );
    ValidationReport::new(all)
}

fn justice(
    file: &Path,
    annotations: Option<&Path>,
    json: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    let Some(mut ws) = load(file, json, out, err)? else {
        return Ok(ExitStatus::Findings);
    };
    if let Some(path) = annotations {
        let list: Vec<ResolutionAnnotation> = read_json(&resolve_env(path)?)?;
        ws.case.annotations = list;
    }
    let analysis = ws.analysis();
    let status = if analysis.has_errors() {
        ExitStatus::Findings
    } else {
        ExitStatus::Clean
    };
    if json {
        writeln!(out, "{}", justice_report(&analysis).to_json())?;
        return Ok(status);
    }
    let registry = &ws.case.stakeholders;
    writeln!(out, "justice matrix ({} stakeholders)", analysis.justice.len())?;
    for row in &analysis.justice.rows {
        let side = |s: &Option<eaa_core::matrices::SummaryRow>, word: &str, noun: &str| {
            s.as_ref().map(|s| s.describe(word, noun)).unwrap_or_else(|| "none".into())
        };
        writeln!(
            out,
            "  {}: benefits: {}; risks: {}; autonomy: {}",
            registry.name(&row.stakeholder),
            side(&row.benefit, "impact", "benefits"),
            side(&row.risk, "severity", "risks"),
            row.autonomy.render()
        )?;
    }
    for d in &analysis.diagnostics {
        writeln!(out, "{d}")?;
    }
    writeln!(out, "flags")?;
    for flag in &analysis.flags {
        writeln!(out, "  {flag}")?;
    }
    let open = analysis.open_errors().count();
    writeln!(err, "{open} open error flag(s)")?;
    Ok(status)
}

#[allow(clippy::too_many_arguments)]
fn render(
    file: &Path,
    format: Format,
    target: Option<&Path>,
    include_matrices: bool,
    include_flags: bool,
    json: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    let Some(ws) = load(file, json, out, err)? else {
        return Ok(ExitStatus::Findings);
    };
    match format {
        Format::Dot => emit(&to_dot(&ws.case), target, out)?,
        Format::Html => {
            let options = RenderOptions {
                format: RenderFormat::Html,
                include_matrices,
                include_flags,
            };
            emit(&to_html_report(&ws.case, &options), target, out)?
        }
        Format::Csv => {
            let stem = target.ok_or_else(|| anyhow!("--format csv needs -o STEM"))?;
            let files = CaseFiles::new(stem);
            for (suffix, text) in matrices_csv(&ws.case) {
                let path = files.sidecar(suffix);
                write_atomic(&path, &text)?;
                writeln!(out, "wrote {}", path.display())?;
            }
        }
    }
    Ok(ExitStatus::Clean)
}

fn parse_party(spec: &str) -> anyhow::Result<Party> {
    let mut parts = spec.splitn(3, ':');
    let id = parts.next().unwrap_or_default();
    let role = parts.next().ok_or_else(|| anyhow!("party `{spec}` must be id:role[:name]"))?;
    let role: PartyRole = serde_json::from_value(serde_json::Value::String(role.to_string()))
        .map_err(|_| anyhow!("unknown party role `{role}`"))?;
    let name = parts.next().unwrap_or(id);
    if id.is_empty() {
        bail!("party `{spec}` has an empty id");
    }
    Ok(Party::new(id, name, role))
}

pub(crate) fn parse_ts(ts: Option<&str>) -> anyhow::Result<DateTime<FixedOffset>> {
    match ts {
        Some(t) => DateTime::parse_from_rfc3339(t).with_context(|| format!("timestamp `{t}`")),
        None => Ok(Utc::now().fixed_offset()),
    }
}

fn session(file: &Path, action: SessionAction, json: bool, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let Some(mut ws) = load(file, json, out, err)? else {
        return Ok(ExitStatus::Findings);
    };
    match action {
        SessionAction::Open { id, parties, force } => {
            if ws.session.is_some() && !force {
                bail!("a session is already recorded for this case (use --force to replace it)");
            }
            let parties = parties.iter().map(|p| parse_party(p)).collect::<anyhow::Result<Vec<_>>>()?;
            ws.session = None;
            let state = SessionState::open(&id, &ws.case, parties)?;
            ws.open_session(state);
            ws.persist()?;
            writeln!(out, "opened session {id} at snapshot {}", ws.snapshot_hash())?;
        }
        SessionAction::Submit { author, event, ts } => {
            let text = match event.strip_prefix('@') {
                Some(path) => fs::read_to_string(path).with_context(|| path.to_string())?,
                None => event,
            };
            let kind: EventKind = serde_json::from_str(&text).context("event")?;
            let seq = ws.submit(&author, parse_ts(ts.as_deref())?, kind)?;
            ws.persist()?;
            let state = ws.session.as_ref().expect("submit needs a session");
            writeln!(out, "event {seq} recorded; {}", state.status().status)?;
            writeln!(out, "snapshot {}", state.snapshot_hash())?;
        }
        SessionAction::Status => {
            let state = ws.session.as_ref().ok_or(WorkspaceError::NoSession)?;
            let report = state.status();
            if json {
                writeln!(out, "{}", canonical_pretty(&report).trim_end())?;
            } else {
                writeln!(out, "session {}: {}", state.log().id, report.status)?;
                writeln!(out, "snapshot {}", report.snapshot)?;
                for b in &report.blockers {
                    writeln!(out, "  blocked: {b}")?;
                }
            }
        }
        SessionAction::Export { out: target } => {
            let state = ws.session.as_ref().ok_or(WorkspaceError::NoSession)?;
            emit(&canonical_pretty(state.log()), target.as_deref(), out)?;
        }
    }
    Ok(ExitStatus::Clean)
}

fn run_serve(file: &Path, port: u16, json: bool, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let Some(ws) = load(file, json, out, err)? else {
        return Ok(ExitStatus::Findings);
    };
    let runtime = tokio::runtime::Runtime::new()?;
    writeln!(out, "serving {} on http://127.0.0.1:{port}", ws.files.source.display())?;
    out.flush()?;
    runtime.block_on(serve::serve(ws, port))?;
    Ok(ExitStatus::Clean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use eaa_core::matrices::{FlagRule, FlagStatus};

    #[test]
    fn party_specs() {
        let p = parse_party("eth:independent-ethicist:Dr Who").unwrap();
        assert_eq!((p.id.as_str(), p.role, p.name.as_str()), ("eth", PartyRole::IndependentEthicist, "Dr Who"));
        let p = parse_party("rep:stakeholder-representative").unwrap();
        assert_eq!(p.name, "rep");
        assert!(parse_party("rep").is_err());
        assert!(parse_party("rep:boss").is_err());
        assert!(parse_party(":team-member").is_err());
    }

    #[test]
    fn timestamps() {
        let ts = parse_ts(Some("2026-03-02T10:01:00+01:00")).unwrap();
        assert_eq!(ts.offset().local_minus_utc(), 3600);
        assert!(parse_ts(Some("yesterday")).is_err());
        assert!(parse_ts(None).is_ok());
    }

    fn flag(status: FlagStatus) -> Flag {
        Flag {
            rule: FlagRule::OnlyRisk,
            stakeholder: "taxi-drivers".into(),
            severity: eaa_core::Severity::Error,
            resolved_by: None,
            status,
            message: "bears risk with no benefit".into(),
        }
    }

    #[test]
    fn flags_become_diagnostics() {
        let d = flag_diagnostic(&flag(FlagStatus::Open));
        assert_eq!(d.code, "R1-only-risk");
        assert!(d.is_error());
        assert_eq!(d.subject.as_deref(), Some("taxi-drivers"));
    }

    #[test]
    fn only_open_flags_are_reported() {
        let analysis = MatrixAnalysis {
            diagnostics: Vec::new(),
            benefit_summaries: Vec::new(),
            risk_summaries: Vec::new(),
            autonomy: Vec::new(),
            justice: Default::default(),
            flags: vec![flag(FlagStatus::Open), flag(FlagStatus::Resolved)],
        };
        assert_eq!(justice_report(&analysis).diagnostics.len(), 1);
    }
}
