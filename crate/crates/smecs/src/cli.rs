//! Command-line front end.
//!
//! Exit codes: 0 success, 1 validation failures, 2 pipeline or I/O errors,
//! 3 usage errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use smecs_core::harvest::SourceStatus;
use smecs_core::pipeline::extract;
use smecs_core::{
    export_codemeta, load_vocabulary, parse_codemeta, parse_repo_url, validate_record, AuthToken, HarvestError,
    HttpRequest, HttpTransport, SourceKind, VocabularyKind,
};

use crate::api::{self, AppState, Transport};
use crate::config::{Config, LANGUAGES_FILE, LICENSES_FILE};
use crate::store::SessionStore;
use crate::transport::{FixtureTransport, UreqTransport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_FAILED: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

pub const GITHUB_TOKEN_ENV: &str = "SMECS_GITHUB_TOKEN";
pub const SPDX_LICENSES_URL: &str =
    "https://raw.githubusercontent.com/spdx/license-list-data/master/json/licenses.json";
pub const LANGUAGES_URL: &str =
    "https://gist.githubusercontent.com/calvinfroedge/defeb8fc6cdc0068e172/raw/programming_languages.json";

#[derive(Debug, Parser)]
#[command(name = "smecs", version, about = "Extract, validate and curate research software metadata")]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Harvest a repository and write its codemeta.json.
    Extract(ExtractArgs),
    /// Check a codemeta.json file.
    Validate { file: PathBuf },
    /// Run the HTTP service.
    Serve(ServeArgs),
    /// Download fresh vocabulary snapshots.
    RefreshVocab(RefreshArgs),
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Repository URL, e.g. https://github.com/owner/name
    #[arg(long)]
    pub url: String,
    /// API token.
    #[arg(long, env = GITHUB_TOKEN_ENV, hide_env_values = true)]
    pub token: Option<String>,
    /// Output file, `-` for standard output.
    #[arg(long, default_value = "codemeta.json")]
    pub out: PathBuf,
    /// Replay recorded API responses from this directory.
    #[arg(long, value_name = "DIR")]
    pub fixtures: Option<PathBuf>,
    /// Also print which crosswalk rules fired.
    #[arg(long)]
    pub report: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Listen address, e.g. 127.0.0.1:8080.
    #[arg(long)]
    pub listen: Option<String>,
    /// Replay recorded API responses from this directory.
    #[arg(long, value_name = "DIR")]
    pub fixtures: Option<PathBuf>,
    /// Keep sessions in this directory across restarts.
    #[arg(long, value_name = "DIR")]
    pub session_dir: Option<PathBuf>,
    /// Static files of the curation UI.
    #[arg(long, value_name = "DIR")]
    pub ui_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RefreshArgs {
    /// Where to write the snapshots.
    #[arg(long, default_value = ".", value_name = "DIR")]
    pub out_dir: PathBuf,
    /// Read the SPDX license list from a local file instead of downloading.
    #[arg(long, value_name = "FILE")]
    pub licenses_from: Option<PathBuf>,
    /// Read the language list from a local file instead of downloading.
    #[arg(long, value_name = "FILE")]
    pub languages_from: Option<PathBuf>,
    #[arg(long, default_value = SPDX_LICENSES_URL)]
    pub licenses_url: String,
    #[arg(long, default_value = LANGUAGES_URL)]
    pub languages_url: String,
}

/// Parses arguments and runs a command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{}", e.render()) } else { write!(out, "{}", e.render()) };
            return code;
        }
    };
    let config = match Config::load(cli.config.as_deref()) {
        Ok(config) => config,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    match cli.command {
        Command::Extract(args) => cmd_extract(&args, &config, out, err),
        Command::Validate { file } => cmd_validate(&file, &config, out, err),
        Command::Serve(args) => cmd_serve(args, config, err),
        Command::RefreshVocab(args) => cmd_refresh_vocab(&args, err),
    }
}

fn transport_for(fixtures: Option<&Path>) -> Transport {
    match fixtures {
        Some(dir) => Arc::new(FixtureTransport::new(dir)),
        None => Arc::new(UreqTransport::default()),
    }
}

fn status_line(status: Option<&SourceStatus>) -> String {
    match status {
        Some(SourceStatus::Harvested { warnings }) if warnings.is_empty() => "harvested".into(),
        Some(SourceStatus::Harvested { warnings }) => format!("harvested (warnings: {warnings:?})"),
        Some(SourceStatus::Absent) => "absent".into(),
        Some(SourceStatus::Failed { message }) => format!("failed: {message}"),
        None => "not attempted".into(),
    }
}

pub fn cmd_extract(args: &ExtractArgs, config: &Config, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let token = AuthToken::resolve(args.token.as_deref(), config.default_token.as_deref());
    let locator = match parse_repo_url(&args.url) {
        Ok(locator) => locator,
        Err(e) => {
            let _ = writeln!(
                err,
                "error: {}\nusage: smecs extract --url https://github.com/OWNER/NAME",
                token.redact(&e.to_string())
            );
            return EXIT_USAGE;
        }
    };
    let pipeline = match config.pipeline() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let fixtures = args.fixtures.as_deref().or(config.fixtures.as_deref());
    let transport = transport_for(fixtures);
    let extraction = match extract(&locator, &token, &*transport, &pipeline) {
        Ok(x) => x,
        Err(e) => {
            let _ = writeln!(err, "error: {}", token.redact(&e.to_string()));
            return if matches!(e, HarvestError::UnsupportedUrl(_)) { EXIT_USAGE } else { EXIT_FAILED };
        }
    };

    let _ = writeln!(err, "repository {locator}");
    for kind in SourceKind::ALL {
        let _ = writeln!(err, "  {:<13} {}", kind.as_str(), status_line(extraction.report.status(kind)));
    }
    let _ = writeln!(err, "fields:");
    for (field, status) in &extraction.statuses {
        let source = extraction.provenance.source_of(*field).map(|s| format!(" <- {s}")).unwrap_or_default();
        let _ = writeln!(err, "  {:<20} {status:?}{source}", field.as_str());
    }
    if args.report {
        let _ = writeln!(err, "crosswalk rules:");
        for report in &extraction.rule_reports {
            for rule in &report.rules {
                let outcome = rule.skipped.as_ref().map_or("fired".to_string(), |r| format!("skipped ({r})"));
                let source = report.source.map(|s| s.as_str()).unwrap_or("CodeMetaFile");
                let _ = writeln!(err, "  {source:<13} {} -> {}: {outcome}", rule.source_path, rule.target);
            }
        }
    }

    let text = match export_codemeta(&extraction.record) {
        Ok(text) => text,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_FAILED;
        }
    };
    let written = if args.out.as_os_str() == "-" {
        out.write_all(text.as_bytes()).and_then(|_| out.flush())
    } else {
        fs::write(&args.out, &text)
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: cannot write {}: {e}", args.out.display());
        return EXIT_FAILED;
    }
    if args.out.as_os_str() != "-" {
        let _ = writeln!(err, "wrote {}", args.out.display());
    }
    EXIT_OK
}

pub fn cmd_validate(file: &Path, config: &Config, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let text = match fs::read_to_string(file) {
        Ok(text) => text,
        Err(e) => {
            let _ = writeln!(err, "error: cannot read {}: {e}", file.display());
            return EXIT_FAILED;
        }
    };
    let parsed = match parse_codemeta(&text) {
        Ok(parsed) => parsed,
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", file.display());
            return EXIT_FAILED;
        }
    };
    let vocab = match config.vocabularies() {
        Ok(v) => v,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let mut violations = parsed.violations;
    violations.extend(validate_record(&parsed.record, &vocab));
    for v in &violations {
        let _ = writeln!(out, "{v}");
    }
    if violations.is_empty() {
        let _ = writeln!(err, "{}: valid", file.display());
        EXIT_OK
    } else {
        let _ = writeln!(err, "{}: {} violation(s)", file.display(), violations.len());
        EXIT_INVALID
    }
}

fn cmd_serve(args: ServeArgs, mut config: Config, err: &mut dyn Write) -> i32 {
    if let Some(listen) = args.listen {
        config.listen = listen;
    }
    config.fixtures = args.fixtures.or(config.fixtures);
    config.session_dir = args.session_dir.or(config.session_dir);
    config.ui_dir = args.ui_dir.or(config.ui_dir);

    let setup = (|| -> Result<Arc<AppState>, String> {
        let ttl_ms = config.session_ttl_secs.saturating_mul(1000);
        let store = match &config.session_dir {
            Some(dir) => {
                SessionStore::open(dir, ttl_ms).map_err(|e| format!("session directory {}: {e}", dir.display()))?
            }
            None => SessionStore::in_memory(ttl_ms),
        };
        let pipeline = config.pipeline().map_err(|e| e.to_string())?;
        let vocab = config.vocabularies().map_err(|e| e.to_string())?;
        let mut state = AppState::new(store, pipeline, vocab, transport_for(config.fixtures.as_deref()));
        state.default_token = config.default_token.clone();
        state.allowed_hosts = config.allowed_hosts.clone();
        Ok(Arc::new(state))
    })();
    let state = match setup {
        Ok(state) => state,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start runtime: {e}");
            return EXIT_FAILED;
        }
    };
    match runtime.block_on(api::serve(state, &config.listen, config.ui_dir.clone())) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", config.listen);
            EXIT_FAILED
        }
    }
}

fn fetch(url: &str) -> Result<String, String> {
    let request = HttpRequest { url: url.into(), path: String::new(), headers: Vec::new() };
    let response = UreqTransport::new(Duration::from_secs(60)).get(&request).map_err(|e| e.0)?;
    if response.status != 200 {
        return Err(format!("HTTP {} from {url}", response.status));
    }
    Ok(response.body)
}

fn cmd_refresh_vocab(args: &RefreshArgs, err: &mut dyn Write) -> i32 {
    let jobs = [
        (VocabularyKind::License, &args.licenses_from, &args.licenses_url, LICENSES_FILE),
        (VocabularyKind::Language, &args.languages_from, &args.languages_url, LANGUAGES_FILE),
    ];
    // Fetch and check both before writing either.
    let mut fetched = Vec::new();
    for (kind, from, url, file) in jobs {
        let text = match from {
            Some(path) => fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display())),
            None => fetch(url),
        };
        let checked = text.and_then(|t| load_vocabulary(kind, &t).map(|v| (t, v.len())).map_err(|e| e.to_string()));
        match checked {
            Ok((text, n)) => fetched.push((file, text, n)),
            Err(e) => {
                let _ = writeln!(err, "error: {file}: {e}");
                return EXIT_FAILED;
            }
        }
    }
    if let Err(e) = fs::create_dir_all(&args.out_dir) {
        let _ = writeln!(err, "error: {}: {e}", args.out_dir.display());
        return EXIT_FAILED;
    }
    for (file, text, n) in fetched {
        let path = args.out_dir.join(file);
        if let Err(e) = fs::write(&path, text) {
            let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
            return EXIT_FAILED;
        }
        let _ = writeln!(err, "wrote {} ({n} entries)", path.display());
    }
    EXIT_OK
}
