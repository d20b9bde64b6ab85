use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context as _, Result};
use clap::{Parser, Subcommand, ValueEnum};
use explaineo::builder::{build_asg, instance_graph, model_graph};
use explaineo::engine::{decode_inputs, evaluate, DecisionInstance, InstanceDocument};
use explaineo::explain::{QType, Question};
use explaineo::model::{parse_model, DecisionModel};
use explaineo::render::{
    export_graph_script, render_check, render_dot, render_table, render_table_csv, render_text,
};
use explaineo::verify::run_all_checks;

use crate::service::{answer, Class, Failure};
use crate::workspace::{Workspace, DEFAULT_DIR};

#[derive(Parser, Debug)]
#[command(
    name = "explaineo",
    version,
    about = "Explain decisions of rule-based decision models"
)]
pub struct Cli {
    /// Directory holding stored models and instances.
    #[arg(long, global = true, env = "EXPLAINEO_WORKSPACE", default_value = DEFAULT_DIR)]
    workspace: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every verification check; exits 1 when one fails.
    Check {
        /// Model file or stored model name.
        model: String,
        #[arg(long)]
        service: Option<String>,
        #[arg(long, value_enum, default_value_t = CheckFormat::Text)]
        format: CheckFormat,
    },
    /// Evaluate a model over JSON inputs.
    Eval {
        model: String,
        #[arg(long)]
        inputs: PathBuf,
        /// Write the instance document here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also store the instance in the workspace (stored models only).
        #[arg(long)]
        save: bool,
        /// Id for the stored instance; defaults to the next `<model>-<n>`.
        #[arg(long, requires = "save")]
        id: Option<String>,
    },
    /// Ask a question about a model or a decision.
    Ask {
        qtype: String,
        #[arg(long)]
        model: String,
        /// Instance document file or stored instance id.
        #[arg(long)]
        instance: Option<String>,
        #[arg(long)]
        target: Option<String>,
        /// Question parameter as `key=value`; values are read as JSON when
        /// they parse, as strings otherwise.
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
        #[arg(long)]
        profile: Option<String>,
        #[arg(long, value_enum, default_value_t = AskFormat::Text)]
        format: AskFormat,
    },
    /// Export the model graph, or the instance graph when an instance is given.
    Export {
        model: String,
        #[arg(long)]
        instance: Option<String>,
        #[arg(long, value_enum)]
        to: ExportFormat,
        /// Export the abstract syntax graph instead of the simplified graph.
        #[arg(long, conflicts_with = "instance")]
        asg: bool,
    },
    /// Validate a model file and store it in the workspace.
    Put {
        file: PathBuf,
        /// Stored name; defaults to the name the model declares.
        #[arg(long)]
        name: Option<String>,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum CheckFormat {
    Text,
    Json,
    Dot,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum AskFormat {
    Text,
    Json,
    Dot,
    Table,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ExportFormat {
    Dot,
    Cypher,
    Json,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// A model file when `arg` names one, a stored model otherwise.
fn load_model(ws: &Workspace, arg: &str) -> Result<Arc<DecisionModel>> {
    let path = Path::new(arg);
    if path.is_file() {
        let model = parse_model(&read(path)?).map_err(|diagnostics| Failure {
            diagnostics,
            ..Failure::new(
                Class::Invalid,
                "invalid_model",
                format!("{} does not validate", path.display()),
            )
        })?;
        return Ok(Arc::new(model));
    }
    Ok(ws.model(arg).map_err(Failure::from)?.model)
}

/// An instance document file when `arg` names one, a stored instance
/// otherwise. Either way it is re-evaluated against `model`.
fn load_instance(
    ws: &Workspace,
    model: &Arc<DecisionModel>,
    arg: &str,
) -> Result<DecisionInstance> {
    let path = Path::new(arg);
    if path.is_file() {
        let doc: InstanceDocument = serde_json::from_str(&read(path)?)
            .with_context(|| format!("reading {}", path.display()))?;
        return DecisionInstance::from_document(model.clone(), &doc)
            .with_context(|| format!("instance {}", path.display()));
    }
    Ok(ws.instance(arg).map_err(Failure::from)?.1)
}

fn param(raw: &str) -> Result<(String, serde_json::Value)> {
    let Some((k, v)) = raw.split_once('=') else {
        bail!("parameter `{raw}` is not of the form key=value");
    };
    let value = serde_json::from_str(v).unwrap_or_else(|_| serde_json::Value::String(v.into()));
    Ok((k.to_string(), value))
}

impl Cli {
    /// Parses an argument vector whose first element is the program name.
    pub fn from_args<I, T>(args: I) -> Result<Cli, clap::Error>
    where
        I: IntoIterator<Item = T>,
        T: Into<std::ffi::OsString> + Clone,
    {
        Cli::try_parse_from(args)
    }
}

/// Runs one command, writing its output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<ExitCode> {
    let mut emit = |text: &str| -> Result<()> {
        out.write_all(text.as_bytes())?;
        out.flush()?;
        Ok(())
    };
    let ws = Workspace::open(&cli.workspace).map_err(Failure::from)?;
    match cli.command {
        Command::Check {
            model,
            service,
            format,
        } => {
            let model = load_model(&ws, &model)?;
            let reports = run_all_checks(&model, service.as_deref())
                .map_err(|e| Failure::new(Class::NotFound, "not_found", e.to_string()))?;
            let out = match format {
                CheckFormat::Text => {
                    let passed = reports.iter().filter(|r| r.passed()).count();
                    let mut out: Vec<String> = reports.iter().map(render_check).collect();
                    out.push(format!("{passed} of {} checks passed\n", reports.len()));
                    out.join("\n")
                }
                CheckFormat::Json => format!("{}\n", serde_json::to_string_pretty(&reports)?),
                CheckFormat::Dot => reports.iter().map(|r| render_dot(&r.graph_view)).collect(),
            };
            emit(&out)?;
            Ok(if reports.iter().all(|r| r.passed()) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Eval {
            model,
            inputs,
            output,
            save,
            id,
        } => {
            let raw: std::collections::BTreeMap<String, serde_json::Value> =
                serde_json::from_str(&read(&inputs)?)
                    .with_context(|| format!("reading {}", inputs.display()))?;
            let json = if save {
                if Path::new(&model).is_file() {
                    bail!("--save needs a stored model; store it first with `explaineo put`");
                }
                let record = ws
                    .put_instance(&model, id.as_deref(), &raw)
                    .map_err(Failure::from)?;
                eprintln!("stored instance {}", record.id);
                serde_json::to_string_pretty(&record)?
            } else {
                let model = load_model(&ws, &model)?;
                let decoded = decode_inputs(&model, &raw)
                    .map_err(|e| Failure::from(crate::workspace::WorkspaceError::Eval(e)))?;
                let instance = evaluate(&model, &decoded)
                    .map_err(|e| Failure::from(crate::workspace::WorkspaceError::Eval(e)))?;
                serde_json::to_string_pretty(&instance.to_document())?
            };
            match output {
                Some(path) => std::fs::write(&path, format!("{json}\n"))
                    .with_context(|| format!("writing {}", path.display()))?,
                None => emit(&format!("{json}\n"))?,
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Ask {
            qtype,
            model,
            instance,
            target,
            params,
            profile,
            format,
        } => {
            let Some(qtype) = QType::parse(&qtype) else {
                let known: Vec<&str> = QType::ALL.iter().map(|q| q.as_str()).collect();
                bail!(
                    "unknown question type `{qtype}`; expected one of {}",
                    known.join(", ")
                );
            };
            let model = load_model(&ws, &model)?;
            let instance = instance
                .map(|i| load_instance(&ws, &model, &i))
                .transpose()?;
            let mut question = Question::new(qtype);
            question.target = target;
            for raw in &params {
                let (k, v) = param(raw)?;
                question.parameters.insert(k, v);
            }
            let a = answer(profile.as_deref(), &model, instance.as_ref(), &question)?;
            let out = match format {
                AskFormat::Text => render_text(&a),
                AskFormat::Json => format!("{}\n", serde_json::to_string_pretty(&a)?),
                AskFormat::Dot => render_dot(&a.graph_view),
                AskFormat::Table => render_table(&a),
                AskFormat::Csv => render_table_csv(&a),
            };
            emit(&out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Export {
            model,
            instance,
            to,
            asg,
        } => {
            let model = load_model(&ws, &model)?;
            let graph = match (&instance, asg) {
                (Some(i), _) => instance_graph(&load_instance(&ws, &model, i)?),
                (None, true) => build_asg(&model),
                (None, false) => model_graph(&model),
            };
            let out = match to {
                ExportFormat::Dot => render_dot(&graph),
                ExportFormat::Cypher => export_graph_script(&graph),
                ExportFormat::Json => format!("{}\n", graph.to_json_pretty()),
            };
            emit(&out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Put { file, name } => {
            let source = read(&file)?;
            let name = match name {
                Some(n) => n,
                None => match parse_model(&source) {
                    Ok(m) => m.name,
                    Err(diagnostics) => {
                        return Err(Failure {
                            diagnostics,
                            ..Failure::new(
                                Class::Invalid,
                                "invalid_model",
                                format!("{} does not validate", file.display()),
                            )
                        }
                        .into())
                    }
                },
            };
            let summary = ws.put_model(&name, &source).map_err(Failure::from)?;
            emit(&format!(
                "stored model {} revision {}\n",
                summary.name, summary.revision
            ))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Serve { addr } => {
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async {
                let listener = tokio::net::TcpListener::bind(&addr)
                    .await
                    .with_context(|| format!("binding {addr}"))?;
                emit(&format!("listening on http://{}\n", listener.local_addr()?))?;
                crate::http::serve(Arc::new(ws), listener).await?;
                anyhow::Ok(())
            })?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli, &mut std::io::stdout().lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
