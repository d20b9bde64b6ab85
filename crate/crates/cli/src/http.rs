//! The `/v1` HTTP API over a [`Workspace`].

use std::collections::BTreeMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use explaineo::builder::build_asg;
use explaineo::explain::{catalogue, AudienceProfile, QType, Question};
use explaineo::verify::{run_check, CheckId, VerifyError};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::service::{answer, Class, Failure};
use crate::workspace::{ModelSummary, Workspace};

pub struct ApiError(Failure);

impl<E: Into<Failure>> From<E> for ApiError {
    fn from(e: E) -> Self {
        ApiError(e.into())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.0.class.status()).expect("valid status");
        (status, Json(serde_json::json!({ "error": self.0 }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn json_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, Failure> {
    serde_json::from_slice(body)
        .map_err(|e| Failure::new(Class::Invalid, "bad_request", format!("request body: {e}")))
}

pub fn router(ws: Arc<Workspace>) -> Router {
    Router::new()
        .route("/v1/models", get(list_models))
        .route("/v1/models/{name}", put(put_model).get(get_model))
        .route("/v1/models/{name}/graph", get(model_graph))
        .route("/v1/models/{name}/instances", post(post_instance))
        .route("/v1/models/{name}/checks/{check}", post(post_check))
        .route("/v1/instances/{id}", get(get_instance))
        .route("/v1/questions", get(questions))
        .route("/v1/profiles", get(profiles))
        .route("/v1/ask", post(post_ask))
        .with_state(ws)
}

async fn list_models(State(ws): State<Arc<Workspace>>) -> ApiResult<Json<Vec<ModelSummary>>> {
    Ok(Json(ws.models()?))
}

async fn put_model(
    State(ws): State<Arc<Workspace>>,
    Path(name): Path<String>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<ModelSummary>)> {
    let source = String::from_utf8(body.to_vec())
        .map_err(|_| Failure::new(Class::Invalid, "bad_request", "model source must be UTF-8"))?;
    let summary = ws.put_model(&name, &source)?;
    let status = if summary.revision == 1 {
        StatusCode::CREATED
    } else {
        StatusCode::OK
    };
    Ok((status, Json(summary)))
}

#[derive(Serialize)]
struct ModelBody {
    #[serde(flatten)]
    summary: ModelSummary,
    source: String,
}

async fn get_model(
    State(ws): State<Arc<Workspace>>,
    Path(name): Path<String>,
) -> ApiResult<Json<ModelBody>> {
    let m = ws.model(&name)?;
    Ok(Json(ModelBody {
        summary: m.summary,
        source: m.source,
    }))
}

#[derive(Deserialize)]
struct GraphQuery {
    view: Option<String>,
    instance: Option<String>,
    centre: Option<String>,
    radius: Option<usize>,
}

async fn model_graph(
    State(ws): State<Arc<Workspace>>,
    Path(name): Path<String>,
    Query(q): Query<GraphQuery>,
) -> ApiResult<Json<serde_json::Value>> {
    let stored = ws.model(&name)?;
    if q.view.as_deref() == Some("asg") {
        return Ok(Json(build_asg(&stored.model).to_json()));
    }
    let instance = match &q.instance {
        Some(id) => Some(ws.instance(id)?.1),
        None => None,
    };
    let mut question = Question::new(QType::Visualisation);
    if let Some(view) = q.view {
        question = question.param("view", view.into());
    }
    if let Some(r) = q.radius {
        question = question.param("radius", r.into());
    }
    question.target = q.centre;
    let a = answer(None, &stored.model, instance.as_ref(), &question)?;
    Ok(Json(a.graph_view.to_json()))
}

#[derive(Deserialize)]
struct InstanceQuery {
    id: Option<String>,
}

async fn post_instance(
    State(ws): State<Arc<Workspace>>,
    Path(name): Path<String>,
    Query(q): Query<InstanceQuery>,
    body: Bytes,
) -> ApiResult<Response> {
    let inputs: BTreeMap<String, serde_json::Value> = json_body(&body)?;
    let record = ws.put_instance(&name, q.id.as_deref(), &inputs)?;
    Ok((StatusCode::CREATED, Json(record)).into_response())
}

async fn get_instance(
    State(ws): State<Arc<Workspace>>,
    Path(id): Path<String>,
) -> ApiResult<Response> {
    ws.instance(&id)?;
    Ok(Json(ws.instance_record(&id)?).into_response())
}

#[derive(Deserialize)]
struct CheckQuery {
    service: Option<String>,
}

async fn post_check(
    State(ws): State<Arc<Workspace>>,
    Path((name, check)): Path<(String, String)>,
    Query(q): Query<CheckQuery>,
) -> ApiResult<Response> {
    let stored = ws.model(&name)?;
    let check = CheckId::parse(&check).ok_or_else(|| {
        Failure::new(
            Class::NotFound,
            "not_found",
            VerifyError::UnknownCheck(check).to_string(),
        )
    })?;
    let report = run_check(&stored.model, check, q.service.as_deref())
        .map_err(|e| Failure::new(Class::NotFound, "not_found", e.to_string()))?;
    Ok(Json(report).into_response())
}

async fn questions() -> Response {
    Json(catalogue()).into_response()
}

async fn profiles() -> Response {
    Json(AudienceProfile::builtin()).into_response()
}

/// Body of `POST /v1/ask`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AskRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<String>,
    pub question: Question,
}

async fn post_ask(State(ws): State<Arc<Workspace>>, body: Bytes) -> ApiResult<Response> {
    let req: AskRequest = json_body(&body)?;
    let stored = ws.model(&req.model)?;
    let instance = match &req.instance {
        Some(id) => Some(ws.instance(id)?.1),
        None => None,
    };
    let a = answer(
        req.profile.as_deref(),
        &stored.model,
        instance.as_ref(),
        &req.question,
    )?;
    Ok(Json(a).into_response())
}

/// Serves the API on `listener` until the process is stopped.
pub async fn serve(ws: Arc<Workspace>, listener: tokio::net::TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router(ws)).await
}
