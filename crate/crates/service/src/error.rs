use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use graphscene_core::Error;
use serde::Serialize;

/// Error body shared by every endpoint. `code` is stable and meant for
/// programs, `message` for people.
#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub details: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eligible: Option<Vec<String>>,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: ErrorBody {
                code,
                message: message.into(),
                details: Vec::new(),
                eligible: None,
            },
        }
    }

    pub fn not_found(what: &str, id: &str) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("unknown {what} {id}"))
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }
}

fn status_of(err: &Error) -> StatusCode {
    match err {
        Error::Occupied { .. }
        | Error::Conflict(_)
        | Error::NotEligible { .. } | Error::AlreadyInRoi(_) | Error::StaleMap { .. } => {
            StatusCode::CONFLICT
        }
        Error::Validation(_) | Error::Domain(_) | Error::Planning(_) => StatusCode::UNPROCESSABLE_ENTITY,
        Error::Xml { .. } | Error::Structural(_) | Error::Format(_) => StatusCode::BAD_REQUEST,
        Error::Io { .. } => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl From<Error> for ApiError {
    fn from(err: Error) -> Self {
        let status = status_of(&err);
        let mut out = ApiError::new(status, err.code(), err.to_string());
        match err {
            Error::Validation(problems) => out.body.details = problems,
            Error::NotEligible { eligible, .. } => out.body.eligible = Some(eligible),
            _ => {}
        }
        if status.is_server_error() {
            log::error!("{}", out.body.message);
        }
        out
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

pub type ApiResult<T> = Result<T, ApiError>;
