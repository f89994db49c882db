use std::sync::Arc;

use thiserror::Error;
use tracing::{debug, warn};

use super::{
    parse_structured, render, LlmProvider, Params, ParseError, Payload, PromptKind, PromptRequest,
    ProviderError, TemplateError,
};

pub const DEFAULT_MAX_ATTEMPTS: u32 = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GatewayError {
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error("no valid {kind} reply after {attempts} attempts; last problem: {last}")]
    Exhausted {
        kind: PromptKind,
        attempts: u32,
        last: ParseError,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructuredReply {
    pub payload: Payload,
    pub attempts: u32,
    pub raw: String,
}

/// The line appended to a prompt after an invalid reply.
pub fn corrective_suffix(error: &ParseError) -> String {
    format!("Your previous reply was invalid: {error}. Return only the required format.")
}

/// Renders `kind` with `params` and runs [`complete_request`].
pub fn complete_validated(
    provider: &dyn LlmProvider,
    kind: PromptKind,
    params: &Params,
    max_attempts: u32,
) -> Result<StructuredReply, GatewayError> {
    let request = render(kind, params)?;
    complete_request(provider, &request, max_attempts)
}

/// Calls the provider until a reply parses, at most `max_attempts` times.
///
/// Each retry re-sends the original request with a corrective suffix naming
/// the previous parse failure. Transport failures abort immediately.
pub fn complete_request(
    provider: &dyn LlmProvider,
    request: &PromptRequest,
    max_attempts: u32,
) -> Result<StructuredReply, GatewayError> {
    let max_attempts = max_attempts.max(1);
    let mut last_error: Option<ParseError> = None;
    for attempt in 1..=max_attempts {
        let outgoing = match &last_error {
            None => request.clone(),
            Some(err) => {
                let mut retry = request.clone();
                retry.user_text.push_str("\n\n");
                retry.user_text.push_str(&corrective_suffix(err));
                retry
            }
        };
        let raw = provider.complete(&outgoing)?;
        match parse_structured(request.kind, &raw, &request.params) {
            Ok(payload) => {
                debug!(kind = %request.kind, attempt, provider = provider.name(), "reply accepted");
                return Ok(StructuredReply {
                    payload,
                    attempts: attempt,
                    raw,
                });
            }
            Err(err) => {
                warn!(kind = %request.kind, attempt, code = err.code(), "reply rejected: {err}");
                last_error = Some(err);
            }
        }
    }
    Err(GatewayError::Exhausted {
        kind: request.kind,
        attempts: max_attempts,
        last: last_error.expect("at least one attempt ran"),
    })
}

/// A provider plus the retry budget used for every call through it.
#[derive(Clone)]
pub struct Gateway {
    provider: Arc<dyn LlmProvider>,
    max_attempts: u32,
}

impl Gateway {
    pub fn new(provider: Arc<dyn LlmProvider>) -> Self {
        Self {
            provider,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
        }
    }

    pub fn with_max_attempts(mut self, max_attempts: u32) -> Self {
        self.max_attempts = max_attempts.max(1);
        self
    }

    pub fn provider(&self) -> &dyn LlmProvider {
        self.provider.as_ref()
    }

    pub fn max_attempts(&self) -> u32 {
        self.max_attempts
    }

    pub fn complete(&self, kind: PromptKind, params: &Params) -> Result<StructuredReply, GatewayError> {
        complete_validated(self.provider.as_ref(), kind, params, self.max_attempts)
    }

    pub fn complete_request(&self, request: &PromptRequest) -> Result<StructuredReply, GatewayError> {
        complete_request(self.provider.as_ref(), request, self.max_attempts)
    }
}

impl std::fmt::Debug for Gateway {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gateway")
            .field("provider", &self.provider.name())
            .field("max_attempts", &self.max_attempts)
            .finish()
    }
}
