//! Remote generation backend speaking the common chat-completion wire
//! format: POST {model, messages, temperature, top_p, max_tokens}, reply
//! read from choices[0].message.content. Replies may wrap the payload in
//! <docstring> (phase one) or <code> (phase two) tags; untagged replies are
//! taken whole.

use std::time::Duration;

use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::generator::{BackendError, GenerationContext, GeneratorBackend};

pub const DEFAULT_TIMEOUT_SECS: u64 = 120;

pub struct RemoteBackend {
    url: String,
    model: String,
    api_key: Option<String>,
    temperature: f64,
    top_p: f64,
    max_tokens: u32,
    client: reqwest::blocking::Client,
}

impl RemoteBackend {
    pub fn new(
        url: &str,
        model: &str,
        api_key: Option<&str>,
        timeout: Duration,
    ) -> Result<RemoteBackend, BackendError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| BackendError::Unavailable(e.to_string()))?;
        Ok(RemoteBackend {
            url: url.to_string(),
            model: model.to_string(),
            api_key: api_key.map(str::to_string),
            temperature: 0.8,
            top_p: 0.95,
            max_tokens: 1024,
            client,
        })
    }

    /// Configuration from GENERATOR_URL (required), GENERATOR_MODEL,
    /// GENERATOR_API_KEY and GENERATOR_TIMEOUT_SECS.
    pub fn from_env() -> Result<RemoteBackend, BackendError> {
        let url = std::env::var("GENERATOR_URL")
            .map_err(|_| BackendError::Unavailable("GENERATOR_URL is not set".into()))?;
        let model = std::env::var("GENERATOR_MODEL").unwrap_or_else(|_| "default".into());
        let api_key = std::env::var("GENERATOR_API_KEY").ok();
        let timeout = std::env::var("GENERATOR_TIMEOUT_SECS")
            .ok()
            .and_then(|s| s.parse::<u64>().ok())
            .unwrap_or(DEFAULT_TIMEOUT_SECS);
        RemoteBackend::new(&url, &model, api_key.as_deref(), Duration::from_secs(timeout))
    }

    fn complete(&self, system: &str, user: &str) -> Result<String, BackendError> {
        let body = json!({
            "model": self.model,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
            "temperature": self.temperature,
            "top_p": self.top_p,
            "max_tokens": self.max_tokens,
        });
        let mut req = self.client.post(&self.url).json(&body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req
            .send()
            .map_err(|e| BackendError::Request(e.to_string()))?;
        let status = resp.status();
        if !status.is_success() {
            return Err(BackendError::Request(format!("http status {status}")));
        }
        let value: serde_json::Value = resp
            .json()
            .map_err(|e| BackendError::Malformed(e.to_string()))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| {
                BackendError::Malformed("reply lacks choices[0].message.content".into())
            })
    }
}

impl GeneratorBackend for RemoteBackend {
    fn dream_description(
        &self,
        ctx: &GenerationContext,
        _rng: &mut ChaCha8Rng,
    ) -> Result<String, BackendError> {
        let user = render_description_request(ctx);
        let reply = self.complete(&ctx.domain_context_1, &user)?;
        Ok(extract_tagged(&reply, "docstring").unwrap_or(reply.trim()).to_string())
    }

    fn dream_program(
        &self,
        ctx: &GenerationContext,
        description: &str,
        _rng: &mut ChaCha8Rng,
    ) -> Result<String, BackendError> {
        let user = render_program_request(ctx, description);
        let reply = self.complete(&ctx.domain_context_2, &user)?;
        Ok(extract_tagged(&reply, "code").unwrap_or(reply.trim()).to_string())
    }
}

/// User-message body for the description phase.
pub fn render_description_request(ctx: &GenerationContext) -> String {
    let mut out = String::new();
    if let Some(parent) = &ctx.parent_program {
        out.push_str("Parent level:\n");
        out.push_str(&parent.source_text);
        out.push('\n');
    }
    if let Some(perf) = &ctx.parent_perf {
        out.push_str(&perf.render("Parent performance:"));
        out.push('\n');
    }
    out.push_str(&ctx.target_perf.render("Target task performance:"));
    out.push('\n');
    out.push_str(&ctx.mutation_instructions_1);
    out
}

/// User-message body for the program phase.
pub fn render_program_request(ctx: &GenerationContext, description: &str) -> String {
    let mut out = String::new();
    for (i, example) in ctx.few_shot.iter().enumerate() {
        out.push_str(&format!("Example {}:\n{}\n", i + 1, example.source_text));
    }
    if let Some(parent) = &ctx.parent_program {
        out.push_str("Parent level:\n");
        out.push_str(&parent.source_text);
        out.push('\n');
    }
    out.push_str("Description:\n");
    out.push_str(description);
    out.push('\n');
    out.push_str(&ctx.mutation_instructions_2);
    out
}

fn extract_tagged<'t>(text: &'t str, tag: &str) -> Option<&'t str> {
    let open = format!("<{tag}>");
    let close = format!("</{tag}>");
    let start = text.find(&open)? + open.len();
    let end = text[start..].find(&close)? + start;
    Some(text[start..end].trim())
}
