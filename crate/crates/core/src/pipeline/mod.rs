//! The curriculum loop.
//!
//! A run is a sequence of training cycles. At each cycle boundary the
//! pipeline polls the single in-flight generation ticket, inserts whatever
//! it delivered, issues a new ticket on the cadence, then trains one batch
//! plan of episodes and refreshes the success bonus. Held-out evaluations
//! land on a fixed seed set and stream to `metrics.jsonl`; the lineage
//! graph, the policy and the launch manifest are dumped at the end.
//!
//! Baseline modes reuse the same loop with pieces switched off: target-only
//! and domain randomization never issue tickets, the open-loop ablation
//! generates blind, and plain replay draws random parents with random
//! mutation intents.

mod manifest;
mod run;
mod ticket;

pub use manifest::{discover_seed_levels, BackendKind, RunManifest, RunMode};
pub use run::{
    bootstrap, execute, metrics_to_csv, CycleReport, MetricsRecord, Pipeline, PipelineError,
    RunSummary,
};
pub use ticket::{
    await_generation, run_request, AwaitDecision, GenerationRequest, GenerationTicket, PollResult,
    SequentialExecutor, ThreadedExecutor, TicketExecutor, TicketStatus,
};
