//! The single-slot asynchronous generation contract.
//!
//! At most one generation batch is ever in flight. A ticket is issued at a
//! cadence boundary, polled at every cycle boundary after that, and once
//! `cadence - 1` cycles have elapsed without delivery, training suspends
//! until the batch arrives. The executor behind the ticket is pluggable:
//! inline for bit-reproducible runs, a worker thread for wall-clock
//! overlap, and programmable stubs in tests.

use std::sync::mpsc;
use std::sync::Arc;
use std::thread;

use crate::archive::NodeId;
use crate::generator::{
    generate_batch, generate_batch_random_desc, CandidateLevel, GenerationContext,
    GeneratorBackend,
};
use crate::rngstream;
use crate::Real;

/// Everything one batch needs, captured at issue time so the worker never
/// touches shared state.
pub struct GenerationRequest {
    pub ctx: GenerationContext,
    pub m_target: usize,
    pub surplus_factor: Real,
    pub rollout_steps: usize,
    /// Replace phase one with uniform random mutation headers.
    pub random_descriptions: bool,
    /// Seed for every candidate stream in the batch.
    pub batch_seed: u64,
}

/// Run a request to completion against a backend. Shared by every
/// executor so inline and threaded runs produce identical batches.
pub fn run_request(req: &GenerationRequest, backend: &dyn GeneratorBackend) -> Vec<CandidateLevel> {
    let mut rng = rngstream::stream(req.batch_seed, "batch", &[]);
    if req.random_descriptions {
        generate_batch_random_desc(
            &req.ctx,
            req.m_target,
            req.surplus_factor,
            req.rollout_steps,
            backend,
            &mut rng,
        )
    } else {
        generate_batch(
            &req.ctx,
            req.m_target,
            req.surplus_factor,
            req.rollout_steps,
            backend,
            &mut rng,
        )
    }
}

#[derive(Debug, Clone)]
pub enum TicketStatus {
    InFlight,
    Delivered(Vec<CandidateLevel>),
    Failed(String),
}

/// The one in-flight generation batch.
#[derive(Debug, Clone)]
pub struct GenerationTicket {
    pub issued_at_cycle: u64,
    /// Archive parent the batch descends from; `None` for open-loop roots.
    pub parent: Option<NodeId>,
    pub status: TicketStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AwaitDecision {
    Proceed,
    Block,
}

/// The blocking rule. An undelivered ticket lets training continue while
/// fewer than `cadence - 1` cycles have elapsed since issue; from then on
/// the trainer must wait, otherwise the next issue boundary would arrive
/// with the slot still occupied.
pub fn await_generation(
    ticket: &GenerationTicket,
    cycles_elapsed: u64,
    cadence: usize,
) -> AwaitDecision {
    let in_flight = matches!(ticket.status, TicketStatus::InFlight);
    if in_flight && cycles_elapsed >= cadence.saturating_sub(1) as u64 {
        AwaitDecision::Block
    } else {
        AwaitDecision::Proceed
    }
}

/// Non-blocking progress report from an executor.
pub enum PollResult {
    Pending,
    Ready(Vec<CandidateLevel>),
    Broken(String),
}

/// Execution strategy for generation work. `launch` is called exactly once
/// per ticket, then `poll` once per cycle boundary until the batch lands;
/// `wait` only when the blocking rule fires.
pub trait TicketExecutor {
    fn launch(&mut self, req: GenerationRequest);

    fn poll(&mut self, cycles_elapsed: u64) -> PollResult;

    fn wait(&mut self) -> Result<Vec<CandidateLevel>, String>;
}

/// Runs the batch inline at launch; the result is picked up at the next
/// cycle boundary. Never blocks, and keeps runs bit-reproducible.
pub struct SequentialExecutor {
    backend: Arc<dyn GeneratorBackend>,
    ready: Option<Vec<CandidateLevel>>,
}

impl SequentialExecutor {
    pub fn new(backend: Arc<dyn GeneratorBackend>) -> SequentialExecutor {
        SequentialExecutor {
            backend,
            ready: None,
        }
    }
}

impl TicketExecutor for SequentialExecutor {
    fn launch(&mut self, req: GenerationRequest) {
        self.ready = Some(run_request(&req, self.backend.as_ref()));
    }

    fn poll(&mut self, _cycles_elapsed: u64) -> PollResult {
        match self.ready.take() {
            Some(batch) => PollResult::Ready(batch),
            None => PollResult::Broken("poll without a launched request".into()),
        }
    }

    fn wait(&mut self) -> Result<Vec<CandidateLevel>, String> {
        self.ready
            .take()
            .ok_or_else(|| "wait without a launched request".into())
    }
}

/// Runs each batch on its own worker thread so training cycles overlap
/// with generation.
pub struct ThreadedExecutor {
    backend: Arc<dyn GeneratorBackend>,
    rx: Option<mpsc::Receiver<Vec<CandidateLevel>>>,
}

impl ThreadedExecutor {
    pub fn new(backend: Arc<dyn GeneratorBackend>) -> ThreadedExecutor {
        ThreadedExecutor { backend, rx: None }
    }
}

impl TicketExecutor for ThreadedExecutor {
    fn launch(&mut self, req: GenerationRequest) {
        let (tx, rx) = mpsc::channel();
        let backend = Arc::clone(&self.backend);
        thread::spawn(move || {
            let batch = run_request(&req, backend.as_ref());
            let _ = tx.send(batch);
        });
        self.rx = Some(rx);
    }

    fn poll(&mut self, _cycles_elapsed: u64) -> PollResult {
        let Some(rx) = &self.rx else {
            return PollResult::Broken("poll without a launched request".into());
        };
        match rx.try_recv() {
            Ok(batch) => {
                self.rx = None;
                PollResult::Ready(batch)
            }
            Err(mpsc::TryRecvError::Empty) => PollResult::Pending,
            Err(mpsc::TryRecvError::Disconnected) => {
                self.rx = None;
                PollResult::Broken("generation worker exited without a result".into())
            }
        }
    }

    fn wait(&mut self) -> Result<Vec<CandidateLevel>, String> {
        let Some(rx) = self.rx.take() else {
            return Err("wait without a launched request".into());
        };
        rx.recv()
            .map_err(|_| "generation worker exited without a result".to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{BackendError, PerformanceProfile};
    use rand_chacha::ChaCha8Rng;

    fn ticket(status: TicketStatus) -> GenerationTicket {
        GenerationTicket {
            issued_at_cycle: 0,
            parent: None,
            status,
        }
    }

    #[test]
    fn blocking_rule_thresholds() {
        // cadence v blocks an in-flight ticket once v-1 cycles have elapsed.
        for cadence in [2usize, 3, 4] {
            for elapsed in 0..6u64 {
                let got = await_generation(&ticket(TicketStatus::InFlight), elapsed, cadence);
                let want = if elapsed >= (cadence - 1) as u64 {
                    AwaitDecision::Block
                } else {
                    AwaitDecision::Proceed
                };
                assert_eq!(got, want, "cadence {cadence}, elapsed {elapsed}");
            }
        }
    }

    #[test]
    fn delivered_and_failed_tickets_never_block() {
        for status in [
            TicketStatus::Delivered(Vec::new()),
            TicketStatus::Failed("boom".into()),
        ] {
            assert_eq!(
                await_generation(&ticket(status), 100, 2),
                AwaitDecision::Proceed
            );
        }
    }

    struct SlowBackend;

    impl GeneratorBackend for SlowBackend {
        fn dream_description(
            &self,
            _ctx: &GenerationContext,
            _rng: &mut ChaCha8Rng,
        ) -> Result<String, BackendError> {
            thread::sleep(std::time::Duration::from_millis(30));
            Err(BackendError::Unavailable("slow and broken".into()))
        }

        fn dream_program(
            &self,
            _ctx: &GenerationContext,
            _description: &str,
            _rng: &mut ChaCha8Rng,
        ) -> Result<String, BackendError> {
            Err(BackendError::Unavailable("never reached".into()))
        }
    }

    fn empty_ctx() -> GenerationContext {
        GenerationContext {
            domain_context_1: String::new(),
            domain_context_2: String::new(),
            parent_program: None,
            parent_perf: None,
            target_perf: PerformanceProfile::zeros(),
            mutation_instructions_1: String::new(),
            mutation_instructions_2: String::new(),
            few_shot: Vec::new(),
            open_loop: true,
        }
    }

    fn request() -> GenerationRequest {
        GenerationRequest {
            ctx: empty_ctx(),
            m_target: 2,
            surplus_factor: 1.0,
            rollout_steps: 4,
            random_descriptions: false,
            batch_seed: 11,
        }
    }

    #[test]
    fn threaded_executor_goes_pending_then_delivers_on_wait() {
        let mut exec = ThreadedExecutor::new(Arc::new(SlowBackend));
        exec.launch(request());
        // The worker sleeps 30ms per candidate, so an immediate poll has
        // nothing yet.
        assert!(matches!(exec.poll(0), PollResult::Pending));
        let batch = exec.wait().unwrap();
        assert_eq!(batch.len(), 2);
        assert!(batch
            .iter()
            .all(|c| !matches!(c.verdict, crate::generator::Verdict::Valid)));
    }

    #[test]
    fn sequential_executor_is_ready_at_first_poll() {
        let mut exec = SequentialExecutor::new(Arc::new(SlowBackend));
        exec.launch(request());
        match exec.poll(0) {
            PollResult::Ready(batch) => assert_eq!(batch.len(), 2),
            _ => panic!("sequential executor should deliver at the first poll"),
        }
        // The slot is consumed; a second poll without a launch is a bug.
        assert!(matches!(exec.poll(1), PollResult::Broken(_)));
    }
}
