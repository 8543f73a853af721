use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use crate::evaluation::{EvalError, EvaluationRequest, EvaluationResult, Evaluator};

/// Evaluates `requests` with at most `workers` in flight.
///
/// Results come back in request order regardless of completion order.
pub fn dispatch_evaluations(
    requests: &[EvaluationRequest],
    evaluator: &dyn Evaluator,
    workers: usize,
) -> Vec<Result<EvaluationResult, EvalError>> {
    let workers = workers.clamp(1, requests.len().max(1));
    if workers == 1 {
        return requests.iter().map(|r| evaluator.evaluate(r)).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<EvaluationResult, EvalError>>>> =
        Mutex::new((0..requests.len()).map(|_| None).collect());
    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(request) = requests.get(i) else { break };
                let outcome = evaluator.evaluate(request);
                slots.lock().expect("result slots")[i] = Some(outcome);
            });
        }
    });
    slots
        .into_inner()
        .expect("result slots")
        .into_iter()
        .map(|r| r.expect("every request evaluated"))
        .collect()
}
