use std::sync::{Condvar, Mutex};

use super::{LlmProvider, PromptRequest, ProviderError};

#[derive(Debug, Default)]
struct Tickets {
    issued: u64,
    admitted: u64,
    in_flight: usize,
}

/// Admits at most `capacity` holders at once, in arrival order.
#[derive(Debug)]
pub struct FifoLimiter {
    capacity: usize,
    state: Mutex<Tickets>,
    turn: Condvar,
}

/// Releases its slot on drop.
pub struct Permit<'a> {
    limiter: &'a FifoLimiter,
}

impl FifoLimiter {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity: capacity.max(1),
            state: Mutex::new(Tickets::default()),
            turn: Condvar::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn acquire(&self) -> Permit<'_> {
        let mut state = self.state.lock().unwrap();
        let ticket = state.issued;
        state.issued += 1;
        while !(state.admitted == ticket && state.in_flight < self.capacity) {
            state = self.turn.wait(state).unwrap();
        }
        state.admitted += 1;
        state.in_flight += 1;
        drop(state);
        // the next ticket may also fit
        self.turn.notify_all();
        Permit { limiter: self }
    }

    pub fn in_flight(&self) -> usize {
        self.state.lock().unwrap().in_flight
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut state = self.limiter.state.lock().unwrap();
        state.in_flight -= 1;
        drop(state);
        self.limiter.turn.notify_all();
    }
}

/// Wraps a provider so that no more than `capacity` calls run at once.
pub struct RateLimited<P> {
    inner: P,
    limiter: FifoLimiter,
}

impl<P: LlmProvider> RateLimited<P> {
    pub fn new(inner: P, capacity: usize) -> Self {
        Self {
            inner,
            limiter: FifoLimiter::new(capacity),
        }
    }

    pub fn limiter(&self) -> &FifoLimiter {
        &self.limiter
    }
}

impl<P: LlmProvider> LlmProvider for RateLimited<P> {
    fn complete(&self, request: &PromptRequest) -> Result<String, ProviderError> {
        let _permit = self.limiter.acquire();
        self.inner.complete(request)
    }

    fn name(&self) -> &str {
        self.inner.name()
    }

    fn deterministic(&self) -> bool {
        self.inner.deterministic()
    }
}
