//! Token-bucket admission control for backend calls.

use std::sync::Mutex;
use std::time::{Duration, Instant};

/// A thread-safe token bucket. `acquire` blocks the calling thread until a
/// token is available, serializing admission across concurrent stages.
pub struct RateLimiter {
    bucket: Mutex<Bucket>,
}

struct Bucket {
    capacity: f64,
    tokens: f64,
    refill_per_s: f64,
    last_refill: Instant,
}

impl Bucket {
    /// Take one token at `now`, or report how long to wait for one.
    fn take(&mut self, now: Instant) -> Result<(), Duration> {
        let elapsed = now.duration_since(self.last_refill).as_secs_f64();
        self.tokens = (self.tokens + elapsed * self.refill_per_s).min(self.capacity);
        self.last_refill = now;
        if self.tokens >= 1.0 {
            self.tokens -= 1.0;
            Ok(())
        } else {
            let deficit = 1.0 - self.tokens;
            Err(Duration::from_secs_f64(deficit / self.refill_per_s))
        }
    }
}

impl RateLimiter {
    /// `requests_per_s` sustained rate with an initial burst of `burst`
    /// immediate admissions.
    pub fn new(requests_per_s: f64, burst: u32) -> Self {
        let capacity = f64::from(burst.max(1));
        Self {
            bucket: Mutex::new(Bucket {
                capacity,
                tokens: capacity,
                refill_per_s: requests_per_s.max(f64::MIN_POSITIVE),
                last_refill: Instant::now(),
            }),
        }
    }

    pub fn acquire(&self) {
        loop {
            let wait = {
                let mut bucket = self.bucket.lock().expect("rate limiter lock poisoned");
                bucket.take(Instant::now())
            };
            match wait {
                Ok(()) => return,
                Err(d) => std::thread::sleep(d),
            }
        }
    }
}
