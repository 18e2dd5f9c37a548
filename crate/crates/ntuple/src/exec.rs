//! A thread-pool [`Executor`]; chunk results come back in chunk order, so
//! output does not depend on the number of jobs.

use ntuple_core::Executor;

#[derive(Debug, Clone, Copy)]
pub struct Threads {
    pub jobs: usize,
}

impl Threads {
    pub fn new(jobs: usize) -> Self {
        Threads { jobs: jobs.max(1) }
    }

    pub fn available() -> Self {
        Self::new(std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

impl Executor for Threads {
    fn map_chunks<T: Send>(&self, count: usize, f: &(dyn Fn(usize) -> T + Sync)) -> Vec<T> {
        let workers = self.jobs.min(count);
        if workers <= 1 {
            return (0..count).map(f).collect();
        }
        let mut slots: Vec<Option<T>> = (0..count).map(|_| None).collect();
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers)
                .map(|w| s.spawn(move || (w..count).step_by(workers).map(|c| (c, f(c))).collect::<Vec<_>>()))
                .collect();
            for h in handles {
                for (c, v) in h.join().expect("worker thread panicked") {
                    slots[c] = Some(v);
                }
            }
        });
        slots.into_iter().map(|v| v.expect("every chunk ran")).collect()
    }
}
