//! Runs the windows of a schedule on a pool of threads in dependency order.
//!
//! A window becomes ready once every window it depends on has finished.
//! Execution records are kept so that the depth of the schedule and the
//! concurrency actually reached can be read off a run.

use std::collections::VecDeque;
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::windows::Schedule;

/// When and where one window ran.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TaskRecord {
    pub id: usize,
    pub worker: usize,
    pub start: Duration,
    pub finish: Duration,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SchedulerReport {
    pub records: Vec<TaskRecord>,
    /// Windows that were ready before anything ran.
    pub ready_at_start: usize,
    /// Most windows running at the same moment.
    pub max_concurrency: usize,
}

impl SchedulerReport {
    /// Longest chain of windows, each starting after the previous one
    /// finished, along dependency edges. Built from the timestamps, so a
    /// scheduler that ignored a dependency would not shorten it silently:
    /// [`SchedulerReport::respects`] catches that.
    pub fn measured_stages(&self, schedule: &Schedule) -> usize {
        let mut by_id = vec![None; schedule.len()];
        for r in &self.records {
            by_id[r.id] = Some(*r);
        }
        let mut order: Vec<&TaskRecord> = self.records.iter().collect();
        order.sort_by_key(|r| r.start);
        let mut depth = vec![0usize; schedule.len()];
        for r in order {
            let before = schedule.windows[r.id]
                .depends_on
                .iter()
                .filter(|&&j| by_id[j].is_some_and(|dep: TaskRecord| dep.finish <= r.start))
                .map(|&j| depth[j])
                .max()
                .unwrap_or(0);
            depth[r.id] = before + 1;
        }
        depth.into_iter().max().unwrap_or(0)
    }

    /// Every window ran once and started after all its dependencies finished.
    pub fn respects(&self, schedule: &Schedule) -> bool {
        let mut by_id = vec![None; schedule.len()];
        for r in &self.records {
            if by_id[r.id].replace(*r).is_some() {
                return false;
            }
        }
        schedule.windows.iter().all(|w| {
            let Some(me) = by_id[w.id] else { return false };
            w.depends_on
                .iter()
                .all(|&j| by_id[j].is_some_and(|dep: TaskRecord| dep.finish <= me.start))
        })
    }
}

struct State<T> {
    ready: VecDeque<usize>,
    waiting_on: Vec<usize>,
    outputs: Vec<Option<T>>,
    running: usize,
    max_running: usize,
    finished: usize,
    failed: Option<Error>,
    records: Vec<TaskRecord>,
}

/// Runs `task(id, dependency outputs, worker)` for every window, at most
/// `workers` at a time. Outputs come back indexed by window id. The first
/// error stops the pool; a panicking task propagates its panic.
pub fn schedule_parallel<T, F>(schedule: &Schedule, workers: usize, task: F) -> Result<(Vec<T>, SchedulerReport)>
where
    T: Clone + Send,
    F: Fn(usize, &[T], usize) -> Result<T> + Sync,
{
    let n = schedule.len();
    let mut dependents = vec![Vec::new(); n];
    for w in &schedule.windows {
        for &j in &w.depends_on {
            dependents[j].push(w.id);
        }
    }
    let waiting_on: Vec<usize> = schedule.windows.iter().map(|w| w.depends_on.len()).collect();
    let ready: VecDeque<usize> = (0..n).filter(|&i| waiting_on[i] == 0).collect();
    let ready_at_start = ready.len();
    let state = Mutex::new(State {
        ready,
        waiting_on,
        outputs: vec![None; n],
        running: 0,
        max_running: 0,
        finished: 0,
        failed: None,
        records: Vec::with_capacity(n),
    });
    let wake = Condvar::new();
    let clock = Instant::now();

    std::thread::scope(|scope| {
        for me in 0..workers.max(1) {
            let state = &state;
            let wake = &wake;
            let task = &task;
            let dependents = &dependents;
            scope.spawn(move || loop {
                let (id, inputs) = {
                    let mut st = state.lock().expect("scheduler lock");
                    let id = loop {
                        if st.failed.is_some() || st.finished == n {
                            return;
                        }
                        if let Some(id) = st.ready.pop_front() {
                            break id;
                        }
                        st = wake.wait(st).expect("scheduler lock");
                    };
                    st.running += 1;
                    st.max_running = st.max_running.max(st.running);
                    let inputs: Vec<T> = schedule.windows[id]
                        .depends_on
                        .iter()
                        .map(|&j| st.outputs[j].clone().expect("dependencies finish first"))
                        .collect();
                    (id, inputs)
                };
                let start = clock.elapsed();
                let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| task(id, &inputs, me)));
                let finish = clock.elapsed();
                let mut st = state.lock().expect("scheduler lock");
                st.running -= 1;
                match outcome {
                    Ok(Ok(out)) => {
                        st.outputs[id] = Some(out);
                        st.finished += 1;
                        st.records.push(TaskRecord {
                            id,
                            worker: me,
                            start,
                            finish,
                        });
                        for &k in &dependents[id] {
                            st.waiting_on[k] -= 1;
                            if st.waiting_on[k] == 0 {
                                st.ready.push_back(k);
                            }
                        }
                    }
                    Ok(Err(e)) => {
                        st.failed.get_or_insert(e);
                    }
                    Err(panic) => {
                        st.failed.get_or_insert(Error::Invariant("window task panicked".into()));
                        drop(st);
                        wake.notify_all();
                        std::panic::resume_unwind(panic);
                    }
                }
                drop(st);
                wake.notify_all();
            });
        }
    });

    let st = state.into_inner().expect("scheduler lock");
    if let Some(e) = st.failed {
        return Err(e);
    }
    let outputs = st
        .outputs
        .into_iter()
        .map(|o| o.expect("every window ran"))
        .collect();
    Ok((
        outputs,
        SchedulerReport {
            records: st.records,
            ready_at_start,
            max_concurrency: st.max_running,
        },
    ))
}
