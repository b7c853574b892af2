//! Chromosome decoding, objective computation and idle-interval local search.
//!
//! Level 1 places operations in sequence order, each into the earliest idle
//! interval of its assigned machine that can hold it. Level 2 re-decodes the
//! start-sorted chromosome and may move delayed operations to other machines;
//! the result is kept only if some objective strictly improves.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::genome::Chromosome;
use crate::instance::{FjspInstance, OpRef, Time};

/// Right end of the trailing idle interval of every machine.
pub const HORIZON: Time = Time::MAX;

/// Chance that an evaluation also runs the level-2 search.
pub const LEVEL2_PROBABILITY: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ObjectiveVector {
    pub makespan: Time,
    pub total_workload: Time,
    pub critical_workload: Time,
}

impl ObjectiveVector {
    pub fn new(makespan: Time, total_workload: Time, critical_workload: Time) -> Self {
        Self {
            makespan,
            total_workload,
            critical_workload,
        }
    }

    pub fn to_array(self) -> [Time; 3] {
        [self.makespan, self.total_workload, self.critical_workload]
    }

    pub fn to_f64(self) -> [f64; 3] {
        self.to_array().map(|v| v as f64)
    }

    /// True if some component is strictly smaller than in `other`.
    pub fn improves_on(&self, other: &ObjectiveVector) -> bool {
        self.to_array().iter().zip(other.to_array()).any(|(a, b)| *a < b)
    }
}

impl From<[Time; 3]> for ObjectiveVector {
    fn from(v: [Time; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

impl fmt::Display for ObjectiveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.makespan, self.total_workload, self.critical_workload)
    }
}

/// Half-open idle interval; `end == HORIZON` marks the open trailing interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interval {
    pub start: Time,
    pub end: Time,
}

/// True iff an operation ready at `job_ready` with length `duration` fits in `interval`.
pub fn interval_feasible(interval: Interval, job_ready: Time, duration: Time) -> bool {
    interval
        .start
        .max(job_ready)
        .checked_add(duration)
        .is_some_and(|end| end <= interval.end)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Placement {
    pub op: OpRef,
    pub machine: usize,
    pub start: Time,
    pub end: Time,
}

/// One exported schedule row, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleRow {
    pub job: usize,
    pub op: usize,
    pub machine: usize,
    pub start: Time,
    pub end: Time,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleViolation {
    #[error("{op} is not placed")]
    Missing { op: OpRef },
    #[error("{op} runs on machine {machine}, which cannot process it")]
    Capability { op: OpRef, machine: usize },
    #[error("{op} lasts {found} but takes {expected} on machine {machine}")]
    Duration {
        op: OpRef,
        machine: usize,
        expected: Time,
        found: Time,
    },
    #[error("{a} and {b} overlap on machine {machine}")]
    Overlap { a: OpRef, b: OpRef, machine: usize },
    #[error("{op} starts at {start} before its predecessor ends at {ready}")]
    Precedence { op: OpRef, start: Time, ready: Time },
    #[error("idle table of machine {machine} does not complement its busy intervals")]
    IdleTable { machine: usize },
}

/// Placements indexed by flat operation index plus per-machine idle tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    placements: Vec<Placement>,
    idle: Vec<Vec<Interval>>,
}

impl Schedule {
    pub fn placements(&self) -> &[Placement] {
        &self.placements
    }

    pub fn placement(&self, flat: usize) -> &Placement {
        &self.placements[flat]
    }

    pub fn idle_table(&self, machine: usize) -> &[Interval] {
        &self.idle[machine]
    }

    pub fn objectives(&self) -> ObjectiveVector {
        objectives(&self.placements, self.idle.len())
    }

    /// Rows ordered by (start, machine, job).
    pub fn rows(&self) -> Vec<ScheduleRow> {
        let mut rows: Vec<ScheduleRow> = self
            .placements
            .iter()
            .map(|p| ScheduleRow {
                job: p.op.job + 1,
                op: p.op.index + 1,
                machine: p.machine + 1,
                start: p.start,
                end: p.end,
            })
            .collect();
        rows.sort_by_key(|r| (r.start, r.machine, r.job));
        rows
    }

    /// Checks capability, durations, overlap, precedence and idle tables.
    pub fn check(&self, instance: &FjspInstance) -> Result<(), ScheduleViolation> {
        check_placements(&self.placements, instance)?;
        for machine in 0..instance.num_machines() {
            let mut busy: Vec<(Time, Time)> = self
                .placements
                .iter()
                .filter(|p| p.machine == machine)
                .map(|p| (p.start, p.end))
                .collect();
            busy.sort_unstable();
            let mut expected = Vec::new();
            let mut cursor = 0;
            for (s, e) in busy {
                if s > cursor {
                    expected.push(Interval { start: cursor, end: s });
                }
                cursor = e;
            }
            expected.push(Interval {
                start: cursor,
                end: HORIZON,
            });
            if expected != self.idle[machine] {
                return Err(ScheduleViolation::IdleTable { machine });
            }
        }
        Ok(())
    }
}

/// Validates raw placements (indexed by flat operation index).
pub fn check_placements(placements: &[Placement], instance: &FjspInstance) -> Result<(), ScheduleViolation> {
    if placements.len() != instance.total_operations() {
        let op = instance.op_ref(placements.len().min(instance.total_operations().saturating_sub(1)));
        return Err(ScheduleViolation::Missing { op });
    }
    for (flat, p) in placements.iter().enumerate() {
        let op = instance.op_ref(flat);
        if p.op != op {
            return Err(ScheduleViolation::Missing { op });
        }
        let expected = instance
            .operation(flat)
            .duration_on(p.machine)
            .ok_or(ScheduleViolation::Capability { op, machine: p.machine })?;
        if p.end < p.start || p.end - p.start != expected {
            return Err(ScheduleViolation::Duration {
                op,
                machine: p.machine,
                expected,
                found: p.end.saturating_sub(p.start),
            });
        }
        if op.index > 0 {
            let ready = placements[flat - 1].end;
            if p.start < ready {
                return Err(ScheduleViolation::Precedence { op, start: p.start, ready });
            }
        }
    }
    let mut by_machine: Vec<&Placement> = placements.iter().collect();
    by_machine.sort_by_key(|p| (p.machine, p.start, p.end));
    for w in by_machine.windows(2) {
        if w[0].machine == w[1].machine && w[1].start < w[0].end {
            return Err(ScheduleViolation::Overlap {
                a: w[0].op,
                b: w[1].op,
                machine: w[0].machine,
            });
        }
    }
    Ok(())
}

/// Makespan, total workload and maximum machine workload of a placement set.
pub fn objectives(placements: &[Placement], num_machines: usize) -> ObjectiveVector {
    let mut workload = vec![0; num_machines];
    let mut makespan = 0;
    for p in placements {
        workload[p.machine] += p.end - p.start;
        makespan = makespan.max(p.end);
    }
    ObjectiveVector::new(
        makespan,
        workload.iter().sum(),
        workload.iter().copied().max().unwrap_or(0),
    )
}

/// Result of decoding one chromosome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub schedule: Schedule,
    pub objectives: ObjectiveVector,
    /// Input chromosome with the sequence re-sorted by start time.
    pub chromosome: Chromosome,
}

/// Incremental schedule under construction.
struct Builder<'a> {
    instance: &'a FjspInstance,
    idle: Vec<Vec<Interval>>,
    placements: Vec<Option<Placement>>,
    machine_end: Vec<Time>,
    workload: Vec<Time>,
}

impl<'a> Builder<'a> {
    fn new(instance: &'a FjspInstance) -> Self {
        let m = instance.num_machines();
        Self {
            instance,
            idle: vec![
                vec![Interval {
                    start: 0,
                    end: HORIZON
                }];
                m
            ],
            placements: vec![None; instance.total_operations()],
            machine_end: vec![0; m],
            workload: vec![0; m],
        }
    }

    fn job_ready(&self, flat: usize) -> Time {
        if self.instance.op_ref(flat).index == 0 {
            0
        } else {
            self.placements[flat - 1]
                .expect("job predecessor placed first")
                .end
        }
    }

    /// Earliest feasible interval on `machine`: (interval index, start).
    fn earliest(&self, machine: usize, ready: Time, duration: Time) -> (usize, Time) {
        self.idle[machine]
            .iter()
            .enumerate()
            .find(|(_, iv)| interval_feasible(**iv, ready, duration))
            .map(|(i, iv)| (i, iv.start.max(ready)))
            .expect("trailing interval is always feasible")
    }

    fn place(&mut self, flat: usize, machine: usize, slot: usize, start: Time, duration: Time) {
        let end = start + duration;
        let iv = self.idle[machine][slot];
        let mut pieces = Vec::with_capacity(2);
        if iv.start < start {
            pieces.push(Interval { start: iv.start, end: start });
        }
        if end < iv.end {
            pieces.push(Interval { start: end, end: iv.end });
        }
        self.idle[machine].splice(slot..=slot, pieces);
        self.machine_end[machine] = self.machine_end[machine].max(end);
        self.workload[machine] += duration;
        self.placements[flat] = Some(Placement {
            op: self.instance.op_ref(flat),
            machine,
            start,
            end,
        });
    }

    fn finish(self, mut chromosome: Chromosome) -> Decoded {
        let placements: Vec<Placement> = self
            .placements
            .into_iter()
            .map(|p| p.expect("every operation placed"))
            .collect();
        let mut order: Vec<&Placement> = placements.iter().collect();
        order.sort_by_key(|p| (p.start, p.machine, p.op.job));
        chromosome.os = order.iter().map(|p| p.op.job).collect();
        let schedule = Schedule {
            placements,
            idle: self.idle,
        };
        Decoded {
            objectives: schedule.objectives(),
            schedule,
            chromosome,
        }
    }
}

/// Greedy earliest-interval decoding on the assigned machines.
pub fn decode_level1(c: &Chromosome, instance: &FjspInstance) -> Decoded {
    let mut b = Builder::new(instance);
    for flat in c.sequence(instance) {
        let alt = instance.operation(flat).alternatives[c.ma[flat]];
        let ready = b.job_ready(flat);
        let (slot, start) = b.earliest(alt.machine, ready, alt.duration);
        b.place(flat, alt.machine, slot, start, alt.duration);
    }
    b.finish(c.clone())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Level2Outcome {
    pub decoded: Decoded,
    pub accepted: bool,
    /// Operations moved to another machine during the pass.
    pub moves: usize,
}

/// Second-level search over a level-1 result.
///
/// Re-decodes the start-sorted chromosome. An operation whose tentative start
/// on its own machine is later than the completion of its job predecessor may
/// move to the earliest feasible interval of the first other capable machine
/// (by index) for which the move is shorter, or for which the source machine
/// currently has the largest completion time or the largest workload.
pub fn decode_level2(level1: &Decoded, instance: &FjspInstance) -> Level2Outcome {
    let mut chromosome = level1.chromosome.clone();
    let mut b = Builder::new(instance);
    let mut moves = 0;
    for flat in chromosome.sequence(instance) {
        let op = instance.operation(flat);
        let alt = op.alternatives[chromosome.ma[flat]];
        let ready = b.job_ready(flat);
        let (slot, start) = b.earliest(alt.machine, ready, alt.duration);
        let delayed = instance.op_ref(flat).index > 0 && start > ready;
        if delayed {
            let src = alt.machine;
            let src_end = b.machine_end[src].max(start + alt.duration);
            let src_load = b.workload[src] + alt.duration;
            let max_end = (0..instance.num_machines())
                .map(|k| if k == src { src_end } else { b.machine_end[k] })
                .max()
                .unwrap_or(0);
            let max_load = (0..instance.num_machines())
                .map(|k| if k == src { src_load } else { b.workload[k] })
                .max()
                .unwrap_or(0);
            let source_critical = src_end >= max_end || src_load >= max_load;
            let mut targets: Vec<(usize, usize)> = op
                .alternatives
                .iter()
                .enumerate()
                .filter(|(_, a)| a.machine != src)
                .map(|(i, a)| (a.machine, i))
                .collect();
            targets.sort_unstable();
            let target = targets
                .into_iter()
                .find(|&(_, i)| source_critical || op.alternatives[i].duration < alt.duration);
            if let Some((machine, i)) = target {
                let duration = op.alternatives[i].duration;
                let (slot, start) = b.earliest(machine, ready, duration);
                b.place(flat, machine, slot, start, duration);
                chromosome.ma[flat] = i;
                moves += 1;
                continue;
            }
        }
        b.place(flat, alt.machine, slot, start, alt.duration);
    }
    let candidate = b.finish(chromosome);
    if moves > 0 && candidate.objectives.improves_on(&level1.objectives) {
        Level2Outcome {
            decoded: candidate,
            accepted: true,
            moves,
        }
    } else {
        Level2Outcome {
            decoded: level1.clone(),
            accepted: false,
            moves,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level2Status {
    NotFired,
    Rejected,
    Accepted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub level1: ObjectiveVector,
    pub level2: Level2Status,
    pub decoded: Decoded,
}

impl Evaluation {
    pub fn objectives(&self) -> ObjectiveVector {
        self.decoded.objectives
    }
}

/// One budgeted evaluation: level 1 always, level 2 with probability `p_level2`.
pub fn evaluate_with<R: Rng + ?Sized>(
    c: &Chromosome,
    instance: &FjspInstance,
    p_level2: f64,
    rng: &mut R,
) -> Evaluation {
    evaluate_forced(c, instance, rng.random_bool(p_level2))
}

pub fn evaluate<R: Rng + ?Sized>(c: &Chromosome, instance: &FjspInstance, rng: &mut R) -> Evaluation {
    evaluate_with(c, instance, LEVEL2_PROBABILITY, rng)
}

/// Evaluation with the level-2 coin already decided.
pub fn evaluate_forced(c: &Chromosome, instance: &FjspInstance, level2: bool) -> Evaluation {
    let first = decode_level1(c, instance);
    let level1 = first.objectives;
    if !level2 {
        return Evaluation {
            level1,
            level2: Level2Status::NotFired,
            decoded: first,
        };
    }
    let out = decode_level2(&first, instance);
    Evaluation {
        level1,
        level2: if out.accepted {
            Level2Status::Accepted
        } else {
            Level2Status::Rejected
        },
        decoded: out.decoded,
    }
}
