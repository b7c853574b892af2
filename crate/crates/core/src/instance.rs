//! Flexible job-shop problem data and the `.fjs` benchmark text format.
//!
//! The format is whitespace separated integers:
//!
//! ```text
//! n m [avg_flex]
//! l_1  a_11 k t k t ...  a_12 k t ...
//! ...
//! ```
//!
//! one line per job, where every operation lists its alternative count
//! followed by that many `machine duration` pairs. Machines are 1-based in the
//! file; everything in memory is 0-based.

use std::fmt;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

/// Integer time unit used for durations, start and completion times.
pub type Time = u64;

/// One way of processing an operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Alternative {
    /// 0-based machine index.
    pub machine: usize,
    pub duration: Time,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Operation {
    pub alternatives: Vec<Alternative>,
}

impl Operation {
    /// Processing time on `machine`, if the machine is capable.
    pub fn duration_on(&self, machine: usize) -> Option<Time> {
        self.alternatives
            .iter()
            .find(|a| a.machine == machine)
            .map(|a| a.duration)
    }

    /// Position of `machine` in the alternative list.
    pub fn alternative_of(&self, machine: usize) -> Option<usize> {
        self.alternatives.iter().position(|a| a.machine == machine)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Job {
    pub operations: Vec<Operation>,
}

/// Identity of an operation: job and position within the job, both 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OpRef {
    pub job: usize,
    pub index: usize,
}

impl fmt::Display for OpRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "O{},{}", self.job + 1, self.index + 1)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("instance needs at least one job")]
    NoJobs,
    #[error("instance needs at least one machine")]
    NoMachines,
    #[error("job {job} has no operations")]
    EmptyJob { job: usize },
    #[error("operation {op} has no alternatives")]
    NoAlternatives { op: OpRef },
    #[error("operation {op} references machine {machine} outside 1..={machines}")]
    MachineOutOfRange {
        op: OpRef,
        machine: usize,
        machines: usize,
    },
    #[error("operation {op} lists machine {machine} twice")]
    DuplicateMachine { op: OpRef, machine: usize },
    #[error("operation {op} has a zero duration")]
    ZeroDuration { op: OpRef },
}

#[derive(Debug, Error, PartialEq)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, PartialEq)]
pub enum ParseErrorKind {
    #[error("empty input")]
    Empty,
    #[error("malformed header: {0}")]
    Header(String),
    #[error("expected an integer, found `{0}`")]
    NotAnInteger(String),
    #[error("job line ended early: {0}")]
    Truncated(String),
    #[error("job line has {extra} unexpected trailing token(s)")]
    TrailingTokens { extra: usize },
    #[error("expected {expected} job lines, found {found}")]
    MissingJobs { expected: usize, found: usize },
    #[error("unexpected content after the last job")]
    TrailingLines,
    #[error("machine index {machine} outside 1..={machines}")]
    MachineOutOfRange { machine: i64, machines: usize },
    #[error("duration must be positive, found {0}")]
    NonPositiveDuration(i64),
    #[error("{0}")]
    Invalid(InstanceError),
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: ParseError,
    },
}

/// An immutable, validated FJSP instance.
#[derive(Debug, Clone, PartialEq)]
pub struct FjspInstance {
    num_machines: usize,
    jobs: Vec<Job>,
    /// Flat index of each job's first operation; one extra trailing entry.
    offsets: Vec<usize>,
    /// Job of every flat operation index.
    op_jobs: Vec<usize>,
    declared_flexibility: Option<f64>,
}

impl FjspInstance {
    pub fn new(num_machines: usize, jobs: Vec<Job>) -> Result<Self, InstanceError> {
        if jobs.is_empty() {
            return Err(InstanceError::NoJobs);
        }
        if num_machines == 0 {
            return Err(InstanceError::NoMachines);
        }
        for (j, job) in jobs.iter().enumerate() {
            if job.operations.is_empty() {
                return Err(InstanceError::EmptyJob { job: j + 1 });
            }
            for (o, op) in job.operations.iter().enumerate() {
                let op_ref = OpRef { job: j, index: o };
                if op.alternatives.is_empty() {
                    return Err(InstanceError::NoAlternatives { op: op_ref });
                }
                let mut seen = vec![false; num_machines];
                for alt in &op.alternatives {
                    if alt.machine >= num_machines {
                        return Err(InstanceError::MachineOutOfRange {
                            op: op_ref,
                            machine: alt.machine + 1,
                            machines: num_machines,
                        });
                    }
                    if std::mem::replace(&mut seen[alt.machine], true) {
                        return Err(InstanceError::DuplicateMachine {
                            op: op_ref,
                            machine: alt.machine + 1,
                        });
                    }
                    if alt.duration == 0 {
                        return Err(InstanceError::ZeroDuration { op: op_ref });
                    }
                }
            }
        }

        let mut offsets = Vec::with_capacity(jobs.len() + 1);
        let mut op_jobs = Vec::new();
        let mut acc = 0;
        for (j, job) in jobs.iter().enumerate() {
            offsets.push(acc);
            acc += job.operations.len();
            op_jobs.extend(std::iter::repeat_n(j, job.operations.len()));
        }
        offsets.push(acc);

        Ok(Self {
            num_machines,
            jobs,
            offsets,
            op_jobs,
            declared_flexibility: None,
        })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, LoadError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
            path: path.display().to_string(),
            source,
        })?;
        parse_fjs(&text).map_err(|source| LoadError::Parse {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn num_jobs(&self) -> usize {
        self.jobs.len()
    }

    pub fn num_machines(&self) -> usize {
        self.num_machines
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    /// Total number of operations over all jobs.
    pub fn total_operations(&self) -> usize {
        self.op_jobs.len()
    }

    /// Sum of alternative-list lengths over all operations.
    pub fn total_alternatives(&self) -> usize {
        self.operations().map(|op| op.alternatives.len()).sum()
    }

    /// Average number of alternative machines per operation.
    pub fn flexibility(&self) -> f64 {
        self.total_alternatives() as f64 / self.total_operations() as f64
    }

    /// The flexibility value written in the file header, if any. Informational only.
    pub fn declared_flexibility(&self) -> Option<f64> {
        self.declared_flexibility
    }

    pub fn job_len(&self, job: usize) -> usize {
        self.jobs[job].operations.len()
    }

    /// Flat index of `O(job, index)` in the fixed job-by-job order.
    pub fn flat_index(&self, op: OpRef) -> usize {
        self.offsets[op.job] + op.index
    }

    /// Inverse of [`flat_index`](Self::flat_index).
    pub fn op_ref(&self, flat: usize) -> OpRef {
        let job = self.op_jobs[flat];
        OpRef {
            job,
            index: flat - self.offsets[job],
        }
    }

    pub fn job_of(&self, flat: usize) -> usize {
        self.op_jobs[flat]
    }

    /// Flat index of the first operation of `job`.
    pub fn job_offset(&self, job: usize) -> usize {
        self.offsets[job]
    }

    pub fn operation(&self, flat: usize) -> &Operation {
        let r = self.op_ref(flat);
        &self.jobs[r.job].operations[r.index]
    }

    /// Operations in the fixed job-by-job order.
    pub fn operations(&self) -> impl Iterator<Item = &Operation> + '_ {
        self.jobs.iter().flat_map(|j| j.operations.iter())
    }

    /// Serializes back to `.fjs` text. The header carries the recomputed flexibility.
    pub fn to_fjs(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} {} {}",
            self.num_jobs(),
            self.num_machines,
            format_flex(self.flexibility())
        );
        for job in &self.jobs {
            let mut tokens = vec![job.operations.len().to_string()];
            for op in &job.operations {
                tokens.push(op.alternatives.len().to_string());
                for alt in &op.alternatives {
                    tokens.push((alt.machine + 1).to_string());
                    tokens.push(alt.duration.to_string());
                }
            }
            let _ = writeln!(out, "{}", tokens.join(" "));
        }
        out
    }
}

fn format_flex(flex: f64) -> String {
    let s = format!("{flex:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

/// Parses the `.fjs` benchmark format.
///
/// Blank lines are skipped. The optional third header field is kept as
/// [`FjspInstance::declared_flexibility`] but never used for computation.
pub fn parse_fjs(text: &str) -> Result<FjspInstance, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (header_line, header) = lines.next().ok_or(ParseError {
        line: 1,
        kind: ParseErrorKind::Empty,
    })?;
    let header_err = |msg: &str| ParseError {
        line: header_line,
        kind: ParseErrorKind::Header(msg.to_string()),
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 2 || fields.len() > 3 {
        return Err(header_err("expected `jobs machines [flexibility]`"));
    }
    let num_jobs: usize = fields[0]
        .parse()
        .map_err(|_| header_err("job count is not a positive integer"))?;
    let num_machines: usize = fields[1]
        .parse()
        .map_err(|_| header_err("machine count is not a positive integer"))?;
    if num_jobs == 0 {
        return Err(header_err("job count must be positive"));
    }
    if num_machines == 0 {
        return Err(header_err("machine count must be positive"));
    }
    let declared_flexibility = match fields.get(2) {
        Some(f) => Some(
            f.parse::<f64>()
                .map_err(|_| header_err("flexibility is not a number"))?,
        ),
        None => None,
    };

    let mut jobs = Vec::with_capacity(num_jobs);
    let mut last_line = header_line;
    for (found, (line_no, line)) in lines.by_ref().take(num_jobs).enumerate() {
        debug_assert_eq!(found, jobs.len());
        last_line = line_no;
        jobs.push(parse_job_line(line, line_no, found + 1, num_machines)?);
    }
    if jobs.len() < num_jobs {
        return Err(ParseError {
            line: last_line,
            kind: ParseErrorKind::MissingJobs {
                expected: num_jobs,
                found: jobs.len(),
            },
        });
    }
    if let Some((line_no, _)) = lines.next() {
        return Err(ParseError {
            line: line_no,
            kind: ParseErrorKind::TrailingLines,
        });
    }

    let mut instance = FjspInstance::new(num_machines, jobs).map_err(|e| ParseError {
        line: header_line,
        kind: ParseErrorKind::Invalid(e),
    })?;
    instance.declared_flexibility = declared_flexibility;
    Ok(instance)
}

fn parse_job_line(
    line: &str,
    line_no: usize,
    job: usize,
    num_machines: usize,
) -> Result<Job, ParseError> {
    let err = |kind| ParseError {
        line: line_no,
        kind,
    };
    let mut tokens = line.split_whitespace();
    let mut next = |what: &str| -> Result<i64, ParseError> {
        let tok = tokens
            .next()
            .ok_or_else(|| err(ParseErrorKind::Truncated(format!("missing {what}"))))?;
        tok.parse::<i64>()
            .map_err(|_| err(ParseErrorKind::NotAnInteger(tok.to_string())))
    };

    let num_ops = next("operation count")?;
    if num_ops <= 0 {
        return Err(err(ParseErrorKind::Invalid(InstanceError::EmptyJob { job })));
    }
    let mut operations = Vec::with_capacity(num_ops as usize);
    for _ in 0..num_ops {
        let count = next("alternative count")?;
        if count <= 0 {
            return Err(err(ParseErrorKind::Truncated(
                "alternative count must be positive".into(),
            )));
        }
        let mut alternatives = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let machine = next("machine index")?;
            let duration = next("duration")?;
            if machine < 1 || machine as usize > num_machines {
                return Err(err(ParseErrorKind::MachineOutOfRange {
                    machine,
                    machines: num_machines,
                }));
            }
            if duration <= 0 {
                return Err(err(ParseErrorKind::NonPositiveDuration(duration)));
            }
            alternatives.push(Alternative {
                machine: machine as usize - 1,
                duration: duration as Time,
            });
        }
        operations.push(Operation { alternatives });
    }
    let extra = tokens.count();
    if extra > 0 {
        return Err(err(ParseErrorKind::TrailingTokens { extra }));
    }
    Ok(Job { operations })
}
