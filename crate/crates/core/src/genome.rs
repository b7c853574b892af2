//! Two-vector chromosome: an operation sequence (job indices with repetition)
//! and a machine assignment (alternative-list indices in fixed job-by-job order).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{FjspInstance, OpRef};

/// A candidate solution.
///
/// `os[p]` is a job index; its k-th occurrence stands for the k-th operation
/// of that job. `ma[f]` indexes into the alternative list of the operation
/// with flat index `f`. Both are 0-based in memory.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Chromosome {
    pub os: Vec<usize>,
    pub ma: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("operation sequence has length {found}, expected {expected}")]
    OsLength { expected: usize, found: usize },
    #[error("machine assignment has length {found}, expected {expected}")]
    MaLength { expected: usize, found: usize },
    #[error("operation sequence references job {job} but the instance has {jobs}")]
    UnknownJob { job: usize, jobs: usize },
    #[error("job {job} occurs {found} times in the operation sequence, expected {expected}")]
    JobCount {
        job: usize,
        expected: usize,
        found: usize,
    },
    #[error("machine assignment {value} for {op} exceeds its {count} alternative(s)")]
    AlternativeOutOfRange { op: OpRef, value: usize, count: usize },
}

/// 1-based external form used in JSON reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChromosomeRecord {
    pub os: Vec<usize>,
    pub ma: Vec<usize>,
}

impl From<&Chromosome> for ChromosomeRecord {
    fn from(c: &Chromosome) -> Self {
        Self {
            os: c.os.iter().map(|j| j + 1).collect(),
            ma: c.ma.iter().map(|a| a + 1).collect(),
        }
    }
}

impl TryFrom<&ChromosomeRecord> for Chromosome {
    type Error = Violation;

    fn try_from(r: &ChromosomeRecord) -> Result<Self, Violation> {
        let shift = |v: &[usize]| v.iter().map(|x| x.wrapping_sub(1)).collect::<Vec<_>>();
        if let Some(&bad) = r.os.iter().find(|&&j| j == 0) {
            return Err(Violation::UnknownJob { job: bad, jobs: 0 });
        }
        if r.ma.contains(&0) {
            return Err(Violation::AlternativeOutOfRange {
                op: OpRef { job: 0, index: 0 },
                value: 0,
                count: 0,
            });
        }
        Ok(Self {
            os: shift(&r.os),
            ma: shift(&r.ma),
        })
    }
}

impl Chromosome {
    /// Fixed-order operation sequence (all of job 1, then job 2, ...) with the
    /// first alternative everywhere.
    pub fn canonical(instance: &FjspInstance) -> Self {
        let os = (0..instance.num_jobs())
            .flat_map(|j| std::iter::repeat_n(j, instance.job_len(j)))
            .collect();
        Self {
            os,
            ma: vec![0; instance.total_operations()],
        }
    }

    pub fn len(&self) -> usize {
        self.os.len()
    }

    pub fn is_empty(&self) -> bool {
        self.os.is_empty()
    }

    /// Operation identity at `position` (0-based) of the operation sequence.
    pub fn operation_at(&self, position: usize) -> OpRef {
        let job = self.os[position];
        let index = self.os[..position].iter().filter(|&&j| j == job).count();
        OpRef { job, index }
    }

    /// Flat operation indices in sequence order.
    pub fn sequence(&self, instance: &FjspInstance) -> Vec<usize> {
        let mut next = vec![0usize; instance.num_jobs()];
        self.os
            .iter()
            .map(|&job| {
                let flat = instance.job_offset(job) + next[job];
                next[job] += 1;
                flat
            })
            .collect()
    }

    /// Machine assigned to `op`.
    pub fn assigned_machine(&self, op: OpRef, instance: &FjspInstance) -> Result<usize, Violation> {
        let flat = instance.flat_index(op);
        let alts = &instance.operation(flat).alternatives;
        let value = self.ma[flat];
        alts.get(value)
            .map(|a| a.machine)
            .ok_or(Violation::AlternativeOutOfRange {
                op,
                value: value + 1,
                count: alts.len(),
            })
    }

    /// Checks the multiset and range invariants, reporting the first violation.
    pub fn validate(&self, instance: &FjspInstance) -> Result<(), Violation> {
        let n = instance.total_operations();
        if self.os.len() != n {
            return Err(Violation::OsLength {
                expected: n,
                found: self.os.len(),
            });
        }
        if self.ma.len() != n {
            return Err(Violation::MaLength {
                expected: n,
                found: self.ma.len(),
            });
        }
        let mut counts = vec![0usize; instance.num_jobs()];
        for &job in &self.os {
            match counts.get_mut(job) {
                Some(c) => *c += 1,
                None => {
                    return Err(Violation::UnknownJob {
                        job: job + 1,
                        jobs: instance.num_jobs(),
                    })
                }
            }
        }
        for (job, &found) in counts.iter().enumerate() {
            let expected = instance.job_len(job);
            if found != expected {
                return Err(Violation::JobCount {
                    job: job + 1,
                    expected,
                    found,
                });
            }
        }
        for (flat, &value) in self.ma.iter().enumerate() {
            let count = instance.operation(flat).alternatives.len();
            if value >= count {
                return Err(Violation::AlternativeOutOfRange {
                    op: instance.op_ref(flat),
                    value: value + 1,
                    count,
                });
            }
        }
        Ok(())
    }

    pub fn to_record(&self) -> ChromosomeRecord {
        self.into()
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::instance::tests::toy_instance;

    /// The worked chromosome: os [1,2,3,2,1,1,3], ma [2,1,1,3,2,2,1] (1-based).
    pub fn toy_chromosome() -> Chromosome {
        Chromosome {
            os: vec![0, 1, 2, 1, 0, 0, 2],
            ma: vec![1, 0, 0, 2, 1, 1, 0],
        }
    }

    #[test]
    fn operation_identity_by_occurrence() {
        let c = toy_chromosome();
        assert_eq!(c.operation_at(3), OpRef { job: 1, index: 1 });
        assert_eq!(c.operation_at(6), OpRef { job: 2, index: 1 });
        assert_eq!(c.operation_at(0), OpRef { job: 0, index: 0 });
        let inst = toy_instance();
        assert_eq!(c.sequence(&inst), [0, 3, 5, 4, 1, 2, 6]);
    }

    #[test]
    fn assigned_machines_follow_alternative_lists() {
        let inst = toy_instance();
        let c = toy_chromosome();
        let machines: Vec<_> = (0..7)
            .map(|f| c.assigned_machine(inst.op_ref(f), &inst).unwrap() + 1)
            .collect();
        assert_eq!(machines, [3, 1, 3, 3, 3, 2, 1]);
        // O13 has a single alternative
        assert_eq!(c.assigned_machine(OpRef { job: 0, index: 2 }, &inst), Ok(2));
    }

    #[test]
    fn validate_reports_violations() {
        let inst = toy_instance();
        assert_eq!(toy_chromosome().validate(&inst), Ok(()));

        let mut c = toy_chromosome();
        c.os[0] = 1;
        assert_eq!(
            c.validate(&inst),
            Err(Violation::JobCount {
                job: 1,
                expected: 3,
                found: 2
            })
        );

        let mut c = toy_chromosome();
        c.ma[4] = 2;
        assert_eq!(
            c.validate(&inst),
            Err(Violation::AlternativeOutOfRange {
                op: OpRef { job: 1, index: 1 },
                value: 3,
                count: 2
            })
        );
        assert!(matches!(
            c.assigned_machine(OpRef { job: 1, index: 1 }, &inst),
            Err(Violation::AlternativeOutOfRange { .. })
        ));

        let mut c = toy_chromosome();
        c.os.pop();
        assert!(matches!(c.validate(&inst), Err(Violation::OsLength { .. })));
    }

    #[test]
    fn record_is_one_based() {
        let r = toy_chromosome().to_record();
        assert_eq!(r.os, [1, 2, 3, 2, 1, 1, 3]);
        assert_eq!(r.ma, [2, 1, 1, 3, 2, 2, 1]);
        assert_eq!(Chromosome::try_from(&r).unwrap(), toy_chromosome());
    }
}
