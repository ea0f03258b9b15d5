//! Instances: jobs with integer release slots and a machine-dependent
//! processing-time row, plus normalization, the small-job preprocessing
//! step, a seeded generator and the canonical JSON format.

use std::fmt;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Slot index or duration. Always non-negative for valid data; signed so
/// window arithmetic can go below zero.
pub type Time = i64;
pub type JobId = u64;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("instance needs at least one machine")]
    NoMachines,
    #[error("instance needs at least one job")]
    NoJobs,
    #[error("job {job}: expected {expected} processing times, got {got}")]
    RowLength { job: JobId, expected: usize, got: usize },
    #[error("job {job} has no eligible machine")]
    NoEligibleMachine { job: JobId },
    #[error("job {job}: negative release time {release}")]
    NegativeRelease { job: JobId, release: i64 },
    #[error("job {job}: processing time {p} on machine {machine} must be at least 1")]
    NonPositiveProcessing { job: JobId, machine: usize, p: i64 },
    #[error("duplicate job id {job}")]
    DuplicateId { job: JobId },
    #[error("rescaling by {scale} is not integral (job {job}); pre-scale the instance")]
    NonIntegralScale { job: JobId, scale: i64 },
    #[error("guess {guess} leaves job {job} without an admissible machine")]
    GuessExcludesJob { job: JobId, guess: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    pub id: JobId,
    #[serde(rename = "r")]
    pub release: Time,
    /// Processing time per machine; `None` means the job cannot run there.
    pub p: Vec<Option<Time>>,
}

impl Job {
    pub fn new(id: JobId, release: Time, p: Vec<Option<Time>>) -> Self {
        Job { id, release, p }
    }

    pub fn on(&self, machine: usize) -> Option<Time> {
        self.p.get(machine).copied().flatten()
    }

    /// Machines with a finite processing time, ascending.
    pub fn eligible(&self) -> impl Iterator<Item = (usize, Time)> + '_ {
        self.p
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|p| (i, p)))
    }

    pub fn fastest(&self) -> (usize, Time) {
        self.eligible()
            .min_by_key(|&(i, p)| (p, i))
            .expect("validated job has an eligible machine")
    }

    pub fn slowest_finite(&self) -> Time {
        self.eligible().map(|(_, p)| p).max().unwrap_or(0)
    }
}

/// Size class of a processing time: the smallest `k >= 0` with `p <= 2^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClassIndex(pub u32);

impl ClassIndex {
    pub fn of(p: Time) -> ClassIndex {
        assert!(p >= 1, "class of non-positive processing time {p}");
        let p = p as u64;
        if p == 1 {
            ClassIndex(0)
        } else {
            ClassIndex(64 - (p - 1).leading_zeros())
        }
    }

    /// `2^k`.
    pub fn scale(self) -> Time {
        1 << self.0
    }
}

impl fmt::Display for ClassIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn class_of(p: Time) -> ClassIndex {
    ClassIndex::of(p)
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    m: usize,
    jobs: Vec<Job>,
}

/// A validated instance. Jobs are stored sorted by `(release, id)`; a job's
/// position in that order is its *index*, used throughout the solvers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    m: usize,
    jobs: Vec<Job>,
}

impl Instance {
    pub fn new(m: usize, mut jobs: Vec<Job>) -> Result<Instance, InstanceError> {
        if m == 0 {
            return Err(InstanceError::NoMachines);
        }
        if jobs.is_empty() {
            return Err(InstanceError::NoJobs);
        }
        let mut seen = std::collections::BTreeSet::new();
        for job in &jobs {
            if !seen.insert(job.id) {
                return Err(InstanceError::DuplicateId { job: job.id });
            }
            if job.p.len() != m {
                return Err(InstanceError::RowLength {
                    job: job.id,
                    expected: m,
                    got: job.p.len(),
                });
            }
            if job.release < 0 {
                return Err(InstanceError::NegativeRelease {
                    job: job.id,
                    release: job.release,
                });
            }
            for (machine, p) in job.eligible() {
                if p < 1 {
                    return Err(InstanceError::NonPositiveProcessing {
                        job: job.id,
                        machine,
                        p,
                    });
                }
            }
            if job.eligible().next().is_none() {
                return Err(InstanceError::NoEligibleMachine { job: job.id });
            }
        }
        jobs.sort_by_key(|j| (j.release, j.id));
        Ok(Instance { m, jobs })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.jobs.len()
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    pub fn job(&self, index: usize) -> &Job {
        &self.jobs[index]
    }

    pub fn index_of(&self, id: JobId) -> Option<usize> {
        self.jobs.iter().position(|j| j.id == id)
    }

    pub fn p(&self, machine: usize, job: usize) -> Option<Time> {
        self.jobs[job].on(machine)
    }

    pub fn max_release(&self) -> Time {
        self.jobs.iter().map(|j| j.release).max().unwrap_or(0)
    }

    fn finite_times(&self) -> impl Iterator<Item = Time> + '_ {
        self.jobs.iter().flat_map(|j| j.eligible().map(|(_, p)| p))
    }

    pub fn min_p(&self) -> Time {
        self.finite_times().min().expect("validated instance")
    }

    pub fn max_p(&self) -> Time {
        self.finite_times().max().expect("validated instance")
    }

    /// `max p / min p` over finite entries, as `(max, min)`.
    pub fn spread(&self) -> (Time, Time) {
        (self.max_p(), self.min_p())
    }

    /// Distinct finite processing times, ascending.
    pub fn distinct_p(&self) -> Vec<Time> {
        let mut v: Vec<Time> = self.finite_times().collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Slot horizon for the time-indexed LP: every slot a job can occupy in
    /// some per-machine work-conserving schedule lies in `[0, horizon)`.
    pub fn horizon(&self) -> Time {
        self.max_release() + self.jobs.iter().map(Job::slowest_finite).sum::<Time>()
    }

    /// Sum of fastest processing times plus the last release.
    pub fn fast_horizon(&self) -> Time {
        self.max_release() + self.jobs.iter().map(|j| j.fastest().1).sum::<Time>()
    }

    pub fn from_json(text: &str) -> Result<Instance, InstanceError> {
        let file: InstanceFile = serde_json::from_str(text)?;
        Instance::new(file.m, file.jobs)
    }

    /// Canonical form: jobs sorted by `(r, id)`, 2-space indent, trailing newline.
    pub fn to_json(&self) -> String {
        let file = InstanceFile {
            m: self.m,
            jobs: self.jobs.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("instance serializes");
        s.push('\n');
        s
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Instance, InstanceError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| InstanceError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Instance::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), InstanceError> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|source| InstanceError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    /// Rescales time so that the smallest finite processing time is 1.
    ///
    /// Only exact rescaling is performed: every finite `p` and every release
    /// must be divisible by the current minimum, otherwise the caller has to
    /// pre-scale. Returns the factor divided out.
    pub fn normalize(&self) -> Result<(Instance, i64), InstanceError> {
        let scale = self.min_p();
        if scale == 1 {
            return Ok((self.clone(), 1));
        }
        let mut jobs = Vec::with_capacity(self.n());
        for job in &self.jobs {
            let divisible = job.release % scale == 0 && job.eligible().all(|(_, p)| p % scale == 0);
            if !divisible {
                return Err(InstanceError::NonIntegralScale { job: job.id, scale });
            }
            jobs.push(Job {
                id: job.id,
                release: job.release / scale,
                p: job.p.iter().map(|p| p.map(|p| p / scale)).collect(),
            });
        }
        Ok((Instance::new(self.m, jobs)?, scale))
    }

    /// Small-job preprocessing for a guess of the largest processing time
    /// used by an optimal schedule.
    ///
    /// Entries below `guess / n^2` are raised to `ceil(guess / n^2)`; entries
    /// above `guess` are dropped (an optimum using only sizes `<= guess`
    /// never needs them). Afterwards `max p / min p <= n^2`.
    pub fn preprocess_small_jobs(&self, guess: Time) -> Result<Instance, InstanceError> {
        let n2 = (self.n() as Time) * (self.n() as Time);
        let floor_p = (guess + n2 - 1) / n2;
        let mut jobs = Vec::with_capacity(self.n());
        for job in &self.jobs {
            let p: Vec<Option<Time>> = job
                .p
                .iter()
                .map(|&p| match p {
                    Some(p) if p > guess => None,
                    Some(p) if p * n2 < guess => Some(floor_p),
                    other => other,
                })
                .collect();
            if p.iter().all(Option::is_none) {
                return Err(InstanceError::GuessExcludesJob { job: job.id, guess });
            }
            jobs.push(Job { id: job.id, release: job.release, p });
        }
        let out = Instance::new(self.m, jobs)?;
        let (max, min) = out.spread();
        assert!(max <= n2 * min, "preprocessed spread {max}/{min} exceeds n^2 = {n2}");
        Ok(out)
    }
}

/// Parameters for [`generate_random`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub n: usize,
    pub m: usize,
    pub p_max: Time,
    pub r_max: Time,
    pub density: f64,
    pub seed: u64,
}

/// Seeded random instance. Each `(machine, job)` entry is finite with
/// probability `density`; a job that draws no finite entry gets one on a
/// uniformly chosen machine.
pub fn generate_random(params: GeneratorParams) -> Instance {
    let GeneratorParams {
        n,
        m,
        p_max,
        r_max,
        density,
        seed,
    } = params;
    assert!(n >= 1 && m >= 1, "generator needs n, m >= 1");
    assert!(p_max >= 1 && r_max >= 0, "generator needs p_max >= 1, r_max >= 0");
    assert!(density > 0.0 && density <= 1.0, "density must lie in (0, 1]");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jobs = (0..n)
        .map(|id| {
            let release = rng.gen_range(0..=r_max);
            let mut p: Vec<Option<Time>> = (0..m)
                .map(|_| rng.gen_bool(density).then(|| rng.gen_range(1..=p_max)))
                .collect();
            if p.iter().all(Option::is_none) {
                let machine = rng.gen_range(0..m);
                p[machine] = Some(rng.gen_range(1..=p_max));
            }
            Job::new(id as JobId, release, p)
        })
        .collect();
    Instance::new(m, jobs).expect("generated instance is valid")
}
