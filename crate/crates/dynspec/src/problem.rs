//! Problem descriptors `{kind, n, seed, lambda}` and their construction.

use std::path::PathBuf;

use dynspec_core::partition::{build_benchmark, build_oscillator, build_random_uniform, BenchFamily};
use dynspec_core::{fixtures, DiagonalMatrix, PartitionedProblem, C64};
use serde::{Deserialize, Serialize};

use crate::mtx::{diagonal_from, read_matrix_market};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    TwoByTwo,
    ThreeByThree,
    /// Truncated oscillator with a δ-potential, `n` basis functions.
    Oscillator,
    /// `diag(1..=n) + λR`, `R` uniform on `[-1, 1]`.
    RandomUniform,
    /// Oscillator diagonal plus a critical Erdős–Rényi Laplacian, zero-diagonal split.
    ErLaplacian,
    /// Oscillator diagonal plus dense uniform entries scaled by `scale`, zero-diagonal split.
    DenseUniform,
    /// `D` and `Δ` read from Matrix Market files.
    Files,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemDescriptor {
    pub kind: ProblemKind,
    pub n: usize,
    pub seed: u64,
    /// `[re, im]`.
    pub lambda: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_path: Option<PathBuf>,
    /// Move the diagonal of `Δ` into `D` after building.
    #[serde(default)]
    pub epstein_nesbet: bool,
}

impl ProblemDescriptor {
    pub fn new(kind: ProblemKind, n: usize, seed: u64, lambda: C64) -> Self {
        Self {
            kind,
            n,
            seed,
            lambda: [lambda.re, lambda.im],
            scale: None,
            d_path: None,
            delta_path: None,
            epstein_nesbet: false,
        }
    }

    pub fn lambda(&self) -> C64 {
        C64::new(self.lambda[0], self.lambda[1])
    }

    pub fn build(&self) -> anyhow::Result<PartitionedProblem> {
        let lambda = self.lambda();
        let p = match self.kind {
            ProblemKind::TwoByTwo => fixtures::two_by_two(lambda),
            ProblemKind::ThreeByThree => fixtures::three_by_three(lambda),
            ProblemKind::Oscillator => build_oscillator(self.n)?.with_lambda(lambda),
            ProblemKind::RandomUniform => build_random_uniform(self.n, self.seed)?.with_lambda(lambda),
            ProblemKind::ErLaplacian => build_benchmark(BenchFamily::ErLaplacian, self.n, self.seed, lambda)?,
            ProblemKind::DenseUniform => build_benchmark(
                BenchFamily::DenseUniform {
                    scale: self.scale.unwrap_or(1.0),
                },
                self.n,
                self.seed,
                lambda,
            )?,
            ProblemKind::Files => {
                let (Some(dp), Some(xp)) = (&self.d_path, &self.delta_path) else {
                    anyhow::bail!("file problems need both a D and a Δ path");
                };
                let d = diagonal_from(&read_matrix_market(dp)?)?;
                let delta = read_matrix_market(xp)?;
                PartitionedProblem::new(DiagonalMatrix::new(d), delta, lambda)?
            }
        };
        Ok(if self.epstein_nesbet { p.to_epstein_nesbet() } else { p })
    }
}

/// Parses `re`, `re,im` or `<im>i`.
pub fn parse_complex(s: &str) -> Result<C64, String> {
    let s = s.trim();
    let bad = || format!("cannot parse `{s}` as a complex number (use `re`, `re,im` or `imi`)");
    if let Some((re, im)) = s.split_once(',') {
        let re = re.trim().parse().map_err(|_| bad())?;
        let im = im.trim().parse().map_err(|_| bad())?;
        return Ok(C64::new(re, im));
    }
    if let Some(im) = s.strip_suffix('i') {
        let im = match im {
            "" | "+" => 1.0,
            "-" => -1.0,
            x => x.parse().map_err(|_| bad())?,
        };
        return Ok(C64::new(0.0, im));
    }
    s.parse().map(|re| C64::new(re, 0.0)).map_err(|_| bad())
}
