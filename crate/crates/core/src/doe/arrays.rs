use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Shipped orthogonal arrays.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrayKind {
    /// 16 runs, three 4-level factors.
    L16Modified,
    /// 27 runs, six 3-level factors.
    L27,
}

impl ArrayKind {
    pub const ALL: [ArrayKind; 2] = [ArrayKind::L16Modified, ArrayKind::L27];

    pub fn name(self) -> &'static str {
        match self {
            ArrayKind::L16Modified => "L16_modified",
            ArrayKind::L27 => "L27",
        }
    }
}

impl fmt::Display for ArrayKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ArrayKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        match key.as_str() {
            "l16_modified" | "l16" => Ok(ArrayKind::L16Modified),
            "l27" => Ok(ArrayKind::L27),
            _ => Err(Error::UnsupportedArray {
                requested: s.to_string(),
                supported: ArrayKind::ALL.map(ArrayKind::name).join(", "),
            }),
        }
    }
}

const L16_MODIFIED: [[u8; 3]; 16] = [
    [1, 1, 1],
    [1, 2, 2],
    [1, 3, 3],
    [1, 4, 4],
    [2, 1, 2],
    [2, 2, 1],
    [2, 3, 4],
    [2, 4, 3],
    [3, 1, 3],
    [3, 2, 4],
    [3, 3, 1],
    [3, 4, 2],
    [4, 1, 4],
    [4, 2, 3],
    [4, 3, 2],
    [4, 4, 1],
];

const L27: [[u8; 6]; 27] = [
    [1, 1, 1, 1, 1, 1],
    [1, 1, 1, 1, 2, 2],
    [1, 1, 1, 1, 3, 3],
    [1, 2, 2, 2, 1, 1],
    [1, 2, 2, 2, 2, 2],
    [1, 2, 2, 2, 3, 3],
    [1, 3, 3, 3, 1, 1],
    [1, 3, 3, 3, 2, 2],
    [1, 3, 3, 3, 3, 3],
    [2, 1, 2, 3, 1, 2],
    [2, 1, 2, 3, 2, 3],
    [2, 1, 2, 3, 3, 1],
    [2, 2, 3, 1, 1, 2],
    [2, 2, 3, 1, 2, 3],
    [2, 2, 3, 1, 3, 1],
    [2, 3, 1, 2, 1, 2],
    [2, 3, 1, 2, 2, 3],
    [2, 3, 1, 2, 3, 1],
    [3, 1, 3, 2, 1, 3],
    [3, 1, 3, 2, 2, 1],
    [3, 1, 3, 2, 3, 2],
    [3, 2, 1, 3, 1, 3],
    [3, 2, 1, 3, 2, 1],
    [3, 2, 1, 3, 3, 2],
    [3, 3, 2, 1, 1, 3],
    [3, 3, 2, 1, 2, 1],
    [3, 3, 2, 1, 3, 2],
];

/// Runs x factors table of 1-based level indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrthogonalArray {
    pub kind: ArrayKind,
    pub assignments: Vec<Vec<usize>>,
}

pub fn orthogonal_array(kind: ArrayKind) -> OrthogonalArray {
    let assignments = match kind {
        ArrayKind::L16Modified => L16_MODIFIED.iter().map(|r| r.iter().map(|&l| l as usize).collect()).collect(),
        ArrayKind::L27 => L27.iter().map(|r| r.iter().map(|&l| l as usize).collect()).collect(),
    };
    OrthogonalArray { kind, assignments }
}

impl OrthogonalArray {
    pub fn runs(&self) -> usize {
        self.assignments.len()
    }

    pub fn factors(&self) -> usize {
        self.assignments.first().map_or(0, Vec::len)
    }

    /// Number of distinct levels used by factor `j`.
    pub fn levels_of(&self, j: usize) -> usize {
        self.assignments.iter().map(|r| r[j]).max().unwrap_or(0)
    }

    fn column(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.assignments.iter().map(move |r| r[j])
    }

    /// Every level of every column appears equally often.
    pub fn is_balanced(&self) -> bool {
        (0..self.factors()).all(|j| {
            let k = self.levels_of(j);
            let mut counts = vec![0usize; k];
            self.column(j).for_each(|l| counts[l - 1] += 1);
            counts.iter().all(|&c| c == counts[0])
        })
    }

    /// Every pair of columns contains every level pair equally often.
    pub fn is_orthogonal(&self) -> bool {
        let f = self.factors();
        for a in 0..f {
            for b in a + 1..f {
                let (ka, kb) = (self.levels_of(a), self.levels_of(b));
                let mut counts = vec![0usize; ka * kb];
                for r in &self.assignments {
                    counts[(r[a] - 1) * kb + (r[b] - 1)] += 1;
                }
                if counts.iter().any(|&c| c != counts[0]) {
                    return false;
                }
            }
        }
        true
    }

    /// Replace level indices by the numeric levels of each factor.
    pub fn substitute(&self, levels: &super::FactorLevels) -> Result<Vec<Vec<f64>>> {
        self.check_levels(levels)?;
        Ok(self
            .assignments
            .iter()
            .map(|r| r.iter().zip(&levels.factors).map(|(&l, f)| f.levels[l - 1]).collect())
            .collect())
    }

    pub(crate) fn check_levels(&self, levels: &super::FactorLevels) -> Result<()> {
        if levels.factors.len() != self.factors() {
            return Err(Error::InvalidInput(format!(
                "{} has {} factors but {} level lists were given",
                self.kind,
                self.factors(),
                levels.factors.len()
            )));
        }
        for (j, f) in levels.factors.iter().enumerate() {
            if f.levels.len() != self.levels_of(j) {
                return Err(Error::InvalidInput(format!(
                    "factor '{}' has {} levels but column {j} of {} uses {}",
                    f.name,
                    f.levels.len(),
                    self.kind,
                    self.levels_of(j)
                )));
            }
        }
        Ok(())
    }
}
