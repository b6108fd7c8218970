use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Dense row-major bit matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    words: Vec<u64>,
}

impl BitMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        let words_per_row = cols.div_ceil(64);
        Self {
            rows,
            cols,
            words_per_row,
            words: vec![0; rows * words_per_row],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        self.words[r * self.words_per_row + c / 64] >> (c % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize) {
        debug_assert!(r < self.rows && c < self.cols);
        self.words[r * self.words_per_row + c / 64] |= 1 << (c % 64);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn row_count_ones(&self, r: usize) -> usize {
        let start = r * self.words_per_row;
        self.words[start..start + self.words_per_row]
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum()
    }

    /// Run lengths over the row-major bit sequence, alternating and starting
    /// with a run of zeros (possibly empty).
    pub fn to_runs(&self) -> Vec<usize> {
        let mut runs = Vec::new();
        let mut current = false;
        let mut len = 0usize;
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) == current {
                    len += 1;
                } else {
                    runs.push(len);
                    current = !current;
                    len = 1;
                }
            }
        }
        if len > 0 {
            runs.push(len);
        }
        runs
    }

    pub fn from_runs(rows: usize, cols: usize, runs: &[usize]) -> Option<Self> {
        let mut m = Self::new(rows, cols);
        let mut idx = 0usize;
        for (i, &len) in runs.iter().enumerate() {
            if i % 2 == 1 {
                for k in idx..idx + len {
                    if k >= rows * cols {
                        return None;
                    }
                    m.set(k / cols, k % cols);
                }
            }
            idx += len;
        }
        (idx == rows * cols).then_some(m)
    }
}

#[derive(Serialize, Deserialize)]
struct RleBitmap {
    rows: usize,
    cols: usize,
    runs: Vec<usize>,
}

impl Serialize for BitMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RleBitmap {
            rows: self.rows,
            cols: self.cols,
            runs: self.to_runs(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BitMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rle = RleBitmap::deserialize(d)?;
        BitMatrix::from_runs(rle.rows, rle.cols, &rle.runs)
            .ok_or_else(|| serde::de::Error::custom("run lengths do not cover rows x cols"))
    }
}
