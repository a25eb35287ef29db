//! Dense matrices and a deterministic random number generator.
//!
//! Everything in this crate runs on `f64`. Reproducibility is a hard
//! requirement: the generator is a fixed, documented algorithm rather than a
//! platform-dependent source, so a seed produces the same stream on every
//! machine and every run.

/// Row-major dense matrix.
///
/// Shape checks panic: a mismatched multiply is a bug in the caller, not a
/// recoverable condition.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Creates a `rows x cols` matrix of zeros. Both dimensions must be
    /// positive.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(
            rows > 0 && cols > 0,
            "matrix dimensions must be positive, got {rows}x{cols}"
        );
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        assert!(!rows.is_empty(), "matrix needs at least one row");
        let cols = rows[0].len();
        assert!(cols > 0, "matrix needs at least one column");
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            assert!(
                row.len() == cols,
                "row {i} has {} entries, expected {cols}",
                row.len()
            );
            data.extend_from_slice(row);
        }
        Matrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of bounds");
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of bounds");
        self.data[r * self.cols + c] = v;
    }

    /// Borrows row `r` as a slice.
    pub fn row(&self, r: usize) -> &[f64] {
        assert!(r < self.rows, "row {r} out of bounds for {} rows", self.rows);
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Flat row-major view of all entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// `A * v`. Panics unless `v.len() == self.cols()`.
    ///
    /// Each output entry is a left-to-right dot product, which keeps results
    /// bit-stable across runs.
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert!(
            v.len() == self.cols,
            "matvec shape mismatch: {}x{} matrix times length-{} vector",
            self.rows,
            self.cols,
            v.len()
        );
        let mut out = vec![0.0; self.rows];
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(v) {
                acc += a * b;
            }
            out[r] = acc;
        }
        out
    }

    /// `A^T * v`. Panics unless `v.len() == self.rows()`.
    pub fn matvec_transpose(&self, v: &[f64]) -> Vec<f64> {
        assert!(
            v.len() == self.rows,
            "matvec_transpose shape mismatch: {}x{} matrix, length-{} vector",
            self.rows,
            self.cols,
            v.len()
        );
        let mut out = vec![0.0; self.cols];
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let vr = v[r];
            for (o, a) in out.iter_mut().zip(row) {
                *o += vr * a;
            }
        }
        out
    }

    /// Frobenius norm, accumulated in row-major order.
    pub fn frobenius_norm(&self) -> f64 {
        let mut acc = 0.0;
        for x in &self.data {
            acc += x * x;
        }
        acc.sqrt()
    }
}

/// Index of the largest entry, ties to the lowest index. Panics on an
/// empty slice.
pub fn argmax(xs: &[f64]) -> usize {
    assert!(!xs.is_empty(), "argmax of an empty slice");
    let mut best = 0;
    for (i, x) in xs.iter().enumerate() {
        if *x > xs[best] {
            best = i;
        }
    }
    best
}

/// splitmix64 step, used only to expand seeds into generator state.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// xoshiro256** generator.
///
/// Distinct logical streams (weight init, shuffling, data noise) come from
/// [`Rng::substream`] so that consuming draws in one stream never shifts
/// another.
#[derive(Debug, Clone)]
pub struct Rng {
    s: [u64; 4],
}

impl Rng {
    /// Seeds the generator by running splitmix64 four times on `seed`.
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let mut s = [0u64; 4];
        for slot in &mut s {
            *slot = splitmix64(&mut sm);
        }
        // The all-zero state is a fixed point of xoshiro; splitmix cannot
        // produce it from four consecutive outputs, but guard anyway.
        if s == [0, 0, 0, 0] {
            s[0] = 1;
        }
        Rng { s }
    }

    /// Independent stream `index` derived from `seed`.
    ///
    /// Mixing the index through the golden-ratio constant before seeding
    /// keeps nearby indices far apart in state space.
    pub fn substream(seed: u64, index: u64) -> Self {
        Rng::new(seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }

    fn rotl(x: u64, k: u32) -> u64 {
        (x << k) | (x >> (64 - k))
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = Self::rotl(self.s[1].wrapping_mul(5), 7).wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = Self::rotl(self.s[3], 45);
        result
    }

    /// Uniform draw in `[0, 1)` with 53 random bits.
    fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }

    /// Uniform draw in the open interval `(0, 1)`, safe to pass to `ln`.
    fn unit_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
    }

    /// Uniform draw in `[lo, hi)`. Panics unless `lo < hi`.
    ///
    /// Consumes exactly one `next_u64`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        assert!(lo < hi, "uniform bounds must satisfy lo < hi, got [{lo}, {hi})");
        let v = lo + (hi - lo) * self.unit();
        // Rounding can land exactly on hi for extreme ranges; keep the
        // half-open contract.
        if v < hi {
            v
        } else {
            hi.next_down()
        }
    }

    /// Gaussian draw via the Box-Muller transform.
    ///
    /// Consumes exactly two `next_u64` per call regardless of the
    /// parameters, so streams stay aligned across configurations.
    /// `stddev` must be non-negative; zero returns `mean` exactly.
    pub fn gaussian(&mut self, mean: f64, stddev: f64) -> f64 {
        assert!(
            stddev >= 0.0 && stddev.is_finite(),
            "stddev must be finite and non-negative, got {stddev}"
        );
        let u1 = self.unit_open();
        let u2 = self.unit();
        let z = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
        mean + stddev * z
    }

    /// Fisher-Yates shuffle, consuming one `next_u64` per swap.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            // Bounded draw by 128-bit multiply-shift; bias is at most
            // 2^-64 per index, far below anything observable here.
            let j = ((self.next_u64() as u128 * (i as u128 + 1)) >> 64) as usize;
            xs.swap(i, j);
        }
    }
}
