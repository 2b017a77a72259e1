//! System configuration and per-trial channel realizations for the K-user
//! uplink.
//!
//! One realization holds the desired user's N×M channel H, the stacked
//! interferer channels R = [H_1 ... H_{K-1}], and the diagonal scaling Q that
//! expresses each interferer's power relative to the reference INR. All
//! channels are quasi-static: drawn once per trial, constant over the block.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::numerics::{Cn01Sampler, ComplexMatrix, RngStream};

/// Substream address bit layout: trial in the low 40 bits, grid point index
/// above it, replacement attempt in the top byte.
const TRIAL_BITS: u32 = 40;
const POINT_BITS: u32 = 16;
const ATTEMPT_BITS: u32 = 8;

pub const MAX_TRIALS_PER_POINT: u64 = 1 << TRIAL_BITS;
pub const MAX_GRID_POINTS: usize = 1 << POINT_BITS;
pub const MAX_ATTEMPTS: u32 = (1 << ATTEMPT_BITS) - 1;

/// Target-rate law for the sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RateMode {
    /// Fixed rate R in bits per channel use (multiplexing gain r = 0).
    Fixed { bits: f64 },
    /// Rate scaling with SNR as r·log₂(SNR) for multiplexing gain r.
    Scaling { r: f64 },
}

impl RateMode {
    /// Multiplexing gain this mode operates at.
    pub fn multiplexing_gain(&self) -> f64 {
        match *self {
            RateMode::Fixed { .. } => 0.0,
            RateMode::Scaling { r } => r,
        }
    }
}

/// Invalid system parameters, reported at configuration build time.
#[derive(Clone, Debug, PartialEq)]
pub enum ConfigError {
    TxAntennas,
    RxAntennas { n: usize, m: usize },
    XiRange { xi: f64 },
    XiWithoutInterferers { xi: f64 },
    XiMissing,
    XiPerInterfererLen { got: usize, expected: usize },
    XiReferenceMismatch { xi: f64, max_xi_k: f64 },
    SnrGridEmpty,
    SnrGridNotIncreasing { index: usize },
    SnrGridNotFinite { index: usize },
    SnrGridTooLarge { len: usize },
    HeterogeneousXiNeedsPositiveDb { snr_db: f64 },
    ScalingNeedsPositiveDb { snr_db: f64 },
    FixedRateNotPositive { bits: f64 },
    MultiplexingNegative { r: f64 },
    TrialsZero,
    TrialsTooLarge { trials: u64 },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::TxAntennas => write!(f, "M must be >= 1"),
            ConfigError::RxAntennas { n, m } => write!(f, "N must be >= M (got N={n}, M={m})"),
            ConfigError::XiRange { xi } => {
                write!(f, "interference exponents must lie in (0, 1) (got {xi})")
            }
            ConfigError::XiWithoutInterferers { xi } => {
                write!(f, "xi = {xi} > 0 requires at least one interferer (xi = 0 is expressed by interferers = 0)")
            }
            ConfigError::XiMissing => {
                write!(f, "interferers >= 1 requires xi (or xi_k) in (0, 1)")
            }
            ConfigError::XiPerInterfererLen { got, expected } => {
                write!(
                    f,
                    "xi_k must list one exponent per interferer (got {got}, expected {expected})"
                )
            }
            ConfigError::XiReferenceMismatch { xi, max_xi_k } => {
                write!(f, "reference xi = {xi} must equal max(xi_k) = {max_xi_k}")
            }
            ConfigError::SnrGridEmpty => write!(f, "SNR grid must not be empty"),
            ConfigError::SnrGridNotIncreasing { index } => {
                write!(
                    f,
                    "SNR grid must be strictly increasing (violated at index {index})"
                )
            }
            ConfigError::SnrGridNotFinite { index } => {
                write!(
                    f,
                    "SNR grid entries must be finite (violated at index {index})"
                )
            }
            ConfigError::SnrGridTooLarge { len } => {
                write!(f, "SNR grid has {len} points, max {MAX_GRID_POINTS}")
            }
            ConfigError::HeterogeneousXiNeedsPositiveDb { snr_db } => {
                write!(f, "heterogeneous xi_k requires SNR >= 0 dB so Q stays in (0, 1] (grid has {snr_db} dB)")
            }
            ConfigError::ScalingNeedsPositiveDb { snr_db } => {
                write!(
                    f,
                    "scaling rate mode requires SNR > 0 dB (grid has {snr_db} dB)"
                )
            }
            ConfigError::FixedRateNotPositive { bits } => {
                write!(f, "fixed rate must be > 0 bits (got {bits})")
            }
            ConfigError::MultiplexingNegative { r } => {
                write!(f, "multiplexing gain must be >= 0 (got {r})")
            }
            ConfigError::TrialsZero => write!(f, "trials per point must be >= 1"),
            ConfigError::TrialsTooLarge { trials } => {
                write!(
                    f,
                    "trials per point {trials} exceeds {MAX_TRIALS_PER_POINT}"
                )
            }
        }
    }
}

impl core::error::Error for ConfigError {}

/// Unvalidated system parameters; [`ConfigBuilder::build`] normalizes them
/// into a [`SystemConfig`].
#[derive(Clone, Debug)]
pub struct ConfigBuilder {
    pub m: usize,
    pub n: usize,
    pub num_interferers: usize,
    /// Reference interference exponent. Leave `None` to derive it from
    /// `xi_k`; required when interferers exist and `xi_k` is not given.
    pub xi: Option<f64>,
    /// Per-interferer exponents; defaults to all equal to `xi`.
    pub xi_k: Option<Vec<f64>>,
    pub snr_grid_db: Vec<f64>,
    pub rate_mode: RateMode,
    pub trials_per_point: u64,
    pub seed: u64,
}

impl ConfigBuilder {
    pub fn new(m: usize, n: usize, snr_grid_db: Vec<f64>, rate_mode: RateMode) -> Self {
        ConfigBuilder {
            m,
            n,
            num_interferers: 0,
            xi: None,
            xi_k: None,
            snr_grid_db,
            rate_mode,
            trials_per_point: 10_000,
            seed: 0,
        }
    }

    pub fn interferers(mut self, count: usize, xi: f64) -> Self {
        self.num_interferers = count;
        self.xi = Some(xi);
        self
    }

    pub fn trials(mut self, trials: u64) -> Self {
        self.trials_per_point = trials;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn build(self) -> Result<SystemConfig, ConfigError> {
        if self.m < 1 {
            return Err(ConfigError::TxAntennas);
        }
        if self.n < self.m {
            return Err(ConfigError::RxAntennas {
                n: self.n,
                m: self.m,
            });
        }

        let (xi, xi_k) = if self.num_interferers == 0 {
            if let Some(xi) = self.xi {
                if xi != 0.0 {
                    return Err(ConfigError::XiWithoutInterferers { xi });
                }
            }
            (0.0, Vec::new())
        } else {
            let xi_k = match (self.xi, self.xi_k) {
                (_, Some(list)) => list,
                (Some(xi), None) => vec![xi; self.num_interferers],
                (None, None) => return Err(ConfigError::XiMissing),
            };
            if xi_k.len() != self.num_interferers {
                return Err(ConfigError::XiPerInterfererLen {
                    got: xi_k.len(),
                    expected: self.num_interferers,
                });
            }
            for &x in &xi_k {
                if !(x > 0.0 && x < 1.0) {
                    return Err(ConfigError::XiRange { xi: x });
                }
            }
            let max = xi_k.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if let Some(xi) = self.xi {
                if (xi - max).abs() > 1e-12 {
                    return Err(ConfigError::XiReferenceMismatch { xi, max_xi_k: max });
                }
            }
            (max, xi_k)
        };

        if self.snr_grid_db.is_empty() {
            return Err(ConfigError::SnrGridEmpty);
        }
        if self.snr_grid_db.len() > MAX_GRID_POINTS {
            return Err(ConfigError::SnrGridTooLarge {
                len: self.snr_grid_db.len(),
            });
        }
        for (i, &v) in self.snr_grid_db.iter().enumerate() {
            if !v.is_finite() {
                return Err(ConfigError::SnrGridNotFinite { index: i });
            }
            if i > 0 && v <= self.snr_grid_db[i - 1] {
                return Err(ConfigError::SnrGridNotIncreasing { index: i });
            }
        }
        let heterogeneous = xi_k.windows(2).any(|w| w[0] != w[1]);
        if heterogeneous && self.snr_grid_db[0] < 0.0 {
            return Err(ConfigError::HeterogeneousXiNeedsPositiveDb {
                snr_db: self.snr_grid_db[0],
            });
        }

        match self.rate_mode {
            RateMode::Fixed { bits } => {
                if !bits.is_finite() || bits <= 0.0 {
                    return Err(ConfigError::FixedRateNotPositive { bits });
                }
            }
            RateMode::Scaling { r } => {
                if !r.is_finite() || r < 0.0 {
                    return Err(ConfigError::MultiplexingNegative { r });
                }
                if self.snr_grid_db[0] <= 0.0 {
                    return Err(ConfigError::ScalingNeedsPositiveDb {
                        snr_db: self.snr_grid_db[0],
                    });
                }
            }
        }

        if self.trials_per_point == 0 {
            return Err(ConfigError::TrialsZero);
        }
        if self.trials_per_point > MAX_TRIALS_PER_POINT {
            return Err(ConfigError::TrialsTooLarge {
                trials: self.trials_per_point,
            });
        }

        Ok(SystemConfig {
            m: self.m,
            n: self.n,
            num_interferers: self.num_interferers,
            xi,
            xi_k,
            snr_grid_db: self.snr_grid_db,
            rate_mode: self.rate_mode,
            trials_per_point: self.trials_per_point,
            seed: self.seed,
        })
    }
}

/// Validated uplink configuration: M transmit antennas per user, N >= M
/// receive antennas, K-1 co-channel interferers with exponents xi_k, an SNR
/// grid in dB, a rate law, and the Monte Carlo budget.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemConfig {
    m: usize,
    n: usize,
    num_interferers: usize,
    xi: f64,
    xi_k: Vec<f64>,
    snr_grid_db: Vec<f64>,
    rate_mode: RateMode,
    trials_per_point: u64,
    seed: u64,
}

impl SystemConfig {
    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn num_interferers(&self) -> usize {
        self.num_interferers
    }

    /// Reference exponent: max over xi_k, or 0 with no interferers.
    #[inline]
    pub fn xi(&self) -> f64 {
        self.xi
    }

    #[inline]
    pub fn xi_k(&self) -> &[f64] {
        &self.xi_k
    }

    #[inline]
    pub fn snr_grid_db(&self) -> &[f64] {
        &self.snr_grid_db
    }

    #[inline]
    pub fn rate_mode(&self) -> RateMode {
        self.rate_mode
    }

    #[inline]
    pub fn trials_per_point(&self) -> u64 {
        self.trials_per_point
    }

    #[inline]
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Grid index of an SNR value taken from [`Self::snr_grid_db`].
    pub fn point_index(&self, snr_db: f64) -> Option<usize> {
        self.snr_grid_db.iter().position(|&v| v == snr_db)
    }
}

/// One quasi-static block: desired channel H (N×M), stacked interferer
/// channels R (N×M(K-1)), and the diagonal of Q = blockdiag{(INR_k/INR)·I_M}.
///
/// With no interferers `r_stack` is `None`, the interference term is
/// identically zero, and `inr_linear` is fixed at 1 so the whitened Gram
/// matrix reduces to (1/M)·HᴴH with SNR/INR = SNR.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    pub h: ComplexMatrix,
    pub r_stack: Option<ComplexMatrix>,
    pub q_diag: Vec<f64>,
    pub snr_linear: f64,
    pub inr_linear: f64,
}

impl ChannelRealization {
    #[inline]
    pub fn m(&self) -> usize {
        self.h.cols()
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.h.rows()
    }
}

/// Interference-to-noise ratio implied by the interference exponent:
/// INR = SNR^xi.
pub fn inr_from_snr(snr_linear: f64, xi_k: f64) -> f64 {
    debug_assert!(snr_linear > 0.0);
    debug_assert!(xi_k > 0.0 && xi_k < 1.0);
    math::pow(snr_linear, xi_k)
}

/// Target rate in bits per channel use at the given operating SNR.
pub fn target_rate(config: &SystemConfig, snr_linear: f64) -> f64 {
    match config.rate_mode {
        RateMode::Fixed { bits } => bits,
        RateMode::Scaling { r } => {
            debug_assert!(snr_linear > 1.0);
            r * math::log2(snr_linear)
        }
    }
}

/// Substream address for (grid point, trial, replacement attempt).
pub fn substream_id(point: usize, trial: u64, attempt: u32) -> u64 {
    debug_assert!(trial < MAX_TRIALS_PER_POINT);
    debug_assert!(point < MAX_GRID_POINTS);
    debug_assert!(attempt <= MAX_ATTEMPTS);
    trial | ((point as u64) << TRIAL_BITS) | ((attempt as u64) << (TRIAL_BITS + POINT_BITS))
}

/// Draws the channel realization for one trial at a grid SNR.
///
/// `snr_db` must be a value from the configured grid; the (point, trial)
/// pair addresses a dedicated substream, so the draw is independent of
/// execution order and worker count.
pub fn sample_realization(config: &SystemConfig, snr_db: f64, trial: u64) -> ChannelRealization {
    let point = config
        .point_index(snr_db)
        .expect("snr_db must come from the configured grid");
    sample_realization_indexed(config, point, trial, 0)
}

/// As [`sample_realization`], addressing the grid point by index and allowing
/// a replacement-attempt counter for discarded trials.
pub fn sample_realization_indexed(
    config: &SystemConfig,
    point: usize,
    trial: u64,
    attempt: u32,
) -> ChannelRealization {
    let snr_db = config.snr_grid_db[point];
    let snr_linear = math::pow(10.0, snr_db / 10.0);
    let stream = RngStream::new(config.seed(), substream_id(point, trial, attempt));
    let mut sampler = Cn01Sampler::new(stream);

    let mut h = ComplexMatrix::zeros(config.n, config.m);
    sampler.fill(&mut h);

    let k1 = config.num_interferers;
    if k1 == 0 {
        return ChannelRealization {
            h,
            r_stack: None,
            q_diag: Vec::new(),
            snr_linear,
            inr_linear: 1.0,
        };
    }

    let inr_linear = inr_from_snr(snr_linear, config.xi);
    let mut r_stack = ComplexMatrix::zeros(config.n, config.m * k1);
    sampler.fill(&mut r_stack);
    let mut q_diag = Vec::with_capacity(config.m * k1);
    for &xk in &config.xi_k {
        // Exponentially equivalent interferers give Q = I exactly.
        let q = if xk == config.xi {
            1.0
        } else {
            inr_from_snr(snr_linear, xk) / inr_linear
        };
        for _ in 0..config.m {
            q_diag.push(q);
        }
    }

    ChannelRealization {
        h,
        r_stack: Some(r_stack),
        q_diag,
        snr_linear,
        inr_linear,
    }
}
