//! Construction of the two benchmark environment families: random tabular
//! exo-MDPs (uniform rewards, modular endogenous shift, Dirichlet
//! transition rows) and the storage-control instance with its 70/30 price
//! chain.

use ndarray::{Array2, Array3};
use rand::Rng;
use rand_distr::{Dirichlet, Distribution};

use crate::error::{Error, Result};
use crate::exo::{ExoKernel, TabularExoMdp};
use crate::lfa::{HatBasis, StorageSpec};
use crate::rng::Stream;

/// Random tabular benchmark: rewards i.i.d. Uniform(0, 1), endogenous
/// dynamics `x' = (x + a + xi') mod num_x`, and a time-homogeneous
/// exogenous kernel with rows drawn i.i.d. from a symmetric Dirichlet.
/// Deterministic given the stream state.
pub fn make_tabular_benchmark(
    num_x: usize,
    num_xi: usize,
    num_a: usize,
    horizon: usize,
    dirichlet_alpha: f64,
    rng: &mut Stream,
) -> Result<TabularExoMdp> {
    if num_x == 0 || num_xi == 0 || num_a == 0 || horizon == 0 {
        return Err(Error::invalid("all benchmark sizes must be at least 1"));
    }
    if !(dirichlet_alpha > 0.0) {
        return Err(Error::invalid("dirichlet_alpha must be positive"));
    }

    let mut reward = Array3::zeros((num_x, num_a, num_xi));
    for x in 0..num_x {
        for a in 0..num_a {
            for xi in 0..num_xi {
                reward[[x, a, xi]] = rng.gen::<f64>();
            }
        }
    }

    let mut endo = Array3::zeros((num_x, num_a, num_xi));
    for x in 0..num_x {
        for a in 0..num_a {
            for xi in 0..num_xi {
                endo[[x, a, xi]] = (x + a + xi) % num_x;
            }
        }
    }

    let mut matrix = Array2::zeros((num_xi, num_xi));
    if num_xi == 1 {
        matrix[[0, 0]] = 1.0;
    } else {
        let dir = Dirichlet::new_with_size(dirichlet_alpha, num_xi)
            .map_err(|e| Error::invalid(format!("dirichlet: {e}")))?;
        for xi in 0..num_xi {
            let row = dir.sample(rng);
            for (j, v) in row.into_iter().enumerate() {
                matrix[[xi, j]] = v;
            }
        }
    }
    let kernel = ExoKernel::time_homogeneous(horizon, matrix)?;
    TabularExoMdp::new(horizon, reward, endo, kernel)
}

/// Optional parameter overrides for the storage benchmark. `None` fields
/// take the benchmark defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StorageOverrides {
    pub capacity: Option<f64>,
    pub a_max: Option<f64>,
    pub eta_plus: Option<f64>,
    pub eta_minus: Option<f64>,
    pub leakage: Option<f64>,
    pub trans_cost: Option<f64>,
    pub holding: Option<f64>,
    pub reward_sign: Option<f64>,
    /// Full price codebook; defaults to `1..=R`.
    pub prices: Option<Vec<f64>>,
}

/// Storage-benchmark defaults.
pub mod storage_defaults {
    pub const CAPACITY: f64 = 10.0;
    pub const A_MAX: f64 = 2.0;
    pub const ETA_PLUS: f64 = 1.0;
    pub const ETA_MINUS: f64 = 1.0;
    pub const LEAKAGE: f64 = 1.0;
    pub const TRANS_COST: f64 = 0.3;
    pub const HOLDING: f64 = 0.05;
    /// Price term orientation: charging pays the price, discharging earns
    /// it. The arbitrage benchmark is degenerate under the opposite sign
    /// (charging would earn money outright), so the meaningful orientation
    /// is the default.
    pub const REWARD_SIGN: f64 = -1.0;
}

/// Builds the storage-control benchmark with `R` price levels and an
/// `N`-anchor uniform hat basis.
///
/// The price chain spreads 70% of the mass uniformly over the feasible
/// subset of {stay, left neighbor, right neighbor} and the remaining 30%
/// uniformly over all `R` levels; boundary levels have a two-element
/// neighborhood.
pub fn make_storage_benchmark(
    horizon: usize,
    num_prices: usize,
    num_anchors: usize,
    overrides: &StorageOverrides,
) -> Result<(StorageSpec, HatBasis)> {
    if num_prices < 2 {
        return Err(Error::invalid("storage benchmark needs at least 2 prices"));
    }
    if num_anchors < 2 {
        return Err(Error::invalid("storage benchmark needs at least 2 anchors"));
    }
    if horizon == 0 {
        return Err(Error::invalid("horizon must be positive"));
    }

    let prices: Vec<f64> = overrides
        .prices
        .clone()
        .unwrap_or_else(|| (1..=num_prices).map(|r| r as f64).collect());
    if prices.len() != num_prices {
        return Err(Error::dims(format!(
            "price codebook has {} entries, expected {num_prices}",
            prices.len()
        )));
    }

    let kernel = ExoKernel::time_homogeneous(horizon, price_matrix(num_prices))?;
    let spec = StorageSpec {
        capacity: overrides.capacity.unwrap_or(storage_defaults::CAPACITY),
        a_max: overrides.a_max.unwrap_or(storage_defaults::A_MAX),
        eta_plus: overrides.eta_plus.unwrap_or(storage_defaults::ETA_PLUS),
        eta_minus: overrides.eta_minus.unwrap_or(storage_defaults::ETA_MINUS),
        leakage: overrides.leakage.unwrap_or(storage_defaults::LEAKAGE),
        trans_cost: overrides.trans_cost.unwrap_or(storage_defaults::TRANS_COST),
        holding: overrides.holding.unwrap_or(storage_defaults::HOLDING),
        reward_sign: overrides
            .reward_sign
            .unwrap_or(storage_defaults::REWARD_SIGN),
        prices,
        price_kernel: kernel,
        horizon,
    };
    spec.validate()?;
    let basis = HatBasis::uniform(num_anchors, spec.capacity)?;
    Ok((spec, basis))
}

/// The 70/30 price transition matrix.
pub fn price_matrix(r: usize) -> Array2<f64> {
    let mut m = Array2::from_elem((r, r), 0.3 / r as f64);
    for i in 0..r {
        let mut neighbors = vec![i];
        if i > 0 {
            neighbors.push(i - 1);
        }
        if i + 1 < r {
            neighbors.push(i + 1);
        }
        let share = 0.7 / neighbors.len() as f64;
        for j in neighbors {
            m[[i, j]] += share;
        }
    }
    m
}
