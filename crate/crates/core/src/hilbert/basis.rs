use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Half-integer total-`S^z` value, stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HalfInt(pub i32);

impl HalfInt {
    pub fn from_f64(x: f64) -> Result<Self> {
        let twice = 2.0 * x;
        if (twice - twice.round()).abs() > 1e-9 {
            return Err(Error::invalid(format!("{x} is not a half-integer")));
        }
        Ok(HalfInt(twice.round() as i32))
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }
}

/// Spin-1/2 configurations, optionally restricted to a total-`S^z` sector.
///
/// Configurations are bitstrings with site 0 as the least significant bit and
/// up-spin encoded as `1`. States are ordered by increasing integer value.
#[derive(Clone, Debug)]
pub struct SpinBasis {
    n_sites: usize,
    n_up: Option<usize>,
    configs: Vec<u64>,
    // binom[n][k] for combinadic ranking inside a fixed-weight sector
    binom: Vec<Vec<u64>>,
}

impl PartialEq for SpinBasis {
    fn eq(&self, other: &Self) -> bool {
        self.n_sites == other.n_sites && self.n_up == other.n_up
    }
}

impl Eq for SpinBasis {}

pub const MAX_SITES: usize = 30;

impl SpinBasis {
    /// Full `2^n` basis.
    pub fn full(n_sites: usize) -> Result<Self> {
        Self::new(n_sites, None)
    }

    /// Basis in the sector with `n_up` up-spins.
    pub fn with_up_count(n_sites: usize, n_up: usize) -> Result<Self> {
        if n_up > n_sites {
            return Err(Error::EmptySector {
                n_sites,
                twice_sz: 2 * n_up as i32 - n_sites as i32,
            });
        }
        Self::build(n_sites, Some(n_up))
    }

    /// Basis with an optional total-`S^z` constraint.
    pub fn new(n_sites: usize, sector: Option<HalfInt>) -> Result<Self> {
        if n_sites == 0 || n_sites > MAX_SITES {
            return Err(Error::invalid(format!(
                "n_sites must be in 1..={MAX_SITES}, got {n_sites}"
            )));
        }
        let n_up = match sector {
            None => None,
            Some(HalfInt(twice)) => {
                let n = n_sites as i32;
                if twice.abs() > n || (twice + n) % 2 != 0 {
                    return Err(Error::EmptySector {
                        n_sites,
                        twice_sz: twice,
                    });
                }
                Some(((twice + n) / 2) as usize)
            }
        };
        Self::build(n_sites, n_up)
    }

    fn build(n_sites: usize, n_up: Option<usize>) -> Result<Self> {
        let mut binom = vec![vec![0u64; n_sites + 2]; n_sites + 1];
        for n in 0..=n_sites {
            binom[n][0] = 1;
            for k in 1..=n {
                binom[n][k] = binom[n - 1][k - 1] + if k < n { binom[n - 1][k] } else { 0 };
            }
        }
        let configs = match n_up {
            None => (0..(1u64 << n_sites)).collect(),
            Some(k) => fixed_weight_configs(n_sites, k),
        };
        Ok(SpinBasis {
            n_sites,
            n_up,
            configs,
            binom,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.configs.len()
    }

    pub fn n_up(&self) -> Option<usize> {
        self.n_up
    }

    pub fn sector(&self) -> Option<HalfInt> {
        self.n_up
            .map(|k| HalfInt(2 * k as i32 - self.n_sites as i32))
    }

    pub fn configs(&self) -> &[u64] {
        &self.configs
    }

    #[inline]
    pub fn config_of(&self, index: usize) -> u64 {
        self.configs[index]
    }

    /// Index of a configuration, or `None` if it lies outside the basis.
    #[inline]
    pub fn index_of(&self, config: u64) -> Option<usize> {
        if self.n_sites < 64 && config >> self.n_sites != 0 {
            return None;
        }
        match self.n_up {
            None => Some(config as usize),
            Some(k) => {
                if config.count_ones() as usize != k {
                    return None;
                }
                let mut rank = 0u64;
                let mut bits = config;
                let mut i = 1;
                while bits != 0 {
                    let p = bits.trailing_zeros() as usize;
                    rank += self.binom[p][i];
                    bits &= bits - 1;
                    i += 1;
                }
                Some(rank as usize)
            }
        }
    }

    pub fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.n_sites {
            Err(Error::SiteOutOfRange {
                site,
                n_sites: self.n_sites,
            })
        } else {
            Ok(())
        }
    }

    pub fn is_sector_restricted(&self) -> bool {
        self.n_up.is_some()
    }
}

fn fixed_weight_configs(n: usize, k: usize) -> Vec<u64> {
    if k == 0 {
        return vec![0];
    }
    let mut out = Vec::new();
    let mut v: u64 = (1u64 << k) - 1;
    let limit = 1u64 << n;
    while v < limit {
        out.push(v);
        // Gosper's hack: next integer with the same popcount
        let t = v | (v - 1);
        let w = (t + 1) | (((!t & (!t).wrapping_neg()) - 1) >> (v.trailing_zeros() + 1));
        v = w;
    }
    out
}

/// `S^z` of `site` in `config`, in units of 1/2 (i.e. `+1` or `-1`).
#[inline]
pub fn twice_sz(config: u64, site: usize) -> i32 {
    if (config >> site) & 1 == 1 {
        1
    } else {
        -1
    }
}
