//! Dyadic partition of unity, Littlewood-Paley blocks and nonhomogeneous
//! Besov norms.
//!
//! The low-frequency cutoff is `χ(ξ) = S((4/3 - |ξ|)/(4/3 - 3/4))` where `S`
//! is the exp-based smooth step, and the ring function is
//! `ψ(ξ) = χ(ξ/2) - χ(ξ)`. Block `j ≥ 0` is the multiplier `ψ(2^{-j} ξ)`,
//! block `-1` is `χ`, and all blocks `j ≤ -2` vanish.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::spectral::{check_exponent, lp_norm_unchecked, to_field, to_spectrum, Field, GridSpec};

/// `exp(-1/t)` for `t > 0`, else 0.
fn bump_tail(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth step: 0 for `t ≤ 0`, 1 for `t ≥ 1`, `C^∞` in between.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = bump_tail(t);
    let b = bump_tail(1.0 - t);
    a / (a + b)
}

const BALL: f64 = 4.0 / 3.0;
const INNER: f64 = 3.0 / 4.0;

/// The pair `(χ, ψ_ring)`; grid independent.
#[derive(Debug, Clone, Copy, Default)]
pub struct LpFamily;

pub fn build_lp_family() -> LpFamily {
    LpFamily
}

impl LpFamily {
    pub fn chi(&self, xi: f64) -> f64 {
        smooth_step((BALL - xi.abs()) / (BALL - INNER))
    }

    pub fn psi_ring(&self, xi: f64) -> f64 {
        self.chi(0.5 * xi) - self.chi(xi)
    }

    /// Multiplier of block `j`.
    pub fn block_symbol(&self, j: i32, xi: f64) -> f64 {
        match j {
            j if j <= -2 => 0.0,
            -1 => self.chi(xi),
            j => self.psi_ring(xi * 0.5f64.powi(j)),
        }
    }

    /// Top block index for a grid: the smallest `J` with `χ(2^{-J-1}ξ) = 1`
    /// on every grid frequency, i.e. `(3/2)·2^J ≥ ξ_max`. Blocks above `J`
    /// vanish on the grid.
    pub fn j_max(&self, grid: &GridSpec) -> i32 {
        let mut j = 0;
        while 1.5 * 2f64.powi(j) < grid.nyquist() {
            j += 1;
        }
        j
    }
}

/// Besov exponents `(s, p, r)`; `p` and `r` may be `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovParams {
    pub s: f64,
    #[serde(with = "exponent_serde")]
    pub p: f64,
    #[serde(with = "exponent_serde")]
    pub r: f64,
}

impl BesovParams {
    pub fn new(s: f64, p: f64, r: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(LabError::InvalidArgument(format!(
                "regularity must be finite, got {s}"
            )));
        }
        check_exponent("p", p)?;
        check_exponent("r", r)?;
        Ok(Self { s, p, r })
    }

    /// Same `(p, r)` at a different regularity.
    pub fn with_s(self, s: f64) -> Self {
        Self { s, ..self }
    }

    pub fn with_r(self, r: f64) -> Self {
        Self { r, ..self }
    }

    /// `1/p`, zero for `p = ∞`.
    pub fn inv_p(&self) -> f64 {
        if self.p.is_infinite() {
            0.0
        } else {
            1.0 / self.p
        }
    }

    /// `s > max{1 + 1/p, 3/2}` and `r < ∞`: the range where the
    /// Camassa-Holm data-to-solution map is studied.
    pub fn admissible_ch(&self) -> bool {
        self.s > (1.0 + self.inv_p()).max(1.5) && self.r.is_finite()
    }

    /// `s > 1 + 1/p` and `r < ∞`.
    pub fn admissible_dp(&self) -> bool {
        self.s > 1.0 + self.inv_p() && self.r.is_finite()
    }
}

/// Formats exponents as numbers, with `"inf"` for infinity.
pub fn format_exponent(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v}")
    }
}

pub fn parse_exponent(text: &str) -> Result<f64> {
    let t = text.trim();
    let v = match t.to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "∞" => f64::INFINITY,
        _ => t
            .parse::<f64>()
            .map_err(|_| LabError::InvalidArgument(format!("not an exponent: {text:?}")))?,
    };
    Ok(v)
}

mod exponent_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => super::parse_exponent(&t).map_err(serde::de::Error::custom),
        }
    }
}

/// `ℓ^r` norm of a nonnegative sequence.
pub fn sequence_norm(values: impl IntoIterator<Item = f64>, r: f64) -> f64 {
    if r.is_infinite() {
        return values.into_iter().fold(0.0, f64::max);
    }
    let values: Vec<f64> = values.into_iter().collect();
    let peak = values.iter().copied().fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    if r == 1.0 {
        return values.iter().sum();
    }
    peak * values
        .iter()
        .map(|v| (v / peak).powf(r))
        .sum::<f64>()
        .powf(1.0 / r)
}

/// Instances keyed by `(L.to_bits(), N)`.
type GridCache = HashMap<(u64, usize), Arc<LittlewoodPaley>>;

/// Block multipliers tabulated on one grid.
#[derive(Debug)]
pub struct LittlewoodPaley {
    grid: GridSpec,
    family: LpFamily,
    j_max: i32,
    /// `tables[j + 1][m]` is the block-`j` symbol at FFT slot `m`.
    tables: Vec<Vec<f64>>,
}

/// Block norms `‖Δ_j u‖_{L^p}` for `j = -1, …, j_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockNorms {
    pub p: f64,
    pub norms: Vec<(i32, f64)>,
}

impl BlockNorms {
    /// `‖(2^{js} ‖Δ_j u‖_p)_j‖_{ℓ^r}`.
    pub fn besov(&self, s: f64, r: f64) -> f64 {
        sequence_norm(
            self.norms.iter().map(|&(j, n)| 2f64.powf(j as f64 * s) * n),
            r,
        )
    }

    pub fn get(&self, j: i32) -> f64 {
        self.norms
            .iter()
            .find(|(k, _)| *k == j)
            .map(|(_, n)| *n)
            .unwrap_or(0.0)
    }
}

/// Blocks of a field keyed by index.
#[derive(Debug, Clone)]
pub struct DyadicDecomposition {
    pub blocks: BTreeMap<i32, Field>,
}

impl DyadicDecomposition {
    pub fn reconstruct(&self) -> Option<Field> {
        let mut iter = self.blocks.values();
        let first = iter.next()?.clone();
        Some(iter.fold(first, |acc, b| &acc + b))
    }
}

impl LittlewoodPaley {
    pub fn new(grid: GridSpec) -> Self {
        let family = build_lp_family();
        let j_max = family.j_max(&grid);
        let freqs = grid.frequencies();
        let tables = (-1..=j_max)
            .map(|j| freqs.iter().map(|&xi| family.block_symbol(j, xi)).collect())
            .collect();
        Self {
            grid,
            family,
            j_max,
            tables,
        }
    }

    /// Shared instance for a grid.
    pub fn for_grid(grid: GridSpec) -> Arc<Self> {
        static CACHE: OnceLock<Mutex<GridCache>> = OnceLock::new();
        let key = (grid.half_length().to_bits(), grid.points());
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
        map.entry(key)
            .or_insert_with(|| Arc::new(LittlewoodPaley::new(grid)))
            .clone()
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn family(&self) -> LpFamily {
        self.family
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    /// Symbol table of block `j` (all zeros outside `-1..=j_max`).
    fn table(&self, j: i32) -> Option<&[f64]> {
        if j < -1 || j > self.j_max {
            None
        } else {
            Some(&self.tables[(j + 1) as usize])
        }
    }

    /// `χ + Σ_{j=0}^{j_max} ψ(2^{-j}·)` at every grid frequency.
    pub fn partition_sum(&self) -> Vec<f64> {
        (0..self.grid.points())
            .map(|m| self.tables.iter().map(|t| t[m]).sum())
            .collect()
    }

    /// `Δ_j u`.
    pub fn block(&self, u: &Field, j: i32) -> Result<Field> {
        if u.grid() != self.grid {
            return Err(LabError::GridMismatch);
        }
        Ok(match self.table(j) {
            None => Field::zeros(self.grid),
            Some(t) => to_field(&to_spectrum(u).multiply_real_table(t)),
        })
    }

    pub fn decompose(&self, u: &Field) -> Result<DyadicDecomposition> {
        if u.grid() != self.grid {
            return Err(LabError::GridMismatch);
        }
        let spec = to_spectrum(u);
        let blocks = (-1..=self.j_max)
            .map(|j| {
                (
                    j,
                    to_field(&spec.multiply_real_table(&self.tables[(j + 1) as usize])),
                )
            })
            .collect();
        Ok(DyadicDecomposition { blocks })
    }

    /// `‖Δ_j u‖_{L^p}` for every block; blocks with no support skip the
    /// inverse transform.
    pub fn block_norms(&self, u: &Field, p: f64) -> Result<BlockNorms> {
        check_exponent("p", p)?;
        if u.grid() != self.grid {
            return Err(LabError::GridMismatch);
        }
        let spec = to_spectrum(u);
        let dx = self.grid.dx();
        let mut norms = Vec::with_capacity(self.tables.len());
        for (idx, t) in self.tables.iter().enumerate() {
            let j = idx as i32 - 1;
            let filtered = spec.multiply_real_table(t);
            let empty = filtered
                .coefficients()
                .iter()
                .all(|c| c.re == 0.0 && c.im == 0.0);
            let n = if empty {
                0.0
            } else {
                lp_norm_unchecked(to_field(&filtered).samples(), dx, p)
            };
            norms.push((j, n));
        }
        Ok(BlockNorms { p, norms })
    }

    pub fn besov_norm(&self, u: &Field, params: BesovParams) -> Result<f64> {
        check_exponent("r", params.r)?;
        Ok(self.block_norms(u, params.p)?.besov(params.s, params.r))
    }
}

impl crate::spectral::Spectrum {
    pub(crate) fn multiply_real_table(&self, table: &[f64]) -> crate::spectral::Spectrum {
        let coefficients = self
            .coefficients()
            .iter()
            .zip(table)
            .map(|(c, &w)| c * w)
            .collect();
        crate::spectral::Spectrum::new(self.grid(), coefficients).expect("finite table")
    }
}

/// `Δ_j u` on the field's own grid.
pub fn dyadic_block(u: &Field, j: i32) -> Field {
    LittlewoodPaley::for_grid(u.grid())
        .block(u, j)
        .expect("grid matches by construction")
}

/// `‖u‖_{B^s_{p,r}}` summed over `j = -1, …, j_max(grid)`.
pub fn besov_norm(u: &Field, params: BesovParams) -> Result<f64> {
    LittlewoodPaley::for_grid(u.grid()).besov_norm(u, params)
}

/// Result of comparing two Besov norms for an embedding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingCheck {
    pub holds: bool,
    pub stronger: f64,
    pub weaker: f64,
}

/// Checks `‖u‖_{B^t_{p,r}} ≤ ‖u‖_{B^s_{p,q}}` for `s > t`, or `s = t` with
/// `q ≤ r`.
pub fn embedding_check(
    u: &Field,
    stronger: BesovParams,
    weaker: BesovParams,
) -> Result<EmbeddingCheck> {
    if stronger.p != weaker.p {
        return Err(LabError::InvalidArgument(
            "embedding compares spaces with the same integrability".into(),
        ));
    }
    let admissible = stronger.s > weaker.s || (stronger.s == weaker.s && stronger.r <= weaker.r);
    if !admissible {
        return Err(LabError::InvalidArgument(format!(
            "no embedding B^{}_{{p,{}}} -> B^{}_{{p,{}}}",
            stronger.s, stronger.r, weaker.s, weaker.r
        )));
    }
    let lp = LittlewoodPaley::for_grid(u.grid());
    let norms = lp.block_norms(u, stronger.p)?;
    let a = norms.besov(stronger.s, stronger.r);
    let b = norms.besov(weaker.s, weaker.r);
    Ok(EmbeddingCheck {
        holds: b <= a * (1.0 + 1e-14),
        stronger: a,
        weaker: b,
    })
}
