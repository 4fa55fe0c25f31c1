//! Particle interaction energies and their gradient force fields.
//!
//! The energy of a configuration `X = {x_1, ..., x_n}` is
//!
//! ```text
//! E(X) = 1/(n(n-1)) sum_{i>j} V(x_i - x_j) + 1/n sum_i W(x_i)
//! ```
//!
//! with a repulsive pairwise potential `V` (inverse power, singular at zero
//! separation, optionally regularized below a cutoff) and an external
//! potential `W`. Forces are the exact per-particle negative gradients,
//! evaluated by an O(n^2) double loop with a fixed summation order.

use crate::vec2::Vec2;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EnergyError {
    /// Infinite-energy signal: two particles coincide under a singular
    /// potential. Distinct from floating-point overflow.
    #[error("particles {i} and {j} coincide: interaction energy is infinite")]
    CoincidentPair { i: usize, j: usize },
    #[error("separation threshold requires a positive energy bound, got {0}")]
    InvalidEnergyBound(f64),
    #[error("regularized potential violates the floor V(h) = {floor} at r = {at_r}")]
    FloorViolated { floor: f64, at_r: f64 },
    #[error("regularization cutoff must be positive, got {0}")]
    InvalidCutoff(f64),
}

/// Repulsive inverse-power pair potential `V(x) = |x|^{-p}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionPotential {
    exponent: f64,
}

impl InteractionPotential {
    pub fn inverse_power(exponent: f64) -> Self {
        assert!(exponent > 0.0, "inverse-power exponent must be positive");
        InteractionPotential { exponent }
    }

    /// The paper-default `V(x) = 1/|x|`.
    pub fn coulomb() -> Self {
        Self::inverse_power(1.0)
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// Radial profile `V(r) = r^{-p}`.
    pub fn value_radial(&self, r: f64) -> f64 {
        r.powf(-self.exponent)
    }

    pub fn value(&self, x: Vec2) -> f64 {
        self.value_radial(x.norm())
    }

    /// `grad V(x) = -p |x|^{-p-2} x`.
    pub fn gradient(&self, x: Vec2) -> Vec2 {
        let r2 = x.norm_squared();
        x * (-self.exponent * r2.powf(-(self.exponent + 2.0) / 2.0))
    }

    fn radial_derivative(&self, r: f64) -> f64 {
        -self.exponent * r.powf(-self.exponent - 1.0)
    }

    fn radial_second_derivative(&self, r: f64) -> f64 {
        self.exponent * (self.exponent + 1.0) * r.powf(-self.exponent - 2.0)
    }
}

/// C2 regularization of an inverse-power potential: outside the cutoff `h`
/// it equals the base potential; inside, an even quartic `a + b r^2 + c r^4`
/// matching value, first and second radial derivative at `r = h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizedPotential {
    pub base: InteractionPotential,
    pub cutoff: f64,
    a: f64,
    b: f64,
    c: f64,
}

/// Builds the regularized potential. The inner quartic is the minimal even
/// polynomial achieving a C2 junction at `r = h`. Construction fails when
/// the inner piece drops below the floor `V(h)`, which would leave the
/// admissible class of regularizations.
pub fn regularize(
    base: InteractionPotential,
    h: f64,
) -> Result<RegularizedPotential, EnergyError> {
    if h <= 0.0 {
        return Err(EnergyError::InvalidCutoff(h));
    }
    let v = base.value_radial(h);
    let dv = base.radial_derivative(h);
    let ddv = base.radial_second_derivative(h);
    let c = (ddv * h - dv) / (8.0 * h * h * h);
    let b = dv / (2.0 * h) - 2.0 * c * h * h;
    let a = v - b * h * h - c * h * h * h * h;
    let pot = RegularizedPotential {
        base,
        cutoff: h,
        a,
        b,
        c,
    };
    // Floor check by dense radial sampling of the inner piece.
    let floor = v;
    for k in 0..=2000 {
        let r = h * (k as f64) / 2000.0;
        let val = pot.inner(r);
        if val < floor - 1e-12 * floor.abs().max(1.0) {
            return Err(EnergyError::FloorViolated { floor, at_r: r });
        }
    }
    Ok(pot)
}

impl RegularizedPotential {
    fn inner(&self, r: f64) -> f64 {
        let r2 = r * r;
        self.a + self.b * r2 + self.c * r2 * r2
    }

    pub fn value_radial(&self, r: f64) -> f64 {
        if r >= self.cutoff {
            self.base.value_radial(r)
        } else {
            self.inner(r)
        }
    }

    pub fn value(&self, x: Vec2) -> f64 {
        self.value_radial(x.norm())
    }

    pub fn gradient(&self, x: Vec2) -> Vec2 {
        let r2 = x.norm_squared();
        if r2 >= self.cutoff * self.cutoff {
            self.base.gradient(x)
        } else {
            x * (2.0 * self.b + 4.0 * self.c * r2)
        }
    }

    pub fn inner_coefficients(&self) -> (f64, f64, f64) {
        (self.a, self.b, self.c)
    }
}

/// Pairwise potential used by an [`EnergyModel`]: the singular base or its
/// regularization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairPotential {
    Singular(InteractionPotential),
    Regularized(RegularizedPotential),
}

impl PairPotential {
    pub fn value(&self, x: Vec2) -> f64 {
        match self {
            PairPotential::Singular(v) => v.value(x),
            PairPotential::Regularized(v) => v.value(x),
        }
    }

    pub fn gradient(&self, x: Vec2) -> Vec2 {
        match self {
            PairPotential::Singular(v) => v.gradient(x),
            PairPotential::Regularized(v) => v.gradient(x),
        }
    }

    pub fn is_singular(&self) -> bool {
        matches!(self, PairPotential::Singular(_))
    }

    /// Underlying singular potential (base of the regularization).
    pub fn base(&self) -> InteractionPotential {
        match self {
            PairPotential::Singular(v) => *v,
            PairPotential::Regularized(v) => v.base,
        }
    }
}

/// External potential `W` acting on each particle individually.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExternalPotential {
    Zero,
    /// `W(x) = a x + b y` for coefficients `(a, b)`.
    Linear(Vec2),
}

impl ExternalPotential {
    pub fn value(&self, x: Vec2) -> f64 {
        match self {
            ExternalPotential::Zero => 0.0,
            ExternalPotential::Linear(c) => c.dot(x),
        }
    }

    pub fn gradient(&self, _x: Vec2) -> Vec2 {
        match self {
            ExternalPotential::Zero => Vec2::ZERO,
            ExternalPotential::Linear(c) => *c,
        }
    }

    /// Whether `W >= 0` holds everywhere. Separation-bound diagnostics
    /// require this; a nonzero linear potential takes negative values.
    pub fn is_nonnegative(&self) -> bool {
        match self {
            ExternalPotential::Zero => true,
            ExternalPotential::Linear(c) => *c == Vec2::ZERO,
        }
    }
}

/// Energy of an n-particle configuration: pair interaction plus external
/// potential, with the paper's `1/(n(n-1))` and `1/n` scalings.
#[derive(Debug, Clone, Copy)]
pub struct EnergyModel {
    pub interaction: PairPotential,
    pub external: ExternalPotential,
    pub n: usize,
}

impl EnergyModel {
    pub fn new(interaction: PairPotential, external: ExternalPotential, n: usize) -> Self {
        assert!(n >= 1, "need at least one particle");
        EnergyModel {
            interaction,
            external,
            n,
        }
    }

    fn pair_scale(&self) -> f64 {
        1.0 / (self.n as f64 * (self.n as f64 - 1.0))
    }

    /// Total energy. Coincident pairs under a singular potential yield a
    /// dedicated error rather than a floating overflow.
    pub fn energy(&self, positions: &[Vec2]) -> Result<f64, EnergyError> {
        assert_eq!(positions.len(), self.n);
        let mut interaction = 0.0;
        if self.n > 1 {
            for i in 1..self.n {
                for j in 0..i {
                    let sep = positions[i] - positions[j];
                    if self.interaction.is_singular() && sep == Vec2::ZERO {
                        return Err(EnergyError::CoincidentPair { i, j });
                    }
                    interaction += self.interaction.value(sep);
                }
            }
            interaction *= self.pair_scale();
        }
        let external: f64 = positions.iter().map(|&x| self.external.value(x)).sum();
        Ok(interaction + external / self.n as f64)
    }

    /// Force on particle `i`: the negative gradient of the energy with
    /// respect to `x_i`.
    pub fn force(&self, i: usize, positions: &[Vec2]) -> Result<Vec2, EnergyError> {
        assert_eq!(positions.len(), self.n);
        let mut f = Vec2::ZERO;
        if self.n > 1 {
            for j in 0..self.n {
                if j == i {
                    continue;
                }
                let sep = positions[i] - positions[j];
                if self.interaction.is_singular() && sep == Vec2::ZERO {
                    return Err(EnergyError::CoincidentPair { i, j });
                }
                f -= self.interaction.gradient(sep);
            }
            f = f * self.pair_scale();
        }
        f -= self.external.gradient(positions[i]) / self.n as f64;
        Ok(f)
    }

    /// Forces on all particles, summed in a fixed order per particle.
    pub fn forces(&self, positions: &[Vec2]) -> Result<Vec<Vec2>, EnergyError> {
        (0..self.n).map(|i| self.force(i, positions)).collect()
    }
}

/// Largest separation `h` such that `V(y) > n(n-1) E0` for all `|y| <= h`.
/// For the inverse power `V(r) = r^{-p}` this is the closed form
/// `h = (n(n-1) E0)^{-1/p}`.
pub fn separation_threshold(
    v: &InteractionPotential,
    n: usize,
    e0: f64,
) -> Result<f64, EnergyError> {
    if e0 <= 0.0 {
        return Err(EnergyError::InvalidEnergyBound(e0));
    }
    let bound = n as f64 * (n as f64 - 1.0) * e0;
    Ok(bound.powf(-1.0 / v.exponent()))
}

/// Minimum pairwise distance of a configuration; infinity for fewer than
/// two particles.
pub fn min_separation(positions: &[Vec2]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 1..positions.len() {
        for j in 0..i {
            best = best.min(positions[i].distance(positions[j]));
        }
    }
    best
}
