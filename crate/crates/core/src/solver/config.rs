use crate::error::{Error, Result};
use crate::swe::PhysicsParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    /// Zero-order extrapolation: ghost cells copy the nearest interior cell.
    Extrapolation,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Boundaries {
    pub left: BoundaryKind,
    pub right: BoundaryKind,
    pub bottom: BoundaryKind,
    pub top: BoundaryKind,
}

impl Boundaries {
    pub const EXTRAPOLATION: Self = Self {
        left: BoundaryKind::Extrapolation,
        right: BoundaryKind::Extrapolation,
        bottom: BoundaryKind::Extrapolation,
        top: BoundaryKind::Extrapolation,
    };

    pub const PERIODIC: Self = Self {
        left: BoundaryKind::Periodic,
        right: BoundaryKind::Periodic,
        bottom: BoundaryKind::Periodic,
        top: BoundaryKind::Periodic,
    };

    pub fn x_periodic(&self) -> bool {
        self.left == BoundaryKind::Periodic
    }

    pub fn y_periodic(&self) -> bool {
        self.bottom == BoundaryKind::Periodic
    }

    pub fn validate(&self) -> Result<()> {
        let paired = |a: BoundaryKind, b: BoundaryKind| {
            (a == BoundaryKind::Periodic) == (b == BoundaryKind::Periodic)
        };
        if !paired(self.left, self.right) || !paired(self.bottom, self.top) {
            return Err(Error::Domain(
                "periodic boundaries must be set on both opposite sides".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Integrator {
    SspRk2,
    SspRk3,
}

/// How the bottom slope enters the momentum source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceDiscretization {
    /// Edge-midpoint differences of the bilinear bottom; balances the fluxes
    /// exactly at rest.
    WellBalanced,
    /// Central differences of neighbouring cell averages. Not balanced;
    /// kept as a negative control.
    CellCentered,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub physics: PhysicsParams,
    /// Minmod parameter in `[1, 2]`.
    pub theta: f64,
    /// Offset added to nonzero filter parameters.
    pub delta: f64,
    /// Desingularization threshold; `None` means `min(dx, dy)`.
    pub epsilon: Option<f64>,
    pub cfl: f64,
    pub boundaries: Boundaries,
    pub integrator: Integrator,
    pub source: SourceDiscretization,
    /// Limit on successive time step halvings within one step.
    pub max_halvings: u32,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            physics: PhysicsParams::default(),
            theta: 1.3,
            delta: 1.0e-10,
            epsilon: None,
            cfl: 0.9,
            boundaries: Boundaries::EXTRAPOLATION,
            integrator: Integrator::SspRk2,
            source: SourceDiscretization::WellBalanced,
            max_halvings: 40,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        PhysicsParams::new(self.physics.g)?;
        if !(1.0..=2.0).contains(&self.theta) {
            return Err(Error::Domain(format!(
                "theta must lie in [1, 2], got {}",
                self.theta
            )));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::Domain(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::Domain(format!(
                    "epsilon must be positive, got {eps}"
                )));
            }
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Domain(format!(
                "CFL factor must lie in (0, 1], got {}",
                self.cfl
            )));
        }
        self.boundaries.validate()
    }

    pub fn epsilon_for(&self, dx: f64, dy: f64) -> f64 {
        self.epsilon.unwrap_or(dx.min(dy))
    }
}
