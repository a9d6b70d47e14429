use thiserror::Error;

/// Errors produced by the spectral, hierarchy and shooting routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no convergence in band {band}: {reason}")]
    BandConvergence { band: usize, reason: String },

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("coupling {coupling} is below the critical value {critical} of pair {nu}; the pair is still real")]
    BelowCritical { nu: usize, coupling: f64, critical: f64 },

    #[error("illegal elimination step {step}: {reason}")]
    IllegalPlanStep { step: usize, reason: String },

    #[error("invalid plan token `{0}` (expected real, clower or cupper)")]
    PlanSyntax(String),

    #[error("eigenfunction is annihilated by the intertwining operator")]
    Annihilated,

    #[error("eigenfunction has a node at x = {0}; logarithmic derivative undefined")]
    Node(f64),

    #[error("empty grid")]
    EmptyGrid,

    #[error("finite-difference stencil at x = {x} with h = {h} crosses a region boundary")]
    StencilCrossesBoundary { x: f64, h: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
