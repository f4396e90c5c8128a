use crate::crystal::IonConfiguration;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("coincident ions {i} and {j} (separation {r:.3e})")]
    SingularConfiguration { i: usize, j: usize, r: f64 },

    #[error("minimization did not converge after {iterations} iterations (gradient max-norm {grad_norm:.3e})")]
    NonConvergence {
        iterations: usize,
        grad_norm: f64,
        last: IonConfiguration,
    },

    #[error("converged to a saddle point (lowest Hessian eigenvalue {lambda_min:.3e})")]
    Saddle {
        lambda_min: f64,
        at: IonConfiguration,
    },

    #[error("unstable equilibrium: Hessian eigenvalue {lambda_min:.3e} below tolerance")]
    UnstableEquilibrium { lambda_min: f64 },

    #[error("mode scan failed at anisotropy {ratio}: {source}")]
    ScanFailure { ratio: f64, source: Box<Error> },

    #[error("constrained relaxation failed at angle {theta} rad (gradient max-norm {grad_norm:.3e})")]
    RelaxationFailure { theta: f64, grad_norm: f64 },

    #[error("not a two-well rotor potential: {minima} minima per period")]
    NotTwoWell { minima: usize },

    #[error("ramp reaches anisotropy {ratio} <= 1 at sample {index}")]
    RampCrossesIsotropy { ratio: f64, index: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
