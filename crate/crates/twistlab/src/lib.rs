//! Desk-scale numerical experiments on twisted Hilbert spaces.
//!
//! * [`seq`]: finitely supported sequences, quasinorms, rearrangements,
//!   rank sequences, polar decomposition and Hölder splitting
//! * [`centralizer`]: Kalton–Peck, rank and Lipschitz-family centralizers,
//!   shifting between exponents, the minimal-extension functional
//! * [`twisted`]: twisted sums `Y ⊕_φ X` and their quasinorm
//! * [`spectral`]: complex matrices, Jacobi SVD, Schatten/Macaev/Lorentz norms
//! * [`diagnostics`]: liftability defects and empirical constants
//! * [`io`]: file formats
//! * [`cli`]: the `twistlab` command-line front end

pub mod centralizer;
pub mod cli;
pub mod diagnostics;
pub mod io;
pub mod seq;
pub mod spectral;
pub mod twisted;

pub use centralizer::{CentralizerSpec, LipschitzPreset, QMapHandle, QuasilinearMap};
pub use seq::{CSeq, PExp};
pub use spectral::CMatrix;
