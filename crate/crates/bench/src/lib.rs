//! Shared fixtures for the benchmarks.

use toa_core::quadrature::linspace;
use toa_core::{
    Dispersion, HalfLine, MomentumGrid, MomentumWavefunction, PositionWavefunction, PotentialSpec, SmearingTest,
};

/// Reference packet: p0 = 5, σ_p = 0.25 on `np` nodes of [1e-3, 12].
pub fn reference_state(np: usize) -> MomentumWavefunction {
    let grid = MomentumGrid::uniform(1e-3, 12.0, np, HalfLine::NonNegative).expect("valid grid");
    MomentumWavefunction::gaussian(grid, 5.0, 0.25).expect("decays at the edges")
}

/// Detector window containing the relativistic arrival at d = 20.
pub fn reference_times(nt: usize) -> Vec<f64> {
    linspace(0.0, 40.0, nt)
}

pub fn massive() -> Dispersion {
    Dispersion::relativistic(1.0).expect("valid mass")
}

pub fn smearing(resolution: usize) -> SmearingTest {
    SmearingTest::gaussian(0.0, 1.0, &[5.0, 10.0, 20.0, 40.0], resolution).expect("valid test function")
}

/// Position-space Gaussian on `nx` nodes of [-50, 150].
pub fn position_packet(nx: usize) -> PositionWavefunction {
    PositionWavefunction::gaussian(linspace(-50.0, 150.0, nx), 0.0, 5.0, 2.0, 0.0).expect("valid packet")
}

pub fn barriers() -> [PotentialSpec; 2] {
    [
        PotentialSpec::rectangular(2.0, 0.0, 5.0).expect("valid barrier"),
        PotentialSpec::parabolic(2.0, 1.0, 0.0).expect("valid barrier"),
    ]
}
