//! Shared fixtures for the kernel benchmarks.

use std::f64::consts::PI;

use nfpls::{build_channel, ArrayGeometry, ChannelModel, ChannelVector, LinkBudget, NodeGeometry};

/// Bob and Eve in the default sweep geometry: Bob at 10 m, Eve at 20 m, both at (π/3, 2π/3).
pub fn nodes() -> (NodeGeometry, NodeGeometry) {
    let nb = NodeGeometry::new(10.0, PI / 3.0, 2.0 * PI / 3.0).expect("valid node");
    (nb, nb.with_range(20.0).expect("valid node"))
}

pub fn square_array(side: usize) -> ArrayGeometry {
    ArrayGeometry::half_wavelength(side, side, 0.125).expect("odd side")
}

pub fn channels(model: ChannelModel, side: usize) -> (ChannelVector, ChannelVector) {
    let arr = square_array(side);
    let (nb, ne) = nodes();
    (
        build_channel(model, &arr, &nb).expect("channel"),
        build_channel(model, &arr, &ne).expect("channel"),
    )
}

/// 40 dB transmit SNR over −10 dB noise at both receivers.
pub fn budget() -> LinkBudget {
    LinkBudget::new(1e3, 0.1, 0.1).expect("positive budget")
}
