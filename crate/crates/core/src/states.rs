//! placeholder
use crate::mps::Mps;
use crate::qdd::qmdd::QmddDiagram;
use crate::Result;
pub fn ghz_mps(_n: usize) -> Result<Mps> { unimplemented!() }
pub fn plus_mps(_n: usize) -> Result<Mps> { unimplemented!() }
pub fn rot_mps(_n: usize) -> Result<Mps> { unimplemented!() }
pub fn sum_mps(_n: usize) -> Result<Mps> { unimplemented!() }
pub fn weighted_binary_mps(_n: usize) -> Result<Mps> { unimplemented!() }
pub fn plus_qmdd(_n: usize) -> Result<QmddDiagram> { unimplemented!() }
pub fn rot_qmdd(_n: usize) -> Result<QmddDiagram> { unimplemented!() }
