//! placeholder
use crate::dense::DenseState;
use crate::mps::Mps;
use crate::qdd::qmdd::QmddDiagram;
use crate::Result;
pub fn qmdd_to_mps(_d: &QmddDiagram) -> Result<Mps> { unimplemented!() }
pub fn dense_to_mps(_s: &DenseState) -> Result<Mps> { unimplemented!() }
