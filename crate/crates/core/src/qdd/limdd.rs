//! placeholder
#[derive(Clone, Debug)]
pub struct LimddDiagram;
