use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the geometry kernel and the reconstruction engines report.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("points lie strictly on both sides of the plane")]
    SplitSides,
    #[error("half-space intersection is unbounded")]
    Unbounded,
    #[error("half-space intersection is empty")]
    Empty,
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
    #[error("region has no interior")]
    DegenerateRegion,
    #[error("degenerate scene: {0}")]
    DegenerateScene(String),
    #[error("face {0} has no interior")]
    EmptyFace(usize),
    #[error("marker {0} lacks the grouping key")]
    MissingKey(u64),
    #[error("plane of marker {0} supports no face of the reconstruction")]
    RedundantPlane(u64),
    #[error("no consistent seed rectangle ({remaining} markers unconsumed)")]
    NoConsistentSeed { remaining: usize },
    #[error("reconstructed rectangles intersect")]
    IntersectingRectangles,
    #[error("elaboration profile is not strictly inside its base face")]
    ProfileNotInterior,
    #[error("elaboration depth is invalid for the solid")]
    DepthExceedsSolid,
    #[error("marker {0} is neither parallel nor perpendicular to its base face")]
    NonPerpendicularMarker(u64),
    #[error("parallel markers of one elaboration disagree on depth")]
    InconsistentDepth,
    #[error("profile has {edges} edges but {planes} distinct side planes")]
    ProfileEdgeMismatch { edges: usize, planes: usize },
    #[error("consecutive ordered side planes are parallel")]
    OrderCycleBroken,
    #[error("no elaboration references an existing face: {0}")]
    UnknownBaseFace(String),
    #[error("interior markers occupy all six normal classes")]
    NoEmptyClass,
    #[error("no boundary face passes the intrusion-face test")]
    FaceIdentificationFailed,
    #[error("a row holds an odd number of vertices")]
    OddRowCount,
    #[error("a column holds an odd number of vertices")]
    OddColumnCount,
    #[error("an axis line holds an odd number of vertices")]
    OddLineCount,
    #[error("connect-the-dots produced a non-manifold segment set")]
    NonManifold,
    #[error("wireframe admits no consistent face set: {0}")]
    FaceAssemblyFailed(String),
    #[error("face group {0} is not planar")]
    NonPlanarFaceGroup(i64),
    #[error("faces do not close into polyhedra: {0}")]
    AssemblyFailed(String),
    #[error("ordered boundary of face {0} self-intersects")]
    SelfIntersectingBoundary(i64),
    #[error("search budget of {0} candidates exceeded")]
    SearchBudgetExceeded(u64),
    #[error("marker {0} has a non-axis-aligned normal")]
    NonAxisNormal(u64),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("polyhedron {id}: {source}")]
    InGroup { id: i64, source: Box<Error> },
}

impl Error {
    /// Stable variant name, as printed by the command line tool.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::SplitSides => "SplitSides",
            Error::Unbounded => "Unbounded",
            Error::Empty => "Empty",
            Error::Degenerate(_) => "Degenerate",
            Error::InvalidTopology(_) => "InvalidTopology",
            Error::DegenerateRegion => "DegenerateRegion",
            Error::DegenerateScene(_) => "DegenerateScene",
            Error::EmptyFace(_) => "EmptyFace",
            Error::MissingKey(_) => "MissingKey",
            Error::RedundantPlane(_) => "RedundantPlane",
            Error::NoConsistentSeed { .. } => "NoConsistentSeed",
            Error::IntersectingRectangles => "IntersectingRectangles",
            Error::ProfileNotInterior => "ProfileNotInterior",
            Error::DepthExceedsSolid => "DepthExceedsSolid",
            Error::NonPerpendicularMarker(_) => "NonPerpendicularMarker",
            Error::InconsistentDepth => "InconsistentDepth",
            Error::ProfileEdgeMismatch { .. } => "ProfileEdgeMismatch",
            Error::OrderCycleBroken => "OrderCycleBroken",
            Error::UnknownBaseFace(_) => "UnknownBaseFace",
            Error::NoEmptyClass => "NoEmptyClass",
            Error::FaceIdentificationFailed => "FaceIdentificationFailed",
            Error::OddRowCount => "OddRowCount",
            Error::OddColumnCount => "OddColumnCount",
            Error::OddLineCount => "OddLineCount",
            Error::NonManifold => "NonManifold",
            Error::FaceAssemblyFailed(_) => "FaceAssemblyFailed",
            Error::NonPlanarFaceGroup(_) => "NonPlanarFaceGroup",
            Error::AssemblyFailed(_) => "AssemblyFailed",
            Error::SelfIntersectingBoundary(_) => "SelfIntersectingBoundary",
            Error::SearchBudgetExceeded(_) => "SearchBudgetExceeded",
            Error::NonAxisNormal(_) => "NonAxisNormal",
            Error::Unsupported(_) => "Unsupported",
            Error::InGroup { source, .. } => source.kind(),
        }
    }

    /// Strip `InGroup` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::InGroup { source, .. } => source.root(),
            e => e,
        }
    }

    pub(crate) fn in_group(self, id: i64) -> Error {
        Error::InGroup { id, source: Box::new(self) }
    }
}
