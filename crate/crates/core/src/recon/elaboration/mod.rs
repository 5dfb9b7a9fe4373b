//! Elaborated solids: bases refined by extrusions and intrusions.

pub mod boxes;
pub mod hierarchy;
pub mod profile;
pub mod rect_multi;
pub mod tree;
pub use boxes::{reconstruct_box_intrusions_pn, reconstruct_box_intrusions_pp};
pub use rect_multi::reconstruct_rect_elab_multi;
pub use hierarchy::{reconstruct_hierarchy, reconstruct_hierarchy_nonconvex};
pub use tree::{apply_elaborations, BaseSolid, Depth, ElabKind, Elaboration, ElaborationTree};
