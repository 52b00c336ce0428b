//! Betti-number barcodes of vortex nerves on triangulated video frames.
//!
//! Frames are reduced to hole centroids, triangulated, and the maximal
//! Alexandroff nerves of each triangulation are grown into nested
//! barycentric vortex cycles. The generator count of each vortex nerve is
//! recorded per frame, and runs of equal counts across frames form the
//! barcode used to shrink a video to its persistent-shape frames.

pub mod barcode;
pub mod bench;
pub mod frame_ingest;
pub mod geometry;
pub mod nerve;
pub mod pipeline;
pub mod render;
pub mod synth;
pub mod vortex;
