//! On-disk formats (in progress).
