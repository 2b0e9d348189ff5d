//! Multi-task network (in progress).
