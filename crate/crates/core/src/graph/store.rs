use std::sync::Arc;

use parking_lot::RwLock;

use super::PropertyGraph;

/// Shared handle: many concurrent readers or a single writer.
///
/// A writer closure runs under the exclusive lock, so readers see either
/// all of its mutations or none of them.
#[derive(Debug, Clone, Default)]
pub struct GraphStore {
    inner: Arc<RwLock<PropertyGraph>>,
}

impl GraphStore {
    pub fn new(graph: PropertyGraph) -> Self {
        Self {
            inner: Arc::new(RwLock::new(graph)),
        }
    }

    pub fn read<R>(&self, f: impl FnOnce(&PropertyGraph) -> R) -> R {
        f(&self.inner.read())
    }

    pub fn write<R>(&self, f: impl FnOnce(&mut PropertyGraph) -> R) -> R {
        f(&mut self.inner.write())
    }

    /// Swaps in a whole new graph, returning the old one.
    pub fn replace(&self, graph: PropertyGraph) -> PropertyGraph {
        std::mem::replace(&mut *self.inner.write(), graph)
    }

    pub fn snapshot(&self) -> PropertyGraph {
        self.inner.read().clone()
    }
}
