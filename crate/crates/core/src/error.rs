use alloc::string::String;
use alloc::vec::Vec;

/// Failures raised by the graph pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A structural invariant of an input value does not hold.
    #[error("validation error: {0}")]
    Validation(String),

    /// Two inputs that must agree (dimensions, indices) do not.
    #[error("integrity error: {0}")]
    Integrity(String),

    /// The positive-weight support of a graph is not connected.
    #[error("graph is disconnected: {} components {components:?}", components.len())]
    Disconnected { components: Vec<Vec<usize>> },

    /// Input too small for the requested computation.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A per-graph stage failed inside a dataset-level computation.
    #[error("graph {graph_id}: {source}")]
    Graph {
        graph_id: String,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn integrity(msg: impl Into<String>) -> Self {
        Error::Integrity(msg.into())
    }

    /// Wraps the error with the id of the graph that produced it.
    pub fn for_graph(self, graph_id: impl Into<String>) -> Self {
        Error::Graph {
            graph_id: graph_id.into(),
            source: alloc::boxed::Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
