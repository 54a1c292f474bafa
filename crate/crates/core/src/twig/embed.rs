use super::{Twig, TwigPath, TwigVertex};
use crate::error::{Error, Result};
use crate::simulator::PacketTrace;
use crate::time::Time;

/// A packet trace mapped onto the graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Embedding {
    /// Vertex indices of the followed path.
    pub vertices: Vec<usize>,
    /// For each trace hop, the position in `vertices` where that node
    /// received the packet (the source's start vertex for hop 0).
    pub positions: Vec<usize>,
    prefix: Vec<Time>,
}

impl Embedding {
    pub fn weight(&self) -> Time {
        *self.prefix.last().unwrap()
    }

    /// Weight of the stretch between two positions of the path.
    pub fn segment_weight(&self, from: usize, to: usize) -> Time {
        self.prefix[to] - self.prefix[from]
    }

    pub fn receive_vertex(&self, hop: usize) -> usize {
        self.vertices[self.positions[hop]]
    }
}

impl Twig {
    /// Maps a trace to the vertex sequence it followed.
    ///
    /// Each hop is placed on the split window between the two nodes that
    /// contains the send instant `Rt - t_tr`, preferring the window
    /// recorded in the trace. Between receiving and sending, a node moves
    /// over its own waiting edges along the cheapest such path.
    pub fn embed(&self, trace: &PacketTrace) -> Result<Embedding> {
        let first = trace
            .hops
            .first()
            .ok_or_else(|| Error::Inconsistent("trace has no hops".into()))?;
        if first.node != trace.source {
            return Err(Error::Inconsistent(format!(
                "trace starts at {}, not the source {}",
                first.node, trace.source
            )));
        }
        let start = self
            .start_vertex(first.node)
            .ok_or_else(|| Error::Inconsistent(format!("source {} has no windows", first.node)))?;

        let mut vertices = vec![start];
        let mut positions = vec![0];
        for (i, pair) in trace.hops.windows(2).enumerate() {
            let (prev, hop) = (&pair[0], &pair[1]);
            let fail = |reason: String| Error::Embedding {
                hop: i + 1,
                from: prev.node,
                to: hop.node,
                received: hop.reception_time,
                reason,
            };
            if hop.reception_time <= prev.reception_time {
                return Err(fail("reception times must increase".into()));
            }
            let send = hop.reception_time - self.t_tr;
            if send < prev.reception_time {
                return Err(fail(format!("sent at {send} before the sender held the packet")));
            }
            let live = |w: &&super::SplitWindow| {
                w.involves(prev.node) && w.involves(hop.node) && self.piece_at(w.id.wid, send) == Some(w.id)
            };
            let piece = self
                .split
                .iter()
                .filter(live)
                .find(|w| Some(w.id) == hop.window)
                .or_else(|| self.split.iter().find(live))
                .ok_or_else(|| fail(format!("no window between them is open at {send}")))?;
            let out = self
                .require(&TwigVertex {
                    node: prev.node,
                    window: piece.id,
                })
                .map_err(|e| fail(e.to_string()))?;
            let into = self
                .require(&TwigVertex {
                    node: hop.node,
                    window: piece.id,
                })
                .map_err(|e| fail(e.to_string()))?;
            let at = *vertices.last().unwrap();
            let lead = self.connector(at, out).ok_or_else(|| {
                fail(format!(
                    "window {} cannot be reached from the receiving window",
                    piece.id
                ))
            })?;
            vertices.extend_from_slice(&lead.vertices[1..]);
            vertices.push(into);
            positions.push(vertices.len() - 1);
        }

        let mut prefix = Vec::with_capacity(vertices.len());
        prefix.push(Time::ZERO);
        for p in vertices.windows(2) {
            let w = self.arc_weight(p[0], p[1]).expect("embedding follows arcs");
            prefix.push(*prefix.last().unwrap() + w);
        }
        Ok(Embedding {
            vertices,
            positions,
            prefix,
        })
    }

    pub fn embed_trace(&self, trace: &PacketTrace) -> Result<TwigPath> {
        let e = self.embed(trace)?;
        Ok(self.to_path(&e.vertices, e.weight()))
    }
}
