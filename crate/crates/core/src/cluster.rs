//! One client and `n` database nodes, connected in-process or over TCP.
//!
//! Both transports move the same encoded frames, so a retrieval produces the
//! same [`RetrievalTranscript`] either way.

use std::io::BufReader;
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Symbol;
use crate::mds::{encode_storage, MessageSet, Shard};
use crate::params::SystemParams;
use crate::scheme::Scheme;
use crate::wire::{decode_symbols, encode_symbols, ErrorCode, FrameType, WireFrame};

/// A database: an immutable shard behind the scheme's answer function.
/// Nodes never see the requested index, only query payloads.
pub struct DatabaseNode<S: Scheme> {
    scheme: Arc<S>,
    shard: Arc<Shard>,
}

impl<S: Scheme> Clone for DatabaseNode<S> {
    fn clone(&self) -> Self {
        DatabaseNode { scheme: Arc::clone(&self.scheme), shard: Arc::clone(&self.shard) }
    }
}

impl<S: Scheme> DatabaseNode<S> {
    pub fn new(scheme: Arc<S>, shard: Shard) -> Self {
        DatabaseNode { scheme, shard: Arc::new(shard) }
    }

    pub fn db_index(&self) -> usize {
        self.shard.db_index
    }

    pub fn shard(&self) -> &Shard {
        &self.shard
    }

    /// Answers a query frame; anything else yields an error frame.
    pub fn handle_frame(&self, frame: &WireFrame) -> WireFrame {
        let db = self.shard.db_index as u16;
        if frame.frame_type != FrameType::Query {
            return WireFrame::error(db, ErrorCode::MalformedFrame, "expected a query frame");
        }
        if frame.db_index != db {
            return WireFrame::error(
                db,
                ErrorCode::WrongDatabase,
                &format!("query addressed to database {}", frame.db_index),
            );
        }
        let query = match self.scheme.decode_query(self.shard.db_index, &frame.payload) {
            Ok(q) => q,
            Err(e) => return WireFrame::error(db, ErrorCode::InvalidQuery, &e.to_string()),
        };
        match self.scheme.answer(&self.shard, &query) {
            Ok(symbols) => WireFrame::answer(db, &symbols, self.scheme.code().field()),
            Err(e) => WireFrame::error(db, ErrorCode::InvalidQuery, &e.to_string()),
        }
    }

    /// Byte-level entry point: malformed input becomes an error frame.
    pub fn handle_bytes(&self, bytes: &[u8]) -> Vec<u8> {
        match WireFrame::decode(bytes) {
            Ok(frame) => self.handle_frame(&frame),
            Err(e) => WireFrame::error(self.shard.db_index as u16, ErrorCode::MalformedFrame, &e.to_string()),
        }
        .encode()
    }

    fn serve_connection(&self, stream: TcpStream) -> Result<()> {
        let mut reader = BufReader::new(stream.try_clone()?);
        let mut writer = stream;
        loop {
            match WireFrame::read_from(&mut reader) {
                Ok(Some(frame)) => self.handle_frame(&frame).write_to(&mut writer)?,
                Ok(None) => return Ok(()),
                Err(e) => {
                    // The stream cannot be resynchronised after a bad header.
                    let reply = WireFrame::error(self.shard.db_index as u16, ErrorCode::MalformedFrame, &e.to_string());
                    let _ = reply.write_to(&mut writer);
                    return Ok(());
                }
            }
        }
    }
}

/// A node listening on a TCP socket; stops when dropped.
pub struct NodeServer {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl NodeServer {
    /// Binds `addr` (use port 0 for an ephemeral port) and serves each
    /// connection on its own thread.
    pub fn spawn<S: Scheme + 'static>(node: DatabaseNode<S>, addr: impl ToSocketAddrs) -> Result<Self> {
        let listener = TcpListener::bind(addr)?;
        let addr = listener.local_addr()?;
        let stop = Arc::new(AtomicBool::new(false));
        let flag = Arc::clone(&stop);
        let handle = thread::spawn(move || {
            for stream in listener.incoming() {
                if flag.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(stream) = stream else { continue };
                let node = node.clone();
                thread::spawn(move || {
                    let _ = node.serve_connection(stream);
                });
            }
        });
        Ok(NodeServer { addr, stop, handle: Some(handle) })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn shutdown(&mut self) {
        if let Some(handle) = self.handle.take() {
            self.stop.store(true, Ordering::SeqCst);
            // Wake the accept loop.
            let _ = TcpStream::connect(self.addr);
            let _ = handle.join();
        }
    }
}

impl Drop for NodeServer {
    fn drop(&mut self) {
        self.shutdown();
    }
}

/// Sends one frame over a fresh connection and reads the reply.
pub fn exchange(addr: SocketAddr, request: &[u8]) -> Result<Vec<u8>> {
    let mut stream = TcpStream::connect(addr)?;
    stream.set_nodelay(true)?;
    std::io::Write::write_all(&mut stream, request)?;
    stream.shutdown(std::net::Shutdown::Write)?;
    let reply = WireFrame::read_from(&mut BufReader::new(stream))?
        .ok_or_else(|| Error::MalformedFrame("connection closed without a reply".into()))?;
    Ok(reply.encode())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportMode {
    #[default]
    InProcess,
    Wire,
}

impl std::str::FromStr for TransportMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "in-process" | "in_process" => Ok(TransportMode::InProcess),
            "wire" => Ok(TransportMode::Wire),
            other => Err(Error::InvalidParams(format!("unknown mode {other:?}"))),
        }
    }
}

/// Everything exchanged during one retrieval. Frames and symbols are hex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetrievalTranscript {
    pub params: SystemParams,
    pub scheme: String,
    pub k_star: usize,
    pub randomness: serde_json::Value,
    pub query_frames: Vec<String>,
    pub answer_frames: Vec<String>,
    pub reconstructed: String,
    /// Query payload bytes over all databases.
    pub uploaded_bytes: u64,
    /// Answer payload bytes over all databases.
    pub downloaded_bytes: u64,
    pub downloaded_symbols: u64,
}

impl RetrievalTranscript {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("transcripts serialize")
    }
}

/// The simulated deployment: nodes holding shards of `messages` and a
/// client that knows the messages only to check its reconstructions.
pub struct Cluster<S: Scheme + 'static> {
    scheme: Arc<S>,
    messages: MessageSet,
    nodes: Vec<DatabaseNode<S>>,
    servers: Vec<NodeServer>,
    mode: TransportMode,
}

impl<S: Scheme + 'static> Cluster<S> {
    pub fn new(scheme: S, messages: MessageSet, mode: TransportMode) -> Result<Self> {
        if messages.params() != scheme.params() {
            return Err(Error::DimensionMismatch("messages were sized for different parameters".into()));
        }
        let scheme = Arc::new(scheme);
        let nodes: Vec<_> = encode_storage(scheme.code(), &messages)?
            .into_iter()
            .map(|shard| DatabaseNode::new(Arc::clone(&scheme), shard))
            .collect();
        let servers = match mode {
            TransportMode::InProcess => Vec::new(),
            TransportMode::Wire => {
                nodes.iter().map(|n| NodeServer::spawn(n.clone(), "127.0.0.1:0")).collect::<Result<_>>()?
            }
        };
        Ok(Cluster { scheme, messages, nodes, servers, mode })
    }

    pub fn scheme(&self) -> &S {
        &self.scheme
    }

    pub fn nodes(&self) -> &[DatabaseNode<S>] {
        &self.nodes
    }

    pub fn mode(&self) -> TransportMode {
        self.mode
    }

    pub fn messages(&self) -> &MessageSet {
        &self.messages
    }

    /// Node endpoints in wire mode.
    pub fn endpoints(&self) -> Vec<SocketAddr> {
        self.servers.iter().map(NodeServer::addr).collect()
    }

    pub fn retrieve<R: RngCore + ?Sized>(&self, k_star: usize, rng: &mut R) -> Result<RetrievalTranscript> {
        let randomness = self.scheme.sample(rng);
        self.retrieve_with(k_star, &randomness)
    }

    /// Runs a retrieval with fixed user randomness.
    pub fn retrieve_with(&self, k_star: usize, randomness: &S::Randomness) -> Result<RetrievalTranscript> {
        let params = *self.scheme.params();
        let field = self.scheme.code().field().clone();
        let queries = self.scheme.queries(k_star, randomness)?;
        let requests: Vec<Vec<u8>> = queries
            .iter()
            .enumerate()
            .map(|(db, q)| WireFrame::query(db as u16, self.scheme.encode_query(q)).encode())
            .collect();
        let replies = self.send_all(&requests)?;

        let mut answers = Vec::with_capacity(params.n);
        let (mut downloaded_bytes, mut downloaded_symbols) = (0u64, 0u64);
        for (db, reply) in replies.iter().enumerate() {
            let frame = WireFrame::decode(reply)?;
            if let Some((code, message)) = frame.error_parts() {
                return Err(Error::RemoteError { db, code, message });
            }
            if frame.frame_type != FrameType::Answer || frame.db_index as usize != db {
                return Err(Error::MalformedFrame(format!("unexpected reply from database {db}")));
            }
            let symbols = decode_symbols(&frame.payload, &field)?;
            downloaded_bytes += frame.payload.len() as u64;
            downloaded_symbols += symbols.len() as u64;
            answers.push(symbols);
        }
        let out = self.scheme.reconstruct(k_star, randomness, &answers)?;
        if out != self.messages.message(k_star) {
            return Err(Error::ReconstructionMismatch { k_star });
        }
        let uploaded_bytes = requests.iter().map(|r| (r.len() - crate::wire::HEADER_LEN) as u64).sum();
        Ok(RetrievalTranscript {
            params,
            scheme: self.scheme.name(),
            k_star,
            randomness: serde_json::to_value(randomness).expect("randomness serializes"),
            query_frames: requests.iter().map(hex::encode).collect(),
            answer_frames: replies.iter().map(hex::encode).collect(),
            reconstructed: hex::encode(encode_symbols(&out, &field)),
            uploaded_bytes,
            downloaded_bytes,
            downloaded_symbols,
        })
    }

    /// Delivers one request per node concurrently; replies come back indexed
    /// by database whatever order they arrive in.
    fn send_all(&self, requests: &[Vec<u8>]) -> Result<Vec<Vec<u8>>> {
        match self.mode {
            TransportMode::InProcess => {
                Ok(self.nodes.iter().zip(requests).map(|(node, req)| node.handle_bytes(req)).collect())
            }
            TransportMode::Wire => thread::scope(|scope| {
                let handles: Vec<_> = self
                    .servers
                    .iter()
                    .zip(requests)
                    .enumerate()
                    .map(|(db, (server, req))| {
                        let addr = server.addr();
                        scope.spawn(move || {
                            exchange(addr, req)
                                .map_err(|e| Error::NodeUnreachable { db, reason: e.to_string() })
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("client thread panicked")).collect()
            }),
        }
    }
}

/// Answers produced locally without framing, for callers that only need
/// the symbols.
pub fn answer_all<S: Scheme>(scheme: &S, shards: &[Shard], queries: &[S::Query]) -> Result<Vec<Vec<Symbol>>> {
    shards.iter().zip(queries).map(|(s, q)| scheme.answer(s, q)).collect()
}
