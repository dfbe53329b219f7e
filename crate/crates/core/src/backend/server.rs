//! Local HTTP server speaking the fill-mask protocol, answering from a
//! [`StubBackend`]. Used for integration tests of the remote client.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

use log::{debug, warn};
use tiny_http::{Header, Method, Response, Server};

use super::protocol::{
    ErrorResponse, FillMaskRequest, FillMaskResponse, FILL_MASK_PATH, MASK_TOKENIZATION_ERROR,
};
use super::stub::StubBackend;
use super::FillMaskBackend;
use crate::error::{Error, Result};
use crate::scoring::PLACEHOLDER;

const WORKERS: usize = 4;

struct Shared {
    stub: StubBackend,
    // remaining requests to answer with 503, for exercising client retries
    failures_left: AtomicUsize,
    requests_seen: AtomicUsize,
}

pub struct StubServer {
    server: Arc<Server>,
    addr: SocketAddr,
    shared: Arc<Shared>,
    workers: Vec<JoinHandle<()>>,
}

impl StubServer {
    /// Binds `addr` (use port 0 for an ephemeral port) and starts serving.
    pub fn start(addr: &str, stub: StubBackend) -> Result<Self> {
        Self::start_with_failures(addr, stub, 0)
    }

    /// Like [`StubServer::start`], but the first `failures` requests get 503.
    pub fn start_with_failures(addr: &str, stub: StubBackend, failures: usize) -> Result<Self> {
        let server = Server::http(addr)
            .map_err(|e| Error::BackendUnreachable(format!("cannot bind {addr}: {e}")))?;
        let bound = server
            .server_addr()
            .to_ip()
            .ok_or_else(|| Error::BackendUnreachable("server bound to a non-IP address".into()))?;
        let server = Arc::new(server);
        let shared = Arc::new(Shared {
            stub,
            failures_left: AtomicUsize::new(failures),
            requests_seen: AtomicUsize::new(0),
        });
        let workers = (0..WORKERS)
            .map(|_| {
                let server = Arc::clone(&server);
                let shared = Arc::clone(&shared);
                std::thread::spawn(move || {
                    while let Ok(request) = server.recv() {
                        handle(&shared, request);
                    }
                })
            })
            .collect();
        Ok(StubServer { server, addr: bound, shared, workers })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Base URL to use as a remote backend endpoint.
    pub fn endpoint(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn requests_seen(&self) -> usize {
        self.shared.requests_seen.load(Ordering::SeqCst)
    }

    /// Blocks until the server stops.
    pub fn join(mut self) {
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }

    pub fn shutdown(mut self) {
        self.stop();
    }

    fn stop(&mut self) {
        for _ in 0..self.workers.len() {
            self.server.unblock();
        }
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }
}

impl Drop for StubServer {
    fn drop(&mut self) {
        self.stop();
    }
}

fn json_response(status: u16, body: String) -> Response<std::io::Cursor<Vec<u8>>> {
    let header = Header::from_bytes("Content-Type", "application/json").expect("static header");
    Response::from_string(body).with_status_code(status).with_header(header)
}

fn error_body(error: &str, detail: Option<String>) -> String {
    serde_json::to_string(&ErrorResponse { error: error.to_string(), detail })
        .expect("error body serializes")
}

fn handle(shared: &Shared, mut request: tiny_http::Request) {
    shared.requests_seen.fetch_add(1, Ordering::SeqCst);
    let (status, body) = answer(shared, &mut request);
    debug!("{} {} -> {}", request.method(), request.url(), status);
    if let Err(e) = request.respond(json_response(status, body)) {
        warn!("failed to send response: {e}");
    }
}

fn answer(shared: &Shared, request: &mut tiny_http::Request) -> (u16, String) {
    if request.method() != &Method::Post || request.url() != FILL_MASK_PATH {
        return (404, error_body("not_found", Some(request.url().to_string())));
    }
    if shared
        .failures_left
        .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |n| n.checked_sub(1))
        .is_ok()
    {
        return (503, error_body("unavailable", None));
    }
    let mut raw = String::new();
    if let Err(e) = request.as_reader().read_to_string(&mut raw) {
        return (400, error_body("bad_request", Some(e.to_string())));
    }
    let req: FillMaskRequest = match serde_json::from_str(&raw) {
        Ok(r) => r,
        Err(e) => return (400, error_body("bad_request", Some(e.to_string()))),
    };
    let descriptor = shared.stub.descriptor();
    if req.model != descriptor.model_id {
        return (400, error_body("unknown_model", Some(req.model)));
    }
    let mask = descriptor.mask_token.as_str();
    if req.text.matches(mask).count() != 1 {
        return (422, error_body(MASK_TOKENIZATION_ERROR, Some(req.text)));
    }
    let masked = req.text.replacen(mask, PLACEHOLDER, 1);
    match shared.stub.probabilities_for(&masked, &req.targets) {
        Ok(probabilities) => {
            let resolved_variants =
                req.targets.iter().map(|w| (w.clone(), vec![w.clone()])).collect();
            let reply = FillMaskResponse {
                model: descriptor.model_id.clone(),
                probabilities,
                resolved_variants,
            };
            (200, serde_json::to_string(&reply).expect("reply serializes"))
        }
        Err(e) => (404, error_body("no_entry", Some(e.to_string()))),
    }
}
