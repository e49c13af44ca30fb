//! A small threaded HTTP/1.1 front end for a [`Store`].

use std::io;
use std::net::{SocketAddr, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use tiny_http::{Header, Method, Request};

use crate::store::{handle_get, Response, Store};

pub const DEFAULT_WORKERS: usize = 4;

/// A bound but not yet serving listener. Binding first lets callers learn
/// the port before they publish URIs that contain it.
pub struct Server {
    inner: Arc<tiny_http::Server>,
    addr: SocketAddr,
}

impl Server {
    pub fn bind(addr: impl ToSocketAddrs) -> io::Result<Server> {
        let inner = tiny_http::Server::http(addr).map_err(io::Error::other)?;
        let addr = inner
            .server_addr()
            .to_ip()
            .ok_or_else(|| io::Error::other("listener has no IP address"))?;
        Ok(Server {
            inner: Arc::new(inner),
            addr,
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// `http://host:port/` for the bound address.
    pub fn authority(&self) -> String {
        format!("http://{}/", self.addr)
    }

    /// Starts answering from `store` on `workers` threads.
    pub fn run(self, store: Arc<Store>, workers: usize) -> ServerHandle {
        let stop = Arc::new(AtomicBool::new(false));
        let threads = (0..workers.max(1))
            .map(|_| {
                let server = Arc::clone(&self.inner);
                let store = Arc::clone(&store);
                let stop = Arc::clone(&stop);
                std::thread::spawn(move || {
                    while !stop.load(Ordering::Relaxed) {
                        match server.recv_timeout(Duration::from_millis(100)) {
                            Ok(Some(request)) => answer(&store, request),
                            Ok(None) => {}
                            Err(e) => log::warn!("accept failed: {e}"),
                        }
                    }
                })
            })
            .collect();
        ServerHandle {
            addr: self.addr,
            stop,
            threads,
        }
    }
}

/// Stops the workers when dropped.
pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    threads: Vec<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Blocks until the workers exit (they only exit after [`shutdown`](Self::shutdown)).
    pub fn join(mut self) {
        for t in self.threads.drain(..) {
            let _ = t.join();
        }
    }

    pub fn shutdown(mut self) {
        self.stop_and_join();
    }

    fn stop_and_join(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
        for t in self.threads.drain(..) {
            let _ = t.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.stop_and_join();
    }
}

fn answer(store: &Store, request: Request) {
    let target = format!("{}{}", store.origin(), request.url());
    let method = request.method().clone();
    let response = match method {
        Method::Get | Method::Head => {
            let accept = request
                .headers()
                .iter()
                .find(|h| h.field.equiv("Accept"))
                .map(|h| h.value.as_str().to_owned());
            handle_get(&store.snapshot(), &target, accept.as_deref())
        }
        _ => Response {
            status: 405,
            headers: vec![("Allow".into(), "GET, HEAD".into())],
            body: Vec::new(),
        },
    };
    log::info!("{method} {target} {}", response.status);

    let mut out = tiny_http::Response::from_data(response.body).with_status_code(response.status);
    for (name, value) in &response.headers {
        match Header::from_bytes(name.as_bytes(), value.as_bytes()) {
            Ok(h) => out.add_header(h),
            Err(()) => log::warn!("dropping unencodable header {name}"),
        }
    }
    if let Err(e) = request.respond(out) {
        log::debug!("client went away: {e}");
    }
}
