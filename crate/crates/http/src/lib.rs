//! Publishing Resource Maps over HTTP and reading them back: a snapshot
//! store with content negotiation, a threaded server, a redirect-aware
//! client and the discovery pipeline.

pub mod client;
pub mod discover;
pub mod negotiate;
pub mod server;
pub mod store;
pub mod uri;

pub use client::{
    read_resource_map, Client, ClientError, Dereferenced, Fetched, HttpResponse, Method, Transport, TransportError,
    UreqTransport,
};
pub use discover::{discover, Discovery};
pub use negotiate::{negotiate, negotiate_with_default, DEFAULT_FORMAT};
pub use server::{Server, ServerHandle};
pub use store::{
    handle_get, PublishError, PublishScenario, PublishedEntry, Response, Snapshot, Store, StoreConfig, HASH_FRAGMENT,
};
