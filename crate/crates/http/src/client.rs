//! Dereferencing client. The transport is a trait so tests and callers can
//! substitute their own; redirects are followed here, not in the transport.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;
use std::time::Duration;

use ore_core::model::ValidationReport;
use ore_core::serialization::{parse_atom, parse_rdfxml};
use ore_core::{Iri, ResourceMap, WireFormat};
use thiserror::Error;

use crate::uri::{to_iri, to_uri};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);
pub const DEFAULT_MAX_REDIRECTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Get,
    Head,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Get => "GET",
            Method::Head => "HEAD",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    /// Header names are lower-cased; repeated headers appear repeatedly.
    pub headers: Vec<(String, String)>,
    pub body: Vec<u8>,
}

impl HttpResponse {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers_named(name).next()
    }

    pub fn headers_named<'s: 'n, 'n>(&'s self, name: &'n str) -> impl Iterator<Item = &'s str> + 'n {
        self.headers
            .iter()
            .filter(move |(n, _)| n.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }

    /// The media type without parameters, lower-cased.
    pub fn media_type(&self) -> Option<String> {
        self.header("content-type")
            .map(|v| v.split(';').next().unwrap_or("").trim().to_ascii_lowercase())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{method} {url}: {cause}")]
pub struct TransportError {
    pub method: Method,
    pub url: String,
    pub cause: String,
}

/// One HTTP exchange, without redirect handling.
pub trait Transport: Send + Sync {
    fn request(&self, method: Method, url: &str, accept: Option<&str>) -> Result<HttpResponse, TransportError>;
}

/// Plain-HTTP transport backed by `ureq`.
pub struct UreqTransport {
    agent: ureq::Agent,
}

impl UreqTransport {
    pub fn new(timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .max_redirects(0)
            .http_status_as_error(false)
            .user_agent(concat!("ore/", env!("CARGO_PKG_VERSION")))
            .build()
            .into();
        UreqTransport { agent }
    }
}

impl Default for UreqTransport {
    fn default() -> Self {
        UreqTransport::new(DEFAULT_TIMEOUT)
    }
}

impl Transport for UreqTransport {
    fn request(&self, method: Method, url: &str, accept: Option<&str>) -> Result<HttpResponse, TransportError> {
        let fail = |cause: String| TransportError {
            method,
            url: url.to_owned(),
            cause,
        };
        let result = match method {
            Method::Get => {
                let mut req = self.agent.get(url);
                if let Some(a) = accept {
                    req = req.header("Accept", a);
                }
                req.call()
            }
            Method::Head => {
                let mut req = self.agent.head(url);
                if let Some(a) = accept {
                    req = req.header("Accept", a);
                }
                req.call()
            }
        };
        let mut response = result.map_err(|e| fail(e.to_string()))?;
        let status = response.status().as_u16();
        let headers = response
            .headers()
            .iter()
            .map(|(n, v)| {
                (
                    n.as_str().to_owned(),
                    String::from_utf8_lossy(v.as_bytes()).into_owned(),
                )
            })
            .collect();
        let body = if method == Method::Head {
            Vec::new()
        } else {
            response
                .body_mut()
                .with_config()
                .limit(u64::MAX)
                .read_to_vec()
                .map_err(|e| fail(e.to_string()))?
        };
        Ok(HttpResponse { status, headers, body })
    }
}

#[derive(Debug, Error)]
pub enum ClientError {
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("{url} answered {status}")]
    Status { url: Iri, status: u16 },
    #[error("redirect loop at {url}")]
    RedirectLoop { url: Iri },
    #[error("more than {limit} redirects starting from {url}")]
    TooManyRedirects { url: Iri, limit: usize },
    #[error("{url} answered {status} with an unusable Location")]
    BadLocation { url: Iri, status: u16 },
    #[error("{url} is not a resource map: {message}")]
    Format { url: Iri, message: String },
    #[error("resource map at {url} does not validate:\n{report}")]
    Invalid { url: Iri, report: ValidationReport },
}

impl ClientError {
    /// The HTTP status behind the error, if there was one.
    pub fn status(&self) -> Option<u16> {
        match self {
            ClientError::Status { status, .. } => Some(*status),
            _ => None,
        }
    }
}

/// A response reached after following redirects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fetched {
    /// The URL that produced `response`.
    pub url: Iri,
    pub response: HttpResponse,
    /// Every URL visited, starting with the request.
    pub chain: Vec<Iri>,
}

/// A Resource Map obtained from an Aggregation (or Resource Map) URI.
#[derive(Debug, Clone)]
pub struct Dereferenced {
    pub rem: ResourceMap,
    pub format: WireFormat,
    pub fetched: Fetched,
    pub warnings: Vec<String>,
}

#[derive(Clone)]
pub struct Client {
    transport: Arc<dyn Transport>,
    max_redirects: usize,
}

impl fmt::Debug for Client {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Client")
            .field("max_redirects", &self.max_redirects)
            .finish()
    }
}

impl Default for Client {
    fn default() -> Self {
        Client::new(UreqTransport::default())
    }
}

impl Client {
    pub fn new(transport: impl Transport + 'static) -> Self {
        Client {
            transport: Arc::new(transport),
            max_redirects: DEFAULT_MAX_REDIRECTS,
        }
    }

    pub fn with_timeout(timeout: Duration) -> Self {
        Client::new(UreqTransport::new(timeout))
    }

    pub fn max_redirects(mut self, limit: usize) -> Self {
        self.max_redirects = limit;
        self
    }

    /// Issues `method` for `url` (fragment removed) and follows 301, 302,
    /// 303, 307 and 308 responses. Statuses are not judged here.
    pub fn fetch(&self, method: Method, url: &Iri, accept: Option<&str>) -> Result<Fetched, ClientError> {
        let start = url.without_fragment();
        let mut current = start.clone();
        let mut chain = vec![current.clone()];
        let mut seen = HashSet::from([to_uri(current.as_str())]);
        loop {
            let response = self.transport.request(method, &to_uri(current.as_str()), accept)?;
            if !matches!(response.status, 301 | 302 | 303 | 307 | 308) {
                return Ok(Fetched {
                    url: current,
                    response,
                    chain,
                });
            }
            let next = response
                .header("location")
                .and_then(|loc| current.resolve(&to_iri(loc.trim())).ok())
                .map(|iri| iri.without_fragment())
                .ok_or_else(|| ClientError::BadLocation {
                    url: current.clone(),
                    status: response.status,
                })?;
            if !seen.insert(to_uri(next.as_str())) {
                return Err(ClientError::RedirectLoop { url: next });
            }
            if chain.len() > self.max_redirects {
                return Err(ClientError::TooManyRedirects {
                    url: start,
                    limit: self.max_redirects,
                });
            }
            chain.push(next.clone());
            current = next;
        }
    }

    /// Like [`fetch`](Self::fetch) with GET, but any final status other
    /// than 200 is an error.
    pub fn get(&self, url: &Iri, accept: Option<&str>) -> Result<Fetched, ClientError> {
        let fetched = self.fetch(Method::Get, url, accept)?;
        match fetched.response.status {
            200 => Ok(fetched),
            status => Err(ClientError::Status {
                url: fetched.url,
                status,
            }),
        }
    }

    /// Follows the Aggregation URI to its Resource Map, parses it per the
    /// response `Content-Type` and validates it.
    pub fn dereference_aggregation(
        &self,
        aggregation: &Iri,
        preferred: WireFormat,
    ) -> Result<Dereferenced, ClientError> {
        let other = WireFormat::ALL
            .into_iter()
            .find(|f| *f != preferred)
            .expect("two formats");
        let accept = format!("{}, {};q=0.5", preferred.media_type(), other.media_type());
        let fetched = self.get(aggregation, Some(&accept))?;
        let (rem, format) = read_resource_map(&fetched)?;
        let url = fetched.url.clone();
        let mut warnings = Vec::new();
        if rem.uri() != &url {
            warnings.push(format!("resource map at {url} names itself {}", rem.uri()));
        }
        let described = rem.aggregation_uri().map_err(|e| ClientError::Format {
            url: url.clone(),
            message: e.to_string(),
        })?;
        if described.without_fragment() != aggregation.without_fragment() {
            warnings.push(format!(
                "requested {aggregation} but the resource map describes {described}"
            ));
        }
        for w in &warnings {
            log::warn!("{w}");
        }
        Ok(Dereferenced {
            rem,
            format,
            fetched,
            warnings,
        })
    }
}

/// Parses a fetched body as a Resource Map, choosing the format from
/// `Content-Type` or, failing that, the root element, and validates it.
/// RDF/XML resolves against and is named by the final URL.
pub fn read_resource_map(fetched: &Fetched) -> Result<(ResourceMap, WireFormat), ClientError> {
    let url = fetched.url.clone();
    let body = &fetched.response.body;
    let format = fetched
        .response
        .media_type()
        .and_then(|mt| WireFormat::from_media_type(&mt))
        .or_else(|| WireFormat::sniff(body))
        .ok_or_else(|| ClientError::Format {
            url: url.clone(),
            message: format!(
                "unrecognised content type {}",
                fetched.response.header("content-type").unwrap_or("(none)")
            ),
        })?;
    let format_err = |message: String| ClientError::Format {
        url: url.clone(),
        message,
    };
    let rem = match format {
        WireFormat::RdfXml => ResourceMap::new(
            url.clone(),
            parse_rdfxml(body, &url).map_err(|e| format_err(e.to_string()))?,
        ),
        WireFormat::Atom => parse_atom(body).map_err(|e| format_err(e.to_string()))?,
    };
    let report = rem.validate();
    if !report.is_valid() {
        return Err(ClientError::Invalid { url, report });
    }
    Ok((rem, format))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;
    use std::sync::Mutex;

    /// Canned responses keyed by URL, recording every request.
    #[derive(Default)]
    struct Canned {
        responses: HashMap<String, HttpResponse>,
        log: Mutex<Vec<String>>,
    }

    impl Canned {
        fn with(mut self, url: &str, status: u16, headers: &[(&str, &str)], body: &[u8]) -> Self {
            self.responses.insert(
                url.to_owned(),
                HttpResponse {
                    status,
                    headers: headers.iter().map(|(n, v)| (n.to_string(), v.to_string())).collect(),
                    body: body.to_vec(),
                },
            );
            self
        }
    }

    impl Transport for Arc<Canned> {
        fn request(&self, _: Method, url: &str, _: Option<&str>) -> Result<HttpResponse, TransportError> {
            self.log.lock().unwrap().push(url.to_owned());
            self.responses.get(url).cloned().ok_or_else(|| TransportError {
                method: Method::Get,
                url: url.to_owned(),
                cause: "connection refused".into(),
            })
        }
    }

    fn iri(s: &str) -> Iri {
        Iri::new(s).unwrap()
    }

    #[test]
    fn fragment_never_leaves_the_client() {
        let canned = Arc::new(Canned::default().with("http://h/rem", 404, &[], b""));
        let err = Client::new(Arc::clone(&canned))
            .dereference_aggregation(&iri("http://h/rem#aggregation"), WireFormat::RdfXml)
            .unwrap_err();
        assert_eq!(err.status(), Some(404));
        assert_eq!(*canned.log.lock().unwrap(), vec!["http://h/rem".to_owned()]);
    }

    #[test]
    fn relative_redirects_are_followed() {
        let canned = Arc::new(
            Canned::default()
                .with("http://h/a/agg", 303, &[("location", "../rem")], b"")
                .with("http://h/rem", 200, &[("content-type", "text/plain")], b"hi"),
        );
        let got = Client::new(canned).get(&iri("http://h/a/agg"), None).unwrap();
        assert_eq!(got.url.as_str(), "http://h/rem");
        assert_eq!(got.chain.len(), 2);
        assert_eq!(got.response.body, b"hi");
    }

    #[test]
    fn loops_and_limits() {
        let looped = Arc::new(
            Canned::default()
                .with("http://h/1", 302, &[("location", "/2")], b"")
                .with("http://h/2", 307, &[("location", "/1")], b""),
        );
        assert!(matches!(
            Client::new(looped).get(&iri("http://h/1"), None),
            Err(ClientError::RedirectLoop { .. })
        ));

        let mut chain = Canned::default();
        for i in 0..10 {
            chain = chain.with(
                &format!("http://h/{i}"),
                303,
                &[("location", &format!("/{}", i + 1))],
                b"",
            );
        }
        assert!(matches!(
            Client::new(Arc::new(chain)).get(&iri("http://h/0"), None),
            Err(ClientError::TooManyRedirects { limit: 5, .. })
        ));

        let missing = Arc::new(Canned::default().with("http://h/x", 303, &[], b""));
        assert!(matches!(
            Client::new(missing).get(&iri("http://h/x"), None),
            Err(ClientError::BadLocation { .. })
        ));
    }

    #[test]
    fn non_maps_are_format_errors() {
        let canned = Arc::new(Canned::default().with("http://h/p", 200, &[("content-type", "text/html")], b"<html/>"));
        assert!(matches!(
            Client::new(canned).dereference_aggregation(&iri("http://h/p"), WireFormat::Atom),
            Err(ClientError::Format { .. })
        ));
    }
}
