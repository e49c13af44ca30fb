//! Vocabulary IRIs used throughout the toolkit.

pub mod ore {
    pub const NS: &str = "http://www.openarchives.org/ore/terms/";
    pub const DESCRIBES: &str = "http://www.openarchives.org/ore/terms/describes";
    pub const AGGREGATES: &str = "http://www.openarchives.org/ore/terms/aggregates";
}

pub mod dcterms {
    pub const NS: &str = "http://purl.org/dc/terms/";
    pub const CREATOR: &str = "http://purl.org/dc/terms/creator";
    pub const MODIFIED: &str = "http://purl.org/dc/terms/modified";
}

pub mod rdf {
    pub const NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
    pub const LANG_STRING: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";
}

pub mod xsd {
    pub const NS: &str = "http://www.w3.org/2001/XMLSchema#";
    pub const STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
    pub const DATE_TIME: &str = "http://www.w3.org/2001/XMLSchema#dateTime";
}

pub mod atom {
    pub const NS: &str = "http://www.w3.org/2005/Atom";
}

pub const XML_NS: &str = "http://www.w3.org/XML/1998/namespace";
