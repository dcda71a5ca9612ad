//! Holds the `acceptance` test target; run it with
//! `cargo test -p noon-passage-verify --test acceptance`.
