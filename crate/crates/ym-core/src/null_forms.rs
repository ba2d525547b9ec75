//! Null-form operators and identities.
