//! Split first-order evolution.
