//! Exponent calculus.
