//! Python bindings; populated alongside the core modules.
