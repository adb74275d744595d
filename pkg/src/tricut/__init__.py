"""Interface tracking on triangle meshes via per-triangle edge cuts."""

__version__ = "0.1.0"
