"""docgraph: knowledge-graph construction for domain document repositories.

The pipeline orders a document tree by knowledge dependency, summarizes it
autoregressively, induces an entity schema and extracts schema-guided triples.
"""

__version__ = "0.1.0"

__all__ = ["__version__"]
