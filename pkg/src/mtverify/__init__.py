"""mtverify: metamorphic-relation verification for ML image classifiers.

The toolkit trains small reference classifiers (a one-vs-one max-margin
ensemble and a compact residual convnet), checks metamorphic relations
over them, injects single-fault mutants into the training pipelines, and
assembles mutant-vs-relation kill matrices with cached, resumable runs.
"""

from .backend import active_backend

__version__ = "0.1.0"

__all__ = ["active_backend", "__version__"]
