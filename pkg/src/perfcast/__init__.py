"""perfcast: predict LM task performance from proxy scores, dataset statistics,
and typological language distances."""

__version__ = "0.1.0"
