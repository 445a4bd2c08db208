"""dtx: desk-scale end-to-end driving stack with parallel task queries,
sparse sensor attention, and streaming temporal memory, trained and
evaluated inside a bundled synthetic driving world."""
from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"
