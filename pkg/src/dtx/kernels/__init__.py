"""Hot-loop kernels with backend selection at import.

The compiled Cython core is used when available; set DTX_PURE=1 to force
the pure-Python reference implementation. Both backends are bit-identical
(see tests/test_kernels.py and benchmarks/bench_kernels.py).
"""
import os

from . import ref

if os.environ.get("DTX_PURE", "0") not in ("1", "true", "yes"):
    try:
        from . import _core as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = ref
        BACKEND = "python"
else:
    _impl = ref
    BACKEND = "python"

solve_assignment = _impl.solve_assignment
fill_polygon = _impl.fill_polygon
draw_polyline = _impl.draw_polyline

__all__ = ["solve_assignment", "fill_polygon", "draw_polyline", "BACKEND", "ref"]
