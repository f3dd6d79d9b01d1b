"""Pick the kernel implementation once, at import.

Set ``BDML_PURE_PYTHON=1`` to force the NumPy fallback even when the compiled
extension is importable.
"""

import os

from . import _pykernels

if os.environ.get("BDML_PURE_PYTHON", "") not in ("", "0"):
    kernels = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels
        BACKEND = "compiled"
    except ImportError:  # pragma: no cover - depends on the build
        kernels = _pykernels
        BACKEND = "python"

__all__ = ["kernels", "BACKEND", "_pykernels"]
