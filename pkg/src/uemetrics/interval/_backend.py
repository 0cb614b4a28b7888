"""Select the rounding backend at import time.

The compiled kernel is used when it was built; ``UEMETRICS_BACKEND=python``
forces the pure-Python fallback.
"""

import os

BACKEND = "python"

if os.environ.get("UEMETRICS_BACKEND", "").lower() != "python":
    try:
        from ._kernels import iadd, isub, imul, idiv, isqr, isqrt  # noqa: F401
        from ._kernels import add_rd, add_ru, mul_rd, mul_ru, div_rd, div_ru  # noqa: F401
        from ._kernels import sqrt_rd, sqrt_ru  # noqa: F401
        BACKEND = "compiled"
    except ImportError:
        pass

if BACKEND == "python":
    from ._pyround import iadd, isub, imul, idiv, isqr, isqrt  # noqa: F401
    from ._pyround import add_rd, add_ru, mul_rd, mul_ru, div_rd, div_ru  # noqa: F401
    from ._pyround import sqrt_rd, sqrt_ru  # noqa: F401
