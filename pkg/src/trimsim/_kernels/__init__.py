"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

Set TRIMSIM_DISABLE_NUMBA=1 to force the numpy implementation.
"""
import os

if os.environ.get("TRIMSIM_DISABLE_NUMBA", "0") == "1":
    from . import numpy_impl as impl
else:
    try:
        from . import numba_impl as impl
    except ImportError:  # numba unavailable
        from . import numpy_impl as impl

BACKEND = impl.BACKEND
w2sq_steps = impl.w2sq_steps
project_capped_simplex = impl.project_capped_simplex
solve_trim_step = impl.solve_trim_step
solve_trim_cont = impl.solve_trim_cont
dp_cost_table = impl.dp_cost_table

from .common import dp_joint_trim  # noqa: E402  (uses dp_cost_table)
