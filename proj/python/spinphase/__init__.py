"""Two-qubit spin phase-space entropy production (C++ core)."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401

CSV_COLUMNS = (
    "curve_id", "t", "pi", "pi_stderr", "phi", "phi_stderr",
    "wehrl", "wehrl_stderr", "pi_vn", "c_l1", "c_rel",
)
