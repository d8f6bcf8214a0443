"""Inner-loop kernels with a compiled core and a pure-numpy fallback.

The compiled extension is used when it imported successfully at build time;
set ``PARTIAL_REINIT_PURE_PYTHON=1`` to force the numpy implementation.
Both expose identical functions and consume identical random streams, so a
given seed follows the same optimisation path either way (up to float
round-off). ``backend_name()`` reports which one is active.
"""

import os

from . import _pykernels
from ._pykernels import (
    STATUS_CAP,
    STATUS_CONVERGED,
    STATUS_INTERRUPTED,
    hmm_bw_step,
    rbm_cd_epoch,
)

if os.environ.get("PARTIAL_REINIT_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    COMPILED = False
else:
    try:
        from . import _ckernels as _impl

        COMPILED = True
    except ImportError:
        _impl = _pykernels
        COMPILED = False

lloyd_run = _impl.lloyd_run
pam_run = _impl.pam_run
hmm_forward_ll = _impl.hmm_forward_ll
hmm_em_run = _impl.hmm_em_run
rbm_cd_run = _impl.rbm_cd_run


def backend_name() -> str:
    return "compiled" if COMPILED else "python"


__all__ = [
    "COMPILED",
    "STATUS_CAP",
    "STATUS_CONVERGED",
    "STATUS_INTERRUPTED",
    "backend_name",
    "hmm_bw_step",
    "hmm_em_run",
    "hmm_forward_ll",
    "lloyd_run",
    "pam_run",
    "rbm_cd_epoch",
    "rbm_cd_run",
]
