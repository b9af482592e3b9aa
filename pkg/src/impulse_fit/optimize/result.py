from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class OptimResult:
    """Outcome of one optimizer run.

    Attributes
    ----------
    x : ndarray
        Best vector found (always inside the bounds).
    fun : float
        Cost at ``x``.
    nit : int
        Iterations (DE generations or quasi-Newton steps) performed.
    nfev : int
        Cost function evaluations.
    converged : bool
        True when the optimizer's own convergence test fired.
    message : str
        Termination reason.
    """

    x: np.ndarray
    fun: float
    nit: int
    nfev: int
    converged: bool
    message: str
