# sif/utils/state.py

from typing import Annotated, Any, List, Literal, Optional, Protocol

import numpy as np
from typing_extensions import TypedDict

StopReason = Literal["converged", "iteration_cap", "vanished"]
FinishReason = Literal["few_extrema", "imf_limit", "negligible_remainder", "filter_too_wide"]


class ImfDiagnostics(TypedDict):
    """
    Outcome of one inner sifting loop.

    Attributes:
        index (int): 1-based position of the IMF.
        iterations (int): Sifting steps performed.
        radius (float): Filter radius (radians on the sphere, samples on the line).
        stop_reason (StopReason): Why the inner loop ended.
        final_ratio (float): Last relative change between iterates.
    """

    index: int
    iterations: int
    radius: float
    stop_reason: StopReason
    final_ratio: float


def append_components(left: list, right: Optional[list]) -> list:
    """
    Reducer for the IMF and diagnostics stacks.

    Args:
        left (list): Components recorded so far.
        right (Optional[list]): New components to push, or `None` for no change.

    Returns:
        list: The extended stack (a new list; `left` is not mutated).
    """
    if right is None:
        return left
    return left + list(right)


class SiftingBackend(Protocol):
    """What the decomposition graph needs from a signal domain (sphere or line)."""

    config: Any

    def count_extrema(self, values: np.ndarray) -> int: ...

    def norm(self, values: np.ndarray) -> float: ...

    def precheck(self, values: np.ndarray) -> Optional[FinishReason]: ...

    def extract(self, values: np.ndarray, index: int) -> tuple: ...


class DecompositionState(TypedDict):
    """
    State carried through the decomposition graph.

    Attributes:
        residual (np.ndarray): Signal left after subtracting the recorded IMFs.
        input_norm (float): Norm of the original input, for the energy floor.
        extrema (int): Extrema count of `residual` at the last inspection.
        imfs (Annotated[list[np.ndarray], append_components]): Extracted IMFs in order.
        diagnostics (Annotated[list[ImfDiagnostics], append_components]): One entry per IMF.
        pending (Optional[np.ndarray]): IMF extracted but not yet subtracted.
        pending_diagnostics (Optional[ImfDiagnostics]): Diagnostics of `pending`.
        finish_reason (Optional[FinishReason]): Set once the outer loop decides to stop.
    """

    residual: np.ndarray
    input_norm: float
    extrema: int
    imfs: Annotated[List[np.ndarray], append_components]
    diagnostics: Annotated[List[ImfDiagnostics], append_components]
    pending: Optional[np.ndarray]
    pending_diagnostics: Optional[ImfDiagnostics]
    finish_reason: Optional[FinishReason]
