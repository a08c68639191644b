# sif/utils/nodes.py

from typing import Literal

import numpy as np
from langchain_core.runnables import RunnableConfig

from sif.utils.logger import get_logger
from sif.utils.state import DecompositionState, SiftingBackend

logger = get_logger(__name__)


def get_backend(config: RunnableConfig) -> SiftingBackend:
    """
    Retrieves the sifting backend passed under `configurable["backend"]`.

    Args:
        config (RunnableConfig): The run configuration handed to every node.

    Returns:
        SiftingBackend: The sphere or line backend driving this run.

    Raises:
        KeyError: If the run was started without a backend.
    """
    backend = config.get("configurable", {}).get("backend")
    if backend is None:
        raise KeyError("decomposition graph needs configurable['backend']")
    return backend


def inspect_signal(state: DecompositionState, config: RunnableConfig) -> dict:
    """
    Counts the extrema of the residual and decides whether another IMF is extracted.

    The outer loop stops when the residual has fewer than two extrema, when
    `max_imfs` IMFs were already recorded, when the residual norm is below
    `energy_floor` times the input norm, or when the backend reports that no
    admissible filter exists for the residual.

    Args:
        state (DecompositionState): The current decomposition state.
        config (RunnableConfig): Carries the backend.

    Returns:
        dict: `extrema` and, when the loop ends, `finish_reason`.
    """
    backend = get_backend(config)
    residual = state["residual"]
    extrema = backend.count_extrema(residual)
    update = {"extrema": extrema}

    if extrema < 2:
        update["finish_reason"] = "few_extrema"
    elif len(state.get("imfs", [])) >= backend.config.max_imfs:
        update["finish_reason"] = "imf_limit"
    elif backend.norm(residual) <= backend.config.energy_floor * state["input_norm"]:
        update["finish_reason"] = "negligible_remainder"
    else:
        reason = backend.precheck(residual)
        if reason is not None:
            update["finish_reason"] = reason
    logger.debug(f"Residual has {extrema} extrema; finish_reason={update.get('finish_reason')}")
    return update


def route_decomposition(state: DecompositionState) -> Literal["extract_component", "finalize"]:
    """
    Chooses between extracting another IMF and finishing.

    Args:
        state (DecompositionState): State after `inspect_signal`.

    Returns:
        Literal["extract_component", "finalize"]: The next node.
    """
    if state.get("finish_reason"):
        return "finalize"
    return "extract_component"


def extract_component(state: DecompositionState, config: RunnableConfig) -> dict:
    """Runs the inner sifting loop of the backend on the residual."""
    backend = get_backend(config)
    index = len(state.get("imfs", [])) + 1
    imf, diagnostics = backend.extract(state["residual"], index)
    return {"pending": imf, "pending_diagnostics": diagnostics}


def record_component(state: DecompositionState) -> dict:
    """
    Pushes the pending IMF onto the stack and subtracts it from the residual.

    Args:
        state (DecompositionState): State holding `pending` and its diagnostics.

    Returns:
        dict: The new residual, the stack pushes, and cleared pending fields.
    """
    imf = state["pending"]
    diagnostics = state["pending_diagnostics"]
    logger.info(
        f"IMF {diagnostics['index']}: {diagnostics['stop_reason']} after "
        f"{diagnostics['iterations']} iterations (ratio {diagnostics['final_ratio']:.3e}, "
        f"radius {diagnostics['radius']:.6g})"
    )
    return {
        "residual": np.asarray(state["residual"]) - imf,
        "imfs": [imf],
        "diagnostics": [diagnostics],
        "pending": None,
        "pending_diagnostics": None,
    }


def finalize(state: DecompositionState) -> dict:
    logger.info(
        f"Decomposition finished with {len(state.get('imfs', []))} IMFs "
        f"({state.get('finish_reason')})."
    )
    return {}
