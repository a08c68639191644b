# sif/sifting_graph.py
"""The outer decomposition loop as a LangGraph state machine, plus the shared inner loop."""

from typing import Callable, List, Optional, Tuple

import numpy as np
from langgraph.graph import END, START, StateGraph

from sif.utils.errors import DegenerateSignalError
from sif.utils.logger import get_logger
from sif.utils.nodes import (
    extract_component,
    finalize,
    inspect_signal,
    record_component,
    route_decomposition,
)
from sif.utils.state import DecompositionState, ImfDiagnostics, SiftingBackend, StopReason

logger = get_logger(__name__)


def build_graph():
    """
    Constructs the decomposition graph.

    inspect_signal -> (route) -> extract_component -> record_component -> inspect_signal
                             \\-> finalize -> END

    The backend (sphere or line) is not part of the graph: it is supplied per
    run through `configurable["backend"]`.

    Returns:
        CompiledStateGraph: The compiled graph.
    """
    builder = StateGraph(DecompositionState)
    builder.add_node("inspect_signal", inspect_signal)
    builder.add_node("extract_component", extract_component)
    builder.add_node("record_component", record_component)
    builder.add_node("finalize", finalize)

    builder.add_edge(START, "inspect_signal")
    builder.add_conditional_edges(
        "inspect_signal",
        route_decomposition,
        ["extract_component", "finalize"],
    )
    builder.add_edge("extract_component", "record_component")
    builder.add_edge("record_component", "inspect_signal")
    builder.add_edge("finalize", END)
    return builder.compile()


graph = build_graph()


def run_decomposition(
    values: np.ndarray, backend: SiftingBackend
) -> Tuple[List[np.ndarray], np.ndarray, List[ImfDiagnostics], Optional[str]]:
    """
    Runs the graph on `values` and returns (imfs, remainder, diagnostics, finish_reason).
    """
    values = np.asarray(values, dtype=float)
    initial: DecompositionState = {
        "residual": values,
        "input_norm": backend.norm(values),
        "extrema": 0,
        "imfs": [],
        "diagnostics": [],
        "pending": None,
        "pending_diagnostics": None,
        "finish_reason": None,
    }
    # three node visits per IMF plus the final inspection and finalize
    limit = 3 * backend.config.max_imfs + 5
    final = graph.invoke(
        initial, {"recursion_limit": limit, "configurable": {"backend": backend}}
    )
    return final["imfs"], final["residual"], final["diagnostics"], final.get("finish_reason")


def iterate_sifting(
    step: Callable[[np.ndarray], np.ndarray],
    g: np.ndarray,
    norm: Callable[[np.ndarray], float],
    delta: float,
    max_iterations: int,
) -> Tuple[np.ndarray, int, float, StopReason]:
    """
    Apply `step` until the relative change drops to `delta` or the cap is hit.

    Returns:
        (final iterate, iterations, last ratio, stop reason)
    """
    current = g
    ratio = float("nan")
    for iteration in range(1, max_iterations + 1):
        nxt = step(current)
        denom = norm(current)
        if denom == 0.0:
            raise DegenerateSignalError("sifting iterate has zero norm")
        ratio = norm(nxt - current) / denom
        current = nxt
        logger.debug(f"iteration {iteration}: ratio {ratio:.3e}")
        if ratio <= delta:
            return current, iteration, ratio, "converged"
        if norm(current) == 0.0:
            return current, iteration, ratio, "vanished"
    return current, max_iterations, ratio, "iteration_cap"
