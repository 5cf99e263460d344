"""Dy-Scale gate diagnostics: share of tokens each adapter updates."""

from collections.abc import Callable, Iterator
from contextlib import contextmanager
from typing import Any

import torch
from torch import nn

from dumotion.core.logging import get_logger
from dumotion.services.peft.adapters import DyScale

logger = get_logger(__name__)


@contextmanager
def capture_gate_ratios(model: nn.Module) -> Iterator[dict[str, list[float]]]:
    """Record, per dynamic gate, the fraction of open tokens on every forward."""
    ratios: dict[str, list[float]] = {}
    handles = []

    def hook(name: str) -> Callable[[nn.Module, Any, torch.Tensor], None]:
        def record(_module: nn.Module, _inputs: Any, output: torch.Tensor) -> None:
            ratios.setdefault(name, []).append(float((output > 0).float().mean()))

        return record

    for name, module in model.named_modules():
        if isinstance(module, DyScale) and module.proj is not None:
            adapter = name.removesuffix(".scale")
            handles.append(module.register_forward_hook(hook(adapter)))
    try:
        yield ratios
    finally:
        for handle in handles:
            handle.remove()


def gate_ratio_report(model: nn.Module, run: Callable[[], object]) -> dict[str, float]:
    """Mean open-gate ratio per adapter while ``run`` drives the model."""
    with torch.no_grad(), capture_gate_ratios(model) as ratios:
        run()
    report = {
        name: sum(values) / len(values) for name, values in sorted(ratios.items())
    }
    logger.debug(f"Captured gate ratios for {len(report)} adapters")
    return report
