"""Ablation grid and harness."""

from dumotion.services.ablation.grid import GROUPS, default_grid
from dumotion.services.ablation.harness import (
    AblationJob,
    evaluate_run,
    run_ablation,
    run_variant,
    write_table,
)

__all__ = [
    "GROUPS",
    "default_grid",
    "AblationJob",
    "evaluate_run",
    "run_ablation",
    "run_variant",
    "write_table",
]
