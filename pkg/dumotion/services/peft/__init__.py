"""Parameter-efficient finetuning: adapters, injection and accounting."""

from dumotion.services.peft.accounting import (
    adapter_parameters,
    base_parameters,
    condition_parameters,
    head_parameters,
    parameter_account,
)
from dumotion.services.peft.adapters import (
    DyScale,
    LoRAAdapter,
    PrefixTokens,
    XAdapter,
    lora_apply,
    modulate,
    prefix_apply,
    x_adapter_apply,
)
from dumotion.services.peft.gates import capture_gate_ratios, gate_ratio_report
from dumotion.services.peft.inject import (
    apply_frozen_mask,
    frozen_hashes,
    inject_peft,
    is_trainable,
)

__all__ = [
    "adapter_parameters",
    "base_parameters",
    "condition_parameters",
    "head_parameters",
    "parameter_account",
    "DyScale",
    "LoRAAdapter",
    "PrefixTokens",
    "XAdapter",
    "lora_apply",
    "modulate",
    "prefix_apply",
    "x_adapter_apply",
    "capture_gate_ratios",
    "gate_ratio_report",
    "apply_frozen_mask",
    "frozen_hashes",
    "inject_peft",
    "is_trainable",
]
