"""Adapter modules: X-Adapter, LoRA branch and prefix tokens."""

import torch
import torch.nn.functional as F
from torch import nn

from dumotion.core.exceptions import ShapeMismatchError
from dumotion.core.models.network import (
    ConditionMode,
    InsertionForm,
    PrefixMode,
    ScaleMode,
)
from dumotion.services.network.layers import zero_module


class DyScale(nn.Module):
    """Per-token gate ReLU(h W_s + b_s), a fixed 1.0, or one learnable scalar."""

    def __init__(self, d_model: int, mode: ScaleMode = ScaleMode.DYNAMIC) -> None:
        super().__init__()
        self.mode = mode
        self.proj = nn.Linear(d_model, 1) if mode == ScaleMode.DYNAMIC else None
        self.value = nn.Parameter(torch.ones(1)) if mode == ScaleMode.LEARNED else None

    def forward(self, h: torch.Tensor) -> torch.Tensor:
        if self.proj is not None:
            return F.relu(self.proj(h))
        if self.value is not None:
            return self.value
        return h.new_ones(1)


def modulate(
    h: torch.Tensor, cond: torch.Tensor | None, mode: ConditionMode
) -> torch.Tensor:
    """Fold the condition into the adapter input.

    ``add`` broadcasts x over tokens; ``stylize`` reads cond as [gamma | beta].
    """
    if cond is None or mode == ConditionMode.NONE:
        return h
    if cond.ndim == h.ndim - 1:
        cond = cond.unsqueeze(-2)
    if mode == ConditionMode.STYLIZE:
        gamma, beta = cond.chunk(2, dim=-1)
        return h * (1.0 + gamma) + beta
    return h + cond


def _check_widths(
    h: torch.Tensor, cond: torch.Tensor | None, d_model: int, mode: ConditionMode
) -> None:
    if h.shape[-1] != d_model:
        raise ShapeMismatchError(
            "adapter input width does not match the adapter",
            expected=(d_model,),
            actual=(h.shape[-1],),
        )
    if cond is None or mode == ConditionMode.NONE:
        return
    width = 2 * d_model if mode == ConditionMode.STYLIZE else d_model
    if cond.shape[-1] != width:
        raise ShapeMismatchError(
            "condition width does not match the adapter",
            expected=(width,),
            actual=(cond.shape[-1],),
        )


class XAdapter(nn.Module):
    """Bottleneck adapter with condition modulation and Dy-Scale gating.

    The up projection starts at zero, so a fresh adapter returns the host
    sublayer output unchanged. Parallel form reads the sublayer input,
    serial form reads the sublayer output; both add their delta to the
    sublayer output.
    """

    def __init__(
        self,
        d_model: int,
        rank: int,
        form: InsertionForm = InsertionForm.PARALLEL,
        scale_mode: ScaleMode = ScaleMode.DYNAMIC,
        condition_mode: ConditionMode = ConditionMode.ADD,
    ) -> None:
        super().__init__()
        self.d_model = d_model
        self.form = form
        self.condition_mode = condition_mode
        self.down = nn.Linear(d_model, rank)
        self.up = zero_module(nn.Linear(rank, d_model))
        self.scale = DyScale(d_model, scale_mode)

    def delta(self, h: torch.Tensor, cond: torch.Tensor | None = None) -> torch.Tensor:
        m = modulate(h, cond, self.condition_mode)
        return self.scale(h) * self.up(F.silu(self.down(m)))

    def forward(
        self,
        sub_in: torch.Tensor,
        sub_out: torch.Tensor,
        cond: torch.Tensor | None = None,
    ) -> torch.Tensor:
        h = sub_in if self.form == InsertionForm.PARALLEL else sub_out
        return sub_out + x_adapter_apply(h, cond, self)


def x_adapter_apply(
    h: torch.Tensor, cond: torch.Tensor | None, adapter: XAdapter
) -> torch.Tensor:
    """Gated adapter delta for tokens ``h`` (..., N+1, d) and condition x (..., d)."""
    _check_widths(h, cond, adapter.d_model, adapter.condition_mode)
    return adapter.delta(h, cond)


class LoRAAdapter(nn.Module):
    """Low-rank branch s_d * ((h + x) A B) with B zero at injection."""

    def __init__(
        self,
        d_model: int,
        rank: int,
        scale_mode: ScaleMode = ScaleMode.DYNAMIC,
        condition_mode: ConditionMode = ConditionMode.ADD,
    ) -> None:
        super().__init__()
        self.d_model = d_model
        self.condition_mode = condition_mode
        self.lora_a = nn.Linear(d_model, rank, bias=False)
        self.lora_b = zero_module(nn.Linear(rank, d_model, bias=False))
        self.scale = DyScale(d_model, scale_mode)

    def delta(self, h: torch.Tensor, cond: torch.Tensor | None = None) -> torch.Tensor:
        m = modulate(h, cond, self.condition_mode)
        return self.scale(h) * self.lora_b(self.lora_a(m))

    def forward(
        self,
        sub_in: torch.Tensor,
        sub_out: torch.Tensor,
        cond: torch.Tensor | None = None,
    ) -> torch.Tensor:
        return sub_out + lora_apply(sub_in, cond, self)


def lora_apply(
    h: torch.Tensor, cond: torch.Tensor | None, adapter: LoRAAdapter
) -> torch.Tensor:
    _check_widths(h, cond, adapter.d_model, adapter.condition_mode)
    return adapter.delta(h, cond)


class PrefixTokens(nn.Module):
    """Learned key and value tokens for one attention site.

    Both streams start at zero. In ``add`` mode the projected condition is
    added to every key token; value tokens never see the condition, so a
    fresh prefix reads out zero whatever the condition.
    """

    def __init__(
        self,
        d_model: int,
        length: int,
        mode: PrefixMode = PrefixMode.PARALLEL,
        condition_mode: ConditionMode = ConditionMode.ADD,
    ) -> None:
        super().__init__()
        if length < 1:
            raise ShapeMismatchError(
                "prefix length must be at least 1", actual=(length,)
            )
        self.d_model = d_model
        self.joint = mode == PrefixMode.JOINT
        self.condition_mode = condition_mode
        self.keys = nn.Parameter(torch.zeros(length, d_model))
        self.values = nn.Parameter(torch.zeros(length, d_model))

    @property
    def length(self) -> int:
        return int(self.keys.shape[0])

    def forward(
        self, batch: int, cond: torch.Tensor | None = None
    ) -> tuple[torch.Tensor, torch.Tensor]:
        return prefix_apply(batch, cond, self)


def prefix_apply(
    batch: int, cond: torch.Tensor | None, prefix: PrefixTokens
) -> tuple[torch.Tensor, torch.Tensor]:
    """Batched (B, P, d) key and value prefixes.

    The condition (B, d) is added to each key token. Values are returned as
    learned, without the condition.
    """
    keys = prefix.keys.unsqueeze(0).expand(batch, -1, -1)
    values = prefix.values.unsqueeze(0).expand(batch, -1, -1)
    if cond is not None and prefix.condition_mode != ConditionMode.NONE:
        _check_widths(keys, cond, prefix.d_model, ConditionMode.ADD)
        keys = keys + cond.reshape(-1, 1, prefix.d_model)
    return keys, values
