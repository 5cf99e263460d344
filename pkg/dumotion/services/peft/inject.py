"""Adapter injection and base-weight freezing."""

from collections.abc import Iterable

import torch
from torch import nn

from dumotion.core.exceptions import DuplicateInjectionError, UnknownParameterError
from dumotion.core.logging import get_logger
from dumotion.core.models.network import (
    AdapterSite,
    ConditionMode,
    ConditionSource,
    PEFTConfig,
    PEFTVariant,
)
from dumotion.core.storage import hash_tensors
from dumotion.services.conditioning.projector import ConditionProjector
from dumotion.services.network.dutrans import DUTrans
from dumotion.services.peft.adapters import LoRAAdapter, PrefixTokens, XAdapter

logger = get_logger(__name__)

HEAD_PREFIXES = ("face_head.", "body_head.", "holistic_head.")
ADAPTER_MARKERS = ("_adapter.", ".prefix.")


def build_adapter(cfg: PEFTConfig, d_model: int) -> nn.Module:
    if cfg.variant == PEFTVariant.LORA:
        return LoRAAdapter(d_model, cfg.rank, cfg.scale_mode, cfg.condition_mode)
    return XAdapter(d_model, cfg.rank, cfg.form, cfg.scale_mode, cfg.condition_mode)


def has_conditioner(cfg: PEFTConfig) -> bool:
    return (
        cfg.variant != PEFTVariant.FULL
        and cfg.condition_source != ConditionSource.NONE
        and cfg.condition_mode != ConditionMode.NONE
    )


def is_trainable(name: str, cfg: PEFTConfig) -> bool:
    """Whether a parameter name stays trainable under ``cfg``."""
    if cfg.variant == PEFTVariant.FULL:
        return True
    if name.startswith("conditioner."):
        return True
    if cfg.train_heads and name.startswith(HEAD_PREFIXES):
        return True
    return any(marker in name for marker in ADAPTER_MARKERS)


def inject_peft(
    model: DUTrans,
    cfg: PEFTConfig,
    latent_dim: int = 32,
    coder_hidden: int = 64,
    seed: int = 0,
) -> tuple[DUTrans, list[str]]:
    """Attach ``cfg`` adapters to both encoders and freeze everything else.

    Returns the model (mutated in place) and the sorted frozen-parameter
    names. Every variant starts functionally identical to the base model.
    """
    if model.peft_config is not None:
        raise DuplicateInjectionError(model.peft_config.label)

    d = model.config.hidden_dim
    dims = model.config.dims
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        if cfg.variant != PEFTVariant.FULL:
            for encoder in (model.face_encoder, model.body_encoder):
                for layer in encoder:
                    if cfg.variant == PEFTVariant.PREFIX:
                        layer.self_attn.prefix = PrefixTokens(
                            d, cfg.prefix_length, cfg.prefix_mode, cfg.condition_mode
                        )
                        continue
                    if AdapterSite.MHA in cfg.sites:
                        layer.mha_adapter = build_adapter(cfg, d)
                    if AdapterSite.FFN in cfg.sites:
                        layer.ffn_adapter = build_adapter(cfg, d)
        if has_conditioner(cfg):
            model.conditioner = ConditionProjector(
                cfg.condition_source,
                cfg.condition_mode,
                latent_dim,
                d,
                dims.face,
                dims.body,
                coder_hidden,
            )
    model.peft_config = cfg

    frozen = sorted(
        name for name, _ in model.named_parameters() if not is_trainable(name, cfg)
    )
    apply_frozen_mask(model, frozen)
    logger.info(
        f"Injected {cfg.label} adapters",
        extra={
            "extra": {
                "sites": [s.value for s in cfg.sites],
                "rank": cfg.rank,
                "condition": cfg.condition_source.value,
                "frozen": len(frozen),
            }
        },
    )
    return model, frozen


def apply_frozen_mask(model: nn.Module, mask: Iterable[str]) -> None:
    """Freeze exactly the named parameters; all others become trainable."""
    params = dict(model.named_parameters())
    frozen = set(mask)
    unknown = sorted(frozen - params.keys())
    if unknown:
        raise UnknownParameterError(unknown)
    for name, p in params.items():
        p.requires_grad_(name not in frozen)


def frozen_hashes(model: nn.Module, mask: Iterable[str]) -> dict[str, str]:
    """Content hashes of the frozen tensors, for lineage audits."""
    params = dict(model.named_parameters())
    names = list(mask)
    unknown = sorted(set(names) - params.keys())
    if unknown:
        raise UnknownParameterError(unknown)
    return hash_tensors({name: params[name] for name in names})

