"""Closed-form parameter arithmetic for DU-Trans and its adapters."""

from dumotion.core.models.network import (
    ConditionMode,
    ConditionSource,
    DUTransConfig,
    ParameterAccount,
    PEFTConfig,
    PEFTVariant,
    ScaleMode,
)
from dumotion.services.peft.inject import has_conditioner


def linear(n_in: int, n_out: int, bias: bool = True) -> int:
    return n_in * n_out + (n_out if bias else 0)


def layer_norm(d: int) -> int:
    return 2 * d


def feed_forward(d: int, d_ff: int) -> int:
    return linear(d, d_ff) + linear(d_ff, d)


def head_parameters(net: DUTransConfig) -> int:
    d, dims = net.hidden_dim, net.dims
    return linear(d, dims.face) + linear(d, dims.body) + linear(d, dims.holistic)


def base_parameters(net: DUTransConfig) -> int:
    """Every DU-Trans weight, heads included."""
    d, d_ff, dims = net.hidden_dim, net.ffn_dim, net.dims
    inputs = (
        linear(dims.face, d)
        + linear(dims.content, d)
        + linear(1, d)
        + linear(dims.body, d)
        + linear(dims.semantics, d)
        + linear(1, d)
    )
    time_embed = 2 * linear(d, d)
    encoder_layer = 2 * layer_norm(d) + 4 * linear(d, d) + feed_forward(d, d_ff)
    encoders = 2 * net.encoder_layers * encoder_layer + 2 * layer_norm(d)
    audio = linear(dims.content, d) + linear(1, d) + linear(dims.semantics, d)
    decoder_layer = 3 * layer_norm(d) + 8 * linear(d, d) + feed_forward(d, d_ff)
    decoder = net.decoder_layers * decoder_layer + layer_norm(d)
    biflow = len(net.biflow_layers) * 2 * (5 * linear(d, d) + layer_norm(d))
    heads = head_parameters(net)
    return inputs + time_embed + encoders + audio + decoder + biflow + heads


def scale_parameters(d: int, mode: ScaleMode) -> int:
    if mode == ScaleMode.DYNAMIC:
        return linear(d, 1)
    return 1 if mode == ScaleMode.LEARNED else 0


def adapter_parameters(net: DUTransConfig, peft: PEFTConfig) -> int:
    """Parameters added at the adapter sites of both encoders."""
    d = net.hidden_dim
    layers = 2 * net.encoder_layers
    if peft.variant == PEFTVariant.FULL:
        return 0
    if peft.variant == PEFTVariant.PREFIX:
        return layers * 2 * peft.prefix_length * d
    if peft.variant == PEFTVariant.LORA:
        per_site = 2 * d * peft.rank + scale_parameters(d, peft.scale_mode)
    else:
        per_site = (
            linear(d, peft.rank)
            + linear(peft.rank, d)
            + scale_parameters(d, peft.scale_mode)
        )
    return layers * len(peft.sites) * per_site


def condition_parameters(
    net: DUTransConfig, peft: PEFTConfig, latent_dim: int = 32, coder_hidden: int = 64
) -> int:
    """Condition projections, plus the identity coder for identity tasks."""
    if not has_conditioner(peft):
        return 0
    d, dims = net.hidden_dim, net.dims
    width = 2 * d if peft.condition_mode == ConditionMode.STYLIZE else d
    total = 2 * linear(latent_dim, width)
    if peft.condition_source == ConditionSource.IDENTITY:
        total += linear(2 * dims.face, coder_hidden) + linear(coder_hidden, latent_dim)
        total += linear(2 * dims.body, coder_hidden) + linear(coder_hidden, latent_dim)
    return total


def parameter_account(
    net: DUTransConfig,
    peft: PEFTConfig | None = None,
    latent_dim: int = 32,
    coder_hidden: int = 64,
) -> ParameterAccount:
    """Expected counts without building the model."""
    base = base_parameters(net)
    heads = head_parameters(net)
    if peft is None:
        return ParameterAccount(base=base, heads=heads, trainable=base)

    adapters = adapter_parameters(net, peft)
    condition = condition_parameters(net, peft, latent_dim, coder_hidden)
    if peft.variant == PEFTVariant.FULL:
        trainable = base
    else:
        trainable = adapters + condition + (heads if peft.train_heads else 0)
    return ParameterAccount(
        base=base,
        heads=heads,
        adapters=adapters,
        condition=condition,
        trainable=trainable,
    )

