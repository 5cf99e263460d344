"""Named ablation rows, grouped the way results tables report them."""

from dumotion.core.exceptions import InvalidArgumentError
from dumotion.core.models.experiment import AblationVariant
from dumotion.core.models.training import Stage


def _finetune(name: str, **overrides: object) -> AblationVariant:
    return AblationVariant(
        name=name,
        stage=Stage.FINETUNE,
        set={f"finetune.peft.{k}": v for k, v in overrides.items()},
    )


def _pretrain(name: str, overrides: dict[str, object]) -> AblationVariant:
    return AblationVariant(name=name, stage=Stage.PRETRAIN, set=overrides)


# Insertion form, sites and gate; rank-64 LoRA and 64 prefix tokens as baselines
ADAPTER_GROUP = [
    _finetune("serial", variant="serial_adapter"),
    _finetune("parallel", variant="x_adapter", form="parallel"),
    _finetune("mha-only", sites=["mha"]),
    _finetune("ffn-only", sites=["ffn"]),
    _finetune("scalar-1.0", scale_mode="fixed"),
    _finetune("l-scalar", scale_mode="learned"),
    _finetune("dy-scale", scale_mode="dynamic"),
    _finetune("lora-r64", variant="lora", rank=64),
    _finetune("prefix-64", variant="prefix", prefix_length=64),
]

CONDITION_GROUP = [
    _finetune("no-condition", condition_mode="none"),
    _finetune("stylize", condition_mode="stylize"),
    _finetune("add", condition_mode="add"),
]

RANK_GROUP = [
    _finetune("adapter-r64", rank=64),
    _finetune("adapter-r128", rank=128),
    _finetune("full-finetune", variant="full"),
]

# Desk-scale counterparts of the encoder/decoder split, loss weights and Bi-Flow
# placement studies; the base model has 3 encoder layers and 1 decoder layer.
NETWORK_GROUP = [
    _pretrain(
        "encoder-only",
        {
            "model.encoder_layers": 4,
            "model.decoder_layers": 0,
            "model.biflow_layers": [2],
        },
    ),
    _pretrain(
        "decoder-only",
        {
            "model.encoder_layers": 0,
            "model.decoder_layers": 4,
            "model.biflow_layers": [],
        },
    ),
    _pretrain(
        "encoder-decoder", {"model.encoder_layers": 3, "model.decoder_layers": 1}
    ),
    _pretrain("lambda-0", {"train.lambda_face": 0.0, "train.lambda_body": 0.0}),
    _pretrain("lambda-0.5", {"train.lambda_face": 0.5, "train.lambda_body": 0.5}),
    _pretrain("lambda-1.0", {"train.lambda_face": 1.0, "train.lambda_body": 1.0}),
    _pretrain("biflow-1", {"model.biflow_layers": [1]}),
    _pretrain("biflow-2", {"model.biflow_layers": [2]}),
    _pretrain("biflow-3", {"model.biflow_layers": [3]}),
    _pretrain("biflow-2-3", {"model.biflow_layers": [2, 3]}),
    _pretrain("biflow-1-2-3", {"model.biflow_layers": [1, 2, 3]}),
]

GROUPS: dict[str, list[AblationVariant]] = {
    "adapter": ADAPTER_GROUP,
    "condition": CONDITION_GROUP,
    "rank": RANK_GROUP,
    "network": NETWORK_GROUP,
}


def default_grid(groups: list[str] | None = None) -> list[AblationVariant]:
    """Rows of the named groups in order; the adapter group alone by default."""
    names = groups or ["adapter"]
    unknown = [g for g in names if g not in GROUPS]
    if unknown:
        raise InvalidArgumentError(
            f"Unknown ablation groups {unknown}", {"known": sorted(GROUPS)}
        )
    return [variant for g in names for variant in GROUPS[g]]
