"""DU-Trans network and its building blocks."""

from dumotion.services.network.biflow import BiFlow, biflow_exchange
from dumotion.services.network.dutrans import DUTrans, build_model, count_parameters
from dumotion.services.network.layers import (
    EncoderLayer,
    MultiHeadAttention,
    prefix_attention,
    timestep_embedding,
    zero_module,
)

__all__ = [
    "BiFlow",
    "biflow_exchange",
    "DUTrans",
    "build_model",
    "count_parameters",
    "EncoderLayer",
    "MultiHeadAttention",
    "prefix_attention",
    "timestep_embedding",
    "zero_module",
]
