"""Shared domain types and codec-graph configuration loading."""
from __future__ import annotations

import enum
import json
import math
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConfigError

MODEL_CONFIG_ENV = "CHUNKCODEC_CONFIG"
DEFAULT_CONFIG_NAME = "dac44k.json"


@dataclass(frozen=True, eq=False)
class AudioBuffer:
    """Float32 PCM samples laid out ``[channel, frame]`` plus a sample rate in Hz.

    A 1-D array is taken as a single channel.
    """

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float32)
        if samples.ndim == 1:
            samples = samples[None, :]
        if samples.ndim != 2:
            raise ValueError(f"samples must be 2-D [channel, frame], got shape {samples.shape}")
        if int(self.sample_rate) <= 0 or int(self.sample_rate) != self.sample_rate:
            raise ValueError(f"sample_rate must be a positive integer, got {self.sample_rate}")
        samples = np.ascontiguousarray(samples)
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    @property
    def channels(self) -> int:
        return self.samples.shape[0]

    @property
    def frames(self) -> int:
        return self.samples.shape[1]

    @property
    def duration(self) -> float:
        return self.frames / self.sample_rate

    def __eq__(self, other):
        if not isinstance(other, AudioBuffer):
            return NotImplemented
        return self.sample_rate == other.sample_rate and np.array_equal(self.samples, other.samples)

    __hash__ = None


class LayerKind(str, enum.Enum):
    CONV = "conv"
    CONV_TRANSPOSE = "conv_transpose"


@dataclass(frozen=True)
class LayerGeom:
    kind: LayerKind
    kernel: int
    stride: int = 1
    dilation: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", LayerKind(self.kind))
        for name in ("kernel", "stride", "dilation"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < 1:
                raise ConfigError(f"layer {name} must be a positive integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.kind is LayerKind.CONV_TRANSPOSE and self.dilation != 1:
            raise ConfigError("conv_transpose layers must have dilation 1")

    @property
    def transposed(self) -> bool:
        return self.kind is LayerKind.CONV_TRANSPOSE

    @classmethod
    def conv(cls, kernel, stride=1, dilation=1):
        return cls(LayerKind.CONV, kernel, stride, dilation)

    @classmethod
    def conv_transpose(cls, kernel, stride=1):
        return cls(LayerKind.CONV_TRANSPOSE, kernel, stride, 1)

    def to_dict(self):
        return {"kind": self.kind.value, "kernel": self.kernel,
                "stride": self.stride, "dilation": self.dilation}


@dataclass(frozen=True)
class CodecGraph:
    encoder_layers: tuple
    decoder_layers: tuple
    encoder_rates: tuple
    decoder_rates: tuple
    latent_dim: int
    n_codebooks: int
    codebook_bits: int
    codebook_dim: int
    sample_rate: int
    padding: bool = False
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "encoder_layers", tuple(self.encoder_layers))
        object.__setattr__(self, "decoder_layers", tuple(self.decoder_layers))
        object.__setattr__(self, "encoder_rates", tuple(int(r) for r in self.encoder_rates))
        object.__setattr__(self, "decoder_rates", tuple(int(r) for r in self.decoder_rates))
        self.validate()

    @property
    def layers(self) -> tuple:
        """Encoder followed by decoder; the geometry one chunk passes through."""
        return self.encoder_layers + self.decoder_layers

    @property
    def receptive_field(self) -> int:
        return math.prod(self.encoder_rates)

    @property
    def codebook_size(self) -> int:
        return 1 << self.codebook_bits

    def validate(self):
        for name in ("latent_dim", "n_codebooks", "codebook_bits", "codebook_dim", "sample_rate"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if not 1 <= self.codebook_bits <= 16:
            raise ConfigError(f"codebook_bits must be in [1, 16], got {self.codebook_bits}")
        for name in ("encoder_rates", "decoder_rates"):
            rates = getattr(self, name)
            if any(r < 1 for r in rates):
                raise ConfigError(f"{name} must be positive integers, got {list(rates)}")
        for layer in self.layers:
            if not isinstance(layer, LayerGeom):
                raise ConfigError(f"expected LayerGeom, got {type(layer).__name__}")
        enc_strides = math.prod(l.stride for l in self.encoder_layers)
        if enc_strides != math.prod(self.encoder_rates):
            raise ConfigError(
                "invariant violated: product(encoder_rates) = "
                f"{math.prod(self.encoder_rates)} but encoder layer strides multiply to {enc_strides}")
        dec_strides = math.prod(l.stride for l in self.decoder_layers)
        if dec_strides != math.prod(self.decoder_rates):
            raise ConfigError(
                "invariant violated: product(decoder_rates) = "
                f"{math.prod(self.decoder_rates)} but decoder layer strides multiply to {dec_strides}")
        if tuple(reversed(self.encoder_rates)) != self.decoder_rates:
            raise ConfigError(
                "invariant violated: decoder_rates must be encoder_rates reversed, got "
                f"{list(self.encoder_rates)} and {list(self.decoder_rates)}")
        if any(l.transposed for l in self.encoder_layers):
            raise ConfigError("encoder layers must be plain convolutions")

    def to_dict(self):
        return {
            "sample_rate": self.sample_rate,
            "encoder_rates": list(self.encoder_rates),
            "decoder_rates": list(self.decoder_rates),
            "latent_dim": self.latent_dim,
            "n_codebooks": self.n_codebooks,
            "codebook_bits": self.codebook_bits,
            "codebook_dim": self.codebook_dim,
            "padding": self.padding,
            "encoder_layers": [l.to_dict() for l in self.encoder_layers],
            "decoder_layers": [l.to_dict() for l in self.decoder_layers],
        }


_REQUIRED_KEYS = ("sample_rate", "encoder_rates", "decoder_rates", "latent_dim", "n_codebooks",
                  "codebook_bits", "codebook_dim", "encoder_layers", "decoder_layers")


def graph_from_dict(data, name=""):
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    missing = [k for k in _REQUIRED_KEYS if k not in data]
    if missing:
        raise ConfigError(f"config is missing keys: {', '.join(missing)}")

    def layers(key):
        items = data[key]
        if not isinstance(items, list):
            raise ConfigError(f"{key} must be a list")
        out = []
        for i, item in enumerate(items):
            try:
                out.append(LayerGeom(LayerKind(item["kind"]), item["kernel"],
                                     item.get("stride", 1), item.get("dilation", 1)))
            except (KeyError, TypeError, ValueError) as exc:
                if isinstance(exc, ConfigError):
                    raise ConfigError(f"{key}[{i}]: {exc}") from None
                raise ConfigError(f"{key}[{i}] is not a valid layer: {item!r}") from None
        return out

    return CodecGraph(
        encoder_layers=layers("encoder_layers"),
        decoder_layers=layers("decoder_layers"),
        encoder_rates=data["encoder_rates"],
        decoder_rates=data["decoder_rates"],
        latent_dim=data["latent_dim"],
        n_codebooks=data["n_codebooks"],
        codebook_bits=data["codebook_bits"],
        codebook_dim=data["codebook_dim"],
        sample_rate=data["sample_rate"],
        padding=bool(data.get("padding", False)),
        name=name,
    )


def load_graph_config(path=None) -> CodecGraph:
    """Load and validate a codec-graph JSON file.

    ``None`` falls back to ``$CHUNKCODEC_CONFIG`` and then to the shipped
    44.1 kHz configuration.
    """
    if path is None:
        path = os.environ.get(MODEL_CONFIG_ENV) or None
    if path is None:
        return default_graph()
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    name = path.name
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {name} is not valid JSON: {exc}") from exc
    return graph_from_dict(data, name=name)


def default_graph() -> CodecGraph:
    """The shipped 44.1 kHz graph, ignoring ``$CHUNKCODEC_CONFIG``."""
    text = resources.files("chunkcodec.configs").joinpath(DEFAULT_CONFIG_NAME).read_text()
    return graph_from_dict(json.loads(text), name=DEFAULT_CONFIG_NAME)
