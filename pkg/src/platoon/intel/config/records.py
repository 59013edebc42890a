"""
Configuration records for every run the toolkit performs.

Each record is an immutable, validated view of a JSON/YAML mapping. JSON keys
follow the artifact formats (``N``, ``K``, ``J``, ``W``, ``H``), attributes use
descriptive names.
"""
from __future__ import annotations

from collections.abc import Mapping

from .exceptions import ConfigError
from .field import Field
from .fieldvalidation import (
    BoolField,
    CellListField,
    EnumeratedField,
    FloatField,
    IntField,
    ListField,
)
from .schema import ConfigRecord

__all__ = [
    "DistributionConfig",
    "AuctionTrainConfig",
    "AuditConfig",
    "CommNetConfig",
    "MarlTrainConfig",
    "CoverageConfig",
    "EnergyConfig",
]


def positive_float(**kwargs):
    return FloatField(minimum_value=0.0, exclusive_minimum=True, **kwargs)


def positive_int(**kwargs):
    return IntField(minimum_value=1, **kwargs)


class RecordField(ListField):
    """A list of nested records. A single mapping is accepted as a one-element list."""

    def __init__(self, record_type, **kwargs):
        super().__init__(**kwargs)
        self.record_type = record_type

    def convert_items(self, value):
        if isinstance(value, (Mapping, self.record_type)):
            value = [value]
        items = []
        for v in value:
            if isinstance(v, self.record_type):
                items.append(v)
            else:
                items.append(self.record_type.from_dict(v))
        return tuple(items)

    def to_json(self, value):
        return [v.to_dict() for v in value]

    def type_name(self) -> str:
        return f"list[{self.record_type.__name__}]"


class SeededRecord(ConfigRecord, record=False):
    seed = Field(IntField(minimum_value=0), default=0, doc="Root seed of every RNG stream")


class DistributionConfig(ConfigRecord):
    """A bidder's valuation distribution."""

    kind = Field(EnumeratedField(["uniform", "exponential"]), default="uniform")
    low = Field(FloatField(), default=0.0, doc="Uniform lower bound")
    high = Field(FloatField(), default=1.0, doc="Uniform upper bound")
    rate = Field(positive_float(), default=1.0, doc="Exponential rate")
    cap = Field(positive_float(), default=5.0, doc="Exponential truncation point")

    def check(self):
        if self.kind == "uniform" and not (0.0 <= self.low <= self.high):
            raise ConfigError(
                f"uniform distribution needs 0 <= low <= high, got [{self.low}, {self.high}]"
            )


class AuctionTrainConfig(SeededRecord):
    """Training parameters of the neural Myerson auction."""

    bidders = Field(positive_int(), default=3, json_name="N")
    groups = Field(positive_int(), default=5, json_name="K")
    units = Field(positive_int(), default=10, json_name="J")
    shared = Field(BoolField(), default=True, doc="One parameter set for all bidders")
    train_temperature = Field(positive_float(), default=50.0)
    eval_temperature = Field(positive_float(), default=500.0)
    lr = Field(FloatField(minimum_value=0.0), default=1e-2)
    batch_size = Field(positive_int(), default=128)
    iterations = Field(IntField(minimum_value=0), default=5000)
    init_scale = Field(FloatField(minimum_value=0.0), default=0.1)
    eval_samples = Field(IntField(minimum_value=0), default=10000)
    log_every = Field(positive_int(), default=500)
    dist = Field(
        RecordField(DistributionConfig, minimum_len=1),
        default=({"kind": "uniform", "low": 0.0, "high": 1.0},),
    )

    def check(self):
        if self.eval_temperature < self.train_temperature:
            raise ConfigError(
                f"eval_temperature ({self.eval_temperature}) must not be below "
                f"train_temperature ({self.train_temperature})"
            )
        if len(self.dist) not in (1, self.bidders):
            raise ConfigError(
                f"dist lists {len(self.dist)} distributions for {self.bidders} bidders"
            )


class AuditConfig(SeededRecord):
    """Sample sizes for revenue, IC and IR audits."""

    samples = Field(positive_int(), default=100000)
    grid = Field(IntField(minimum_value=2), default=101)
    opponents = Field(positive_int(), default=10000)
    threads = Field(positive_int(), default=1)


class CommNetConfig(SeededRecord):
    """CommNet policy architecture."""

    hidden = Field(positive_int(), default=32)
    layers = Field(positive_int(), default=2)
    activation = Field(EnumeratedField(["relu", "tanh", "sigmoid"]), default="tanh")
    init_scale = Field(FloatField(minimum_value=0.0), default=0.1)


class MarlTrainConfig(SeededRecord):
    """REINFORCE training schedule."""

    episodes = Field(IntField(minimum_value=0), default=5000)
    batch_episodes = Field(positive_int(), default=16)
    lr = Field(FloatField(minimum_value=0.0), default=1e-2)
    gamma = Field(FloatField(minimum_value=0.0, maximum_value=1.0), default=0.99)
    threads = Field(positive_int(), default=1)
    log_every = Field(positive_int(), default=100)


class CoverageConfig(ConfigRecord):
    """Multi-UAV coverage gridworld."""

    kind = Field(EnumeratedField(["coverage"]), default="coverage")
    width = Field(positive_int(), default=5, json_name="W")
    height = Field(positive_int(), default=5, json_name="H")
    users = Field(CellListField(), default=())
    agents = Field(positive_int(), default=2)
    radius = Field(IntField(minimum_value=0), default=1)
    horizon = Field(positive_int(), default=10)
    start = Field(CellListField(nullable=True), default=None, doc="Fixed start cells")
    frozen_agent = Field(
        IntField(minimum_value=0, nullable=True),
        default=None,
        doc="Index of a malfunctioning agent that never moves",
    )

    def check(self):
        for cells, what in ((self.users, "user"), (self.start or (), "start")):
            for x, y in cells:
                if x >= self.width or y >= self.height:
                    raise ConfigError(
                        f"{what} cell ({x}, {y}) outside {self.width}x{self.height} grid"
                    )
        if self.start is not None and len(self.start) != self.agents:
            raise ConfigError(
                f"start lists {len(self.start)} cells for {self.agents} agents"
            )
        if self.frozen_agent is not None and self.frozen_agent >= self.agents:
            raise ConfigError(f"frozen_agent {self.frozen_agent} >= agents {self.agents}")


class EnergyConfig(ConfigRecord):
    """EV charging stations sharing surplus energy through a pool."""

    kind = Field(EnumeratedField(["energy"]), default="energy")
    agents = Field(positive_int(), default=3)
    capacity = Field(positive_float(), default=10.0)
    initial_battery = Field(FloatField(minimum_value=0.0), default=5.0)
    pv_schedule = Field(
        ListField(FloatField(minimum_value=0.0), minimum_len=1),
        default=(0.0, 0.0, 1.0, 3.0, 4.0, 3.0, 1.0, 0.0),
    )
    price_schedule = Field(
        ListField(FloatField(minimum_value=0.0), minimum_len=1),
        default=(1.0, 1.0, 2.0, 3.0, 3.0, 2.0, 1.5, 1.0),
    )
    demand_mean = Field(FloatField(minimum_value=0.0), default=2.0)
    demand_seed = Field(IntField(minimum_value=0), default=0)
    penalty = Field(FloatField(minimum_value=0.0), default=5.0)
    horizon = Field(positive_int(), default=8)

    def check(self):
        if self.initial_battery > self.capacity:
            raise ConfigError(
                f"initial_battery {self.initial_battery} exceeds capacity {self.capacity}"
            )
