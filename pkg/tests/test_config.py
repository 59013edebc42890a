import pytest

from platoon.intel.config import (
    AuctionTrainConfig,
    AuditConfig,
    CheckpointError,
    ConfigError,
    ConfigRecord,
    CoverageConfig,
    DistributionConfig,
    DivergenceError,
    EnergyConfig,
    Field,
    IntField,
    MarlTrainConfig,
    NumericalError,
)
from platoon.intel.config.records import SeededRecord


def test_auction_defaults():
    c = AuctionTrainConfig()
    assert c.bidders == 3
    assert c.groups == 5
    assert c.units == 10
    assert c.shared is True
    assert c.train_temperature == 50.0
    assert c.eval_temperature == 500.0
    assert c.lr == 0.01
    assert c.seed == 0
    assert len(c.dist) == 1
    assert c.dist[0] == DistributionConfig(kind="uniform", low=0.0, high=1.0)


def test_json_names_and_attribute_names():
    a = AuctionTrainConfig.from_dict({"N": 2, "K": 3, "J": 4})
    b = AuctionTrainConfig.from_dict({"bidders": 2, "groups": 3, "units": 4})
    assert a == b
    assert hash(a) == hash(b)
    assert a.bidders == 2

    d = a.to_dict()
    assert d["N"] == 2 and d["K"] == 3 and d["J"] == 4
    assert "bidders" not in d
    assert d["dist"] == [{"kind": "uniform", "low": 0.0, "high": 1.0, "rate": 1.0, "cap": 5.0}]
    assert AuctionTrainConfig.from_dict(d) == a


def test_marl_defaults():
    c = MarlTrainConfig()
    assert c.lr == 0.01
    assert c.episodes == 5000
    assert c.batch_episodes == 16
    assert c.gamma == 0.99


def test_from_none_gives_defaults():
    assert AuditConfig.from_dict(None) == AuditConfig()
    assert AuditConfig().grid == 101
    assert AuditConfig().samples == 100000


def test_unknown_key():
    with pytest.raises(ConfigError, match="unknown keys"):
        AuctionTrainConfig.from_dict({"N": 2, "bidder": 3})


def test_not_a_mapping():
    with pytest.raises(ConfigError):
        AuctionTrainConfig.from_dict([1, 2])


def test_bad_values():
    with pytest.raises(ConfigError, match=r"AuctionTrainConfig.bidders \(N\)"):
        AuctionTrainConfig.from_dict({"N": "three"})
    with pytest.raises(ConfigError):
        AuctionTrainConfig.from_dict({"N": 2.5})
    with pytest.raises(ConfigError):
        AuctionTrainConfig.from_dict({"N": 0})
    with pytest.raises(ConfigError):
        AuctionTrainConfig.from_dict({"train_temperature": 0})
    with pytest.raises(ConfigError):
        MarlTrainConfig.from_dict({"gamma": 1.5})
    assert AuctionTrainConfig.from_dict({"N": 2.0}).bidders == 2


def test_records_are_immutable():
    c = AuctionTrainConfig()
    with pytest.raises(AttributeError):
        c.bidders = 4


def test_merged_skips_none():
    c = AuctionTrainConfig(seed=3, iterations=100)
    m = c.merged(seed=None, iterations=5, lr=0.5)
    assert m.seed == 3
    assert m.iterations == 5
    assert m.lr == 0.5
    assert c.iterations == 100

    m = c.merged({"N": 2})
    assert m.bidders == 2


def test_temperature_order():
    with pytest.raises(ConfigError, match="eval_temperature"):
        AuctionTrainConfig(train_temperature=100.0, eval_temperature=10.0)
    AuctionTrainConfig(train_temperature=10.0, eval_temperature=10.0)


def test_distribution_list():
    c = AuctionTrainConfig.from_dict(
        {"N": 2, "dist": [{"kind": "uniform"}, {"kind": "exponential", "rate": 2.0}]}
    )
    assert [d.kind for d in c.dist] == ["uniform", "exponential"]
    assert c.dist[1].rate == 2.0

    single = AuctionTrainConfig.from_dict({"dist": {"kind": "exponential", "cap": 3.0}})
    assert len(single.dist) == 1
    assert single.dist[0].cap == 3.0

    with pytest.raises(ConfigError, match="2 distributions for 3 bidders"):
        AuctionTrainConfig.from_dict({"N": 3, "dist": [{}, {}]})


def test_distribution_checks():
    DistributionConfig(low=0.5, high=0.5)
    with pytest.raises(ConfigError):
        DistributionConfig(low=0.8, high=0.2)
    with pytest.raises(ConfigError):
        DistributionConfig(low=-1.0, high=1.0)
    with pytest.raises(ConfigError):
        DistributionConfig(kind="exponential", rate=0.0)
    with pytest.raises(ConfigError):
        DistributionConfig(kind="normal")


def test_coverage_config():
    c = CoverageConfig.from_dict({"W": 3, "H": 2, "users": [[0, 0], [2, 1]], "agents": 1})
    assert c.width == 3 and c.height == 2
    assert c.users == ((0, 0), (2, 1))
    assert c.start is None
    assert c.to_dict()["users"] == [[0, 0], [2, 1]]
    assert c.to_dict()["start"] is None

    with pytest.raises(ConfigError, match="outside 3x2 grid"):
        CoverageConfig.from_dict({"W": 3, "H": 2, "users": [[3, 0]]})
    with pytest.raises(ConfigError, match="start lists 1 cells for 2 agents"):
        CoverageConfig.from_dict({"agents": 2, "start": [[0, 0]]})
    with pytest.raises(ConfigError):
        CoverageConfig.from_dict({"agents": 2, "frozen_agent": 2})
    with pytest.raises(ConfigError):
        CoverageConfig.from_dict({"kind": "energy"})


def test_energy_config():
    c = EnergyConfig()
    assert c.capacity == 10.0
    assert len(c.pv_schedule) == len(c.price_schedule) == 8
    with pytest.raises(ConfigError):
        EnergyConfig(capacity=2.0, initial_battery=3.0)
    with pytest.raises(ConfigError):
        EnergyConfig(pv_schedule=[])


def test_abstract_record():
    with pytest.raises(TypeError):
        SeededRecord()


def test_record_inheritance_is_refused():
    with pytest.raises(TypeError):

        class Extended(AuditConfig):
            extra = Field(IntField(), default=0)


def test_duplicate_json_key():
    with pytest.raises(TypeError, match="Duplicate JSON key"):

        class Clash(ConfigRecord):
            a = Field(IntField(), json_name="x")
            b = Field(IntField(), json_name="x")


def test_required_field():
    class Needs(ConfigRecord):
        x = Field(IntField())
        y = Field(IntField(), default=1)

    assert Needs.x.required
    assert not Needs.y.required
    assert Needs(x=3).x == 3
    with pytest.raises(ConfigError, match="missing required key 'x'"):
        Needs()


def test_field_metadata():
    f = AuctionTrainConfig.bidders
    assert f.json_name == "N"
    assert f.qualname == "AuctionTrainConfig.bidders"
    assert f.__doc__ == "int: the bidders setting; 1 <= value; default 3; key 'N'"
    assert CoverageConfig.start.describe() == "list[(x, y)] | None: Fixed start cells; default None"
    assert list(AuctionTrainConfig.config_schema.fields)[0] == "seed"


def test_exceptions():
    e = CheckpointError("net.json", "missing 'kind'")
    assert isinstance(e, ConfigError)
    assert str(e).startswith("Malformed checkpoint net.json")

    n = NumericalError("revenue loss")
    assert str(n) == "Non-finite value in revenue loss"

    d = DivergenceError("surrogate loss", 42)
    assert isinstance(d, NumericalError)
    assert d.iteration == 42
    assert str(d) == "Training diverged at iteration 42: non-finite surrogate loss"
