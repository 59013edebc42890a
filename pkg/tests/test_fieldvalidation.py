import pytest

from platoon.intel.config import *
from platoon.intel.config.fieldvalidation import FieldValidator


def test_null_handling():
    assert FieldValidator(nullable=True).validate(None) is None
    assert FieldValidator().validate(2) == 2
    with pytest.raises(ValueError, match="null"):
        AnyField().validate(None)


def test_nullable_skips_bounds():
    v = AnyField(minimum_value=10, nullable=True)
    assert v.validate(None) is None
    assert v.validate(10) == 10
    with pytest.raises(ValueError, match="below the minimum"):
        v.validate(9)


def test_bounds():
    v = AnyField(minimum_value=-1, maximum_value=10)
    assert v.validate(-1) == -1
    assert v.validate(10) == 10
    with pytest.raises(ValueError, match="above the maximum"):
        v.validate(11)
    with pytest.raises(ValueError):
        v.validate(-2)


def test_exclusive_minimum():
    v = FloatField(minimum_value=0.0, exclusive_minimum=True)
    assert v.validate(1e-9) == 1e-9
    with pytest.raises(ValueError, match="greater than 0.0"):
        v.validate(0)
    assert v.constraints() == ["not null", "0.0 < value"]


def test_pipeline_order():
    v = ListField(IntField(), minimum_len=1, maximum_len=2)
    assert v.check_names == ["items", "length"]

    v = IntField(minimum_value=0)
    v.add_check("even", lambda x: x if x % 2 == 0 else x + 1, 15)
    v.add_check("late", lambda x: x * 10, 30)
    v.add_check("early", lambda x: x, 0)
    assert v.check_names == ["early", "int", "range", "even", "late"]
    assert v.validate("3") == 40
    with pytest.raises(ValueError):
        v.validate(-1)


def test_no_checks():
    v = FieldValidator()
    assert v.pipeline == []
    obj = object()
    assert v.validate(obj) is obj


def test_lengths():
    v = ListField(minimum_len=2, maximum_len=3)
    assert v.validate([1, 2]) == (1, 2)
    with pytest.raises(ValueError, match="at least 2"):
        v.validate([1])
    with pytest.raises(ValueError, match="at most 3"):
        v.validate([1, 2, 3, 4])


def test_int_field():
    v = IntField()

    assert v.validate(-1231) == -1231
    assert v.validate(2.0) == 2
    assert v.validate("14") == 14

    for bad in [1.4, True, "aaa", "1.5"]:
        with pytest.raises(ValueError):
            v.validate(bad)


def test_foreign_errors_become_value_errors():
    with pytest.raises(ValueError, match="check 'int'"):
        IntField().validate(object())
    with pytest.raises(ValueError, match="check 'range'"):
        AnyField(minimum_value=0).validate("text")


def test_float_field():
    v = FloatField()
    assert v.validate(3) == 3.0
    assert isinstance(v.validate(3), float)
    assert v.validate("0.25") == 0.25

    for bad in ["nan", float("inf"), -float("inf"), False]:
        with pytest.raises(ValueError):
            v.validate(bad)


def test_bool_field():
    v = BoolField()

    assert v.validate(True) is True
    assert v.validate(0) is False
    assert v.validate("yes") is True
    assert v.validate(" Off ") is False
    assert v.validate("TRUE") is True

    with pytest.raises(ValueError, match="maybe"):
        v.validate("maybe")


def test_enumerated_field():
    v = EnumeratedField(["relu", "tanh"])
    assert v.validate("tanh") == "tanh"
    with pytest.raises(ValueError):
        v.validate("gelu")
    assert v.type_name() == "relu|tanh"


def test_list_field():
    v = ListField(IntField(minimum_value=0), minimum_len=1)
    assert v.validate([1, 2]) == (1, 2)
    assert v.validate((3,)) == (3,)
    assert v.type_name() == "list[int]"
    assert v.to_json((1, 2)) == [1, 2]

    for bad in ["ab", [], [-1], 5]:
        with pytest.raises(ValueError):
            v.validate(bad)


def test_cell_list_field():
    v = CellListField()
    cells = v.from_json([[0, 1], [2, 3]])
    assert cells == ((0, 1), (2, 3))
    assert v.to_json(cells) == [[0, 1], [2, 3]]

    for bad in [[[0]], [[0, 1, 2]], [[0, -1]], [[0.5, 1]]]:
        with pytest.raises(ValueError):
            v.validate(bad)

    v = CellListField(nullable=True)
    assert v.validate(None) is None
    assert v.to_json(None) is None


def test_constraints():
    assert IntField(minimum_value=1).constraints() == ["not null", "1 <= value"]
    assert FloatField(minimum_value=0.0, maximum_value=1.0, nullable=True).constraints() == [
        "nullable",
        "0.0 <= value <= 1.0",
    ]
    assert AnyField(maximum_value=5).constraints() == ["not null", "value <= 5"]
    assert ListField(minimum_len=2).constraints() == ["not null", "2 <= length"]
    assert ListField(maximum_len=2).constraints() == ["not null", "length <= 2"]
    assert CellListField().item.constraints() == ["not null", "2 <= length <= 2"]


def test_exported_validators():
    from platoon.intel.config import fieldvalidation

    assert fieldvalidation.__all__ == [
        "FieldValidator",
        "AnyField",
        "EnumeratedField",
        "BoolField",
        "IntField",
        "FloatField",
        "ListField",
        "CellListField",
    ]
