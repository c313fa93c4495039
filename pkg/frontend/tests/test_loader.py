import numpy as np
import pytest

from shelab_figures.loader import (
    MissingInputError,
    SchemaError,
    load_summary,
    load_table,
)


def test_metadata_and_numeric_columns(tmp_path):
    f = tmp_path / "t.csv"
    f.write_text("# experiment = moments\n# slope = 0.5\na,b\n1.0,x\n2.5,y\n")
    table = load_table(f, ["a", "b"])
    assert table.meta == {"experiment": "moments", "slope": "0.5"}
    assert table.columns == ["a", "b"]
    np.testing.assert_array_equal(table["a"], [1.0, 2.5])
    assert list(table["b"]) == ["x", "y"]
    assert len(table) == 2


def test_missing_file_names_path(tmp_path):
    with pytest.raises(MissingInputError) as err:
        load_table(tmp_path / "absent.csv")
    assert "absent.csv" in str(err.value)
    assert err.value.path.endswith("absent.csv")


def test_missing_column_is_schema_error(tmp_path):
    f = tmp_path / "t.csv"
    f.write_text("a,b\n1,2\n")
    with pytest.raises(SchemaError) as err:
        load_table(f, ["a", "c"])
    assert "c" in str(err.value)


def test_empty_file_is_schema_error(tmp_path):
    f = tmp_path / "t.csv"
    f.write_text("")
    with pytest.raises(SchemaError):
        load_table(f, ["a"])


def test_loading_is_deterministic(tmp_path):
    f = tmp_path / "t.csv"
    f.write_text("a\n0.30000000000000004\n1e-17\n")
    first = load_table(f)["a"]
    second = load_table(f)["a"]
    assert first.tobytes() == second.tobytes()


def test_summary_roundtrip(tmp_path, make_experiment_dir):
    out = make_experiment_dir("moments")
    assert load_summary(out)["results"]["slope"] == 0.5
    with pytest.raises(MissingInputError):
        load_summary(tmp_path / "nowhere")
