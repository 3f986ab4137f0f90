import numpy as np
import pytest

from driftshap.errors import (
    DegenerateFeatureWarning,
    EmptyDataError,
    NonNumericError,
    OutOfRangeError,
    SchemaMismatchError,
    UnknownCategoryError,
)
from driftshap.schema import (
    BinSpec,
    FeatureSchema,
    FeatureSpec,
    LabelSpec,
    RawTable,
    encode,
    fit_bins,
    infer_schema,
)


def _raw(values, label=None, name="x"):
    cols = {name: np.array([str(v) for v in values], dtype=object)}
    labs = label if label is not None else ["0", "1"] * (len(values) // 2) + \
        ["0"] * (len(values) % 2)
    cols["y"] = np.array([str(v) for v in labs], dtype=object)
    return RawTable(cols)


def _schema(bins: BinSpec, name="x") -> FeatureSchema:
    return FeatureSchema((FeatureSpec(name, "continuous", binning=bins),),
                         LabelSpec("y", ("0", "1")))


def test_equal_width_edges_from_baseline_only():
    raw = _raw([0.0, 2.0, 4.0, 10.0])
    schema = fit_bins(raw, _schema(BinSpec(bin_count=5)))
    edges = schema.features[0].binning.edges
    assert edges == tuple(np.linspace(0.0, 10.0, 6).tolist())
    # target values never move the frozen edges
    targ = _raw([-50.0, 50.0])
    data = encode(targ, schema, "target")
    assert data.cells[:, 0].tolist() == [0, 4]


def test_intervals_left_closed_right_open_last_closed():
    schema = fit_bins(_raw([0.0, 10.0]), _schema(BinSpec(bin_count=5)))
    data = encode(_raw([0.0, 2.0, 3.999, 4.0, 10.0]), schema, "target")
    assert data.cells[:, 0].tolist() == [0, 1, 1, 2, 4]


def test_reject_policy_raises_out_of_range():
    spec = BinSpec(bin_count=4, out_of_range_policy="reject")
    schema = fit_bins(_raw([0.0, 1.0]), _schema(spec))
    with pytest.raises(OutOfRangeError, match="outside"):
        encode(_raw([0.5, 1.5]), schema, "target")
    # boundary values themselves are fine
    encode(_raw([0.0, 1.0]), schema, "target")


def test_quantile_bins_collapse_duplicate_edges():
    raw = _raw([1.0] * 8 + [2.0, 3.0])
    schema = fit_bins(raw, _schema(BinSpec(strategy="quantile", bin_count=4)))
    edges = schema.features[0].binning.edges
    assert all(b > a for a, b in zip(edges, edges[1:]))
    assert len(edges) >= 2


def test_degenerate_feature_collapses_to_one_bin():
    raw = _raw([7.5, 7.5, 7.5, 7.5])
    with pytest.warns(DegenerateFeatureWarning):
        schema = fit_bins(raw, _schema(BinSpec(bin_count=8)))
    assert schema.features[0].binning.edges == (7.5, 7.5)
    data = encode(raw, schema, "baseline")
    assert set(data.cells[:, 0].tolist()) == {0}


def test_explicit_edges_pass_through():
    spec = BinSpec(strategy="explicit-edges", edges=(0.0, 1.0, 5.0))
    schema = fit_bins(_raw([0.2]), _schema(spec))
    assert schema.features[0].binning.edges == (0.0, 1.0, 5.0)
    data = encode(_raw([0.5, 3.0]), schema, "target")
    assert data.cells[:, 0].tolist() == [0, 1]


def test_categorical_encoding_and_unknowns():
    feats = (FeatureSpec("c", "categorical", categories=("a", "b")),)
    schema = FeatureSchema(feats, LabelSpec("y", ("0", "1")))
    raw = _raw(["a", "b", "a"], name="c", label=["0", "1", "0"])
    data = encode(raw, schema, "baseline")
    assert data.cells[:, 0].tolist() == [0, 1, 0]
    bad = _raw(["a", "z"], name="c")
    with pytest.raises(UnknownCategoryError, match="'z'"):
        encode(bad, schema, "baseline")


def test_other_bucket_absorbs_unseen_categories():
    feats = (FeatureSpec("c", "categorical", categories=("a", "b"),
                         other_bucket=True),)
    schema = FeatureSchema(feats, LabelSpec("y", ("0", "1")))
    assert schema.features[0].cardinality == 3
    data = encode(_raw(["a", "z"], name="c"), schema, "baseline")
    assert data.cells[:, 0].tolist() == [0, 2]


def test_unknown_label_class_rejected():
    schema = fit_bins(_raw([0.0, 1.0]), _schema(BinSpec()))
    raw = _raw([0.5, 0.6], label=["0", "7"])
    with pytest.raises(UnknownCategoryError, match="label"):
        encode(raw, schema, "target")


def test_non_numeric_continuous_value():
    schema = fit_bins(_raw([0.0, 1.0]), _schema(BinSpec()))
    with pytest.raises(NonNumericError):
        encode(_raw([0.5, "oops"]), schema, "target")
    with pytest.raises(NonNumericError, match="missing"):
        encode(_raw([0.5, ""]), schema, "target")


def test_infer_schema_splits_numeric_and_categorical():
    cols = {
        "num": np.array(["1.5", "2.5"], dtype=object),
        "cat": np.array(["red", "blue"], dtype=object),
        "y": np.array(["0", "1"], dtype=object),
    }
    schema = infer_schema(RawTable(cols), "y")
    kinds = {f.name: f.kind for f in schema.features}
    assert kinds == {"num": "continuous", "cat": "categorical"}
    assert schema.label.classes == ("0", "1")


def test_infer_schema_label_union_with_extra():
    raw = RawTable({"x": np.array(["1"], dtype=object),
                    "y": np.array(["0"], dtype=object)})
    extra = RawTable({"x": np.array(["2"], dtype=object),
                      "y": np.array(["2"], dtype=object)})
    schema = infer_schema(raw, "y", extra=extra)
    assert schema.label.classes == ("0", "2")


def test_csv_round_trip_with_weights(tmp_path):
    path = tmp_path / "t.csv"
    raw = RawTable({"x": np.array([0.125, 7.0]),
                    "y": np.array(["1", "0"], dtype=object)},
                   weights=np.array([0.25, 0.75]))
    raw.to_csv(path)
    back = RawTable.from_csv(path)
    assert [float(v) for v in back.column("x")] == [0.125, 7.0]
    assert back.column("y").tolist() == ["1", "0"]
    assert back.weights.tolist() == [0.25, 0.75]


def test_csv_errors(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(EmptyDataError):
        RawTable.from_csv(empty)
    header_only = tmp_path / "h.csv"
    header_only.write_text("x,y\n")
    with pytest.raises(EmptyDataError):
        RawTable.from_csv(header_only)
    ragged = tmp_path / "r.csv"
    ragged.write_text("x,y\n1,0,extra\n")
    with pytest.raises(SchemaMismatchError):
        RawTable.from_csv(ragged)
    badw = tmp_path / "w.csv"
    badw.write_text("x,y,__weight\n1,0,heavy\n")
    with pytest.raises(NonNumericError):
        RawTable.from_csv(badw)


def test_schema_json_round_trip():
    feats = (
        FeatureSpec("c", "categorical", categories=("a", "b"), other_bucket=True),
        FeatureSpec("x", "continuous",
                    binning=BinSpec(strategy="explicit-edges", edges=(0.0, 1.0, 2.0),
                                    out_of_range_policy="reject")),
    )
    schema = FeatureSchema(feats, LabelSpec("y", ("n", "p")))
    back = FeatureSchema.from_json_dict(schema.to_json_dict())
    assert back == schema


def test_invalid_specs_rejected():
    with pytest.raises(ValueError):
        BinSpec(strategy="fancy")
    with pytest.raises(ValueError):
        BinSpec(edges=(3.0, 1.0))
    with pytest.raises(ValueError):
        FeatureSpec("c", "categorical", categories=("a", "a"))
    with pytest.raises(ValueError):
        LabelSpec("y", ("only",))
    with pytest.raises(ValueError):
        FeatureSchema((FeatureSpec("x", "continuous"),
                       FeatureSpec("x", "continuous")),
                      LabelSpec("y", ("0", "1")))
