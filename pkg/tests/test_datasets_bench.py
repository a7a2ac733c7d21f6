"""Tests for CSV ingest, synthetic data, and the epsilon sweep machinery."""

import json
import math

import numpy as np
import pandas as pd
import pytest

import dpdcor.bench
from dpdcor import (
    ConfigError,
    DataError,
    Dataset,
    PartitionError,
    ProtocolError,
    SweepConfig,
    SweepResult,
    allocate_budget,
    compose_budget,
    emit_report,
    load_csv,
    minmax_columns,
    run_sweep,
    split_features,
    synth_dataset,
    unbiased_dcorr,
)
from dpdcor.bench import CSV_COLUMNS


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


class TestLoadCsv:
    def test_with_header(self, tmp_path):
        ds = load_csv(_write(tmp_path, "t.csv", "a,b\n1,2\n3,4\n"))
        assert ds.columns == ("a", "b")
        assert np.array_equal(ds.values, [[1.0, 2.0], [3.0, 4.0]])
        assert ds.dropped_rows == 0
        assert "t.csv" in ds.source

    def test_without_header(self, tmp_path):
        ds = load_csv(_write(tmp_path, "t.csv", "1,2\n3,4\n"), header=False)
        assert ds.columns == ("c1", "c2")
        assert ds.n == 2

    def test_drops_partial_rows(self, tmp_path):
        ds = load_csv(_write(tmp_path, "t.csv", "a,b\n1,2\nfoo,3\n4,bar\n5,6\n"))
        assert ds.dropped_rows == 2
        assert np.array_equal(ds.values, [[1.0, 2.0], [5.0, 6.0]])

    def test_drops_non_finite_rows(self, tmp_path):
        ds = load_csv(_write(tmp_path, "t.csv", "a,b\n1,2\ninf,3\n4,5\n"))
        assert ds.dropped_rows == 1
        assert ds.n == 2

    def test_fully_non_numeric_column_is_an_error(self, tmp_path):
        with pytest.raises(DataError, match="'b'"):
            load_csv(_write(tmp_path, "t.csv", "a,b\n1,x\n2,y\n"))

    def test_no_complete_rows_is_an_error(self, tmp_path):
        with pytest.raises(DataError):
            load_csv(_write(tmp_path, "t.csv", "a,b\n1,x\nz,2\n"))

    def test_missing_and_empty_files(self, tmp_path):
        with pytest.raises(DataError):
            load_csv(tmp_path / "nope.csv")
        with pytest.raises(DataError):
            load_csv(_write(tmp_path, "empty.csv", ""))

    def test_dataset_validates_column_names(self):
        with pytest.raises(DataError):
            Dataset(values=np.ones((4, 2)), columns=("only-one",))


class TestSplitFeatures:
    def test_column_split(self):
        ds = Dataset(values=np.arange(20.0).reshape(4, 5), columns=tuple("abcde"))
        x, y = split_features(ds, 2)
        assert x.shape == (4, 2) and y.shape == (4, 3)
        assert np.array_equal(np.hstack([x, y]), ds.values)

    def test_returns_copies(self):
        ds = Dataset(values=np.ones((4, 2)), columns=("a", "b"))
        x, _ = split_features(ds, 1)
        x[0, 0] = 99.0
        assert ds.values[0, 0] == 1.0

    def test_domain(self):
        ds = Dataset(values=np.ones((4, 3)), columns=("a", "b", "c"))
        for bad in (0, 3, 4, 1.5):
            with pytest.raises(ConfigError):
                split_features(ds, bad)


class TestSynthDataset:
    def test_shape_and_metadata(self):
        ds = synth_dataset("linear", 50, seed=1)
        assert ds.n == 50 and ds.dim == 2
        assert ds.columns == ("x", "y")
        assert ds.source == "synth:linear"

    def test_deterministic(self):
        a = synth_dataset("sine", 30, seed=2)
        b = synth_dataset("sine", 30, seed=2)
        c = synth_dataset("sine", 30, seed=3)
        assert np.array_equal(a.values, b.values)
        assert not np.array_equal(a.values, c.values)

    def test_dependence_levels(self):
        def dcorr_of(recipe, n, noise):
            ds = synth_dataset(recipe, n, noise_sd=noise, seed=99)
            return unbiased_dcorr(ds.values[:, :1], ds.values[:, 1:])

        assert abs(dcorr_of("independent", 2000, 0.1)) < 0.1
        assert dcorr_of("linear", 500, 0.0) > 0.95
        assert dcorr_of("quadratic", 500, 0.1) > 0.2
        assert dcorr_of("sine", 500, 0.1) > 0.03

    def test_domain(self):
        with pytest.raises(ConfigError):
            synth_dataset("cubic", 10)
        with pytest.raises(ConfigError):
            synth_dataset("linear", 3)
        with pytest.raises(ConfigError):
            synth_dataset("linear", 10, noise_sd=-0.1)


class TestMinmaxColumns:
    def test_literal(self):
        out = minmax_columns(np.array([[0.0], [2.0], [4.0]]))
        assert np.array_equal(out, [[0.0], [0.5], [1.0]])

    def test_constant_column_maps_to_zeros(self):
        out = minmax_columns(np.column_stack([np.ones(5), np.arange(5.0)]))
        assert np.array_equal(out[:, 0], np.zeros(5))
        assert out[:, 1].min() == 0.0 and out[:, 1].max() == 1.0

    def test_range(self):
        out = minmax_columns(np.random.default_rng(70).standard_normal((40, 3)))
        assert out.min() >= 0.0 and out.max() <= 1.0


class TestAllocateBudget:
    def test_total_semantics(self):
        eps_per, eps_var = allocate_budget(1.0, 5, "repeated")
        assert math.isclose(eps_var, 0.1, rel_tol=1e-12)
        assert math.isclose(eps_per, 0.18, rel_tol=1e-12)
        eps_per, eps_var = allocate_budget(1.0, 5, "disjoint")
        assert math.isclose(eps_per, 0.9, rel_tol=1e-12)

    def test_total_with_explicit_variance_share(self):
        eps_per, eps_var = allocate_budget(2.0, 4, "repeated", eps_variance=0.4)
        assert eps_var == 0.4
        assert math.isclose(eps_per, 0.4, rel_tol=1e-12)

    def test_per_projection_semantics(self):
        assert allocate_budget(0.7, 9, "repeated", "per-projection", 1.0) == (0.7, 1.0)
        with pytest.raises(ConfigError):
            allocate_budget(0.7, 9, "repeated", "per-projection")

    def test_infeasible_total(self):
        with pytest.raises(ConfigError):
            allocate_budget(1.0, 3, "repeated", eps_variance=1.0)
        with pytest.raises(ConfigError):
            allocate_budget(-1.0, 3, "repeated")
        with pytest.raises(ConfigError):
            allocate_budget(1.0, 3, "repeated", semantics="other")


class TestSweepConfig:
    def _kw(self, **over):
        base = dict(eps_grid=(1.0, 2.0), trials=2, k=2, variant="repeated", delta=0.05, split_index=1, seed=1)
        base.update(over)
        return base

    def test_valid(self):
        cfg = SweepConfig(**self._kw())
        assert cfg.eps_grid == (1.0, 2.0)

    def test_validation(self):
        for bad in (
            self._kw(eps_grid=()),
            self._kw(eps_grid=(2.0, 1.0)),
            self._kw(eps_grid=(1.0, 1.0)),
            self._kw(eps_grid=(-1.0,)),
            self._kw(trials=0),
            self._kw(k=0),
            self._kw(variant="other"),
            self._kw(delta=0.5),
            self._kw(split_index=0),
            self._kw(normalization="zscore"),
            self._kw(grid_semantics="per-projection"),  # needs eps_variance
            self._kw(grid_semantics="other"),
            self._kw(eps_variance=-1.0),
        ):
            with pytest.raises(ConfigError):
                SweepConfig(**bad)


class TestRunSweep:
    def _ds(self, n=40, seed=5):
        return synth_dataset("linear", n, noise_sd=0.1, seed=seed)

    def _cfg(self, **over):
        base = dict(eps_grid=(1.0, 2.0), trials=3, k=2, variant="repeated", delta=0.05, split_index=1, seed=11)
        base.update(over)
        return SweepConfig(**base)

    def test_zero_noise_reproduces_reference_exactly(self):
        res = run_sweep(self._ds(), self._cfg(eps_grid=(1.0,), trials=2, zero_noise=True))
        for r in res.records:
            assert r["l1_error"] == 0.0
            assert r["dcorr_private_raw"] == res.nonprivate

    def test_record_layout(self):
        res = run_sweep(self._ds(), self._cfg())
        assert len(res.records) == 6
        assert all(set(r) == set(CSV_COLUMNS) for r in res.records)
        assert [r["trial"] for r in res.records] == [0, 1, 2, 0, 1, 2]
        assert all(r["dcorr_nonprivate"] == res.nonprivate for r in res.records)
        assert res.aborted is None and res.aborted_code == 0

    def test_budget_columns_match_composition(self):
        res = run_sweep(self._ds(), self._cfg(variant="disjoint", eps_grid=(2.0,), trials=1, k=2))
        eps_per, eps_var = allocate_budget(2.0, 2, "disjoint")
        ledger = compose_budget("disjoint", 2, eps_per, eps_var, delta_per_projection=0.05)
        rec = res.records[0]
        assert math.isclose(rec["total_epsilon"], ledger.total_epsilon, rel_tol=1e-12)
        assert math.isclose(rec["total_delta"], ledger.total_delta, rel_tol=1e-12)

    def test_aggregates_summarize_each_group(self):
        res = run_sweep(self._ds(), self._cfg())
        assert len(res.aggregates) == 2
        for agg in res.aggregates:
            group = [r["l1_error"] for r in res.records if r["epsilon"] == agg["epsilon"]]
            assert agg["count"] == 3
            assert agg["mean_l1"] == pytest.approx(float(np.mean(group)), rel=1e-12)
            assert agg["var_l1"] == pytest.approx(float(np.var(group)), rel=1e-12)
            assert agg["min_l1"] == min(group) and agg["max_l1"] == max(group)

    def test_repeat_run_is_identical(self):
        a = run_sweep(self._ds(), self._cfg())
        b = run_sweep(self._ds(), self._cfg())
        assert a.records == b.records
        assert a.aggregates == b.aggregates

    def test_session_failure_flags_partial_result(self, monkeypatch):
        calls = {"n": 0}
        real = dpdcor.bench.run_session

        def flaky(x, y, cfg, transport):
            calls["n"] += 1
            if calls["n"] >= 3:
                raise ProtocolError("synthetic failure")
            return real(x, y, cfg, transport)

        monkeypatch.setattr(dpdcor.bench, "run_session", flaky)
        res = run_sweep(self._ds(), self._cfg(trials=2))
        assert len(res.records) == 2
        assert len(res.aggregates) == 1
        assert "ProtocolError" in res.aborted and "epsilon=2.0 trial=0" in res.aborted
        assert res.aborted_code == 4

    def test_fail_fast_validation(self):
        one_col = Dataset(values=np.ones((8, 1)), columns=("only",))
        with pytest.raises(ConfigError):
            run_sweep(one_col, self._cfg())
        with pytest.raises(ConfigError):
            run_sweep(self._ds(), self._cfg(split_index=2))
        with pytest.raises(PartitionError):
            run_sweep(self._ds(n=10), self._cfg(variant="disjoint", k=3))
        with pytest.raises(ConfigError):
            run_sweep(self._ds(), self._cfg(eps_grid=(0.5,), eps_variance=1.0))

    def test_config_echo_is_complete(self):
        res = run_sweep(self._ds(), self._cfg(eps_grid=(1.0,), trials=1))
        assert res.config["eps_grid"] == [1.0]
        assert res.config["variant"] == "repeated"
        assert res.config["seed"] == 11
        assert res.config["dataset_source"] == "synth:linear"


class TestEmitReport:
    def _result(self):
        ds = synth_dataset("linear", 40, noise_sd=0.1, seed=5)
        cfg = SweepConfig(eps_grid=(1.0, 2.0), trials=2, k=2, variant="repeated", delta=0.05, split_index=1, seed=11)
        return run_sweep(ds, cfg)

    def test_files_written(self, tmp_path):
        csv_path, json_path = emit_report(self._result(), tmp_path / "out")
        assert csv_path.endswith("records.csv") and json_path.endswith("summary.json")
        lines = open(csv_path, encoding="utf-8").read().splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert len(lines) == 1 + 4

    def test_csv_floats_round_trip_exactly(self, tmp_path):
        res = self._result()
        csv_path, _ = emit_report(res, tmp_path / "out")
        frame = pd.read_csv(csv_path, float_precision="round_trip")
        for i, rec in enumerate(res.records):
            for col in CSV_COLUMNS:
                if col == "trial":
                    assert int(frame[col][i]) == rec[col]
                else:
                    assert float(frame[col][i]) == rec[col]

    def test_summary_contents(self, tmp_path):
        res = self._result()
        _, json_path = emit_report(res, tmp_path / "out")
        doc = json.loads(open(json_path, encoding="utf-8").read())
        assert doc["nonprivate_dcorr"] == res.nonprivate
        assert doc["aborted"] is None
        assert doc["records_csv"] == "records.csv"
        assert len(doc["aggregates"]) == 2
        assert doc["config"]["eps_grid"] == [1.0, 2.0]

    def test_byte_deterministic(self, tmp_path):
        res = self._result()
        c1, j1 = emit_report(res, tmp_path / "a")
        c2, j2 = emit_report(res, tmp_path / "b")
        assert open(c1, "rb").read() == open(c2, "rb").read()
        assert open(j1, "rb").read() == open(j2, "rb").read()

    def test_empty_result(self, tmp_path):
        empty = SweepResult(records=(), aggregates=(), nonprivate=0.25, config={"trials": 0})
        csv_path, json_path = emit_report(empty, tmp_path / "out")
        assert open(csv_path, encoding="utf-8").read() == ",".join(CSV_COLUMNS) + "\n"
        doc = json.loads(open(json_path, encoding="utf-8").read())
        assert doc["aggregates"] == [] and doc["nonprivate_dcorr"] == 0.25
