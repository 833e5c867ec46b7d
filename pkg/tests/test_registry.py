import numpy as np
import pytest

from conftest import ts
from crowdcast.boosting import GbrtParams, fit_gbrt
from crowdcast.errors import ConfigError
from crowdcast.features import Column, FeatureMatrix
from crowdcast.linreg import fit_ols
from crowdcast.registry import ModelBundle, ModelRegistry


def small_matrix(seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(40, 2))
    y = X @ np.array([2.0, -1.0]) + rng.normal(scale=0.2, size=40)
    return FeatureMatrix(
        columns=[Column("a", "weather"), Column("b", "weather")],
        rows=X,
        target=y,
        row_timestamps=[ts(i) for i in range(40)],
        zone_id="pier",
        resolution=ts(1) - ts(0),
    )


class TestRegistry:
    def test_publish_assigns_incrementing_versions(self, tmp_path):
        reg = ModelRegistry(tmp_path)
        model = fit_ols(small_matrix())
        assert reg.publish("pier", model, {"kind": "mlr"}) == "v0001"
        assert reg.publish("pier", model, {"kind": "mlr"}) == "v0002"
        assert reg.versions("pier") == ["v0001", "v0002"]
        assert reg.active_version("pier") == "v0002"

    def test_activate_older_version(self, tmp_path):
        reg = ModelRegistry(tmp_path)
        model = fit_ols(small_matrix())
        reg.publish("pier", model, {"kind": "mlr"})
        reg.publish("pier", model, {"kind": "mlr"})
        reg.activate("pier", "v0001")
        assert reg.active_version("pier") == "v0001"
        with pytest.raises(ConfigError):
            reg.activate("pier", "v9999")

    def test_load_roundtrip_predicts_identically(self, tmp_path):
        reg = ModelRegistry(tmp_path)
        m = small_matrix()
        ensemble = fit_gbrt(m, GbrtParams(max_depth=3, n_estimators=4))
        reg.publish("pier", ensemble, {"kind": "gbrt"})
        loaded, record = reg.load("pier")
        assert record.kind == "gbrt"
        probe = np.random.default_rng(1).normal(size=(20, 2))
        assert np.array_equal(ensemble.predict(probe), loaded.predict(probe))

    def test_missing_active_model_raises(self, tmp_path):
        reg = ModelRegistry(tmp_path)
        with pytest.raises(ConfigError, match="no active model"):
            reg.load("pier")

    def test_bundle_roundtrip(self, tmp_path):
        reg = ModelRegistry(tmp_path)
        m = small_matrix()
        bundle = ModelBundle([fit_ols(m), fit_ols(small_matrix(seed=2))])
        reg.publish("pier", bundle, {"kind": "mlr_direct"})
        loaded, _ = reg.load("pier")
        assert isinstance(loaded, ModelBundle)
        assert len(loaded.models) == 2
        assert loaded.models[0].column_names == ["a", "b"]

    def test_fingerprint_changes_on_publish_only(self, tmp_path):
        reg = ModelRegistry(tmp_path)
        model = fit_ols(small_matrix())
        reg.publish("pier", model, {"kind": "mlr"})
        before = reg.state_fingerprint()
        reg.load("pier")
        reg.records()
        assert reg.state_fingerprint() == before
        reg.publish("pier", model, {"kind": "mlr"})
        assert reg.state_fingerprint() != before

    def test_records_listing(self, tmp_path):
        reg = ModelRegistry(tmp_path)
        model = fit_ols(small_matrix())
        reg.publish("pier", model, {"kind": "mlr"})
        reg.publish("haven", model, {"kind": "mlr"})
        records = reg.records()
        assert {(r.zone_id, r.version) for r in records} == {
            ("pier", "v0001"),
            ("haven", "v0001"),
        }
