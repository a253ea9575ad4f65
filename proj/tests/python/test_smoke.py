# Copyright 2026 The Flowgate Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import itertools
import json
import math

import numpy as np
import pytest

import flowgate


def direct_covariance(z):
    c = np.cov(z, rowvar=False, ddof=1)
    off = c - np.diag(np.diag(c))
    return float((off**2).sum() / z.shape[1])


def test_vicreg_terms_match_numpy():
    rng = np.random.default_rng(0)
    z = rng.normal(size=(8, 16))
    zp = rng.normal(size=(8, 16))
    std = np.sqrt(z.var(axis=0, ddof=1) + 1e-4)
    assert flowgate.variance_term(z) == pytest.approx(np.maximum(0, 1 - std).mean(), rel=1e-9)
    assert flowgate.invariance_term(z, zp) == pytest.approx(((z - zp) ** 2).sum(1).mean(), rel=1e-9)
    assert flowgate.covariance_term(z) == pytest.approx(direct_covariance(z), rel=1e-9)
    loss = flowgate.vicreg_loss(z, zp)
    assert set(loss) == {"invariance", "variance", "covariance", "total"}
    assert loss["total"] == pytest.approx(
        25 * loss["invariance"] + 25 * loss["variance"] + loss["covariance"], rel=1e-12
    )


def test_collapsed_batch_limit():
    z = np.ones((4, 32))
    assert flowgate.vicreg_loss(z, z)["total"] == pytest.approx(50 * (1 - math.sqrt(1e-4)))


def test_batch_too_small_raises():
    with pytest.raises(flowgate.FlowgateError, match="BatchTooSmall"):
        flowgate.variance_term(np.zeros((1, 3)))


def test_auc_matches_pairwise_count():
    rng = np.random.default_rng(1)
    labels = [0, 1] + list(rng.integers(0, 2, size=20))
    scores = list(rng.integers(0, 4, size=22) / 4)
    pairs = [(p, n) for p, n in itertools.product(range(22), repeat=2) if labels[p] == 1 and labels[n] == 0]
    expect = sum(1.0 if scores[p] > scores[n] else 0.5 if scores[p] == scores[n] else 0.0 for p, n in pairs)
    assert flowgate.auc(labels, scores) == expect / len(pairs)


def test_binary_metrics_and_roc():
    m = flowgate.binary_metrics([1, 0, 1, 0], [0.9, 0.1, 0.8, 0.2])
    assert (m["tp"], m["tn"], m["fp"], m["fn"]) == (2, 2, 0, 0)
    assert m["accuracy"] == 1.0 and m["auc"] == 1.0
    roc = flowgate.roc_curve([1, 0, 1, 0], [0.9, 0.1, 0.8, 0.2])
    assert roc[0] == (0.0, 0.0) and roc[-1] == (1.0, 1.0)


def test_cosine_schedule_endpoints():
    assert flowgate.cosine_lr(0) == 0.01
    assert flowgate.cosine_lr(15) == 0.0055
    assert flowgate.cosine_lr(30) == 0.001


def test_model_counts():
    c = flowgate.model_counts()
    assert 245_000 <= c["params"] <= 300_000
    assert c["feature_width"] == 1024 and c["pooled_feature_width"] == 128
    assert abs(c["macs"] / 4.432e9 - 1) <= 0.1


def test_plan_segments_example():
    windows = flowgate.plan_segments(150, 30.0)
    assert len(windows) == 2
    assert all(len(w) == 17 for w in windows)


def test_tensor_round_trip(tmp_path):
    a = np.random.default_rng(2).normal(size=(3, 4, 5)).astype(np.float32)
    path = tmp_path / "a.jt"
    flowgate.write_tensor(str(path), a)
    assert path.stat().st_size == 7 + 3 * 4 + a.size * 4
    np.testing.assert_array_equal(flowgate.read_tensor(str(path)), a)


def test_roi_center_point_mass_and_fallback():
    m = np.zeros((224, 224))
    m[80, 50] = 1.0
    assert flowgate.sample_roi_center(m, seed=3) == (50.0, 80.0, False)
    assert flowgate.sample_roi_center(np.zeros((224, 224))) == (112.0, 112.0, True)


def test_intensity_map_zero_flow():
    data, threshold = flowgate.motion_intensity_map(np.zeros((2, 3, 16, 16), dtype=np.float32))
    assert threshold == 0.0 and not data.any()


def test_cli_count(tmp_path):
    assert flowgate.run_cli(["count", "--out", str(tmp_path), "--log-level", "error"]) == 0
    counts = json.loads((tmp_path / "count.json").read_text())
    assert counts["feature_width"] == 1024
    assert flowgate.run_cli(["nonsense"]) == 1
