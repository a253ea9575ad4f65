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
"""Flow-gated video classification with joint-stream self-supervision."""

from ._flowgate import (
    FlowgateError,
    auc,
    binary_metrics,
    cosine_lr,
    covariance_term,
    invariance_term,
    model_counts,
    motion_intensity_map,
    plan_segments,
    read_tensor,
    roc_curve,
    run_cli,
    sample_roi_center,
    variance_term,
    vicreg_loss,
    write_tensor,
)

__all__ = [
    "FlowgateError",
    "auc",
    "binary_metrics",
    "cosine_lr",
    "covariance_term",
    "invariance_term",
    "model_counts",
    "motion_intensity_map",
    "plan_segments",
    "read_tensor",
    "roc_curve",
    "run_cli",
    "sample_roi_center",
    "variance_term",
    "vicreg_loss",
    "write_tensor",
]
