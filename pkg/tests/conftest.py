import numpy as np
import pytest

from edfilter.cardinality import CardinalityModel, DEFAULT_N_MAX, encode_input
from edfilter.dataset import FeatureMatrix, SynthSpec, synth_generate

# Count-table fixture mirroring the 15-feature, 4-class sample data.
TABLE1_ROWS = [
    ([1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0], 0),
    ([0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0], 1),
    ([26, 22, 0, 0, 25, 0, 0, 3, 0, 0, 0, 0, 29, 0, 0], 2),
    ([1, 39, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0], 3),
]


@pytest.fixture
def table1_csv(tmp_path):
    path = tmp_path / "table1.csv"
    header = ",".join(f"f{i + 1}" for i in range(15)) + ",y"
    lines = [header] + [",".join(map(str, row + [y])) for row, y in TABLE1_ROWS]
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def synth7():
    """The 10-feature seed-7 matrix used as the shared regression anchor."""
    return synth_generate(SynthSpec(10, 3, 500, 4, 0.1, 10, 7))


def label_copy_matrix(n_rows=40, n_classes=3, n_extra=2, seed=0):
    """Matrix whose feature 0 copies the label and feature 1 complements it.

    With three classes the copy column stays injective after discretization,
    so its information gain equals the label entropy.  A single count column
    is never separable under the classifier (singleton likelihoods collapse
    to 1), but the copy/complement pair {0, 1} classifies perfectly.  The
    remaining ``n_extra`` features are noise.
    """
    rng = np.random.default_rng(seed)
    labels = np.tile(np.arange(n_classes), n_rows // n_classes + 1)[:n_rows]
    counts = np.zeros((n_rows, 2 + n_extra), dtype=np.int64)
    counts[:, 0] = labels
    counts[:, 1] = (n_classes - 1) - labels
    counts[:, 2:] = rng.integers(0, 3, (n_rows, n_extra))
    names = tuple(f"f{i}" for i in range(2 + n_extra))
    return FeatureMatrix(names, counts, labels, n_classes)


def constant_cardinality_model(c, n_max=DEFAULT_N_MAX, input_dim=None):
    """Model whose softmax output is a fixed one-hot at cardinality c."""
    input_dim = input_dim if input_dim is not None else n_max + 10
    dims = [input_dim, 4, 4, n_max]
    weights = []
    for fan_in, fan_out in zip(dims, dims[1:]):
        weights.append((np.zeros((fan_in, fan_out)), np.zeros(fan_out)))
    b3 = weights[-1][1]
    b3[c - 1] = 10.0
    return CardinalityModel(weights, input_dim, n_max)
